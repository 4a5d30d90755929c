//! Dense concept-by-location score tables and the CSV score-cache format.
//!
//! The cache format is the ingestion point for precomputed scores from real
//! models, so parsing is strict: hard errors with line numbers, no imputed
//! cells, scores constrained to [0, 1].

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const CACHE_HEADER: &str = "location_id,concept_id,score";

/// A complete matrix of scores in [0, 1], rows keyed by concept and columns
/// by location. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    concepts: Vec<String>,
    locations: Vec<String>,
    /// Concept-major: `values[c * locations.len() + l]`.
    values: Vec<f64>,
    concept_index: HashMap<String, usize>,
    location_index: HashMap<String, usize>,
}

impl ScoreTable {
    pub fn new(concepts: Vec<String>, locations: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != concepts.len() * locations.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} concepts x {} locations",
                values.len(),
                concepts.len(),
                locations.len()
            )));
        }
        for value in &values {
            if !(value.is_finite() && (0.0..=1.0).contains(value)) {
                return Err(Error::Invalid {
                    field: "values",
                    message: format!("score {value} outside [0, 1]"),
                });
            }
        }
        let concept_index = build_index(&concepts, "concept")?;
        let location_index = build_index(&locations, "location")?;
        Ok(ScoreTable {
            concepts,
            locations,
            values,
            concept_index,
            location_index,
        })
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn num_cells(&self) -> usize {
        self.values.len()
    }

    pub fn value_at(&self, concept: usize, location: usize) -> f64 {
        self.values[concept * self.locations.len() + location]
    }

    pub fn row(&self, concept: usize) -> &[f64] {
        let n = self.locations.len();
        &self.values[concept * n..(concept + 1) * n]
    }

    pub fn concept_position(&self, concept: &str) -> Result<usize> {
        self.concept_index
            .get(concept)
            .copied()
            .ok_or_else(|| Error::UnknownConcept(concept.to_string()))
    }

    pub fn location_position(&self, location: &str) -> Result<usize> {
        self.location_index
            .get(location)
            .copied()
            .ok_or_else(|| Error::UnknownLocation(location.to_string()))
    }

    pub fn concept_row(&self, concept: &str) -> Result<&[f64]> {
        Ok(self.row(self.concept_position(concept)?))
    }

    pub fn get(&self, concept: &str, location: &str) -> Result<f64> {
        let c = self.concept_position(concept)?;
        let l = self.location_position(location)?;
        Ok(self.value_at(c, l))
    }

    /// Sub-table with the requested row and column orders. Every requested
    /// id must exist; a missing concept/location cell is a hard error.
    pub fn select(&self, concepts: &[String], locations: &[String]) -> Result<ScoreTable> {
        let cs: Vec<usize> = concepts
            .iter()
            .map(|c| self.concept_position(c))
            .collect::<Result<_>>()?;
        let ls: Vec<usize> = locations
            .iter()
            .map(|l| self.location_position(l))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(cs.len() * ls.len());
        for &c in &cs {
            for &l in &ls {
                values.push(self.value_at(c, l));
            }
        }
        ScoreTable::new(concepts.to_vec(), locations.to_vec(), values)
    }

    /// Equality within `tol` per cell, requiring identical id orders.
    pub fn approx_eq(&self, other: &ScoreTable, tol: f64) -> bool {
        self.concepts == other.concepts
            && self.locations == other.locations
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Writes the CSV cache representation (UTF-8, LF, header plus one row
    /// per cell, concept-major).
    pub fn to_cache_csv(&self) -> String {
        let mut out = String::with_capacity(16 + self.values.len() * 24);
        out.push_str(CACHE_HEADER);
        out.push('\n');
        for (c, concept) in self.concepts.iter().enumerate() {
            for (l, location) in self.locations.iter().enumerate() {
                let _ = writeln!(out, "{location},{concept},{}", self.value_at(c, l));
            }
        }
        out
    }

    /// Parses a CSV cache. Row and column orders follow first appearance in
    /// the file; the grid must be complete and every score in [0, 1].
    pub fn from_cache_csv(text: &str) -> Result<ScoreTable> {
        if text.contains('\r') {
            let line = text.split('\r').next().map_or(1, |p| count_lines(p));
            return Err(parse_err(line, "CR in line ending; cache files are LF-only"));
        }
        let mut lines = text.split('\n').enumerate();
        match lines.next() {
            Some((_, header)) if header == CACHE_HEADER => {}
            Some((_, header)) => {
                return Err(parse_err(
                    1,
                    format!("expected header `{CACHE_HEADER}`, found `{header}`"),
                ))
            }
            None => return Err(parse_err(1, "empty file")),
        }

        let mut concepts: Vec<String> = Vec::new();
        let mut locations: Vec<String> = Vec::new();
        let mut concept_index: HashMap<String, usize> = HashMap::new();
        let mut location_index: HashMap<String, usize> = HashMap::new();
        let mut cells: HashMap<(usize, usize), (f64, usize)> = HashMap::new();

        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.is_empty() {
                // Only a trailing newline may produce an empty fragment.
                if idx + 1 == count_lines(text) {
                    continue;
                }
                return Err(parse_err(line_no, "blank line"));
            }
            let mut fields = line.split(',');
            let (location, concept, score) = match (
                fields.next(),
                fields.next(),
                fields.next(),
                fields.next(),
            ) {
                (Some(l), Some(c), Some(s), None) => (l, c, s),
                _ => {
                    return Err(parse_err(
                        line_no,
                        "expected exactly 3 fields `location_id,concept_id,score`",
                    ))
                }
            };
            if location.is_empty() || concept.is_empty() {
                return Err(parse_err(line_no, "empty id"));
            }
            let value: f64 = score
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid score literal `{score}`")))?;
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(parse_err(
                    line_no,
                    format!("score {score} violates the [0, 1] range"),
                ));
            }
            let c = *concept_index.entry(concept.to_string()).or_insert_with(|| {
                concepts.push(concept.to_string());
                concepts.len() - 1
            });
            let l = *location_index
                .entry(location.to_string())
                .or_insert_with(|| {
                    locations.push(location.to_string());
                    locations.len() - 1
                });
            if let Some((_, first)) = cells.insert((c, l), (value, line_no)) {
                return Err(parse_err(
                    line_no,
                    format!("duplicate cell ({location}, {concept}), first seen at line {first}"),
                ));
            }
        }

        let mut values = Vec::with_capacity(concepts.len() * locations.len());
        for c in 0..concepts.len() {
            for l in 0..locations.len() {
                match cells.get(&(c, l)) {
                    Some((value, _)) => values.push(*value),
                    None => {
                        return Err(Error::MissingCell {
                            concept: concepts[c].clone(),
                            location: locations[l].clone(),
                        })
                    }
                }
            }
        }
        ScoreTable::new(concepts, locations, values)
    }

    pub fn from_cache_bytes(bytes: &[u8]) -> Result<ScoreTable> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| parse_err(1, format!("invalid UTF-8: {e}")))?;
        Self::from_cache_csv(text)
    }
}

fn count_lines(text: &str) -> usize {
    text.split('\n').count()
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn build_index(ids: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if id.is_empty() || id.contains([',', '\n', '\r']) {
            return Err(Error::Invalid {
                field: "ids",
                message: format!("{what} id `{id}` is empty or contains a separator"),
            });
        }
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::Invalid {
                field: "ids",
                message: format!("duplicate {what} id `{id}`"),
            });
        }
    }
    Ok(index)
}
