//! Budgeted selection of locations for high-resolution acquisition.
//!
//! The primary criterion is model disagreement: the summed absolute score
//! difference over seen concepts, either against true HR scores or against
//! the KD model as a stand-in. Baselines: random, summed binary entropy of
//! the LR scores, and weight-proportional sampling without replacement.
//!
//! Selection is deterministic: ties break by ascending location id and the
//! stochastic samplers draw from named seeded streams.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::table::ScoreTable;

/// Hard acquisition budget: at most `max_locations` locations receive HR
/// imagery, each covering `area_per_location` square kilometers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    pub max_locations: usize,
    pub area_per_location: f64,
}

pub const DEFAULT_AREA_PER_LOCATION_KM2: f64 = 5.0;

impl Budget {
    pub fn new(max_locations: usize) -> Budget {
        Budget {
            max_locations,
            area_per_location: DEFAULT_AREA_PER_LOCATION_KM2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.area_per_location > 0.0 && self.area_per_location.is_finite()) {
            return Err(Error::Invalid {
                field: "area_per_location",
                message: "must be a positive real".into(),
            });
        }
        Ok(())
    }
}

/// Outcome of a budgeted selection; `selected` and `criterion_values` are
/// aligned, in selection order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionResult {
    pub selected: Vec<String>,
    pub criterion_values: Vec<f64>,
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl SelectionResult {
    pub fn empty(strategy: &str) -> SelectionResult {
        SelectionResult {
            selected: Vec::new(),
            criterion_values: Vec::new(),
            strategy: strategy.to_string(),
            warning: None,
        }
    }

    /// CSV rendering: `rank,location_id,criterion_value,strategy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,location_id,criterion_value,strategy\n");
        for (rank, (id, value)) in self.selected.iter().zip(&self.criterion_values).enumerate() {
            let _ = writeln!(out, "{},{id},{value},{}", rank + 1, self.strategy);
        }
        out
    }
}

fn check_aligned(a: &ScoreTable, b: &ScoreTable, seen: &[String]) -> Result<()> {
    if a.locations() != b.locations() {
        return Err(Error::Misaligned(
            "score tables cover different location lists".into(),
        ));
    }
    for concept in seen {
        a.concept_position(concept)?;
        b.concept_position(concept)?;
    }
    Ok(())
}

/// True disagreement: `delta(l) = sum_{c in seen} |hr_c(l) - lr_c(l)|`,
/// one value per location in table order.
pub fn disagreement_true(hr: &ScoreTable, lr: &ScoreTable, seen: &[String]) -> Result<Vec<f64>> {
    check_aligned(hr, lr, seen)?;
    let n = hr.locations().len();
    let mut delta = vec![0.0f64; n];
    for concept in seen {
        let hr_row = hr.concept_row(concept)?;
        let lr_row = lr.concept_row(concept)?;
        for (d, (h, l)) in delta.iter_mut().zip(hr_row.iter().zip(lr_row)) {
            *d += (h - l).abs();
        }
    }
    Ok(delta)
}

/// Proxy disagreement: identical contract with KD predictions standing in
/// for the HR scores, so it needs no HR imagery to evaluate.
pub fn disagreement_proxy(kd: &ScoreTable, lr: &ScoreTable, seen: &[String]) -> Result<Vec<f64>> {
    disagreement_true(kd, lr, seen)
}

/// Binary entropy in bits; 0 at p = 0 and p = 1.
pub fn binary_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    h
}

/// Selection strategy plus the data it ranks by. Criterion and weight slices
/// are aligned with the candidate list.
pub enum SelectionStrategy<'a> {
    /// Top budget by criterion value, ties by ascending location id.
    Disagreement { criterion: &'a [f64] },
    /// Seeded uniform sample without replacement.
    Random,
    /// Top budget by summed binary entropy of the LR scores.
    Uncertainty { lr: &'a ScoreTable },
    /// Seeded sampling without replacement, probability proportional to
    /// weight, renormalizing after each draw.
    Weighted { weights: &'a [f64] },
}

impl SelectionStrategy<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionStrategy::Disagreement { .. } => "disagreement",
            SelectionStrategy::Random => "random",
            SelectionStrategy::Uncertainty { .. } => "uncertainty",
            SelectionStrategy::Weighted { .. } => "weighted",
        }
    }
}

/// Selects `min(budget, candidates)` locations under the given strategy.
pub fn select_locations(
    strategy: SelectionStrategy,
    candidates: &[String],
    budget: &Budget,
    seed: u64,
) -> Result<SelectionResult> {
    budget.validate()?;
    let take = budget.max_locations.min(candidates.len());
    match strategy {
        SelectionStrategy::Disagreement { criterion } => {
            select_top(criterion, candidates, take, "disagreement")
        }
        SelectionStrategy::Uncertainty { lr } => {
            let criterion: Vec<f64> = candidates
                .iter()
                .map(|id| {
                    let l = lr.location_position(id)?;
                    Ok((0..lr.concepts().len())
                        .map(|c| binary_entropy(lr.value_at(c, l)))
                        .sum())
                })
                .collect::<Result<_>>()?;
            select_top(&criterion, candidates, take, "uncertainty")
        }
        SelectionStrategy::Random => Ok(select_random(candidates, take, seed)),
        SelectionStrategy::Weighted { weights } => select_weighted(weights, candidates, take, seed),
    }
}

fn select_top(
    criterion: &[f64],
    candidates: &[String],
    take: usize,
    strategy: &str,
) -> Result<SelectionResult> {
    if criterion.len() != candidates.len() {
        return Err(Error::Misaligned(format!(
            "{} criterion values for {} candidates",
            criterion.len(),
            candidates.len()
        )));
    }
    if criterion.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid {
            field: "criterion",
            message: "values must be finite".into(),
        });
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        criterion[b]
            .partial_cmp(&criterion[a])
            .expect("finite values compare")
            .then_with(|| candidates[a].cmp(&candidates[b]))
    });
    order.truncate(take);
    Ok(SelectionResult {
        selected: order.iter().map(|&i| candidates[i].clone()).collect(),
        criterion_values: order.iter().map(|&i| criterion[i]).collect(),
        strategy: strategy.to_string(),
        warning: None,
    })
}

fn select_random(candidates: &[String], take: usize, seed: u64) -> SelectionResult {
    let mut ids: Vec<String> = candidates.to_vec();
    ids.sort();
    {
        use rand::seq::SliceRandom;
        let mut rng = stream_rng(seed, "sample-random");
        ids.shuffle(&mut rng);
    }
    ids.truncate(take);
    SelectionResult {
        criterion_values: vec![0.0; ids.len()],
        selected: ids,
        strategy: "random".to_string(),
        warning: None,
    }
}

fn select_weighted(
    weights: &[f64],
    candidates: &[String],
    take: usize,
    seed: u64,
) -> Result<SelectionResult> {
    if weights.len() != candidates.len() {
        return Err(Error::Misaligned(format!(
            "{} weights for {} candidates",
            weights.len(),
            candidates.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Invalid {
            field: "weights",
            message: "must be nonnegative reals".into(),
        });
    }
    if weights.iter().all(|&w| w == 0.0) {
        let mut result = select_random(candidates, take, seed);
        result.strategy = "weighted".to_string();
        result.warning = Some("all weights zero; fell back to random sampling".to_string());
        return Ok(result);
    }

    // Canonical id order so the draw sequence is independent of input order.
    let mut remaining: Vec<(String, f64)> = candidates
        .iter()
        .cloned()
        .zip(weights.iter().copied())
        .collect();
    remaining.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rng = stream_rng(seed, "sample-weighted");
    let mut selected = Vec::with_capacity(take);
    let mut values = Vec::with_capacity(take);
    let mut warning = None;
    for _ in 0..take {
        let total: f64 = remaining.iter().map(|(_, w)| w).sum();
        let pick = if total > 0.0 {
            let mut u: f64 = rng.random::<f64>() * total;
            let mut chosen = remaining.len() - 1;
            for (i, (_, w)) in remaining.iter().enumerate() {
                if u < *w {
                    chosen = i;
                    break;
                }
                u -= w;
            }
            chosen
        } else {
            warning.get_or_insert_with(|| {
                "remaining weights exhausted; finished with uniform draws".to_string()
            });
            rng.random_range(0..remaining.len())
        };
        let (id, weight) = remaining.remove(pick);
        selected.push(id);
        values.push(weight);
    }
    Ok(SelectionResult {
        selected,
        criterion_values: values,
        strategy: "weighted".to_string(),
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(concepts: &[&str], locations: &[&str], values: Vec<f64>) -> ScoreTable {
        ScoreTable::new(
            concepts.iter().map(|s| s.to_string()).collect(),
            locations.iter().map(|s| s.to_string()).collect(),
            values,
        )
        .unwrap()
    }

    fn ids(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn disagreement_sums_absolute_differences() {
        let hr = table(&["c1", "c2"], &["l"], vec![0.9, 0.1]);
        let lr = table(&["c1", "c2"], &["l"], vec![0.2, 0.1]);
        let delta = disagreement_true(&hr, &lr, &ids(&["c1", "c2"])).unwrap();
        assert!((delta[0] - 0.7).abs() < 1e-15);

        let zero = disagreement_true(&hr, &hr, &ids(&["c1", "c2"])).unwrap();
        assert_eq!(zero, vec![0.0]);
    }

    #[test]
    fn restricting_seen_never_increases_delta() {
        let hr = table(&["c1", "c2"], &["l1", "l2"], vec![0.9, 0.4, 0.1, 0.8]);
        let lr = table(&["c1", "c2"], &["l1", "l2"], vec![0.2, 0.4, 0.1, 0.3]);
        let full = disagreement_true(&hr, &lr, &ids(&["c1", "c2"])).unwrap();
        let sub = disagreement_true(&hr, &lr, &ids(&["c2"])).unwrap();
        for (f, s) in full.iter().zip(&sub) {
            assert!(s <= f);
        }
    }

    #[test]
    fn misaligned_tables_error() {
        let hr = table(&["c1"], &["l1", "l2"], vec![0.9, 0.4]);
        let lr = table(&["c1"], &["l2", "l1"], vec![0.4, 0.9]);
        assert!(matches!(
            disagreement_true(&hr, &lr, &ids(&["c1"])),
            Err(Error::Misaligned(_))
        ));
    }

    #[test]
    fn top_selection_orders_by_value_then_id() {
        let candidates = ids(&["a", "b", "c"]);
        let criterion = [0.5, 0.9, 0.7];
        let result = select_locations(
            SelectionStrategy::Disagreement {
                criterion: &criterion,
            },
            &candidates,
            &Budget::new(2),
            0,
        )
        .unwrap();
        assert_eq!(result.selected, ids(&["b", "c"]));

        let tied = [0.5, 0.5];
        let result = select_locations(
            SelectionStrategy::Disagreement { criterion: &tied },
            &ids(&["b", "a"]),
            &Budget::new(1),
            0,
        )
        .unwrap();
        assert_eq!(result.selected, ids(&["a"]));
    }

    #[test]
    fn budget_zero_selects_nothing() {
        let candidates = ids(&["a", "b"]);
        for strategy in [
            SelectionStrategy::Disagreement {
                criterion: &[0.1, 0.2],
            },
            SelectionStrategy::Random,
            SelectionStrategy::Weighted {
                weights: &[1.0, 2.0],
            },
        ] {
            let result = select_locations(strategy, &candidates, &Budget::new(0), 9).unwrap();
            assert!(result.selected.is_empty());
        }
    }

    #[test]
    fn budget_caps_at_candidate_count() {
        let candidates = ids(&["a", "b"]);
        let result = select_locations(
            SelectionStrategy::Random,
            &candidates,
            &Budget::new(10),
            9,
        )
        .unwrap();
        assert_eq!(result.selected.len(), 2);
    }

    #[test]
    fn random_and_weighted_are_seed_deterministic() {
        let candidates = ids(&["a", "b", "c", "d", "e"]);
        let weights = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r1 = select_locations(SelectionStrategy::Random, &candidates, &Budget::new(3), 42)
            .unwrap();
        let r2 = select_locations(SelectionStrategy::Random, &candidates, &Budget::new(3), 42)
            .unwrap();
        assert_eq!(r1, r2);
        let w1 = select_locations(
            SelectionStrategy::Weighted { weights: &weights },
            &candidates,
            &Budget::new(3),
            42,
        )
        .unwrap();
        let w2 = select_locations(
            SelectionStrategy::Weighted { weights: &weights },
            &candidates,
            &Budget::new(3),
            42,
        )
        .unwrap();
        assert_eq!(w1, w2);
        assert_eq!(w1.selected.len(), 3);
    }

    #[test]
    fn weighted_with_zero_weights_falls_back_to_random() {
        let candidates = ids(&["a", "b", "c"]);
        let weights = [0.0, 0.0, 0.0];
        let result = select_locations(
            SelectionStrategy::Weighted { weights: &weights },
            &candidates,
            &Budget::new(2),
            11,
        )
        .unwrap();
        assert_eq!(result.selected.len(), 2);
        assert!(result.warning.is_some());
        let reference = select_locations(SelectionStrategy::Random, &candidates, &Budget::new(2), 11)
            .unwrap();
        assert_eq!(result.selected, reference.selected);
    }

    #[test]
    fn uncertainty_prefers_mid_range_scores() {
        let lr = table(&["c1"], &["sure", "unsure"], vec![0.99, 0.5]);
        let result = select_locations(
            SelectionStrategy::Uncertainty { lr: &lr },
            &ids(&["sure", "unsure"]),
            &Budget::new(1),
            0,
        )
        .unwrap();
        assert_eq!(result.selected, ids(&["unsure"]));
        assert!((result.criterion_values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selection_csv_has_rank_rows() {
        let result = SelectionResult {
            selected: ids(&["b", "a"]),
            criterion_values: vec![0.9, 0.7],
            strategy: "disagreement".into(),
            warning: None,
        };
        let csv = result.to_csv();
        assert!(csv.starts_with("rank,location_id,criterion_value,strategy\n"));
        assert!(csv.contains("1,b,0.9,disagreement\n"));
        assert!(csv.contains("2,a,0.7,disagreement\n"));
    }
}
