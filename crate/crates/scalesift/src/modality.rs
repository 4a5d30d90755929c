//! Per-concept routing between low- and high-resolution scoring.
//!
//! Seen concepts are decided by a validation oracle that compares AP@k under
//! both score tables. Unseen concepts can be routed by an LLM prompted with
//! the seen decisions as in-context examples, by a mean-area heuristic, or by
//! the constant baselines. The LLM transport is a single-turn JSON POST; a
//! scripted client answers from a CSV file so everything is testable offline.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ap_at_k;
use crate::table::ScoreTable;

/// Default environment variable holding the LLM bearer token.
pub const LLM_TOKEN_ENV: &str = "SCALESIFT_LLM_TOKEN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModalityChoice {
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "HR")]
    Hr,
}

impl ModalityChoice {
    pub fn token(self) -> &'static str {
        match self {
            ModalityChoice::Lr => "lr",
            ModalityChoice::Hr => "hr",
        }
    }
}

impl std::fmt::Display for ModalityChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModalityChoice::Lr => "LR",
            ModalityChoice::Hr => "HR",
        })
    }
}

/// A routing decision for one concept, with the strategy that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalityDecision {
    pub concept: String,
    pub choice: ModalityChoice,
    pub source: String,
    /// Set when the oracle had no positives to compare on; such concepts
    /// default to the cheaper modality.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub undecidable: bool,
}

/// Renders decisions as CSV: `concept_id,choice,source`.
pub fn decisions_to_csv(decisions: &BTreeMap<String, ModalityDecision>) -> String {
    let mut out = String::from("concept_id,choice,source\n");
    for decision in decisions.values() {
        let _ = writeln!(out, "{},{},{}", decision.concept, decision.choice, decision.source);
    }
    out
}

/// Compares AP@k under HR scores and LR scores on validation data; HR wins
/// only on a strictly better AP, so ties go to the cheaper modality. A
/// concept with zero validation positives is flagged undecidable and routed
/// to LR.
///
/// Both tables must cover the same validation locations; `labels` rows align
/// with `concepts`.
pub fn validation_modality_oracle(
    hr: &ScoreTable,
    lr: &ScoreTable,
    labels: &[Vec<bool>],
    concepts: &[String],
    k: usize,
) -> Result<BTreeMap<String, ModalityDecision>> {
    if hr.locations() != lr.locations() {
        return Err(Error::Misaligned(
            "oracle tables cover different location lists".into(),
        ));
    }
    if labels.len() != concepts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} label rows for {} concepts",
            labels.len(),
            concepts.len()
        )));
    }
    let ids = hr.locations();
    let mut decisions = BTreeMap::new();
    for (i, concept) in concepts.iter().enumerate() {
        let hr_row = hr.concept_row(concept)?;
        let lr_row = lr.concept_row(concept)?;
        let decision = match (
            ap_at_k(ids, hr_row, &labels[i], k),
            ap_at_k(ids, lr_row, &labels[i], k),
        ) {
            (Ok(ap_hr), Ok(ap_lr)) => ModalityDecision {
                concept: concept.clone(),
                choice: if ap_hr > ap_lr {
                    ModalityChoice::Hr
                } else {
                    ModalityChoice::Lr
                },
                source: "validation-oracle".into(),
                undecidable: false,
            },
            (Err(Error::UndefinedMetric(_)), _) | (_, Err(Error::UndefinedMetric(_))) => {
                ModalityDecision {
                    concept: concept.clone(),
                    choice: ModalityChoice::Lr,
                    source: "validation-oracle".into(),
                    undecidable: true,
                }
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        decisions.insert(concept.clone(), decision);
    }
    Ok(decisions)
}

/// The in-context instruction given to the LLM, verbatim.
pub const PROMPT_INSTRUCTION: &str = "Please act as a binary classifier for the following \
concepts to determine if they are better suited for 'LR' (low resolution) or 'HR' (high \
resolution) imagery. I will first give you some examples with the correct response. Then given \
a concept you are to return 'lr' or 'hr'";

/// Builds the single-query prompt: the instruction, one `concept:resolution`
/// line per seen concept, then the query concept. Byte-stable for identical
/// inputs.
pub fn build_incontext_prompt(
    seen_decisions: &[(String, ModalityChoice)],
    query: &str,
) -> Result<String> {
    if seen_decisions.is_empty() {
        return Err(Error::Config(
            "in-context prompt needs at least one seen decision".into(),
        ));
    }
    let mut prompt = String::with_capacity(PROMPT_INSTRUCTION.len() + 16 * seen_decisions.len());
    prompt.push_str(PROMPT_INSTRUCTION);
    prompt.push_str("\n\n");
    for (concept, choice) in seen_decisions {
        let _ = writeln!(prompt, "{concept}:{}", choice.token());
    }
    prompt.push('\n');
    prompt.push_str(query);
    prompt.push('\n');
    Ok(prompt)
}

/// Normalizes a raw LLM reply: trim, lowercase, then exact `lr`/`hr` match.
/// Anything else is a protocol error carrying the raw reply.
pub fn parse_llm_answer(raw: &str) -> Result<ModalityChoice> {
    match raw.trim().to_lowercase().as_str() {
        "lr" => Ok(ModalityChoice::Lr),
        "hr" => Ok(ModalityChoice::Hr),
        _ => Err(Error::Protocol {
            raw: raw.to_string(),
        }),
    }
}

/// Extracts the `text` field from a completion response body.
pub fn parse_llm_response(bytes: &[u8]) -> Result<String> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    value
        .get("text")
        .and_then(|t| t.as_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Protocol {
            raw: value.to_string(),
        })
}

/// Single-turn text completion. Implementations must be safe to share across
/// the concurrent per-concept calls.
pub trait TextCompletion: Sync {
    fn complete(&self, prompt: &str) -> Result<String>;
}

/// Offline LLM stand-in: answers from a `concept,answer` CSV by looking up
/// the query concept, which is the final line of the prompt. A pure function
/// of (prompt, script file).
#[derive(Debug, Clone)]
pub struct ScriptedClient {
    answers: BTreeMap<String, String>,
}

impl ScriptedClient {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Result<ScriptedClient> {
        let mut answers = BTreeMap::new();
        for (concept, answer) in pairs {
            parse_llm_answer(&answer)?;
            if answers.insert(concept.clone(), answer).is_some() {
                return Err(Error::Config(format!(
                    "duplicate scripted answer for `{concept}`"
                )));
            }
        }
        Ok(ScriptedClient { answers })
    }

    /// Parses the scripted CSV: header `concept,answer`, one row per concept,
    /// answers restricted to lr/hr after normalization.
    pub fn from_csv(text: &str) -> Result<ScriptedClient> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "concept,answer")) => {}
            Some((_, other)) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `concept,answer`, found `{other}`"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
        let mut answers = BTreeMap::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let (concept, answer) = match (fields.next(), fields.next(), fields.next()) {
                (Some(c), Some(a), None) => (c, a),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "expected exactly 2 fields `concept,answer`".into(),
                    })
                }
            };
            if concept.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty concept id".into(),
                });
            }
            parse_llm_answer(answer).map_err(|_| Error::Parse {
                line: line_no,
                message: format!("answer `{answer}` is not lr/hr"),
            })?;
            if answers.insert(concept.to_string(), answer.to_string()).is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate concept `{concept}`"),
                });
            }
        }
        Ok(ScriptedClient { answers })
    }

    pub fn from_csv_bytes(bytes: &[u8]) -> Result<ScriptedClient> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
            line: 1,
            message: format!("invalid UTF-8: {e}"),
        })?;
        Self::from_csv(text)
    }

    fn query_of(prompt: &str) -> Result<&str> {
        prompt
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::Config("prompt has no query line".into()))
    }
}

impl TextCompletion for ScriptedClient {
    fn complete(&self, prompt: &str) -> Result<String> {
        let query = Self::query_of(prompt)?;
        self.answers
            .get(query)
            .cloned()
            .ok_or_else(|| Error::Protocol {
                raw: format!("no scripted answer for `{query}`"),
            })
    }
}

/// HTTP completion client. Request body `{"prompt": ..., "max_tokens": 4}`;
/// the response must carry a `text` field. Transport failures are retried
/// with exponential backoff starting at one second.
pub struct HttpClient {
    pub endpoint: String,
    pub token_env: String,
    pub timeout: Duration,
    pub max_retries: u32,
    /// First backoff delay; doubles per retry. Shortened in tests.
    pub backoff: Duration,
}

impl HttpClient {
    pub fn new(endpoint: impl Into<String>) -> HttpClient {
        HttpClient {
            endpoint: endpoint.into(),
            token_env: LLM_TOKEN_ENV.to_string(),
            timeout: Duration::from_secs(30),
            max_retries: 3,
            backoff: Duration::from_secs(1),
        }
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<String> {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build();
        let agent: ureq::Agent = config.into();
        let mut request = agent.post(&self.endpoint);
        if let Ok(token) = std::env::var(&self.token_env) {
            if !token.is_empty() {
                request = request.header("authorization", &format!("Bearer {token}"));
            }
        }
        let mut response = request
            .send_json(body)
            .map_err(|e| Error::Transport {
                retries: 0,
                message: e.to_string(),
            })?;
        let bytes = response
            .body_mut()
            .read_to_vec()
            .map_err(|e| Error::Transport {
                retries: 0,
                message: e.to_string(),
            })?;
        parse_llm_response(&bytes)
    }
}

impl TextCompletion for HttpClient {
    fn complete(&self, prompt: &str) -> Result<String> {
        let body = serde_json::json!({ "prompt": prompt, "max_tokens": 4 });
        let mut delay = self.backoff;
        let mut last = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay *= 2;
            }
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Error::Transport { message, .. }) => last = message,
                Err(other) => return Err(other),
            }
        }
        Err(Error::Transport {
            retries: self.max_retries,
            message: last,
        })
    }
}

/// Routes one concept through the LLM with the seen decisions in context.
pub fn decide_llm(
    client: &dyn TextCompletion,
    seen_decisions: &[(String, ModalityChoice)],
    concept: &str,
) -> Result<ModalityDecision> {
    let prompt = build_incontext_prompt(seen_decisions, concept)?;
    let raw = client.complete(&prompt)?;
    Ok(ModalityDecision {
        concept: concept.to_string(),
        choice: parse_llm_answer(&raw)?,
        source: "llm".into(),
        undecidable: false,
    })
}

/// LLM routing for several concepts with at most `max_in_flight` concurrent
/// requests.
pub fn decide_llm_batch(
    client: &dyn TextCompletion,
    seen_decisions: &[(String, ModalityChoice)],
    concepts: &[String],
    max_in_flight: usize,
) -> Result<BTreeMap<String, ModalityDecision>> {
    let limit = max_in_flight.max(1);
    let mut decisions = BTreeMap::new();
    for chunk in concepts.chunks(limit) {
        let results: Vec<Result<ModalityDecision>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|concept| scope.spawn(move || decide_llm(client, seen_decisions, concept)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("llm worker panicked"))
                .collect()
        });
        for result in results {
            let decision = result?;
            decisions.insert(decision.concept.clone(), decision);
        }
    }
    Ok(decisions)
}

/// Routes by mean concept area: HR when the concept is smaller than the
/// threshold.
pub fn decide_area_heuristic(concept: &str, mean_area_m2: f64, threshold_m2: f64) -> ModalityDecision {
    ModalityDecision {
        concept: concept.to_string(),
        choice: if mean_area_m2 < threshold_m2 {
            ModalityChoice::Hr
        } else {
            ModalityChoice::Lr
        },
        source: "area-heuristic".into(),
        undecidable: false,
    }
}

/// Constant baselines: always-hr / always-lr.
pub fn decide_constant(concept: &str, choice: ModalityChoice) -> ModalityDecision {
    ModalityDecision {
        concept: concept.to_string(),
        choice,
        source: match choice {
            ModalityChoice::Hr => "always-hr".into(),
            ModalityChoice::Lr => "always-lr".into(),
        },
        undecidable: false,
    }
}

/// Fraction of concepts whose predicted choice matches the ground truth.
/// The two maps must cover the same concepts.
pub fn evaluate_selector(
    predictions: &BTreeMap<String, ModalityDecision>,
    truth: &BTreeMap<String, ModalityDecision>,
) -> Result<f64> {
    if predictions.len() != truth.len()
        || !predictions.keys().all(|k| truth.contains_key(k))
    {
        return Err(Error::Misaligned(
            "prediction and truth concept sets differ".into(),
        ));
    }
    if predictions.is_empty() {
        return Err(Error::UndefinedMetric(
            "selector accuracy over zero concepts".into(),
        ));
    }
    let matches = predictions
        .iter()
        .filter(|(concept, decision)| truth[*concept].choice == decision.choice)
        .count();
    Ok(matches as f64 / predictions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decision(concept: &str, choice: ModalityChoice) -> ModalityDecision {
        ModalityDecision {
            concept: concept.into(),
            choice,
            source: "test".into(),
            undecidable: false,
        }
    }

    fn decisions(pairs: &[(&str, ModalityChoice)]) -> BTreeMap<String, ModalityDecision> {
        pairs
            .iter()
            .map(|(c, choice)| (c.to_string(), decision(c, *choice)))
            .collect()
    }

    #[test]
    fn prompt_carries_examples_and_query() {
        let seen = vec![
            ("forest".to_string(), ModalityChoice::Lr),
            ("tennis".to_string(), ModalityChoice::Hr),
        ];
        let prompt = build_incontext_prompt(&seen, "dam").unwrap();
        assert!(prompt.starts_with("Please act as a binary classifier"));
        assert!(prompt.contains("forest:lr\n"));
        assert!(prompt.contains("tennis:hr\n"));
        assert!(prompt.ends_with("\ndam\n"));
        assert_eq!(prompt, build_incontext_prompt(&seen, "dam").unwrap());
    }

    #[test]
    fn prompt_requires_examples() {
        assert!(build_incontext_prompt(&[], "dam").is_err());
    }

    #[test]
    fn answer_normalization_is_strict() {
        assert_eq!(parse_llm_answer("  LR \n").unwrap(), ModalityChoice::Lr);
        assert_eq!(parse_llm_answer("hr").unwrap(), ModalityChoice::Hr);
        assert!(matches!(
            parse_llm_answer("high resolution"),
            Err(Error::Protocol { .. })
        ));
    }

    #[test]
    fn response_parsing_requires_text_field() {
        assert_eq!(parse_llm_response(br#"{"text":"lr"}"#).unwrap(), "lr");
        assert!(parse_llm_response(br#"{"output":"lr"}"#).is_err());
        assert!(parse_llm_response(b"not json").is_err());
    }

    #[test]
    fn scripted_client_answers_by_query_concept() {
        let client = ScriptedClient::from_csv("concept,answer\ndam,hr\nlake,lr\n").unwrap();
        let seen = vec![("forest".to_string(), ModalityChoice::Lr)];
        let decision = decide_llm(&client, &seen, "dam").unwrap();
        assert_eq!(decision.choice, ModalityChoice::Hr);
        assert_eq!(decision.source, "llm");
        assert!(matches!(
            decide_llm(&client, &seen, "pond"),
            Err(Error::Protocol { .. })
        ));
    }

    #[test]
    fn scripted_csv_is_strict() {
        assert!(ScriptedClient::from_csv("concept,answer\ndam,maybe\n").is_err());
        assert!(ScriptedClient::from_csv("wrong,header\n").is_err());
        assert!(ScriptedClient::from_csv("concept,answer\ndam,hr\ndam,lr\n").is_err());
        assert!(ScriptedClient::from_csv("concept,answer\ndam,hr,extra\n").is_err());
    }

    #[test]
    fn llm_batch_covers_all_concepts() {
        let client = ScriptedClient::from_csv("concept,answer\na,hr\nb,lr\nc,hr\nd,lr\ne,hr\n")
            .unwrap();
        let seen = vec![("forest".to_string(), ModalityChoice::Lr)];
        let concepts: Vec<String> = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        let decisions = decide_llm_batch(&client, &seen, &concepts, 2).unwrap();
        assert_eq!(decisions.len(), 5);
        assert_eq!(decisions["a"].choice, ModalityChoice::Hr);
        assert_eq!(decisions["d"].choice, ModalityChoice::Lr);
    }

    #[test]
    fn area_heuristic_compares_against_threshold() {
        assert_eq!(
            decide_area_heuristic("pool", 400.0, 10_000.0).choice,
            ModalityChoice::Hr
        );
        assert_eq!(
            decide_area_heuristic("forest", 5e6, 10_000.0).choice,
            ModalityChoice::Lr
        );
    }

    #[test]
    fn constants_are_constant() {
        let d = decide_constant("anything", ModalityChoice::Hr);
        assert_eq!(d.choice, ModalityChoice::Hr);
        assert_eq!(d.source, "always-hr");
    }

    #[test]
    fn oracle_prefers_the_better_ranking_and_breaks_ties_to_lr() {
        let ids: Vec<String> = vec!["l1".into(), "l2".into(), "l3".into()];
        // HR ranks the positive first, LR ranks it last.
        let hr = ScoreTable::new(vec!["c".into()], ids.clone(), vec![0.9, 0.2, 0.1]).unwrap();
        let lr = ScoreTable::new(vec!["c".into()], ids.clone(), vec![0.1, 0.9, 0.8]).unwrap();
        let labels = vec![vec![true, false, false]];
        let concepts = vec!["c".to_string()];
        let decisions = validation_modality_oracle(&hr, &lr, &labels, &concepts, 2).unwrap();
        assert_eq!(decisions["c"].choice, ModalityChoice::Hr);

        // Identical tables: tie, LR wins.
        let decisions = validation_modality_oracle(&hr, &hr, &labels, &concepts, 2).unwrap();
        assert_eq!(decisions["c"].choice, ModalityChoice::Lr);

        // No positives: undecidable, LR.
        let empty = vec![vec![false, false, false]];
        let decisions = validation_modality_oracle(&hr, &lr, &empty, &concepts, 2).unwrap();
        assert!(decisions["c"].undecidable);
        assert_eq!(decisions["c"].choice, ModalityChoice::Lr);
    }

    #[test]
    fn selector_accuracy_counts_matches() {
        let truth = decisions(&[("a", ModalityChoice::Hr), ("b", ModalityChoice::Lr)]);
        assert_eq!(evaluate_selector(&truth, &truth).unwrap(), 1.0);

        let pred = decisions(&[("a", ModalityChoice::Lr), ("b", ModalityChoice::Lr)]);
        assert_eq!(evaluate_selector(&pred, &truth).unwrap(), 0.5);

        let mismatched = decisions(&[("a", ModalityChoice::Lr)]);
        assert!(evaluate_selector(&mismatched, &truth).is_err());
    }

    #[test]
    fn selector_accuracy_is_label_symmetric() {
        let truth = decisions(&[
            ("a", ModalityChoice::Hr),
            ("b", ModalityChoice::Lr),
            ("c", ModalityChoice::Hr),
        ]);
        let pred = decisions(&[
            ("a", ModalityChoice::Hr),
            ("b", ModalityChoice::Hr),
            ("c", ModalityChoice::Lr),
        ]);
        let flip = |m: &BTreeMap<String, ModalityDecision>| -> BTreeMap<String, ModalityDecision> {
            m.iter()
                .map(|(k, d)| {
                    let mut d = d.clone();
                    d.choice = match d.choice {
                        ModalityChoice::Lr => ModalityChoice::Hr,
                        ModalityChoice::Hr => ModalityChoice::Lr,
                    };
                    (k.clone(), d)
                })
                .collect()
        };
        let a = evaluate_selector(&pred, &truth).unwrap();
        let b = evaluate_selector(&flip(&pred), &flip(&truth)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decisions_csv_format() {
        let map = decisions(&[("b", ModalityChoice::Lr), ("a", ModalityChoice::Hr)]);
        let csv = decisions_to_csv(&map);
        assert!(csv.starts_with("concept_id,choice,source\n"));
        assert!(csv.contains("a,HR,test\n"));
        assert!(csv.contains("b,LR,test\n"));
    }
}
