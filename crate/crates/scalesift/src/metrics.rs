//! Retrieval evaluation: average precision at k, mean AP, precision at k,
//! Spearman rank correlation, and budget sweeps over the full pipeline.
//!
//! Ranking convention everywhere: descending score, ties broken by ascending
//! location id. AP@k is normalized by `min(k, R)` where `R` is the number of
//! positives, which bounds it in [0, 1] and rewards early retrieval; the
//! convention is normative for this engine and matters when comparing against
//! externally produced numbers.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pipeline::{execute_plan, plan_run, CostReport, RunContext};
use crate::table::ScoreTable;

/// Indices `0..n` ordered by descending score, ties by ascending id.
fn ranking(ids: &[String], scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores must be comparable")
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    order
}

fn check_lengths(ids: &[String], scores: &[f64], labels: &[bool], k: usize) -> Result<()> {
    if ids.len() != scores.len() || scores.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} ids, {} scores, {} labels",
            ids.len(),
            scores.len(),
            labels.len()
        )));
    }
    if k == 0 {
        return Err(Error::Invalid {
            field: "k",
            message: "must be >= 1".into(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Invalid {
            field: "scores",
            message: "must not contain NaN".into(),
        });
    }
    Ok(())
}

/// Average precision over the top `min(k, N)` ranks, normalized by
/// `min(k, R)`. Zero positives is undefined and signaled, never scored 0.
pub fn ap_at_k(ids: &[String], scores: &[f64], labels: &[bool], k: usize) -> Result<f64> {
    check_lengths(ids, scores, labels, k)?;
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(Error::UndefinedMetric(
            "average precision with zero positives".into(),
        ));
    }
    let order = ranking(ids, scores);
    let cutoff = k.min(order.len());
    let mut hits = 0usize;
    let mut sum = 0.0f64;
    for (rank0, &idx) in order[..cutoff].iter().enumerate() {
        if labels[idx] {
            hits += 1;
            sum += hits as f64 / (rank0 + 1) as f64;
        }
    }
    Ok(sum / k.min(positives) as f64)
}

/// Fraction of positives among the top `min(k, N)` ranks.
pub fn precision_at_k(ids: &[String], scores: &[f64], labels: &[bool], k: usize) -> Result<f64> {
    check_lengths(ids, scores, labels, k)?;
    let order = ranking(ids, scores);
    let cutoff = k.min(order.len());
    let hits = order[..cutoff].iter().filter(|&&i| labels[i]).count();
    Ok(hits as f64 / cutoff as f64)
}

/// Spearman rank correlation with average ranks for ties. Undefined (and
/// signaled) for fewer than two points or zero rank variance.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {} values",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::UndefinedMetric(
            "rank correlation needs at least two points".into(),
        ));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Invalid {
            field: "rankings",
            message: "must not contain NaN".into(),
        });
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        var_a += (x - mean) * (x - mean);
        var_b += (y - mean) * (y - mean);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::UndefinedMetric(
            "rank correlation with zero variance".into(),
        ));
    }
    Ok(cov / (var_a.sqrt() * var_b.sqrt()))
}

/// 1-based ranks in ascending value order; tied values share their average
/// rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[x].partial_cmp(&values[y]).expect("no NaN"));
    let mut ranks = vec![0.0f64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Serialize)]
pub struct ConceptAp {
    pub concept: String,
    pub ap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecisionPoint {
    pub k: usize,
    pub mean_precision: f64,
}

/// Evaluation summary: per-concept AP@k, their mean, concepts skipped for
/// lack of positives, precision curves, and optionally the cost of the run
/// that produced the scores.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub k: usize,
    pub per_concept_ap: Vec<ConceptAp>,
    pub map_at_k: f64,
    pub skipped: Vec<String>,
    pub precision_at: Vec<PrecisionPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostReport>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Evaluates every concept row of `scores` against boolean labels aligned
/// with the table. Concepts with zero positives are reported in `skipped`
/// and excluded from the mean; if every concept is skipped this is an error.
pub fn map_at_k(
    scores: &ScoreTable,
    labels: &[Vec<bool>],
    k: usize,
    precision_ks: &[usize],
) -> Result<EvalReport> {
    if labels.len() != scores.concepts().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} label rows for {} concepts",
            labels.len(),
            scores.concepts().len()
        )));
    }
    let ids = scores.locations();
    let mut per_concept = Vec::new();
    let mut skipped = Vec::new();
    for (c, concept) in scores.concepts().iter().enumerate() {
        match ap_at_k(ids, scores.row(c), &labels[c], k) {
            Ok(ap) => per_concept.push(ConceptAp {
                concept: concept.clone(),
                ap,
            }),
            Err(Error::UndefinedMetric(_)) => skipped.push(concept.clone()),
            Err(e) => return Err(e),
        }
    }
    if per_concept.is_empty() {
        return Err(Error::UndefinedMetric(
            "every concept has zero positives".into(),
        ));
    }
    let map = per_concept.iter().map(|c| c.ap).sum::<f64>() / per_concept.len() as f64;

    let mut precision_at = Vec::new();
    for &pk in precision_ks {
        let mut total = 0.0;
        let mut counted = 0usize;
        for (c, _) in scores.concepts().iter().enumerate() {
            if skipped.contains(&scores.concepts()[c]) {
                continue;
            }
            total += precision_at_k(ids, scores.row(c), &labels[c], pk)?;
            counted += 1;
        }
        precision_at.push(PrecisionPoint {
            k: pk,
            mean_precision: total / counted as f64,
        });
    }

    Ok(EvalReport {
        k,
        per_concept_ap: per_concept,
        map_at_k: map,
        skipped,
        precision_at,
        cost: None,
    })
}

/// One row of a budget sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub budget: usize,
    pub strategy: String,
    pub precision_at_k: f64,
    pub map_at_k: f64,
    pub seed: u64,
}

/// Renders sweep rows as CSV: `budget,strategy,precision_at_k,map_at_k,seed`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("budget,strategy,precision_at_k,map_at_k,seed\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.budget, row.strategy, row.precision_at_k, row.map_at_k, row.seed
        );
    }
    out
}

/// Runs the full pipeline once per budget with the context's fixed seed and
/// evaluates the resulting table at `k_eval`.
pub fn budget_sweep(ctx: &RunContext, budgets: &[usize], k_eval: usize) -> Result<Vec<SweepRow>> {
    if budgets.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Invalid {
            field: "budgets",
            message: "must be sorted ascending".into(),
        });
    }
    let labels = ctx.world.labels_for(&ctx.query, ctx.candidate_ids())?;
    let mut rows = Vec::with_capacity(budgets.len());
    for &budget in budgets {
        let run = ctx.with_budget(budget);
        let plan = plan_run(&run)?;
        let table = execute_plan(&run, &plan)?;
        let report = map_at_k(&table, &labels, k_eval, &[k_eval])?;
        rows.push(SweepRow {
            budget,
            strategy: run.sampler.name().to_string(),
            precision_at_k: report.precision_at[0].mean_precision,
            map_at_k: report.map_at_k,
            seed: run.seed,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ap_hand_example() {
        let ids = ids(&["l1", "l2", "l3"]);
        let scores = [0.9, 0.8, 0.1];
        let labels = [true, false, true];
        // Ranks: l1 (hit), l2 (miss); sum = 1; min(k, R) = 2.
        let ap = ap_at_k(&ids, &scores, &labels, 2).unwrap();
        assert!((ap - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ap_is_one_when_everything_is_positive() {
        let ids = ids(&["a", "b", "c"]);
        let labels = [true, true, true];
        for k in 1..=3 {
            let ap = ap_at_k(&ids, &[0.3, 0.9, 0.1], &labels, k).unwrap();
            assert!((ap - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ap_with_no_positives_is_signaled() {
        let ids = ids(&["a", "b"]);
        assert!(matches!(
            ap_at_k(&ids, &[0.3, 0.9], &[false, false], 2),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn precision_counts_the_top_block() {
        let ids = ids(&["l1", "l2", "l3"]);
        let p = precision_at_k(&ids, &[0.9, 0.8, 0.1], &[true, false, true], 2).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        // k >= N: overall positive rate.
        let p = precision_at_k(&ids, &[0.9, 0.8, 0.1], &[true, false, true], 10).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);
        let p = precision_at_k(&ids, &[0.9, 0.8, 0.1], &[false, false, false], 2).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn spearman_extremes() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let reversed = [4.0, 3.0, 2.0, 1.0];
        assert!((spearman(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&a, &reversed).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn spearman_undefined_cases() {
        assert!(spearman(&[1.0], &[2.0]).is_err());
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_handles_ties_with_average_ranks() {
        let a = [1.0, 1.0, 2.0];
        let b = [3.0, 3.0, 5.0];
        assert!((spearman(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn map_means_per_concept_aps() {
        let table = ScoreTable::new(
            ids(&["c1", "c2"]),
            ids(&["l1", "l2"]),
            vec![0.9, 0.1, 0.2, 0.8],
        )
        .unwrap();
        let labels = vec![vec![true, false], vec![false, true]];
        let report = map_at_k(&table, &labels, 2, &[1]).unwrap();
        assert_eq!(report.per_concept_ap.len(), 2);
        let mean = (report.per_concept_ap[0].ap + report.per_concept_ap[1].ap) / 2.0;
        assert!((report.map_at_k - mean).abs() < 1e-12);
    }

    #[test]
    fn map_skips_concepts_without_positives() {
        let table = ScoreTable::new(
            ids(&["c1", "c2"]),
            ids(&["l1", "l2"]),
            vec![0.9, 0.1, 0.2, 0.8],
        )
        .unwrap();
        let labels = vec![vec![true, false], vec![false, false]];
        let report = map_at_k(&table, &labels, 2, &[]).unwrap();
        assert_eq!(report.skipped, vec!["c2".to_string()]);
        assert_eq!(report.per_concept_ap.len(), 1);

        let all_negative = vec![vec![false, false], vec![false, false]];
        assert!(map_at_k(&table, &all_negative, 2, &[]).is_err());
    }

    #[test]
    fn rank_metrics_ignore_monotone_rescaling() {
        let ids = ids(&["a", "b", "c", "d"]);
        let scores = [0.1f64, 0.7, 0.4, 0.9];
        let transformed: Vec<f64> = scores.iter().map(|s| (s * 3.0).exp()).collect();
        let labels = [false, true, true, false];
        for k in 1..=4 {
            assert_eq!(
                ap_at_k(&ids, &scores, &labels, k).unwrap(),
                ap_at_k(&ids, &transformed, &labels, k).unwrap()
            );
            assert_eq!(
                precision_at_k(&ids, &scores, &labels, k).unwrap(),
                precision_at_k(&ids, &transformed, &labels, k).unwrap()
            );
        }
    }
}
