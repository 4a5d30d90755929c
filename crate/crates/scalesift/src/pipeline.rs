//! The end-to-end routing pipeline: per-concept modality decisions, one
//! globally shared budgeted HR selection, then mixed-source scoring.
//!
//! LR-routed concepts never trigger HR acquisition. HR-routed concepts share
//! a single selected location set; selected locations are scored by the HR
//! provider (queried lazily, only for those locations) and everything else
//! falls back to the KD model. Validation imagery used by the oracle stands
//! for the already-acquired training data and does not count against the
//! budget.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::acquisition::{
    disagreement_proxy, select_locations, Budget, SelectionResult, SelectionStrategy,
};
use crate::distill::{kd_predict_world, KdModel};
use crate::error::{Error, Result};
use crate::modality::{
    decide_constant, decide_llm_batch, decide_area_heuristic, validation_modality_oracle,
    ModalityChoice, ModalityDecision, TextCompletion,
};
use crate::scoring::{HrProvider, LrProvider};
use crate::table::ScoreTable;
use crate::world::{Split, World};

/// How per-concept modality decisions are made.
pub enum ModalityStrategy<'c> {
    /// AP@k comparison on the validation split (requires labels there).
    ValidationOracle,
    /// Oracle decisions for seen concepts; LLM inference with those decisions
    /// in context for the rest.
    Llm {
        client: &'c dyn TextCompletion,
        max_in_flight: usize,
    },
    /// HR iff the concept's mean area is below the threshold. Areas missing
    /// from the map fall back to `scale * area_per_location`.
    AreaHeuristic {
        areas: &'c BTreeMap<String, f64>,
        threshold_m2: f64,
    },
    AlwaysHr,
    AlwaysLr,
}

impl ModalityStrategy<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            ModalityStrategy::ValidationOracle => "validation-oracle",
            ModalityStrategy::Llm { .. } => "llm",
            ModalityStrategy::AreaHeuristic { .. } => "area-heuristic",
            ModalityStrategy::AlwaysHr => "always-hr",
            ModalityStrategy::AlwaysLr => "always-lr",
        }
    }
}

/// Which sampler ranks locations for HR acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Disagreement,
    Random,
    Uncertainty,
    Weighted,
}

impl SamplerKind {
    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Disagreement => "disagreement",
            SamplerKind::Random => "random",
            SamplerKind::Uncertainty => "uncertainty",
            SamplerKind::Weighted => "weighted",
        }
    }

    pub fn parse(name: &str) -> Result<SamplerKind> {
        match name {
            "disagreement" => Ok(SamplerKind::Disagreement),
            "random" => Ok(SamplerKind::Random),
            "uncertainty" => Ok(SamplerKind::Uncertainty),
            "weighted" => Ok(SamplerKind::Weighted),
            other => Err(Error::Config(format!("unknown sampler strategy `{other}`"))),
        }
    }
}

/// Everything one pipeline run needs. The candidate universe defaults to the
/// whole world; the split governs training and validation only.
pub struct RunContext<'w> {
    pub world: &'w World,
    pub split: &'w Split,
    pub lr: &'w LrProvider<'w>,
    pub hr: &'w HrProvider<'w>,
    pub kd: Option<&'w KdModel>,
    pub query: Vec<String>,
    /// Locations to retrieve over (and acquire from); `None` means every
    /// world location.
    pub candidates: Option<Vec<String>>,
    pub modality: ModalityStrategy<'w>,
    pub sampler: SamplerKind,
    pub budget: Budget,
    /// k used by the validation oracle and by evaluation.
    pub eval_k: usize,
    pub seed: u64,
}

impl RunContext<'_> {
    pub fn candidate_ids(&self) -> &[String] {
        self.candidates
            .as_deref()
            .unwrap_or(&self.world.location_ids)
    }

    pub fn with_budget(&self, max_locations: usize) -> RunContext<'_> {
        RunContext {
            world: self.world,
            split: self.split,
            lr: self.lr,
            hr: self.hr,
            kd: self.kd,
            query: self.query.clone(),
            candidates: self.candidates.clone(),
            modality: match &self.modality {
                ModalityStrategy::ValidationOracle => ModalityStrategy::ValidationOracle,
                ModalityStrategy::Llm { client, max_in_flight } => ModalityStrategy::Llm {
                    client: *client,
                    max_in_flight: *max_in_flight,
                },
                ModalityStrategy::AreaHeuristic { areas, threshold_m2 } => {
                    ModalityStrategy::AreaHeuristic {
                        areas,
                        threshold_m2: *threshold_m2,
                    }
                }
                ModalityStrategy::AlwaysHr => ModalityStrategy::AlwaysHr,
                ModalityStrategy::AlwaysLr => ModalityStrategy::AlwaysLr,
            },
            sampler: self.sampler,
            budget: Budget {
                max_locations,
                area_per_location: self.budget.area_per_location,
            },
            eval_k: self.eval_k,
            seed: self.seed,
        }
    }
}

/// A fully resolved acquisition plan: the per-concept routing plus the shared
/// budgeted HR location set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionPlan {
    pub decisions: BTreeMap<String, ModalityDecision>,
    pub hr_locations: SelectionResult,
    pub budget: Budget,
    pub modality_strategy: String,
    pub sampler_strategy: String,
}

impl AcquisitionPlan {
    pub fn any_hr(&self) -> bool {
        self.decisions
            .values()
            .any(|d| d.choice == ModalityChoice::Hr)
    }

    pub fn any_lr(&self) -> bool {
        self.decisions
            .values()
            .any(|d| d.choice == ModalityChoice::Lr)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Inference cost accounting. Tile count and area follow directly from the
/// number of acquired locations; the inference counters record how many
/// locations each model had to score (each model runs at most one pass over
/// the candidate set regardless of how many concepts it serves).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostReport {
    pub hr_location_count: usize,
    pub hr_tile_count: usize,
    pub hr_area_km2: f64,
    pub lr_inference_count: usize,
    pub kd_inference_count: usize,
}

impl CostReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn oracle_decisions(ctx: &RunContext, concepts: &[String]) -> Result<BTreeMap<String, ModalityDecision>> {
    let val = &ctx.split.val;
    let hr_val = ctx.hr.location_scores(val, concepts)?;
    let lr_val = ctx.lr.score(val, concepts)?;
    let labels = ctx.world.labels_for(concepts, val)?;
    validation_modality_oracle(&hr_val, &lr_val, &labels, concepts, ctx.eval_k)
}

/// Decides a modality per query concept, then selects the shared HR location
/// set. With no HR-routed concept the selection is empty and no HR cost is
/// incurred.
pub fn plan_run(ctx: &RunContext) -> Result<AcquisitionPlan> {
    ctx.budget.validate()?;
    if ctx.query.is_empty() {
        return Ok(AcquisitionPlan {
            decisions: BTreeMap::new(),
            hr_locations: SelectionResult::empty(ctx.sampler.name()),
            budget: ctx.budget.clone(),
            modality_strategy: ctx.modality.name().to_string(),
            sampler_strategy: ctx.sampler.name().to_string(),
        });
    }
    for concept in &ctx.query {
        ctx.world.spec.concept_index(concept)?;
    }

    let decisions = match &ctx.modality {
        ModalityStrategy::ValidationOracle => oracle_decisions(ctx, &ctx.query)?,
        ModalityStrategy::Llm {
            client,
            max_in_flight,
        } => {
            let seen = ctx.world.seen_concepts();
            if seen.is_empty() {
                return Err(Error::Config(
                    "llm routing needs seen concepts for in-context examples".into(),
                ));
            }
            let seen_decisions = oracle_decisions(ctx, &seen)?;
            let examples: Vec<(String, ModalityChoice)> = seen_decisions
                .values()
                .map(|d| (d.concept.clone(), d.choice))
                .collect();
            let unseen_queries: Vec<String> = ctx
                .query
                .iter()
                .filter(|c| !seen.contains(c))
                .cloned()
                .collect();
            let llm = decide_llm_batch(*client, &examples, &unseen_queries, *max_in_flight)?;
            let mut decisions = BTreeMap::new();
            for concept in &ctx.query {
                let decision = if let Some(d) = seen_decisions.get(concept) {
                    d.clone()
                } else {
                    llm[concept].clone()
                };
                decisions.insert(concept.clone(), decision);
            }
            decisions
        }
        ModalityStrategy::AreaHeuristic { areas, threshold_m2 } => ctx
            .query
            .iter()
            .map(|concept| {
                let area = areas.get(concept).copied().unwrap_or_else(|| {
                    let scale = ctx
                        .world
                        .spec
                        .concepts
                        .iter()
                        .find(|c| &c.id == concept)
                        .map(|c| c.scale)
                        .unwrap_or(1.0);
                    scale * ctx.budget.area_per_location * 1e6
                });
                (
                    concept.clone(),
                    decide_area_heuristic(concept, area, *threshold_m2),
                )
            })
            .collect(),
        ModalityStrategy::AlwaysHr => ctx
            .query
            .iter()
            .map(|c| (c.clone(), decide_constant(c, ModalityChoice::Hr)))
            .collect(),
        ModalityStrategy::AlwaysLr => ctx
            .query
            .iter()
            .map(|c| (c.clone(), decide_constant(c, ModalityChoice::Lr)))
            .collect(),
    };

    let any_hr = decisions.values().any(|d| d.choice == ModalityChoice::Hr);
    if any_hr && ctx.kd.is_none() {
        return Err(Error::Config(
            "a KD model is required when any concept routes to HR".into(),
        ));
    }

    let hr_locations = if any_hr && ctx.budget.max_locations > 0 {
        let candidates = ctx.candidate_ids();
        match ctx.sampler {
            SamplerKind::Disagreement => {
                let kd = ctx.kd.expect("checked above");
                let seen = ctx.world.seen_concepts();
                let kd_table = kd_predict_world(kd, ctx.world, candidates)?;
                let lr_table = ctx.lr.score(candidates, &seen)?;
                let kd_seen = kd_table.select(&seen, candidates)?;
                let criterion = disagreement_proxy(&kd_seen, &lr_table, &seen)?;
                select_locations(
                    SelectionStrategy::Disagreement {
                        criterion: &criterion,
                    },
                    candidates,
                    &ctx.budget,
                    ctx.seed,
                )?
            }
            SamplerKind::Random => select_locations(
                SelectionStrategy::Random,
                candidates,
                &ctx.budget,
                ctx.seed,
            )?,
            SamplerKind::Uncertainty => {
                let seen = ctx.world.seen_concepts();
                let lr_table = ctx.lr.score(candidates, &seen)?;
                select_locations(
                    SelectionStrategy::Uncertainty { lr: &lr_table },
                    candidates,
                    &ctx.budget,
                    ctx.seed,
                )?
            }
            SamplerKind::Weighted => {
                let weights: Vec<f64> = candidates
                    .iter()
                    .map(|id| Ok(ctx.world.aux_weights[ctx.world.location_index(id)?]))
                    .collect::<Result<_>>()?;
                select_locations(
                    SelectionStrategy::Weighted { weights: &weights },
                    candidates,
                    &ctx.budget,
                    ctx.seed,
                )?
            }
        }
    } else {
        SelectionResult::empty(ctx.sampler.name())
    };

    Ok(AcquisitionPlan {
        decisions,
        hr_locations,
        budget: ctx.budget.clone(),
        modality_strategy: ctx.modality.name().to_string(),
        sampler_strategy: ctx.sampler.name().to_string(),
    })
}

/// Scores every query concept at every world location according to the plan:
/// LR-routed rows come from the LR provider; HR-routed rows take HR scores at
/// selected locations and KD predictions elsewhere.
pub fn execute_plan(ctx: &RunContext, plan: &AcquisitionPlan) -> Result<ScoreTable> {
    let locations = ctx.candidate_ids();
    let query: Vec<String> = ctx.query.clone();
    for concept in &query {
        if !plan.decisions.contains_key(concept) {
            return Err(Error::Config(format!(
                "plan has no decision for concept `{concept}`"
            )));
        }
    }

    let lr_concepts: Vec<String> = query
        .iter()
        .filter(|c| plan.decisions[*c].choice == ModalityChoice::Lr)
        .cloned()
        .collect();
    let hr_concepts: Vec<String> = query
        .iter()
        .filter(|c| plan.decisions[*c].choice == ModalityChoice::Hr)
        .cloned()
        .collect();

    let lr_table = if lr_concepts.is_empty() {
        None
    } else {
        Some(ctx.lr.score(locations, &lr_concepts)?)
    };
    let (kd_table, hr_table) = if hr_concepts.is_empty() {
        (None, None)
    } else {
        let kd = ctx.kd.ok_or_else(|| {
            Error::Config("a KD model is required when any concept routes to HR".into())
        })?;
        let kd_full = kd_predict_world(kd, ctx.world, locations)?;
        let kd_table = kd_full.select(&hr_concepts, locations)?;
        let hr_table = if plan.hr_locations.selected.is_empty() {
            None
        } else {
            Some(
                ctx.hr
                    .location_scores(&plan.hr_locations.selected, &hr_concepts)?,
            )
        };
        (Some(kd_table), hr_table)
    };

    let selected: std::collections::HashSet<&str> = plan
        .hr_locations
        .selected
        .iter()
        .map(String::as_str)
        .collect();

    let mut values = vec![0.0f64; query.len() * locations.len()];
    for (q, concept) in query.iter().enumerate() {
        match plan.decisions[concept].choice {
            ModalityChoice::Lr => {
                let table = lr_table.as_ref().expect("lr table built for lr concepts");
                let row = table.concept_row(concept)?;
                values[q * locations.len()..(q + 1) * locations.len()].copy_from_slice(row);
            }
            ModalityChoice::Hr => {
                let kd = kd_table.as_ref().expect("kd table built for hr concepts");
                let kd_row = kd.concept_row(concept)?;
                for (l, location) in locations.iter().enumerate() {
                    let value = if selected.contains(location.as_str()) {
                        let hr = hr_table.as_ref().expect("hr table built for selections");
                        hr.get(concept, location)?
                    } else {
                        kd_row[l]
                    };
                    values[q * locations.len() + l] = value;
                }
            }
        }
    }
    ScoreTable::new(query, locations.to_vec(), values)
}

/// Assembles the cost accounting for a plan over `num_locations` candidates.
pub fn cost_report(
    plan: &AcquisitionPlan,
    tiles_per_location: usize,
    num_locations: usize,
) -> CostReport {
    let hr_location_count = plan.hr_locations.selected.len();
    let any_lr = plan.any_lr();
    let any_hr = plan.any_hr();
    let budgeted = plan.budget.max_locations > 0;
    let sampler_reads_lr = matches!(
        plan.sampler_strategy.as_str(),
        "disagreement" | "uncertainty"
    );
    let lr_pass = any_lr || (any_hr && budgeted && sampler_reads_lr);
    // KD scores back-fill unselected locations and feed the proxy criterion.
    let kd_pass = any_hr
        && (hr_location_count < num_locations
            || (budgeted && plan.sampler_strategy == "disagreement"));
    CostReport {
        hr_location_count,
        hr_tile_count: hr_location_count * tiles_per_location,
        hr_area_km2: hr_location_count as f64 * plan.budget.area_per_location,
        lr_inference_count: if lr_pass { num_locations } else { 0 },
        kd_inference_count: if kd_pass { num_locations } else { 0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::Budget;
    use crate::distill::{train_kd, TrainConfig, TrainSet};
    use crate::scoring::DEFAULT_BETA;
    use crate::world::{generate_world, split_locations, ConceptSpec, World, WorldSpec};

    fn small_world() -> World {
        let mut concepts = Vec::new();
        for i in 0..2 {
            concepts.push(ConceptSpec {
                id: format!("fine{i}"),
                scale: 0.1,
                prevalence: 0.4,
                seen: i == 0,
            });
            concepts.push(ConceptSpec {
                id: format!("coarse{i}"),
                scale: 0.9,
                prevalence: 0.4,
                seen: i == 0,
            });
        }
        generate_world(&WorldSpec {
            num_locations: 40,
            tiles_per_location: 4,
            concepts,
            feature_dim: 12,
            lr_noise_fine: 0.5,
            hr_noise_coarse: 0.4,
            scale_threshold: 0.5,
            context_gain: 0.4,
            density_spread: 0.5,
            decoy_rate: 0.1,
            seed: 21,
        })
        .unwrap()
    }

    struct Fixture {
        world: World,
        split: crate::world::Split,
        kd: KdModel,
    }

    fn fixture() -> Fixture {
        let world = small_world();
        let split = split_locations(&world, (0.5, 0.25, 0.25), 21).unwrap();
        let hr = HrProvider::Synthetic {
            world: &world,
            beta: DEFAULT_BETA,
        };
        let train = TrainSet::from_world_split(&world, &split, &hr).unwrap();
        let mut config = TrainConfig::new(
            21,
            world.spec.concepts.iter().map(|c| c.seen).collect(),
        );
        config.epochs = 60;
        config.hidden_dim = 16;
        let (kd, _) = train_kd(&train, &config).unwrap();
        Fixture { world, split, kd }
    }

    fn context<'w>(
        f: &'w Fixture,
        lr: &'w LrProvider<'w>,
        hr: &'w HrProvider<'w>,
        modality: ModalityStrategy<'w>,
        sampler: SamplerKind,
        budget: usize,
    ) -> RunContext<'w> {
        RunContext {
            world: &f.world,
            split: &f.split,
            lr,
            hr,
            kd: Some(&f.kd),
            query: f.world.concept_ids(),
            candidates: None,
            modality,
            sampler,
            budget: Budget::new(budget),
            eval_k: 10,
            seed: 21,
        }
    }

    #[test]
    fn all_lr_plans_acquire_nothing() {
        let f = fixture();
        let lr = LrProvider::synthetic(&f.world, DEFAULT_BETA).unwrap();
        let hr = HrProvider::Synthetic {
            world: &f.world,
            beta: DEFAULT_BETA,
        };
        let ctx = context(&f, &lr, &hr, ModalityStrategy::AlwaysLr, SamplerKind::Disagreement, 10);
        let plan = plan_run(&ctx).unwrap();
        assert!(plan.hr_locations.selected.is_empty());
        let report = cost_report(&plan, 4, f.world.num_locations());
        assert_eq!(report.hr_location_count, 0);
        assert_eq!(report.hr_area_km2, 0.0);
        assert_eq!(report.kd_inference_count, 0);
    }

    #[test]
    fn budget_is_respected_exactly() {
        let f = fixture();
        let lr = LrProvider::synthetic(&f.world, DEFAULT_BETA).unwrap();
        let hr = HrProvider::Synthetic {
            world: &f.world,
            beta: DEFAULT_BETA,
        };
        let ctx = context(&f, &lr, &hr, ModalityStrategy::AlwaysHr, SamplerKind::Disagreement, 3);
        let plan = plan_run(&ctx).unwrap();
        assert_eq!(plan.hr_locations.selected.len(), 3);
    }

    #[test]
    fn plan_selection_matches_external_disagreement_ranking() {
        let f = fixture();
        let lr = LrProvider::synthetic(&f.world, DEFAULT_BETA).unwrap();
        let hr = HrProvider::Synthetic {
            world: &f.world,
            beta: DEFAULT_BETA,
        };
        let ctx = context(
            &f,
            &lr,
            &hr,
            ModalityStrategy::AlwaysHr,
            SamplerKind::Disagreement,
            5,
        );
        let plan = plan_run(&ctx).unwrap();

        let seen = f.world.seen_concepts();
        let kd_table = kd_predict_world(&f.kd, &f.world, &f.world.location_ids).unwrap();
        let kd_seen = kd_table.select(&seen, &f.world.location_ids).unwrap();
        let lr_seen = lr.score(&f.world.location_ids, &seen).unwrap();
        let criterion = disagreement_proxy(&kd_seen, &lr_seen, &seen).unwrap();
        let reference = select_locations(
            SelectionStrategy::Disagreement {
                criterion: &criterion,
            },
            &f.world.location_ids,
            &Budget::new(5),
            21,
        )
        .unwrap();
        assert_eq!(plan.hr_locations.selected, reference.selected);
    }

    #[test]
    fn full_budget_equals_pure_hr_and_zero_budget_equals_kd() {
        let f = fixture();
        let lr = LrProvider::synthetic(&f.world, DEFAULT_BETA).unwrap();
        let hr = HrProvider::Synthetic {
            world: &f.world,
            beta: DEFAULT_BETA,
        };
        let n = f.world.num_locations();

        let ctx_full = context(&f, &lr, &hr, ModalityStrategy::AlwaysHr, SamplerKind::Disagreement, n);
        let plan_full = plan_run(&ctx_full).unwrap();
        let table_full = execute_plan(&ctx_full, &plan_full).unwrap();
        let hr_reference = hr
            .location_scores(&f.world.location_ids, &ctx_full.query)
            .unwrap();
        assert_eq!(table_full, hr_reference);

        let ctx_zero = context(&f, &lr, &hr, ModalityStrategy::AlwaysHr, SamplerKind::Disagreement, 0);
        let plan_zero = plan_run(&ctx_zero).unwrap();
        let table_zero = execute_plan(&ctx_zero, &plan_zero).unwrap();
        let kd_reference = kd_predict_world(&f.kd, &f.world, &f.world.location_ids)
            .unwrap()
            .select(&ctx_zero.query, &f.world.location_ids)
            .unwrap();
        assert_eq!(table_zero, kd_reference);
    }

    #[test]
    fn mixed_rows_route_cell_by_cell() {
        let f = fixture();
        let lr = LrProvider::synthetic(&f.world, DEFAULT_BETA).unwrap();
        let hr = HrProvider::Synthetic {
            world: &f.world,
            beta: DEFAULT_BETA,
        };
        let ctx = context(
            &f,
            &lr,
            &hr,
            ModalityStrategy::ValidationOracle,
            SamplerKind::Disagreement,
            6,
        );
        let plan = plan_run(&ctx).unwrap();
        let table = execute_plan(&ctx, &plan).unwrap();

        let lr_all = lr.score(&f.world.location_ids, &ctx.query).unwrap();
        let kd_all = kd_predict_world(&f.kd, &f.world, &f.world.location_ids).unwrap();
        let selected: std::collections::HashSet<&str> = plan
            .hr_locations
            .selected
            .iter()
            .map(String::as_str)
            .collect();
        for concept in &ctx.query {
            for location in &f.world.location_ids {
                let got = table.get(concept, location).unwrap();
                let expected = match plan.decisions[concept].choice {
                    ModalityChoice::Lr => lr_all.get(concept, location).unwrap(),
                    ModalityChoice::Hr => {
                        if selected.contains(location.as_str()) {
                            hr.location_scores(
                                std::slice::from_ref(location),
                                std::slice::from_ref(concept),
                            )
                            .unwrap()
                            .value_at(0, 0)
                        } else {
                            kd_all.get(concept, location).unwrap()
                        }
                    }
                };
                assert_eq!(got, expected, "cell ({concept}, {location})");
            }
        }
    }

    #[test]
    fn missing_kd_model_is_a_configuration_error() {
        let f = fixture();
        let lr = LrProvider::synthetic(&f.world, DEFAULT_BETA).unwrap();
        let hr = HrProvider::Synthetic {
            world: &f.world,
            beta: DEFAULT_BETA,
        };
        let mut ctx = context(&f, &lr, &hr, ModalityStrategy::AlwaysHr, SamplerKind::Disagreement, 3);
        ctx.kd = None;
        assert!(matches!(plan_run(&ctx), Err(Error::Config(_))));
    }

    #[test]
    fn cost_arithmetic_is_exact() {
        let plan = AcquisitionPlan {
            decisions: [(
                "c".to_string(),
                ModalityDecision {
                    concept: "c".into(),
                    choice: ModalityChoice::Hr,
                    source: "always-hr".into(),
                    undecidable: false,
                },
            )]
            .into_iter()
            .collect(),
            hr_locations: SelectionResult {
                selected: (0..1000).map(|i| format!("L{i:04}")).collect(),
                criterion_values: vec![0.0; 1000],
                strategy: "random".into(),
                warning: None,
            },
            budget: Budget {
                max_locations: 1000,
                area_per_location: 5.0,
            },
            modality_strategy: "always-hr".into(),
            sampler_strategy: "random".into(),
        };
        let report = cost_report(&plan, 100, 2000);
        assert_eq!(report.hr_location_count, 1000);
        assert_eq!(report.hr_tile_count, 100_000);
        assert_eq!(report.hr_area_km2, 5_000.0);

        // One location, four tiles per location.
        let mut one = plan.clone();
        one.hr_locations.selected.truncate(1);
        one.hr_locations.criterion_values.truncate(1);
        let report = cost_report(&one, 4, 2000);
        assert_eq!(report.hr_tile_count, 4);

        let empty = AcquisitionPlan {
            decisions: BTreeMap::new(),
            hr_locations: SelectionResult::empty("random"),
            budget: Budget::new(0),
            modality_strategy: "always-lr".into(),
            sampler_strategy: "random".into(),
        };
        let report = cost_report(&empty, 100, 2000);
        assert_eq!(
            (
                report.hr_location_count,
                report.hr_tile_count,
                report.lr_inference_count,
                report.kd_inference_count
            ),
            (0, 0, 0, 0)
        );
        assert_eq!(report.hr_area_km2, 0.0);
    }

    #[test]
    fn plans_and_outputs_are_deterministic() {
        let f = fixture();
        let lr = LrProvider::synthetic(&f.world, DEFAULT_BETA).unwrap();
        let hr = HrProvider::Synthetic {
            world: &f.world,
            beta: DEFAULT_BETA,
        };
        let ctx = context(
            &f,
            &lr,
            &hr,
            ModalityStrategy::ValidationOracle,
            SamplerKind::Random,
            7,
        );
        let plan_a = plan_run(&ctx).unwrap();
        let plan_b = plan_run(&ctx).unwrap();
        assert_eq!(plan_a, plan_b);
        let table_a = execute_plan(&ctx, &plan_a).unwrap();
        let table_b = execute_plan(&ctx, &plan_b).unwrap();
        assert_eq!(table_a, table_b);
    }
}
