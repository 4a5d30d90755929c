//! Synthetic multi-resolution world: ground-truth labels, per-location tile
//! truths, low-resolution feature vectors, and auxiliary sampling weights.
//!
//! The generator reproduces the scale asymmetry the rest of the engine is
//! built around: coarse concepts keep clean low-resolution evidence while
//! fine concepts have half of it erased, and high-resolution tile scores for
//! coarse concepts are noised at scoring time. Everything downstream can be
//! checked against this world's exact ground truth.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// A retrievable concept with its spatial scale and base rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptSpec {
    pub id: String,
    /// Fraction of a location's extent a positive instance occupies,
    /// in (0, 1].
    pub scale: f64,
    /// Probability a location contains the concept, in (0, 1).
    pub prevalence: f64,
    /// Whether the concept has annotations available for training and
    /// validation.
    pub seen: bool,
}

/// Parameters of a synthetic world. Identical specs (including `seed`)
/// generate bit-identical worlds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub num_locations: usize,
    pub tiles_per_location: usize,
    pub concepts: Vec<ConceptSpec>,
    pub feature_dim: usize,
    /// Standard deviation of the additive noise on low-resolution features.
    pub lr_noise_fine: f64,
    /// Per-tile probability that a coarse concept reads a negative tile as
    /// positive at high resolution (a lookalike confusion).
    pub hr_noise_coarse: f64,
    /// Concepts with `scale < scale_threshold` are fine, the rest coarse.
    pub scale_threshold: f64,
    /// Amplitude of the context traces fine concepts leave in the features
    /// through the secondary mixing matrix. Unlike the primary evidence,
    /// context traces are never masked, but the nominal per-concept readout
    /// cannot attribute them; only a trained model can exploit them.
    #[serde(default = "default_context_gain")]
    pub context_gain: f64,
    /// Geography: half the locations are dense, half sparse, and every
    /// concept's prevalence is scaled by `1 +- density_spread` there. Zero
    /// makes labels independent across concepts.
    #[serde(default = "default_density_spread")]
    pub density_spread: f64,
    /// Probability that a negative location still carries a fine concept's
    /// context trace (a lookalike next door). Decoys are indistinguishable
    /// from masked positives in the LR features; only HR tiles resolve them.
    #[serde(default = "default_decoy_rate")]
    pub decoy_rate: f64,
    pub seed: u64,
}

fn default_context_gain() -> f64 {
    DEFAULT_CONTEXT_GAIN
}

fn default_density_spread() -> f64 {
    DEFAULT_DENSITY_SPREAD
}

fn default_decoy_rate() -> f64 {
    DEFAULT_DECOY_RATE
}

impl WorldSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_locations == 0 {
            return Err(invalid("num_locations", "must be >= 1"));
        }
        if self.tiles_per_location == 0 {
            return Err(invalid("tiles_per_location", "must be >= 1"));
        }
        if self.feature_dim == 0 {
            return Err(invalid("feature_dim", "must be >= 1"));
        }
        if !(self.scale_threshold > 0.0 && self.scale_threshold <= 1.0) {
            return Err(invalid("scale_threshold", "must be in (0, 1]"));
        }
        if !(self.lr_noise_fine >= 0.0 && self.lr_noise_fine.is_finite()) {
            return Err(invalid("lr_noise_fine", "must be a nonnegative real"));
        }
        if !(self.hr_noise_coarse >= 0.0 && self.hr_noise_coarse < 1.0) {
            return Err(invalid(
                "hr_noise_coarse",
                "per-tile confusion probability must lie in [0, 1)",
            ));
        }
        if !(self.context_gain >= 0.0 && self.context_gain.is_finite()) {
            return Err(invalid("context_gain", "must be a nonnegative real"));
        }
        if !(self.density_spread >= 0.0 && self.density_spread < 1.0) {
            return Err(invalid("density_spread", "must lie in [0, 1)"));
        }
        if !(self.decoy_rate >= 0.0 && self.decoy_rate < 1.0) {
            return Err(invalid("decoy_rate", "must lie in [0, 1)"));
        }
        for concept in &self.concepts {
            if concept.prevalence * (1.0 + self.density_spread) >= 1.0 {
                return Err(invalid(
                    "density_spread",
                    format!(
                        "dense-tier prevalence for `{}` reaches 1",
                        concept.id
                    ),
                ));
            }
        }
        if self.concepts.is_empty() {
            return Err(invalid("concepts", "must not be empty"));
        }
        let mut ids = std::collections::BTreeSet::new();
        for concept in &self.concepts {
            if concept.id.is_empty() || concept.id.contains([',', '\n', '\r']) {
                return Err(invalid(
                    "concepts.id",
                    format!("`{}` is empty or contains a separator", concept.id),
                ));
            }
            if !ids.insert(concept.id.as_str()) {
                return Err(invalid(
                    "concepts.id",
                    format!("duplicate concept id `{}`", concept.id),
                ));
            }
            if !(concept.scale > 0.0 && concept.scale <= 1.0) {
                return Err(invalid(
                    "concepts.scale",
                    format!("`{}` must have scale in (0, 1]", concept.id),
                ));
            }
            if !(concept.prevalence > 0.0 && concept.prevalence < 1.0) {
                return Err(invalid(
                    "concepts.prevalence",
                    format!("`{}` must have prevalence in (0, 1)", concept.id),
                ));
            }
        }
        if self.concepts.len() >= 2 {
            let seen = self.concepts.iter().filter(|c| c.seen).count();
            if seen == 0 || seen == self.concepts.len() {
                return Err(invalid(
                    "concepts.seen",
                    "need at least one seen and one unseen concept",
                ));
            }
        }
        Ok(())
    }

    /// Whether `concept` is below the fine/coarse scale threshold.
    pub fn is_fine(&self, concept: &ConceptSpec) -> bool {
        concept.scale < self.scale_threshold
    }

    /// Number of positive tiles for a positive location: `ceil(scale * K)`.
    pub fn positive_tiles(&self, scale: f64) -> usize {
        let k = self.tiles_per_location;
        ((scale * k as f64).ceil() as usize).clamp(1, k)
    }

    pub fn concept_ids(&self) -> Vec<String> {
        self.concepts.iter().map(|c| c.id.clone()).collect()
    }

    pub fn concept_index(&self, id: &str) -> Result<usize> {
        self.concepts
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> Error {
    Error::Invalid {
        field,
        message: message.into(),
    }
}

/// A generated world. Immutable after construction; safe to share across
/// concurrent readers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct World {
    pub spec: WorldSpec,
    pub location_ids: Vec<String>,
    /// `labels[i][c]` is 1 iff location `i` contains concept `c`.
    pub labels: Vec<Vec<u8>>,
    /// `tile_truths[i][c][j]` is 1 iff tile `j` of location `i` contains
    /// concept `c`.
    pub tile_truths: Vec<Vec<Vec<u8>>>,
    /// `lr_features[i]` is the `feature_dim`-dimensional LR observation.
    pub lr_features: Vec<Vec<f64>>,
    /// Nonnegative auxiliary weights (a night-lights analogue).
    pub aux_weights: Vec<f64>,
}

/// Disjoint location partition for training, validation, and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// Generates a world deterministically from its spec.
///
/// Generation stages, each on its own named stream:
/// 0. density: each location is dense or sparse (fair coin), scaling every
///    prevalence by `1 + density_spread` or `1 - density_spread`; marginal
///    prevalences are unchanged;
/// 1. labels: `y[i][c] ~ Bernoulli(prevalence_c * density_i)`, drawn
///    concept-major;
/// 2. tiles: for each positive `(i, c)`, `ceil(scale_c * K)` distinct tiles
///    chosen uniformly;
/// 3. features: `x_i = A * y~_i + context_gain * B * z_i + eps_i` where `A`
///    and `B` are fixed `feature_dim x M` standard-normal mixing matrices,
///    `y~` is `y` with fine concept entries erased by independent
///    Bernoulli(0.5) masks, `z` carries the unmasked fine labels (context
///    traces a sub-location concept leaves around itself), and
///    `eps_i ~ N(0, lr_noise_fine^2 I)`;
/// 4. aux weights: `w_i = sum_c y[i][c] + |eta_i|`, `eta_i ~ N(0, 1)`.
///
/// The per-concept readout reconstructs evidence through the pseudoinverse
/// of `A` alone, so the context channel is invisible to it: recovering that
/// signal requires supervision, which is what distillation provides.
pub fn generate_world(spec: &WorldSpec) -> Result<World> {
    spec.validate()?;
    let n = spec.num_locations;
    let m = spec.concepts.len();
    let k = spec.tiles_per_location;
    let d = spec.feature_dim;

    let location_ids = make_location_ids(n);

    let density: Vec<f64> = {
        let mut rng = stream_rng(spec.seed, "density");
        let coin = Bernoulli::new(0.5).expect("0.5 is a valid probability");
        (0..n)
            .map(|_| {
                if coin.sample(&mut rng) {
                    1.0 + spec.density_spread
                } else {
                    1.0 - spec.density_spread
                }
            })
            .collect()
    };

    let mut labels = vec![vec![0u8; m]; n];
    {
        let mut rng = stream_rng(spec.seed, "labels");
        for (c, concept) in spec.concepts.iter().enumerate() {
            for (i, row) in labels.iter_mut().enumerate() {
                let p = concept.prevalence * density[i];
                let bern =
                    Bernoulli::new(p).map_err(|e| invalid("concepts.prevalence", e.to_string()))?;
                row[c] = u8::from(bern.sample(&mut rng));
            }
        }
    }

    let mut tile_truths = vec![vec![vec![0u8; k]; m]; n];
    {
        let mut rng = stream_rng(spec.seed, "tiles");
        for (i, row) in tile_truths.iter_mut().enumerate() {
            for (c, tiles) in row.iter_mut().enumerate() {
                if labels[i][c] == 1 {
                    let count = spec.positive_tiles(spec.concepts[c].scale);
                    for tile in sample_distinct(&mut rng, k, count) {
                        tiles[tile] = 1;
                    }
                }
            }
        }
    }

    let mixing = mixing_matrix(spec);

    // Evidence vector y~: fine-concept entries survive with probability 1/2.
    let mut evidence = vec![vec![0.0f64; m]; n];
    {
        let mut rng = stream_rng(spec.seed, "mask");
        let mask = Bernoulli::new(0.5).expect("0.5 is a valid probability");
        for (i, row) in evidence.iter_mut().enumerate() {
            for (c, value) in row.iter_mut().enumerate() {
                let keep = if spec.is_fine(&spec.concepts[c]) {
                    u8::from(mask.sample(&mut rng))
                } else {
                    1
                };
                *value = f64::from(labels[i][c] * keep);
            }
        }
    }

    // Context activity: fine positives always leave a trace; negatives do so
    // at the decoy rate.
    let mut context_active = vec![vec![0.0f64; m]; n];
    {
        let mut rng = stream_rng(spec.seed, "decoys");
        let decoy = if spec.decoy_rate > 0.0 {
            Some(Bernoulli::new(spec.decoy_rate).expect("validated rate"))
        } else {
            None
        };
        for (i, row) in context_active.iter_mut().enumerate() {
            for (c, value) in row.iter_mut().enumerate() {
                if !spec.is_fine(&spec.concepts[c]) {
                    continue;
                }
                *value = if labels[i][c] == 1 {
                    1.0
                } else if let Some(decoy) = &decoy {
                    f64::from(decoy.sample(&mut rng))
                } else {
                    0.0
                };
            }
        }
    }

    let context = context_matrix(spec);
    let mut lr_features = vec![vec![0.0f64; d]; n];
    {
        let mut rng = stream_rng(spec.seed, "noise");
        for (i, features) in lr_features.iter_mut().enumerate() {
            for (r, feature) in features.iter_mut().enumerate() {
                let mut signal: f64 = (0..m).map(|c| mixing[r][c] * evidence[i][c]).sum();
                if spec.context_gain > 0.0 {
                    let trace: f64 = (0..m)
                        .map(|c| context[r][c] * context_active[i][c])
                        .sum();
                    signal += spec.context_gain * trace;
                }
                let eps: f64 = rng.sample(StandardNormal);
                *feature = signal + eps * spec.lr_noise_fine;
            }
        }
    }

    let mut aux_weights = vec![0.0f64; n];
    {
        let mut rng = stream_rng(spec.seed, "aux");
        for (i, weight) in aux_weights.iter_mut().enumerate() {
            let eta: f64 = rng.sample(StandardNormal);
            let positives: f64 = labels[i].iter().map(|&b| f64::from(b)).sum();
            *weight = positives + eta.abs();
        }
    }

    Ok(World {
        spec: spec.clone(),
        location_ids,
        labels,
        tile_truths,
        lr_features,
        aux_weights,
    })
}

/// The fixed `feature_dim x M` mixing matrix, re-derivable from the spec
/// alone (drawn once from the `mixing` stream). This is the matrix the
/// per-concept readout inverts.
pub fn mixing_matrix(spec: &WorldSpec) -> Vec<Vec<f64>> {
    draw_matrix(spec, "mixing")
}

/// The secondary `feature_dim x M` mixing matrix carrying fine-concept
/// context traces (stream `context-mixing`).
pub fn context_matrix(spec: &WorldSpec) -> Vec<Vec<f64>> {
    draw_matrix(spec, "context-mixing")
}

fn draw_matrix(spec: &WorldSpec, stream: &str) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(spec.seed, stream);
    (0..spec.feature_dim)
        .map(|_| {
            (0..spec.concepts.len())
                .map(|_| rng.sample(StandardNormal))
                .collect()
        })
        .collect()
}

fn make_location_ids(n: usize) -> Vec<String> {
    // Zero-padded so lexicographic id order equals numeric order; id order is
    // the tiebreak everywhere downstream.
    let width = (n.max(2) - 1).to_string().len();
    (0..n).map(|i| format!("L{i:0width$}")).collect()
}

/// First `count` positions of a partial Fisher-Yates shuffle of `0..k`.
fn sample_distinct(rng: &mut impl Rng, k: usize, count: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..k).collect();
    for j in 0..count.min(k) {
        let pick = rng.random_range(j..k);
        indices.swap(j, pick);
    }
    indices.truncate(count.min(k));
    indices
}

impl World {
    pub fn num_locations(&self) -> usize {
        self.location_ids.len()
    }

    pub fn num_concepts(&self) -> usize {
        self.spec.concepts.len()
    }

    pub fn concept_ids(&self) -> Vec<String> {
        self.spec.concept_ids()
    }

    pub fn seen_concepts(&self) -> Vec<String> {
        self.spec
            .concepts
            .iter()
            .filter(|c| c.seen)
            .map(|c| c.id.clone())
            .collect()
    }

    pub fn unseen_concepts(&self) -> Vec<String> {
        self.spec
            .concepts
            .iter()
            .filter(|c| !c.seen)
            .map(|c| c.id.clone())
            .collect()
    }

    pub fn location_index(&self, id: &str) -> Result<usize> {
        self.location_ids
            .iter()
            .position(|l| l == id)
            .ok_or_else(|| Error::UnknownLocation(id.to_string()))
    }

    /// Boolean label rows, one per concept in `concepts`, columns following
    /// `locations`.
    pub fn labels_for(&self, concepts: &[String], locations: &[String]) -> Result<Vec<Vec<bool>>> {
        let loc_idx: Vec<usize> = locations
            .iter()
            .map(|l| self.location_index(l))
            .collect::<Result<_>>()?;
        concepts
            .iter()
            .map(|c| {
                let ci = self.spec.concept_index(c)?;
                Ok(loc_idx.iter().map(|&li| self.labels[li][ci] == 1).collect())
            })
            .collect()
    }

    /// Serializes to the canonical world JSON document.
    pub fn to_json(&self) -> Result<String> {
        crate::json::to_string_17(self)
    }

    /// Parses and validates a world JSON document.
    pub fn from_json(text: &str) -> Result<World> {
        let world: World = serde_json::from_str(text)?;
        world.validate()?;
        Ok(world)
    }

    /// Checks every structural invariant. Used after parsing untrusted input.
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let n = self.spec.num_locations;
        let m = self.spec.concepts.len();
        let k = self.spec.tiles_per_location;
        let d = self.spec.feature_dim;

        if self.location_ids.len() != n {
            return Err(invalid("location_ids", "length must equal num_locations"));
        }
        let mut seen_ids = std::collections::BTreeSet::new();
        for id in &self.location_ids {
            if id.is_empty() || id.contains([',', '\n', '\r']) {
                return Err(invalid(
                    "location_ids",
                    format!("`{id}` is empty or contains a separator"),
                ));
            }
            if !seen_ids.insert(id.as_str()) {
                return Err(invalid("location_ids", format!("duplicate id `{id}`")));
            }
        }
        if self.labels.len() != n || self.labels.iter().any(|r| r.len() != m) {
            return Err(invalid("labels", "must be an N x M matrix"));
        }
        if self
            .labels
            .iter()
            .any(|r| r.iter().any(|&v| v != 0 && v != 1))
        {
            return Err(invalid("labels", "entries must be 0 or 1"));
        }
        if self.tile_truths.len() != n
            || self
                .tile_truths
                .iter()
                .any(|r| r.len() != m || r.iter().any(|t| t.len() != k))
        {
            return Err(invalid("tile_truths", "must be an N x M x K tensor"));
        }
        for (i, row) in self.tile_truths.iter().enumerate() {
            for (c, tiles) in row.iter().enumerate() {
                if tiles.iter().any(|&v| v != 0 && v != 1) {
                    return Err(invalid("tile_truths", "entries must be 0 or 1"));
                }
                let count = tiles.iter().filter(|&&v| v == 1).count();
                let expected = if self.labels[i][c] == 1 {
                    self.spec.positive_tiles(self.spec.concepts[c].scale)
                } else {
                    0
                };
                if count != expected {
                    return Err(invalid(
                        "tile_truths",
                        format!(
                            "location {i} concept {c}: {count} positive tiles, expected {expected}"
                        ),
                    ));
                }
            }
        }
        if self.lr_features.len() != n || self.lr_features.iter().any(|r| r.len() != d) {
            return Err(invalid("lr_features", "must be an N x feature_dim matrix"));
        }
        if self
            .lr_features
            .iter()
            .any(|r| r.iter().any(|v| !v.is_finite()))
        {
            return Err(invalid("lr_features", "entries must be finite"));
        }
        if self.aux_weights.len() != n {
            return Err(invalid("aux_weights", "length must equal num_locations"));
        }
        if self.aux_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("aux_weights", "entries must be nonnegative reals"));
        }
        Ok(())
    }
}

/// Seeded uniform shuffle followed by a contiguous partition. Partition sizes
/// are `floor(fraction * N)` with the remainder assigned to train.
pub fn split_locations(world: &World, fractions: (f64, f64, f64), seed: u64) -> Result<Split> {
    let (f_train, f_val, f_test) = fractions;
    for (name, f) in [("train", f_train), ("val", f_val), ("test", f_test)] {
        if !(f > 0.0 && f.is_finite()) {
            return Err(invalid(
                "fractions",
                format!("{name} fraction must be positive"),
            ));
        }
    }
    if (f_train + f_val + f_test - 1.0).abs() > 1e-9 {
        return Err(invalid("fractions", "must sum to 1"));
    }

    let n = world.num_locations();
    let mut ids = world.location_ids.clone();
    {
        use rand::seq::SliceRandom;
        let mut rng = stream_rng(seed, "shuffle");
        ids.shuffle(&mut rng);
    }

    let n_train = (f_train * n as f64).floor() as usize;
    let n_val = (f_val * n as f64).floor() as usize;
    let n_test = (f_test * n as f64).floor() as usize;
    let remainder = n - (n_train + n_val + n_test);
    let n_train = n_train + remainder;

    let split = Split {
        train: ids[..n_train].to_vec(),
        val: ids[n_train..n_train + n_val].to_vec(),
        test: ids[n_train + n_val..].to_vec(),
    };
    if split.train.is_empty() || split.val.is_empty() || split.test.is_empty() {
        return Err(invalid(
            "fractions",
            format!(
                "partition ({}, {}, {}) has an empty part",
                split.train.len(),
                split.val.len(),
                split.test.len()
            ),
        ));
    }
    debug_assert_eq!(split.train.len() + split.val.len() + split.test.len(), n);
    Ok(split)
}

/// The 12-concept benchmark world used throughout the test suites: six fine
/// concepts that lose half their LR evidence and six coarse concepts whose HR
/// tile scores are noisy. One fine and one coarse concept are held out as
/// unseen.
pub fn default_world_spec(seed: u64) -> WorldSpec {
    let mut concepts = Vec::new();
    for i in 0..6 {
        concepts.push(ConceptSpec {
            id: format!("fine{i}"),
            scale: 0.06,
            prevalence: 0.3,
            seen: i < 5,
        });
    }
    for i in 0..6 {
        concepts.push(ConceptSpec {
            id: format!("coarse{i}"),
            scale: 0.9,
            prevalence: 0.3,
            seen: i < 5,
        });
    }
    WorldSpec {
        num_locations: 400,
        tiles_per_location: 16,
        concepts,
        feature_dim: 32,
        lr_noise_fine: DEFAULT_LR_NOISE,
        hr_noise_coarse: DEFAULT_HR_NOISE,
        scale_threshold: 0.5,
        context_gain: DEFAULT_CONTEXT_GAIN,
        density_spread: DEFAULT_DENSITY_SPREAD,
        decoy_rate: DEFAULT_DECOY_RATE,
        seed,
    }
}

/// Default split fractions companion to [`default_world_spec`]: enough
/// training data for distillation and a test split large enough for top-40
/// metrics.
pub const DEFAULT_SPLIT_FRACTIONS: (f64, f64, f64) = (0.4, 0.1, 0.5);

/// Feature noise for the benchmark world: strong enough that the fixed
/// readout degrades visibly on fine concepts, weak enough that coarse
/// concepts stay recognizable at low resolution.
pub const DEFAULT_LR_NOISE: f64 = 1.5;

/// Per-tile confusion rate for coarse concepts in the benchmark world: max
/// aggregation over 16 tiles amplifies it to a ~38% location-level false
/// positive rate, reliably dragging HR ranking quality on coarse concepts
/// below LR's.
pub const DEFAULT_HR_NOISE: f64 = 0.03;

/// Context-trace amplitude for the benchmark world.
pub const DEFAULT_CONTEXT_GAIN: f64 = 1.0;

/// Density contrast for the benchmark world: dense locations run at 1.5x
/// prevalence, sparse ones at 0.5x.
pub const DEFAULT_DENSITY_SPREAD: f64 = 0.5;

/// Decoy rate for the benchmark world: about one negative in twelve carries
/// a lookalike context trace that only HR tiles can dismiss.
pub const DEFAULT_DECOY_RATE: f64 = 0.0;
