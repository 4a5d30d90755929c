//! Cross-resolution knowledge distillation: a small tanh/logistic regressor
//! trained to reproduce high-resolution scores from low-resolution features.
//!
//! The loss is the literal double sum of squared differences over samples and
//! seen concepts (sum, not mean); gradients are exact analytic
//! backpropagation and are cross-checked against central finite differences
//! in the test suites. Training is full-batch deterministic gradient descent,
//! so identical inputs reproduce identical parameters bit for bit.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scoring::{logistic, HrProvider};
use crate::table::ScoreTable;
use crate::world::{Split, World};

/// Two-layer regressor mapping LR features to per-concept scores in (0, 1).
/// The output head spans all concepts; the training loss is masked to seen
/// concepts, so unseen rows keep their initialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdModel {
    pub hidden_dim: usize,
    pub feature_dim: usize,
    pub num_concepts: usize,
    /// hidden_dim x feature_dim.
    #[serde(rename = "W1")]
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// num_concepts x hidden_dim.
    #[serde(rename = "W2")]
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
    pub concepts: Vec<String>,
}

impl KdModel {
    /// Parameters drawn from `N(0, init_scale^2)` on the `kd-init` stream,
    /// in W1, b1, W2, b2 order.
    pub fn init(
        feature_dim: usize,
        hidden_dim: usize,
        concepts: Vec<String>,
        init_scale: f64,
        seed: u64,
    ) -> Result<KdModel> {
        if feature_dim == 0 || hidden_dim == 0 || concepts.is_empty() {
            return Err(Error::Invalid {
                field: "dimensions",
                message: "feature_dim, hidden_dim and concepts must be nonempty".into(),
            });
        }
        if !(init_scale > 0.0 && init_scale.is_finite()) {
            return Err(Error::Invalid {
                field: "init_scale",
                message: "must be a positive real".into(),
            });
        }
        let mut rng = stream_rng(seed, "kd-init");
        let mut draw = |count: usize| -> Vec<f64> {
            (0..count)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * init_scale
                })
                .collect()
        };
        let w1 = (0..hidden_dim).map(|_| draw(feature_dim)).collect();
        let b1 = draw(hidden_dim);
        let w2 = (0..concepts.len()).map(|_| draw(hidden_dim)).collect();
        let b2 = draw(concepts.len());
        Ok(KdModel {
            hidden_dim,
            feature_dim,
            num_concepts: concepts.len(),
            w1,
            b1,
            w2,
            b2,
            concepts,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_dim;
        let d = self.feature_dim;
        let m = self.num_concepts;
        if h == 0 || d == 0 || m == 0 {
            return Err(Error::DimensionMismatch("zero model dimension".into()));
        }
        if self.concepts.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} concept ids for num_concepts {m}",
                self.concepts.len()
            )));
        }
        if self.w1.len() != h || self.w1.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch("W1 must be hidden_dim x feature_dim".into()));
        }
        if self.b1.len() != h {
            return Err(Error::DimensionMismatch("b1 must have hidden_dim entries".into()));
        }
        if self.w2.len() != m || self.w2.iter().any(|r| r.len() != h) {
            return Err(Error::DimensionMismatch("W2 must be num_concepts x hidden_dim".into()));
        }
        if self.b2.len() != m {
            return Err(Error::DimensionMismatch("b2 must have num_concepts entries".into()));
        }
        let finite = self
            .w1
            .iter()
            .flatten()
            .chain(self.w2.iter().flatten())
            .chain(&self.b1)
            .chain(&self.b2)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Invalid {
                field: "parameters",
                message: "must be finite".into(),
            });
        }
        let mut ids = std::collections::BTreeSet::new();
        for id in &self.concepts {
            if id.is_empty() || id.contains([',', '\n', '\r']) || !ids.insert(id.as_str()) {
                return Err(Error::Invalid {
                    field: "concepts",
                    message: format!("bad or duplicate concept id `{id}`"),
                });
            }
        }
        Ok(())
    }

    /// Forward pass for one sample: `(tanh hidden activations, outputs)`.
    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut hidden = vec![0.0f64; self.hidden_dim];
        for (h, row) in self.w1.iter().enumerate() {
            let z: f64 = self.b1[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            hidden[h] = z.tanh();
        }
        let mut out = vec![0.0f64; self.num_concepts];
        for (c, row) in self.w2.iter().enumerate() {
            let z: f64 = self.b2[c] + row.iter().zip(&hidden).map(|(w, v)| w * v).sum::<f64>();
            out[c] = logistic(z);
        }
        (hidden, out)
    }

    /// Per-concept scores for one feature vector, strictly inside (0, 1).
    pub fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.feature_dim {
            return Err(Error::DimensionMismatch(format!(
                "feature vector of length {} for feature_dim {}",
                x.len(),
                self.feature_dim
            )));
        }
        Ok(self.forward(x).1)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::json::to_string_17(self)
    }

    pub fn from_json(text: &str) -> Result<KdModel> {
        let model: KdModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }
}

/// Training hyperparameters. The paper-side quantities end at the loss; these
/// knobs are artifact choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub init_scale: f64,
    pub seed: u64,
    /// One flag per concept; loss contributions come only from seen concepts.
    pub seen_mask: Vec<bool>,
}

pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
pub const DEFAULT_EPOCHS: usize = 200;
pub const DEFAULT_HIDDEN_DIM: usize = 32;
pub const DEFAULT_INIT_SCALE: f64 = 0.01;

impl TrainConfig {
    pub fn new(seed: u64, seen_mask: Vec<bool>) -> TrainConfig {
        TrainConfig {
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs: DEFAULT_EPOCHS,
            hidden_dim: DEFAULT_HIDDEN_DIM,
            init_scale: DEFAULT_INIT_SCALE,
            seed,
            seen_mask,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Invalid {
                field: "learning_rate",
                message: "must be a positive real".into(),
            });
        }
        if self.hidden_dim == 0 {
            return Err(Error::Invalid {
                field: "hidden_dim",
                message: "must be >= 1".into(),
            });
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Invalid {
                field: "init_scale",
                message: "must be a positive real".into(),
            });
        }
        if !self.seen_mask.iter().any(|&s| s) {
            return Err(Error::Invalid {
                field: "seen_mask",
                message: "needs at least one seen concept".into(),
            });
        }
        Ok(())
    }
}

/// A training batch: LR features paired with HR score targets over all
/// concepts, in world concept order.
#[derive(Debug, Clone)]
pub struct TrainSet {
    pub location_ids: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub concepts: Vec<String>,
}

impl TrainSet {
    /// Builds the batch for `locations`: features from the world, targets
    /// from aggregated HR scores. HR imagery over training locations is
    /// assumed already acquired and does not count against any budget.
    pub fn from_world(world: &World, locations: &[String], hr: &HrProvider) -> Result<TrainSet> {
        let concepts = world.concept_ids();
        let hr_table = hr.location_scores(locations, &concepts)?;
        let features: Vec<Vec<f64>> = locations
            .iter()
            .map(|l| Ok(world.lr_features[world.location_index(l)?].clone()))
            .collect::<Result<_>>()?;
        let targets: Vec<Vec<f64>> = (0..locations.len())
            .map(|l| (0..concepts.len()).map(|c| hr_table.value_at(c, l)).collect())
            .collect();
        Ok(TrainSet {
            location_ids: locations.to_vec(),
            features,
            targets,
            concepts,
        })
    }

    pub fn from_world_split(world: &World, split: &Split, hr: &HrProvider) -> Result<TrainSet> {
        Self::from_world(world, &split.train, hr)
    }
}

fn check_batch(
    model: &KdModel,
    features: &[Vec<f64>],
    targets: &[Vec<f64>],
    seen_mask: &[bool],
) -> Result<()> {
    if features.is_empty() {
        return Err(Error::Invalid {
            field: "batch",
            message: "must be nonempty".into(),
        });
    }
    if features.len() != targets.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows vs {} target rows",
            features.len(),
            targets.len()
        )));
    }
    if seen_mask.len() != model.num_concepts {
        return Err(Error::DimensionMismatch(format!(
            "seen mask of length {} for {} concepts",
            seen_mask.len(),
            model.num_concepts
        )));
    }
    for row in features {
        if row.len() != model.feature_dim {
            return Err(Error::DimensionMismatch(format!(
                "feature row of length {} for feature_dim {}",
                row.len(),
                model.feature_dim
            )));
        }
    }
    for row in targets {
        if row.len() != model.num_concepts {
            return Err(Error::DimensionMismatch(format!(
                "target row of length {} for {} concepts",
                row.len(),
                model.num_concepts
            )));
        }
        if row.iter().any(|t| !(t.is_finite() && (0.0..=1.0).contains(t))) {
            return Err(Error::Invalid {
                field: "targets",
                message: "must lie in [0, 1]".into(),
            });
        }
    }
    Ok(())
}

/// Distillation loss: `sum_i sum_{c in seen} (model(x_i)_c - target_{i,c})^2`.
pub fn kd_loss(
    model: &KdModel,
    features: &[Vec<f64>],
    targets: &[Vec<f64>],
    seen_mask: &[bool],
) -> Result<f64> {
    check_batch(model, features, targets, seen_mask)?;
    let mut loss = 0.0;
    for (x, t) in features.iter().zip(targets) {
        let (_, out) = model.forward(x);
        for c in 0..model.num_concepts {
            if seen_mask[c] {
                let diff = out[c] - t[c];
                loss += diff * diff;
            }
        }
    }
    Ok(loss)
}

/// Gradient of [`kd_loss`] with the same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct KdGradient {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

/// Exact analytic gradient of [`kd_loss`] with respect to every parameter.
/// Unseen concepts contribute nothing, so their output rows receive zero
/// gradient.
pub fn kd_gradient(
    model: &KdModel,
    features: &[Vec<f64>],
    targets: &[Vec<f64>],
    seen_mask: &[bool],
) -> Result<KdGradient> {
    check_batch(model, features, targets, seen_mask)?;
    let h = model.hidden_dim;
    let d = model.feature_dim;
    let m = model.num_concepts;
    let mut grad = KdGradient {
        w1: vec![vec![0.0; d]; h],
        b1: vec![0.0; h],
        w2: vec![vec![0.0; h]; m],
        b2: vec![0.0; m],
    };
    let mut delta_out = vec![0.0f64; m];
    let mut delta_hidden = vec![0.0f64; h];
    for (x, t) in features.iter().zip(targets) {
        let (hidden, out) = model.forward(x);
        for c in 0..m {
            delta_out[c] = if seen_mask[c] {
                // d/dz of (sigmoid(z) - t)^2 = 2 (o - t) o (1 - o)
                2.0 * (out[c] - t[c]) * out[c] * (1.0 - out[c])
            } else {
                0.0
            };
        }
        for c in 0..m {
            if delta_out[c] != 0.0 {
                let row = &mut grad.w2[c];
                for (j, g) in row.iter_mut().enumerate() {
                    *g += delta_out[c] * hidden[j];
                }
                grad.b2[c] += delta_out[c];
            }
        }
        for j in 0..h {
            let upstream: f64 = (0..m).map(|c| delta_out[c] * model.w2[c][j]).sum();
            delta_hidden[j] = upstream * (1.0 - hidden[j] * hidden[j]);
        }
        for j in 0..h {
            if delta_hidden[j] != 0.0 {
                let row = &mut grad.w1[j];
                for (r, g) in row.iter_mut().enumerate() {
                    *g += delta_hidden[j] * x[r];
                }
                grad.b1[j] += delta_hidden[j];
            }
        }
    }
    Ok(grad)
}

/// Full-batch gradient descent on the distillation loss.
///
/// Returns the trained model and the loss after each epoch's update. The
/// contract is final-vs-initial improvement only; per-epoch monotonicity is
/// not guaranteed at a fixed step size.
pub fn train_kd(train: &TrainSet, config: &TrainConfig) -> Result<(KdModel, Vec<f64>)> {
    config.validate()?;
    if config.seen_mask.len() != train.concepts.len() {
        return Err(Error::DimensionMismatch(format!(
            "seen mask of length {} for {} concepts",
            config.seen_mask.len(),
            train.concepts.len()
        )));
    }
    let feature_dim = train
        .features
        .first()
        .map(|f| f.len())
        .ok_or_else(|| Error::Invalid {
            field: "batch",
            message: "must be nonempty".into(),
        })?;
    let mut model = KdModel::init(
        feature_dim,
        config.hidden_dim,
        train.concepts.clone(),
        config.init_scale,
        config.seed,
    )?;
    let initial = kd_loss(&model, &train.features, &train.targets, &config.seen_mask)?;
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let grad = kd_gradient(&model, &train.features, &train.targets, &config.seen_mask)?;
        let lr = config.learning_rate;
        for (row, grow) in model.w1.iter_mut().zip(&grad.w1) {
            for (w, g) in row.iter_mut().zip(grow) {
                *w -= lr * g;
            }
        }
        for (b, g) in model.b1.iter_mut().zip(&grad.b1) {
            *b -= lr * g;
        }
        for (row, grow) in model.w2.iter_mut().zip(&grad.w2) {
            for (w, g) in row.iter_mut().zip(grow) {
                *w -= lr * g;
            }
        }
        for (b, g) in model.b2.iter_mut().zip(&grad.b2) {
            *b -= lr * g;
        }
        let loss = kd_loss(&model, &train.features, &train.targets, &config.seen_mask)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.push(loss);
    }
    if config.epochs > 0 {
        let last = *history.last().expect("epochs > 0");
        if last >= initial {
            return Err(Error::NoImprovement {
                epochs: config.epochs,
                initial,
                last,
            });
        }
    }
    Ok((model, history))
}

/// Forward pass over a batch, producing a full score table (all concepts,
/// including unseen; the mask applies only to the loss).
pub fn kd_predict(
    model: &KdModel,
    location_ids: &[String],
    features: &[Vec<f64>],
) -> Result<ScoreTable> {
    if location_ids.len() != features.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} location ids vs {} feature rows",
            location_ids.len(),
            features.len()
        )));
    }
    let mut values = vec![0.0f64; model.num_concepts * location_ids.len()];
    for (l, x) in features.iter().enumerate() {
        let out = model.predict_one(x)?;
        for (c, v) in out.iter().enumerate() {
            values[c * location_ids.len() + l] = *v;
        }
    }
    ScoreTable::new(model.concepts.clone(), location_ids.to_vec(), values)
}

/// Convenience: KD scores over a set of world locations.
pub fn kd_predict_world(model: &KdModel, world: &World, locations: &[String]) -> Result<ScoreTable> {
    let features: Vec<Vec<f64>> = locations
        .iter()
        .map(|l| Ok(world.lr_features[world.location_index(l)?].clone()))
        .collect::<Result<_>>()?;
    kd_predict(model, locations, &features)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_model() -> KdModel {
        KdModel {
            hidden_dim: 2,
            feature_dim: 3,
            num_concepts: 2,
            w1: vec![vec![0.3, -0.2, 0.5], vec![-0.4, 0.1, 0.2]],
            b1: vec![0.05, -0.1],
            w2: vec![vec![0.7, -0.3], vec![0.2, 0.6]],
            b2: vec![0.0, 0.1],
            concepts: vec!["a".into(), "b".into()],
        }
    }

    #[test]
    fn zero_parameters_predict_one_half() {
        let mut model = toy_model();
        model.w1.iter_mut().flatten().for_each(|w| *w = 0.0);
        model.w2.iter_mut().flatten().for_each(|w| *w = 0.0);
        model.b1.iter_mut().for_each(|b| *b = 0.0);
        model.b2.iter_mut().for_each(|b| *b = 0.0);
        let out = model.predict_one(&[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(out, vec![0.5, 0.5]);
    }

    #[test]
    fn predictions_stay_inside_unit_interval() {
        let model = toy_model();
        for x in [[1e6, -1e6, 1e6], [-1e3, 0.0, 1e3], [0.0, 0.0, 0.0]] {
            for v in model.predict_one(&x).unwrap() {
                assert!(v > 0.0 && v < 1.0);
            }
        }
    }

    #[test]
    fn loss_is_squared_error_on_seen_only() {
        let model = toy_model();
        let x = vec![vec![0.1, 0.2, 0.3]];
        let out = model.predict_one(&x[0]).unwrap();
        // Exact fit on the seen concept, arbitrary unseen target.
        let targets = vec![vec![out[0], 0.99]];
        let loss = kd_loss(&model, &x, &targets, &[true, false]).unwrap();
        assert!(loss.abs() < 1e-30);

        let targets2 = vec![vec![out[0], 0.01]];
        let loss2 = kd_loss(&model, &x, &targets2, &[true, false]).unwrap();
        assert_eq!(loss, loss2);
    }

    #[test]
    fn single_cell_loss_is_the_squared_difference() {
        // Force prediction 0.5 with zero weights, target 1.0: loss = 0.25.
        let mut model = toy_model();
        model.w1.iter_mut().flatten().for_each(|w| *w = 0.0);
        model.w2.iter_mut().flatten().for_each(|w| *w = 0.0);
        model.b1.iter_mut().for_each(|b| *b = 0.0);
        model.b2.iter_mut().for_each(|b| *b = 0.0);
        let loss = kd_loss(
            &model,
            &[vec![0.0, 0.0, 0.0]],
            &[vec![1.0, 0.3]],
            &[true, false],
        )
        .unwrap();
        assert!((loss - 0.25).abs() < 1e-15);
    }

    #[test]
    fn duplicated_batch_doubles_the_gradient() {
        let model = toy_model();
        let x = vec![vec![0.4, -0.6, 0.9], vec![0.0, 0.2, -0.3]];
        let t = vec![vec![0.8, 0.1], vec![0.2, 0.7]];
        let mask = vec![true, true];
        let single = kd_gradient(&model, &x, &t, &mask).unwrap();
        let mut x2 = x.clone();
        x2.extend(x.clone());
        let mut t2 = t.clone();
        t2.extend(t.clone());
        let double = kd_gradient(&model, &x2, &t2, &mask).unwrap();
        for (a, b) in single.w1.iter().flatten().zip(double.w1.iter().flatten()) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
        for (a, b) in single.b2.iter().zip(&double.b2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unseen_rows_get_zero_gradient() {
        let model = toy_model();
        let x = vec![vec![0.4, -0.6, 0.9]];
        let t = vec![vec![0.8, 0.1]];
        let grad = kd_gradient(&model, &x, &t, &[true, false]).unwrap();
        assert!(grad.w2[1].iter().all(|&g| g == 0.0));
        assert_eq!(grad.b2[1], 0.0);
        // Hidden-layer gradients may be nonzero through the seen concept.
        assert!(grad.w2[0].iter().any(|&g| g != 0.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let model = toy_model();
        let x = vec![vec![0.4, -0.6, 0.9], vec![0.0, 0.2, -0.3], vec![1.0, 1.0, 0.5]];
        let t = vec![vec![0.8, 0.1], vec![0.2, 0.7], vec![0.5, 0.5]];
        let mask = vec![true, true];
        let grad = kd_gradient(&model, &x, &t, &mask).unwrap();
        let step = 1e-5;
        let check = |set: &dyn Fn(&mut KdModel, f64), analytic: f64| {
            let mut plus = model.clone();
            set(&mut plus, step);
            let mut minus = model.clone();
            set(&mut minus, -step);
            let numeric = (kd_loss(&plus, &x, &t, &mask).unwrap()
                - kd_loss(&minus, &x, &t, &mask).unwrap())
                / (2.0 * step);
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
            assert!(rel < 1e-4, "numeric {numeric} vs analytic {analytic}");
        };
        check(&|m, e| m.w1[1][2] += e, grad.w1[1][2]);
        check(&|m, e| m.b1[0] += e, grad.b1[0]);
        check(&|m, e| m.w2[0][1] += e, grad.w2[0][1]);
        check(&|m, e| m.b2[1] += e, grad.b2[1]);
    }

    fn toy_train_set() -> TrainSet {
        // Learnable mapping: feature sign determines the target.
        let features: Vec<Vec<f64>> = (0..16)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                vec![s, 0.5 * s, -0.25 * s]
            })
            .collect();
        let targets: Vec<Vec<f64>> = (0..16)
            .map(|i| {
                let hi = if i % 2 == 0 { 0.9 } else { 0.1 };
                vec![hi, 1.0 - hi]
            })
            .collect();
        TrainSet {
            location_ids: (0..16).map(|i| format!("L{i:02}")).collect(),
            features,
            targets,
            concepts: vec!["a".into(), "b".into()],
        }
    }

    #[test]
    fn zero_epochs_returns_the_initialization() {
        let train = toy_train_set();
        let mut config = TrainConfig::new(3, vec![true, true]);
        config.hidden_dim = 4;
        config.epochs = 0;
        let (model, history) = train_kd(&train, &config).unwrap();
        let reference = KdModel::init(3, 4, train.concepts.clone(), config.init_scale, 3).unwrap();
        assert_eq!(model, reference);
        assert!(history.is_empty());
    }

    #[test]
    fn training_is_deterministic_and_improves() {
        let train = toy_train_set();
        let mut config = TrainConfig::new(3, vec![true, true]);
        config.hidden_dim = 4;
        config.epochs = 200;
        let (a, hist_a) = train_kd(&train, &config).unwrap();
        let (b, hist_b) = train_kd(&train, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(hist_a, hist_b);
        let initial = kd_loss(
            &KdModel::init(3, 4, train.concepts.clone(), config.init_scale, 3).unwrap(),
            &train.features,
            &train.targets,
            &config.seen_mask,
        )
        .unwrap();
        assert!(*hist_a.last().unwrap() < initial);
    }

    #[test]
    fn model_json_roundtrip() {
        let model = toy_model();
        let text = model.to_json().unwrap();
        let back = KdModel::from_json(&text).unwrap();
        assert_eq!(model, back);
        assert!(text.contains("\"W1\""));
    }

    #[test]
    fn inconsistent_model_json_is_rejected() {
        let mut model = toy_model();
        model.b2.pop();
        let text = model.to_json().unwrap();
        assert!(KdModel::from_json(&text).is_err());
    }
}
