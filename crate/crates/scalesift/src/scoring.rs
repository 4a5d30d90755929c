//! Score providers: synthetic LR and HR models, cached tables, and the
//! KD-model route.
//!
//! All providers emit probabilities in [0, 1]; producers of cached scores are
//! expected to normalize before writing. The synthetic HR model scores tiles
//! and is reduced by per-concept max aggregation, so a location counts as
//! positive when any of its tiles does.

use rand::Rng;

use crate::distill::{kd_predict, KdModel};
use crate::error::{Error, Result};
use crate::rng::cell_rng;
use crate::table::ScoreTable;
use crate::world::{mixing_matrix, World};

/// Steepness of the logistic read-out separating evidence from absence.
pub const DEFAULT_BETA: f64 = 6.0;

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Synthetic low-resolution scorer: projects features back to per-concept
/// evidence through the pseudoinverse of the world's mixing matrix, then
/// applies a logistic read-out.
pub struct SyntheticLr<'w> {
    world: &'w World,
    beta: f64,
    /// M x feature_dim pseudoinverse rows.
    pinv: Vec<Vec<f64>>,
}

impl<'w> SyntheticLr<'w> {
    pub fn new(world: &'w World, beta: f64) -> Result<Self> {
        let d = world.spec.feature_dim;
        let m = world.num_concepts();
        let mixing = mixing_matrix(&world.spec);
        let a = nalgebra::DMatrix::from_fn(d, m, |r, c| mixing[r][c]);
        let pinv = a
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Config(format!("mixing matrix pseudoinverse failed: {e}")))?;
        let rows = (0..m).map(|c| pinv.row(c).iter().copied().collect()).collect();
        Ok(SyntheticLr {
            world,
            beta,
            pinv: rows,
        })
    }

    fn evidence(&self, location: usize, concept: usize) -> f64 {
        let x = &self.world.lr_features[location];
        self.pinv[concept]
            .iter()
            .zip(x)
            .map(|(p, v)| p * v)
            .sum()
    }

    pub fn score(&self, locations: &[String], concepts: &[String]) -> Result<ScoreTable> {
        let loc_idx: Vec<usize> = locations
            .iter()
            .map(|l| self.world.location_index(l))
            .collect::<Result<_>>()?;
        let con_idx: Vec<usize> = concepts
            .iter()
            .map(|c| self.world.spec.concept_index(c))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(loc_idx.len() * con_idx.len());
        for &c in &con_idx {
            for &l in &loc_idx {
                let u = self.evidence(l, c);
                values.push(logistic(self.beta * (u - 0.5)).clamp(0.0, 1.0));
            }
        }
        ScoreTable::new(concepts.to_vec(), locations.to_vec(), values)
    }
}

/// Location-scoring provider for the LR role.
pub enum LrProvider<'w> {
    Synthetic(SyntheticLr<'w>),
    Cached(ScoreTable),
    Kd { model: &'w KdModel, world: &'w World },
}

impl<'w> LrProvider<'w> {
    pub fn synthetic(world: &'w World, beta: f64) -> Result<Self> {
        Ok(LrProvider::Synthetic(SyntheticLr::new(world, beta)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LrProvider::Synthetic(_) => "synthetic-lr",
            LrProvider::Cached(_) => "cached",
            LrProvider::Kd { .. } => "kd-model",
        }
    }

    /// Scores every requested (concept, location) cell. Cached providers are
    /// an exact identity on their file contents; a missing cell is a hard
    /// error, never a default.
    pub fn score(&self, locations: &[String], concepts: &[String]) -> Result<ScoreTable> {
        match self {
            LrProvider::Synthetic(scorer) => scorer.score(locations, concepts),
            LrProvider::Cached(table) => table.select(concepts, locations),
            LrProvider::Kd { model, world } => {
                let features: Vec<Vec<f64>> = locations
                    .iter()
                    .map(|l| Ok(world.lr_features[world.location_index(l)?].clone()))
                    .collect::<Result<_>>()?;
                let full = kd_predict(model, locations, &features)?;
                full.select(concepts, locations)
            }
        }
    }
}

/// Tile scores for one location: `tiles[j][c]` follows the requested concept
/// order.
///
/// Fine concepts score the pure logistic read-out of the tile truth. Coarse
/// concepts model the zoomed-in confusion failure: a negative tile is read as
/// positive with probability `hr_noise_coarse` (a lookalike at tile scale),
/// which max-aggregation then amplifies to a location-level false positive.
/// The confusion draw is seeded per (world seed, concept, location, tile), so
/// rescoring any subset is deterministic and order-independent.
pub fn score_hr_tiles(
    world: &World,
    location: &str,
    concepts: &[String],
    beta: f64,
) -> Result<Vec<Vec<f64>>> {
    let li = world.location_index(location)?;
    let con_idx: Vec<usize> = concepts
        .iter()
        .map(|c| world.spec.concept_index(c))
        .collect::<Result<_>>()?;
    let k = world.spec.tiles_per_location;
    let mut tiles = vec![vec![0.0f64; con_idx.len()]; k];
    for (out_c, &c) in con_idx.iter().enumerate() {
        let coarse = !world.spec.is_fine(&world.spec.concepts[c]);
        for (j, tile) in tiles.iter_mut().enumerate() {
            let mut truth = f64::from(world.tile_truths[li][c][j]);
            if coarse && truth == 0.0 && world.spec.hr_noise_coarse > 0.0 {
                let mut rng =
                    cell_rng(world.spec.seed, "hr-noise", &[c as u64, li as u64, j as u64]);
                let u: f64 = rng.random();
                if u < world.spec.hr_noise_coarse {
                    truth = 1.0;
                }
            }
            tile[out_c] = logistic(beta * (truth - 0.5)).clamp(0.0, 1.0);
        }
    }
    Ok(tiles)
}

/// Per-concept maximum over the K tile score vectors.
pub fn aggregate_hr(tiles: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = tiles
        .first()
        .ok_or_else(|| Error::Invalid {
            field: "tiles",
            message: "a location always has at least one tile".into(),
        })?;
    let width = first.len();
    let mut out = vec![0.0f64; width];
    for tile in tiles {
        if tile.len() != width {
            return Err(Error::DimensionMismatch(
                "tile score vectors differ in length".into(),
            ));
        }
        for (c, &v) in tile.iter().enumerate() {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(Error::Invalid {
                    field: "tiles",
                    message: format!("tile score {v} outside [0, 1]"),
                });
            }
            if v > out[c] {
                out[c] = v;
            }
        }
    }
    Ok(out)
}

/// Location-scoring provider for the HR role. The synthetic variant queries
/// tiles lazily, only for the locations actually requested.
pub enum HrProvider<'w> {
    Synthetic { world: &'w World, beta: f64 },
    Cached(ScoreTable),
}

impl<'w> HrProvider<'w> {
    pub fn kind(&self) -> &'static str {
        match self {
            HrProvider::Synthetic { .. } => "synthetic-hr",
            HrProvider::Cached(_) => "cached",
        }
    }

    pub fn location_scores(&self, locations: &[String], concepts: &[String]) -> Result<ScoreTable> {
        match self {
            HrProvider::Synthetic { world, beta } => {
                let mut values = vec![0.0f64; concepts.len() * locations.len()];
                for (l, location) in locations.iter().enumerate() {
                    let tiles = score_hr_tiles(world, location, concepts, *beta)?;
                    let agg = aggregate_hr(&tiles)?;
                    for (c, v) in agg.iter().enumerate() {
                        values[c * locations.len() + l] = *v;
                    }
                }
                ScoreTable::new(concepts.to_vec(), locations.to_vec(), values)
            }
            HrProvider::Cached(table) => table.select(concepts, locations),
        }
    }
}
