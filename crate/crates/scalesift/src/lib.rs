//! Budget-aware concept retrieval over multi-resolution imagery.
//!
//! The engine decides per concept whether cheap low-resolution or costly
//! high-resolution scoring is appropriate, distills high-resolution knowledge
//! into a low-resolution model, spends a hard acquisition budget on the
//! locations where the models disagree most, and evaluates retrieval quality.
//! A seeded synthetic world supplies exact ground truth so every directional
//! claim is checkable at desk scale; file-backed score caches are the bridge
//! to real models.

pub mod acquisition;
pub mod distill;
pub mod error;
pub mod json;
pub mod metrics;
pub mod modality;
pub mod pipeline;
pub mod rng;
pub mod scoring;
pub mod table;
pub mod world;

pub use error::{Error, Result};
