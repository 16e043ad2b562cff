//! Product-rating dynamics under herding effects.
//!
//! - [`opinion`], [`weights`], [`ratings`]: rating scales, distributions on
//!   the simplex, aggregation weight rules and the historical aggregate.
//! - [`herding`]: the generative rating model and misbehavior injection.
//! - [`speed`]: convergence-speed metrics, tail bounds and minimum-rating
//!   sample sizes.
//! - [`inference`]: maximum-likelihood estimation of the ground truth and
//!   the effective herding strength.
//! - [`experiment`]: seeded Monte Carlo harnesses.
//! - [`ingest`]: CSV datasets and the per-item analysis pipeline.

pub mod error;
pub mod experiment;
pub mod herding;
pub mod inference;
pub mod ingest;
pub mod opinion;
pub mod ratings;
pub mod rng;
pub mod simplex;
pub mod speed;
pub mod weights;

pub use error::{Error, Result};
pub use herding::{simulate, HerdingParams, MisbehaviorSpec, SequenceSpec, Simulator};
pub use inference::{infer, InferenceConfig, InferenceResult};
pub use opinion::{average_score, majority, OpinionDistribution, RatingScale};
pub use ratings::{aggregate, aggregate_step, RatingSequence};
pub use speed::{phi, phi_misbehavior, varphi, SpeedCurve};
pub use weights::{normalized_weight, WeightRule};
