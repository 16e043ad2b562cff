//! Rating scales and opinion distributions on the probability simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the sum of a probability vector.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// An `M`-level cardinal rating metric with levels `1..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct RatingScale(usize);

impl RatingScale {
    pub fn new(levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidScale(levels));
        }
        Ok(Self(levels))
    }

    /// The five-star scale used throughout the experiments.
    pub fn five_star() -> Self {
        Self(5)
    }

    pub fn levels(self) -> usize {
        self.0
    }

    pub fn contains(self, level: usize) -> bool {
        (1..=self.0).contains(&level)
    }

    pub fn check(self, level: usize) -> Result<()> {
        if self.contains(level) {
            Ok(())
        } else {
            Err(Error::RatingOutOfRange {
                rating: level,
                levels: self.0,
            })
        }
    }
}

impl TryFrom<usize> for RatingScale {
    type Error = Error;
    fn try_from(v: usize) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RatingScale> for usize {
    fn from(s: RatingScale) -> usize {
        s.0
    }
}

/// A probability vector over the levels of a [`RatingScale`].
///
/// Used for the ground truth, the historical aggregate after `i` ratings,
/// the initial opinion a new rater forms, and every rating pmf. Entry `k`
/// holds the mass of level `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OpinionDistribution {
    probs: Vec<f64>,
}

impl OpinionDistribution {
    /// Validates `probs` without renormalizing: entries must lie in `[0, 1]`
    /// and sum to one within [`SIMPLEX_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        RatingScale::new(probs.len())?;
        if let Some((k, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return Err(Error::NotOnSimplex(format!("entry {} = {p}", k + 1)));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::NotOnSimplex(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn on_scale(scale: RatingScale, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != scale.levels() {
            return Err(Error::ScaleMismatch {
                expected: scale.levels(),
                got: probs.len(),
            });
        }
        Self::new(probs)
    }

    /// Point mass on `level` (the basis vector `e_level`).
    pub fn degenerate(scale: RatingScale, level: usize) -> Result<Self> {
        scale.check(level)?;
        let mut probs = vec![0.0; scale.levels()];
        probs[level - 1] = 1.0;
        Ok(Self { probs })
    }

    pub fn uniform(scale: RatingScale) -> Self {
        let m = scale.levels();
        Self {
            probs: vec![1.0 / m as f64; m],
        }
    }

    /// Wraps a vector produced by a convex combination of valid
    /// distributions; only clamps rounding residue below zero.
    pub(crate) fn from_convex(mut probs: Vec<f64>) -> Self {
        probs.iter_mut().for_each(|p| *p = p.clamp(0.0, 1.0));
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        Self { probs }
    }

    pub fn scale(&self) -> RatingScale {
        RatingScale(self.probs.len())
    }

    pub fn levels(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mass of a 1-based level.
    pub fn mass(&self, level: usize) -> f64 {
        self.probs[level - 1]
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub(crate) fn same_scale(&self, other: &Self) -> Result<()> {
        if self.levels() != other.levels() {
            return Err(Error::ScaleMismatch {
                expected: self.levels(),
                got: other.levels(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for OpinionDistribution {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OpinionDistribution> for Vec<f64> {
    fn from(d: OpinionDistribution) -> Vec<f64> {
        d.probs
    }
}

/// Average scoring rule: `sum_m m * p_m`.
pub fn average_score(dist: &OpinionDistribution) -> f64 {
    dist.probs
        .iter()
        .enumerate()
        .map(|(k, p)| (k + 1) as f64 * p)
        .sum()
}

/// Majority rule: the level with the largest mass. Ties go to the lowest level.
pub fn majority(dist: &OpinionDistribution) -> usize {
    let mut best = 0;
    for (k, &p) in dist.probs.iter().enumerate().skip(1) {
        if p > dist.probs[best] {
            best = k;
        }
    }
    best + 1
}

/// Largest and second-largest entries (the latter may equal the former on ties).
pub fn top_two(dist: &OpinionDistribution) -> (f64, f64) {
    let mut sorted = dist.probs.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    (sorted[0], sorted[1])
}
