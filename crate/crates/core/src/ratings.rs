//! Chronological rating sequences and the historical aggregate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opinion::{OpinionDistribution, RatingScale};
use crate::weights::WeightRule;

/// Ratings `R_1..R_N` in arrival order, with a flag marking injected ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingSequence {
    scale: RatingScale,
    ratings: Vec<usize>,
    misbehaving: Vec<bool>,
}

impl RatingSequence {
    pub fn new(scale: RatingScale, ratings: Vec<usize>, misbehaving: Vec<bool>) -> Result<Self> {
        if ratings.len() != misbehaving.len() {
            return Err(Error::LengthMismatch {
                what: "misbehavior flags",
                expected: ratings.len(),
                got: misbehaving.len(),
            });
        }
        for &r in &ratings {
            scale.check(r)?;
        }
        Ok(Self {
            scale,
            ratings,
            misbehaving,
        })
    }

    /// All ratings honest.
    pub fn honest(scale: RatingScale, ratings: Vec<usize>) -> Result<Self> {
        let n = ratings.len();
        Self::new(scale, ratings, vec![false; n])
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn ratings(&self) -> &[usize] {
        &self.ratings
    }

    pub fn misbehaving(&self) -> &[bool] {
        &self.misbehaving
    }

    /// The first `n` ratings.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            scale: self.scale,
            ratings: self.ratings[..n].to_vec(),
            misbehaving: self.misbehaving[..n].to_vec(),
        }
    }
}

/// Weighted empirical distribution of the whole sequence:
/// `beta_m = sum_j w_j 1{R_j = m} / sum_j w_j`.
pub fn aggregate(ratings: &RatingSequence, rule: &WeightRule) -> Result<OpinionDistribution> {
    if ratings.is_empty() {
        return Err(Error::EmptySequence);
    }
    let rel = rule.relative_log_weights(ratings.len())?;
    let mut mass = vec![0.0; ratings.scale().levels()];
    let mut total = 0.0;
    for (&r, lw) in ratings.ratings().iter().zip(rel) {
        let w = lw.exp();
        mass[r - 1] += w;
        total += w;
    }
    mass.iter_mut().for_each(|m| *m /= total);
    Ok(OpinionDistribution::from_convex(mass))
}

/// `beta_{i+1} = (1 - w~_{i+1}) beta_i + w~_{i+1} e_{R_{i+1}}`.
pub fn aggregate_step(
    beta: &OpinionDistribution,
    next_rating: usize,
    w_tilde_next: f64,
) -> Result<OpinionDistribution> {
    beta.scale().check(next_rating)?;
    if !(w_tilde_next > 0.0 && w_tilde_next <= 1.0) {
        return Err(Error::Domain {
            name: "normalized weight",
            value: w_tilde_next,
            domain: "(0, 1]",
        });
    }
    let mut next = beta.probs().to_vec();
    step_in_place(&mut next, next_rating, w_tilde_next);
    Ok(OpinionDistribution::from_convex(next))
}

pub(crate) fn step_in_place(beta: &mut [f64], rating: usize, w_tilde: f64) {
    let keep = 1.0 - w_tilde;
    beta.iter_mut().for_each(|b| *b *= keep);
    beta[rating - 1] += w_tilde;
}

/// `beta_i` for every `i = 1..=N`, folded incrementally. Entry `i - 1` is `beta_i`.
pub fn running_aggregates(ratings: &RatingSequence, rule: &WeightRule) -> Result<Vec<Vec<f64>>> {
    rule.check_covers(ratings.len())?;
    let mut beta = vec![0.0; ratings.scale().levels()];
    let mut out = Vec::with_capacity(ratings.len());
    for (&r, nw) in ratings.ratings().iter().zip(rule.normalized()) {
        step_in_place(&mut beta, r, nw.value);
        out.push(beta.clone());
    }
    Ok(out)
}

/// `beta_{i-1, R_i}` for `i = 2..=N`: the historical mass the `i`-th rater saw
/// on the level they ended up choosing.
pub(crate) fn lagged_masses(ratings: &RatingSequence, rule: &WeightRule) -> Result<Vec<f64>> {
    rule.check_covers(ratings.len())?;
    let r = ratings.ratings();
    let mut beta = vec![0.0; ratings.scale().levels()];
    let mut out = Vec::with_capacity(r.len().saturating_sub(1));
    for (i, nw) in rule.normalized().take(r.len()).enumerate() {
        if i > 0 {
            out.push(beta[r[i] - 1]);
        }
        step_in_place(&mut beta, r[i], nw.value);
    }
    Ok(out)
}
