//! The generative herding model: how each new rating depends on the
//! displayed history, plus injection of fixed misbehaving ratings.
//!
//! A rater arriving at step `i` forms an initial opinion
//! `theta_{i-1} = (1 - eta_{i-1}) beta_{i-1} + eta_{i-1} alpha` and rates
//! level `m` with probability `gamma_{i-1} theta_{i-1,m} + (1 - gamma_{i-1}) alpha_m`.
//! The first rater sees no history (`theta_0 = alpha`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opinion::{OpinionDistribution, RatingScale};
use crate::ratings::{step_in_place, RatingSequence};
use crate::rng::HerdRng;
use crate::weights::{NormalizedWeights, WeightRule};

/// A per-index parameter sequence: a constant, or `scale * (1 - 1/i) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SequenceSpec {
    Constant { value: f64 },
    Ramp { scale: f64, offset: f64 },
}

impl SequenceSpec {
    pub fn constant(value: f64) -> Self {
        SequenceSpec::Constant { value }
    }

    pub fn ramp(scale: f64, offset: f64) -> Self {
        SequenceSpec::Ramp { scale, offset }
    }

    /// Value at a 1-based index. Index 0 evaluates the ramp as if `1 - 1/i = 0`.
    pub fn at(&self, i: usize) -> f64 {
        match *self {
            SequenceSpec::Constant { value } => value,
            SequenceSpec::Ramp { scale, offset } => {
                if i == 0 {
                    offset
                } else {
                    scale * (1.0 - 1.0 / i as f64) + offset
                }
            }
        }
    }

    /// Infimum and supremum over `i >= 1`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            SequenceSpec::Constant { value } => (value, value),
            SequenceSpec::Ramp { scale, offset } => {
                let limit = scale + offset;
                (offset.min(limit), offset.max(limit))
            }
        }
    }

    fn check_within(&self, name: &'static str, hi: f64, domain: &'static str) -> Result<()> {
        let (lo, up) = self.bounds();
        for v in [lo, up] {
            if !(v.is_finite() && v >= 0.0 && v <= hi) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SequenceSpec::Constant { value } => write!(f, "{value}"),
            SequenceSpec::Ramp { scale, offset } if offset == 0.0 => {
                write!(f, "{scale}*(1-1/i)")
            }
            SequenceSpec::Ramp { scale, offset } => write!(f, "{scale}*(1-1/i)+{offset}"),
        }
    }
}

impl FromStr for SequenceSpec {
    type Err = Error;

    /// Accepts `0.4`, `0.8*(1-1/i)` and `0.6*(1-1/i)+0.1` (whitespace ignored).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSequenceExpr(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Ok(v) = compact.parse::<f64>() {
            return Ok(SequenceSpec::constant(v));
        }
        let (scale, rest) = compact.split_once("*(1-1/i)").ok_or_else(bad)?;
        let scale: f64 = scale.parse().map_err(|_| bad())?;
        let offset = match rest {
            "" => 0.0,
            r => r
                .strip_prefix('+')
                .ok_or_else(bad)?
                .parse()
                .map_err(|_| bad())?,
        };
        Ok(SequenceSpec::ramp(scale, offset))
    }
}

/// Ground truth, herding strength, review-selection accuracy and the
/// aggregation rule: everything needed to generate or analyze ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerdingParams {
    pub alpha: OpinionDistribution,
    pub gamma: SequenceSpec,
    pub eta: SequenceSpec,
    pub rule: WeightRule,
}

impl HerdingParams {
    /// Requires `gamma_i` and `eta_i` in `[0, 1]`.
    ///
    /// `gamma = 1` is admitted so the pure-herding degenerate case can be
    /// simulated; [`satisfies_herding_bound`](Self::satisfies_herding_bound)
    /// reports whether `sup gamma_i < 1` holds.
    pub fn new(
        alpha: OpinionDistribution,
        gamma: SequenceSpec,
        eta: SequenceSpec,
        rule: WeightRule,
    ) -> Result<Self> {
        gamma.check_within("gamma", 1.0, "[0, 1]")?;
        eta.check_within("eta", 1.0, "[0, 1]")?;
        Ok(Self {
            alpha,
            gamma,
            eta,
            rule,
        })
    }

    /// Constant `gamma` and `eta`.
    pub fn constant(alpha: OpinionDistribution, gamma: f64, eta: f64, rule: WeightRule) -> Result<Self> {
        Self::new(
            alpha,
            SequenceSpec::constant(gamma),
            SequenceSpec::constant(eta),
            rule,
        )
    }

    pub fn scale(&self) -> RatingScale {
        self.alpha.scale()
    }

    pub fn satisfies_herding_bound(&self) -> bool {
        self.gamma.bounds().1 < 1.0
    }

    /// Effective herding strength `(1 - eta_i) gamma_i`.
    pub fn gamma_tilde(&self, i: usize) -> f64 {
        (1.0 - self.eta.at(i)) * self.gamma.at(i)
    }
}

/// A `(k, m~, I)` injection: `k = indices.len()` ratings equal to `m_tilde`
/// at the 1-based positions in `indices`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisbehaviorSpec {
    pub m_tilde: usize,
    indices: Vec<usize>,
}

impl MisbehaviorSpec {
    pub fn new(m_tilde: usize, indices: Vec<usize>) -> Result<Self> {
        if m_tilde == 0 {
            return Err(Error::InvalidMisbehavior("injected level must be >= 1".into()));
        }
        if indices.first() == Some(&0) {
            return Err(Error::InvalidMisbehavior("positions are 1-based".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMisbehavior(
                "positions must be strictly increasing".into(),
            ));
        }
        Ok(Self { m_tilde, indices })
    }

    /// `m_tilde` at every position in `first..=last`.
    pub fn block(m_tilde: usize, first: usize, last: usize) -> Result<Self> {
        Self::new(m_tilde, (first..=last).collect())
    }

    /// No injection (`k = 0`, `i_0 = 0`).
    pub fn none(m_tilde: usize) -> Self {
        Self {
            m_tilde,
            indices: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// `i_k`, the last injected position, or 0 when `k = 0`.
    pub fn last_index(&self) -> usize {
        self.indices.last().copied().unwrap_or(0)
    }

    fn validate_for(&self, scale: RatingScale, n: usize) -> Result<()> {
        scale
            .check(self.m_tilde)
            .map_err(|e| Error::InvalidMisbehavior(e.to_string()))?;
        if self.last_index() > n {
            return Err(Error::InvalidMisbehavior(format!(
                "position {} beyond sequence length {n}",
                self.last_index()
            )));
        }
        Ok(())
    }
}

/// `theta = (1 - eta) beta + eta alpha`.
pub fn initial_opinion(
    beta: &OpinionDistribution,
    alpha: &OpinionDistribution,
    eta: f64,
) -> Result<OpinionDistribution> {
    check_unit("eta", eta)?;
    beta.same_scale(alpha)?;
    Ok(OpinionDistribution::from_convex(mix(
        beta.probs(),
        alpha.probs(),
        eta,
    )))
}

/// Rating pmf `gamma theta + (1 - gamma) alpha`.
pub fn next_rating_pmf(
    theta_prev: &OpinionDistribution,
    alpha: &OpinionDistribution,
    gamma_prev: f64,
) -> Result<OpinionDistribution> {
    check_unit("gamma", gamma_prev)?;
    theta_prev.same_scale(alpha)?;
    Ok(OpinionDistribution::from_convex(mix(
        alpha.probs(),
        theta_prev.probs(),
        gamma_prev,
    )))
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: v,
            domain: "[0, 1]",
        })
    }
}

/// `(1 - t) a + t b`.
fn mix(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

/// Step-by-step generator. Exposes the running aggregate so callers can
/// observe `beta_i` without re-aggregating.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    params: &'a HerdingParams,
    misbehavior: Option<&'a MisbehaviorSpec>,
    rng: HerdRng,
    weights: NormalizedWeights<'a>,
    beta: Vec<f64>,
    pmf: Vec<f64>,
    step: usize,
    next_injection: usize,
}

impl<'a> Simulator<'a> {
    /// `horizon` is the maximum number of steps the caller will take; it is
    /// used only to validate the misbehavior positions and rule length.
    pub fn new(
        params: &'a HerdingParams,
        horizon: usize,
        seed: u64,
        misbehavior: Option<&'a MisbehaviorSpec>,
    ) -> Result<Self> {
        if let Some(spec) = misbehavior {
            spec.validate_for(params.scale(), horizon)?;
        }
        params.rule.check_covers(horizon)?;
        let m = params.scale().levels();
        Ok(Self {
            params,
            misbehavior,
            rng: HerdRng::new(seed),
            weights: params.rule.normalized(),
            beta: vec![0.0; m],
            pmf: vec![0.0; m],
            step: 0,
            next_injection: 0,
        })
    }

    /// Draws rating `R_{i}` for the next index and folds it into the history.
    /// Returns the rating and whether it was injected.
    pub fn step(&mut self) -> (usize, bool) {
        let i = self.step + 1;
        let injected = self
            .misbehavior
            .and_then(|s| s.indices.get(self.next_injection).map(|&p| (p, s.m_tilde)))
            .filter(|&(p, _)| p == i);
        let (rating, flagged) = match injected {
            Some((_, level)) => {
                self.next_injection += 1;
                (level, true)
            }
            None => (self.draw_honest(), false),
        };
        let w = self.weights.next().expect("rule length validated").value;
        step_in_place(&mut self.beta, rating, w);
        self.step = i;
        (rating, flagged)
    }

    fn draw_honest(&mut self) -> usize {
        let alpha = self.params.alpha.probs();
        if self.step == 0 {
            return self.rng.categorical(alpha);
        }
        let prev = self.step;
        let eta = self.params.eta.at(prev);
        let gamma = self.params.gamma.at(prev);
        for ((p, &b), &a) in self.pmf.iter_mut().zip(&self.beta).zip(alpha) {
            let theta = (1.0 - eta) * b + eta * a;
            *p = gamma * theta + (1.0 - gamma) * a;
        }
        self.rng.categorical(&self.pmf)
    }

    /// Number of ratings generated so far.
    pub fn position(&self) -> usize {
        self.step
    }

    /// Current historical aggregate `beta_i` (all zeros before the first step).
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
}

/// Generates `n` ratings. Identical arguments always give identical output.
pub fn simulate(
    params: &HerdingParams,
    n: usize,
    seed: u64,
    misbehavior: Option<&MisbehaviorSpec>,
) -> Result<RatingSequence> {
    let mut sim = Simulator::new(params, n, seed, misbehavior)?;
    let (ratings, flags) = (0..n).map(|_| sim.step()).unzip();
    RatingSequence::new(params.scale(), ratings, flags)
}
