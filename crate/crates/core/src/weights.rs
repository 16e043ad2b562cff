//! Aggregation weight sequences `w_i` and their normalized form
//! `w~_i = w_i / sum_{j<=i} w_j`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the `j`-th historical rating is weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightRule {
    /// `w_j = 1`: the plain average.
    Unweighted,
    /// `w_j = j^c`, recency aware for `c > 0`.
    PowerLaw { c: f64 },
    /// Explicit finite sequence, held as natural logs so that fast-growing
    /// sequences such as `2^j` stay representable. Zero weights are `-inf`.
    Custom { log_weights: Arc<[f64]> },
}

impl WeightRule {
    pub fn power_law(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Domain {
                name: "c",
                value: c,
                domain: "[0, inf)",
            });
        }
        Ok(if c == 0.0 {
            WeightRule::Unweighted
        } else {
            WeightRule::PowerLaw { c }
        })
    }

    pub fn custom(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidWeights(
                "weights must be finite and nonnegative".into(),
            ));
        }
        Self::custom_log(weights.iter().map(|w| w.ln()).collect())
    }

    /// Custom rule from `ln w_j`; `-inf` encodes a zero weight.
    pub fn custom_log(log_weights: Vec<f64>) -> Result<Self> {
        match log_weights.first() {
            None => return Err(Error::InvalidWeights("empty sequence".into())),
            Some(lw) if !lw.is_finite() => {
                return Err(Error::InvalidWeights("w_1 must be positive".into()))
            }
            _ => {}
        }
        if log_weights.iter().any(|lw| lw.is_nan() || *lw == f64::INFINITY) {
            return Err(Error::InvalidWeights("weights must be finite".into()));
        }
        Ok(WeightRule::Custom {
            log_weights: log_weights.into(),
        })
    }

    /// Recency exponent `c`, if this is a member of the `i^c` family.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            WeightRule::Unweighted => Some(0.0),
            WeightRule::PowerLaw { c } => Some(*c),
            WeightRule::Custom { .. } => None,
        }
    }

    /// Number of defined weights (`None` for the infinite families).
    pub fn len(&self) -> Option<usize> {
        match self {
            WeightRule::Custom { log_weights } => Some(log_weights.len()),
            _ => None,
        }
    }

    pub(crate) fn check_covers(&self, n: usize) -> Result<()> {
        match self.len() {
            Some(len) if len < n => Err(Error::IndexOutOfRange { index: n, len }),
            _ => Ok(()),
        }
    }

    /// `w~_1, w~_2, ...` in order.
    pub fn normalized(&self) -> NormalizedWeights<'_> {
        NormalizedWeights {
            rule: self,
            index: 0,
            ratio: 0.0,
            log_total: f64::NEG_INFINITY,
        }
    }

    /// `ln w_j - ln w_n` for `j = 1..=n`: weights rescaled so the last is one.
    pub(crate) fn relative_log_weights(&self, n: usize) -> Result<Vec<f64>> {
        self.check_covers(n)?;
        Ok(match self {
            WeightRule::Unweighted => vec![0.0; n],
            WeightRule::PowerLaw { c } => {
                let ln_n = (n as f64).ln();
                (1..=n).map(|j| c * ((j as f64).ln() - ln_n)).collect()
            }
            WeightRule::Custom { log_weights } => {
                let top = log_weights[..n]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                log_weights[..n].iter().map(|lw| lw - top).collect()
            }
        })
    }
}

/// One element of the normalized weight sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedWeight {
    /// 1-based index `i`.
    pub index: usize,
    /// `w~_i`.
    pub value: f64,
    /// `sum_{j<i} w_j / w_i`, so that `w~_i = 1 / (1 + ratio)` and
    /// `1 - w~_i = ratio / (1 + ratio)`. Infinite when `w_i = 0`.
    pub ratio: f64,
}

/// Iterator over normalized weights.
///
/// The power-law family is advanced through the ratio recursion
/// `r_{i+1} = (r_i + 1) * (i / (i + 1))^c`, which never forms `i^c` itself.
#[derive(Debug, Clone)]
pub struct NormalizedWeights<'a> {
    rule: &'a WeightRule,
    index: usize,
    ratio: f64,
    log_total: f64,
}

impl Iterator for NormalizedWeights<'_> {
    type Item = NormalizedWeight;

    fn next(&mut self) -> Option<NormalizedWeight> {
        let prev = self.index;
        self.index += 1;
        let ratio = match self.rule {
            WeightRule::Unweighted => prev as f64,
            WeightRule::PowerLaw { c } => {
                if prev == 0 {
                    0.0
                } else {
                    (self.ratio + 1.0) * (-c * (1.0 / prev as f64).ln_1p()).exp()
                }
            }
            WeightRule::Custom { log_weights } => {
                let lw = *log_weights.get(prev)?;
                let r = (self.log_total - lw).exp();
                self.log_total = log_add_exp(self.log_total, lw);
                r
            }
        };
        self.ratio = ratio;
        Some(NormalizedWeight {
            index: self.index,
            value: 1.0 / (1.0 + ratio),
            ratio,
        })
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `w~_i` for a single 1-based index.
pub fn normalized_weight(rule: &WeightRule, i: usize) -> Result<f64> {
    if i == 0 {
        return Err(Error::IndexOutOfRange {
            index: 0,
            len: rule.len().unwrap_or(usize::MAX),
        });
    }
    rule.check_covers(i)?;
    Ok(rule
        .normalized()
        .nth(i - 1)
        .expect("index checked against rule length")
        .value)
}

/// Outcome of checking `sum w~_i = inf` and `sum w~_i^2 < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceVerdict {
    /// Proved for the family (`w~_i ~ (c+1)/i`).
    SatisfiedAnalytic,
    /// Known to fail for the family.
    ViolatedAnalytic,
    /// Finite-horizon evidence consistent with the condition.
    HeuristicPass,
    /// Finite-horizon evidence against the condition.
    HeuristicFail,
}

impl ConvergenceVerdict {
    pub fn is_heuristic(self) -> bool {
        matches!(self, Self::HeuristicPass | Self::HeuristicFail)
    }

    pub fn caveat(self) -> Option<&'static str> {
        self.is_heuristic().then_some(
            "finite-horizon partial sums only: the linear sum must exceed 0.5*ln(H) and \
             the squared tail over (H/2, H] must be under 10% of the squared head; \
             this is evidence, not a proof",
        )
    }
}

/// Decides whether a rule meets the almost-sure convergence condition.
///
/// The `i^c` family is settled analytically. Custom rules are checked over
/// `min(horizon, len)` weights.
pub fn check_convergence_condition(rule: &WeightRule, horizon: usize) -> ConvergenceVerdict {
    if rule.exponent().is_some() {
        return ConvergenceVerdict::SatisfiedAnalytic;
    }
    let h = rule.len().map_or(horizon, |len| len.min(horizon));
    if h < 2 {
        return ConvergenceVerdict::HeuristicFail;
    }
    let half = h / 2;
    let (mut linear, mut head_sq, mut tail_sq) = (0.0, 0.0, 0.0);
    for nw in rule.normalized().take(h) {
        linear += nw.value;
        let sq = nw.value * nw.value;
        if nw.index <= half {
            head_sq += sq;
        } else {
            tail_sq += sq;
        }
    }
    if linear > 0.5 * (h as f64).ln() && tail_sq < 0.1 * head_sq {
        ConvergenceVerdict::HeuristicPass
    } else {
        ConvergenceVerdict::HeuristicFail
    }
}
