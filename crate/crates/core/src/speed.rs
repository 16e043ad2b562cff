//! Convergence-speed metrics for the historical aggregate.
//!
//! For the linear initial-opinion model the deviation `|beta_{i,m} - alpha_m|`
//! obeys `P[|beta_{i,m} - alpha_m| > eps] <= 2 exp(-phi_i eps^2)` with
//!
//! ```text
//! varphi_j = prod_{l=1..j} [1 - w~_{l+1} (1 - gamma~_l)],   varphi_0 = 1
//! phi_i    = 2 / ( varphi_{i-1}^2 * sum_{j=1..i} w~_j^2 / varphi_{j-1}^2 )
//! ```
//!
//! where `gamma~_l = (1 - eta_l) gamma_l`. `varphi_j` decays polynomially,
//! so everything is carried in log space and the inner sum is a running
//! log-sum-exp. Each contraction factor is evaluated as
//! `(r + gamma~) / (1 + r)` with `r = sum_{j<=l} w_j / w_{l+1}`, which stays
//! accurate when `w~` is close to one.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herding::{HerdingParams, MisbehaviorSpec};
use crate::opinion::{top_two, OpinionDistribution};

/// Default cap for index searches.
pub const DEFAULT_HORIZON: usize = 1_000_000;

/// Running `ln(sum exp(t_k))`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSum(f64);

impl LogSum {
    pub(crate) fn new() -> Self {
        LogSum(f64::NEG_INFINITY)
    }

    pub(crate) fn add(&mut self, t: f64) {
        self.0 = crate::weights::log_add_exp(self.0, t);
    }

    pub(crate) fn value(self) -> f64 {
        self.0
    }
}

/// `ln w~_j^2` for `j = 1..=n` and `ln varphi_j` for `j = 0..n`.
struct SpeedTerms {
    log_w_sq: Vec<f64>,
    log_varphi: Vec<f64>,
}

impl SpeedTerms {
    fn compute(params: &HerdingParams, n: usize) -> Result<Self> {
        params.rule.check_covers(n)?;
        let mut log_w_sq = Vec::with_capacity(n);
        let mut log_varphi = Vec::with_capacity(n);
        log_varphi.push(0.0);
        for nw in params.rule.normalized().take(n) {
            log_w_sq.push(-2.0 * nw.ratio.ln_1p());
            if nw.index == 1 {
                continue;
            }
            // factor for l = index - 1, using w~_{l+1} = w~_index
            let l = nw.index - 1;
            let gt = params.gamma_tilde(l);
            let log_factor = if nw.ratio.is_infinite() {
                0.0
            } else if nw.ratio + gt > 0.0 {
                (nw.ratio + gt).ln() - nw.ratio.ln_1p()
            } else {
                return Err(Error::DegenerateRule { step: l });
            };
            let prev = *log_varphi.last().expect("seeded with varphi_0");
            log_varphi.push(prev + log_factor);
        }
        Ok(Self {
            log_w_sq,
            log_varphi,
        })
    }

    /// `ln sum_{j=from..=to} w~_j^2 / varphi_{j-1}^2`.
    fn log_weighted_sum(&self, from: usize, to: usize) -> f64 {
        let mut acc = LogSum::new();
        for j in from..=to {
            acc.add(self.log_w_sq[j - 1] - 2.0 * self.log_varphi[j - 1]);
        }
        acc.value()
    }

    fn log_phi(&self, i: usize, log_sum: f64) -> f64 {
        std::f64::consts::LN_2 - 2.0 * self.log_varphi[i - 1] - log_sum
    }

    /// `phi_1..=phi_n` in one pass.
    fn phi_values(&self) -> Vec<f64> {
        let mut acc = LogSum::new();
        (1..=self.log_w_sq.len())
            .map(|i| {
                acc.add(self.log_w_sq[i - 1] - 2.0 * self.log_varphi[i - 1]);
                self.log_phi(i, acc.value()).exp()
            })
            .collect()
    }
}

/// `varphi_j` (with `varphi_0 = 1`).
pub fn varphi(params: &HerdingParams, j: usize) -> Result<f64> {
    Ok(log_varphi(params, j)?.exp())
}

/// `ln varphi_j`.
pub fn log_varphi(params: &HerdingParams, j: usize) -> Result<f64> {
    let terms = SpeedTerms::compute(params, j + 1)?;
    Ok(terms.log_varphi[j])
}

/// `phi_i` for `i >= 1`.
pub fn phi(params: &HerdingParams, i: usize) -> Result<f64> {
    check_index(i)?;
    let terms = SpeedTerms::compute(params, i)?;
    Ok(terms.log_phi(i, terms.log_weighted_sum(1, i)).exp())
}

/// `phi_1..=phi_n`.
pub fn phi_values(params: &HerdingParams, n: usize) -> Result<Vec<f64>> {
    Ok(SpeedTerms::compute(params, n)?.phi_values())
}

/// `min(1, 2 exp(-phi_i eps^2))`.
pub fn tail_bound(params: &HerdingParams, i: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(tail_bound_from_phi(phi(params, i)?, epsilon))
}

pub fn tail_bound_from_phi(phi: f64, epsilon: f64) -> f64 {
    (2.0 * (-phi * epsilon * epsilon).exp()).min(1.0)
}

/// Speed metric under a `(k, m~, I)` injection.
///
/// Zero for `i <= i_k`. Beyond that,
///
/// ```text
/// x = varphi_{i-1} / (eps * varphi_{i_k - 1})          (x = 0 when k = 0)
/// phi~_i = 1{x <= 1} (1 - x)^2 / ( varphi_{i-1}^2 / 2 * sum_{j=i_k+1..i} w~_j^2 / varphi_{j-1}^2 )
/// ```
///
/// With no injection this is exactly [`phi`].
pub fn phi_misbehavior(
    params: &HerdingParams,
    i: usize,
    spec: &MisbehaviorSpec,
    epsilon: f64,
) -> Result<f64> {
    check_index(i)?;
    check_epsilon(epsilon)?;
    let ik = spec.last_index();
    if i <= ik {
        return Ok(0.0);
    }
    let terms = SpeedTerms::compute(params, i)?;
    let x = if ik == 0 {
        0.0
    } else {
        (terms.log_varphi[i - 1] - terms.log_varphi[ik - 1]).exp() / epsilon
    };
    if x > 1.0 {
        return Ok(0.0);
    }
    let base = terms.log_phi(i, terms.log_weighted_sum(ik + 1, i)).exp();
    Ok((1.0 - x) * (1.0 - x) * base)
}

/// [`phi_misbehavior`] for `i = 1..=n` in one pass.
pub fn phi_misbehavior_values(
    params: &HerdingParams,
    n: usize,
    spec: &MisbehaviorSpec,
    epsilon: f64,
) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    let terms = SpeedTerms::compute(params, n)?;
    let ik = spec.last_index();
    let mut acc = LogSum::new();
    Ok((1..=n)
        .map(|i| {
            if i <= ik {
                return 0.0;
            }
            acc.add(terms.log_w_sq[i - 1] - 2.0 * terms.log_varphi[i - 1]);
            let x = if ik == 0 {
                0.0
            } else {
                (terms.log_varphi[i - 1] - terms.log_varphi[ik - 1]).exp() / epsilon
            };
            if x > 1.0 {
                0.0
            } else {
                (1.0 - x) * (1.0 - x) * terms.log_phi(i, acc.value()).exp()
            }
        })
        .collect())
}

/// Smallest `i <= horizon` with `phi_i >= x`.
///
/// Values within a relative `1e-12` below `x` count as reaching it, so that
/// thresholds hit exactly in exact arithmetic are not lost to rounding.
///
/// `phi_i` is computed over a doubling window until the threshold is
/// crossed. If the computed prefix is non-decreasing the answer is found by
/// binary search, otherwise by a linear scan.
pub fn phi_inverse(params: &HerdingParams, x: f64, horizon: usize) -> Result<usize> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain {
            name: "phi threshold",
            value: x,
            domain: "(0, inf)",
        });
    }
    let horizon = params.rule.len().map_or(horizon, |len| len.min(horizon));
    let mut n = horizon.min(64);
    loop {
        if n == 0 {
            return Err(Error::NotReached { threshold: x, horizon });
        }
        let values = phi_values(params, n)?;
        let target = x * (1.0 - 1e-12);
        if values.iter().any(|&v| v >= target) {
            let monotone = values.windows(2).all(|w| w[0] <= w[1]);
            let idx = if monotone {
                values.partition_point(|&v| v < target)
            } else {
                values.iter().position(|&v| v >= target).expect("crossing exists")
            };
            return Ok(idx + 1);
        }
        if n == horizon {
            return Err(Error::NotReached { threshold: x, horizon });
        }
        n = (2 * n).min(horizon);
    }
}

/// `M^2 (M+1)^2 / (4 eps^2) * ln(2M / delta)`.
pub fn average_rule_threshold(levels: usize, epsilon: f64, delta: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_delta(delta)?;
    let m = levels as f64;
    Ok(m * m * (m + 1.0) * (m + 1.0) / (4.0 * epsilon * epsilon) * (2.0 * m / delta).ln())
}

/// `M^2 (M+1)^2 / gap^2 * ln(2M / delta)` with `gap = alpha_max - alpha_secmax`.
pub fn majority_rule_threshold(alpha: &OpinionDistribution, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let (top, second) = top_two(alpha);
    let gap = top - second;
    if gap <= 0.0 {
        return Err(Error::DegenerateInput(
            "largest and second-largest opinion masses are equal; no unique majority".into(),
        ));
    }
    let m = alpha.levels() as f64;
    Ok(m * m * (m + 1.0) * (m + 1.0) / (gap * gap) * (2.0 * m / delta).ln())
}

/// Ratings needed for the average score to be within `epsilon` of the truth
/// with probability at least `1 - delta`.
pub fn min_ratings_average(
    params: &HerdingParams,
    epsilon: f64,
    delta: f64,
    horizon: usize,
) -> Result<usize> {
    let x = average_rule_threshold(params.scale().levels(), epsilon, delta)?;
    phi_inverse(params, x, horizon)
}

/// Ratings needed for the majority level to be correct with probability at
/// least `1 - delta`.
pub fn min_ratings_majority(
    params: &HerdingParams,
    alpha: &OpinionDistribution,
    delta: f64,
    horizon: usize,
) -> Result<usize> {
    params.alpha.same_scale(alpha)?;
    let x = majority_rule_threshold(alpha, delta)?;
    phi_inverse(params, x, horizon)
}

fn check_index(i: usize) -> Result<()> {
    if i == 0 {
        return Err(Error::Domain {
            name: "rating index",
            value: 0.0,
            domain: "[1, inf)",
        });
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "epsilon",
            value: epsilon,
            domain: "(0, 1]",
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "delta",
            value: delta,
            domain: "(0, 1)",
        })
    }
}

/// `phi_i` and `ln varphi_i` for `i = 1..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedCurve {
    pub params: HerdingParams,
    /// `phi_i`, entry `i - 1`.
    pub phi: Vec<f64>,
    /// `ln varphi_j` for `j = 0..=horizon`.
    pub log_varphi: Vec<f64>,
}

impl SpeedCurve {
    /// Needs `horizon + 1` weights because `varphi_horizon` uses `w~_{horizon+1}`.
    pub fn compute(params: &HerdingParams, horizon: usize) -> Result<Self> {
        let terms = SpeedTerms::compute(params, horizon + 1)?;
        let mut phi = terms.phi_values();
        phi.truncate(horizon);
        Ok(Self {
            params: params.clone(),
            phi,
            log_varphi: terms.log_varphi,
        })
    }

    pub fn horizon(&self) -> usize {
        self.phi.len()
    }

    /// `(i, phi_i)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.phi.iter().enumerate().map(|(k, &v)| (k + 1, v))
    }

    /// CSV with header `i,phi,log_varphi`; row `i` carries `phi_i` and `ln varphi_i`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "phi", "log_varphi"])?;
        for (i, v) in self.points() {
            w.write_record([
                i.to_string(),
                v.to_string(),
                self.log_varphi[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opinion::RatingScale;
    use crate::weights::WeightRule;

    fn params(c: f64, gamma: f64, eta: f64) -> HerdingParams {
        HerdingParams::constant(
            OpinionDistribution::new(vec![0.01, 0.02, 0.07, 0.4, 0.5]).unwrap(),
            gamma,
            eta,
            WeightRule::power_law(c).unwrap(),
        )
        .unwrap()
    }

    /// Literal evaluation of the defining product and sum in plain
    /// floating point, straight from the raw weights.
    fn literal(c: f64, gamma: f64, eta: f64, i: usize) -> (Vec<f64>, f64) {
        let w: Vec<f64> = (1..=i + 1).map(|j| (j as f64).powf(c)).collect();
        let wt = |j: usize| w[j - 1] / w[..j].iter().sum::<f64>();
        let mut vp = vec![1.0];
        for l in 1..=i {
            let prev = vp[l - 1];
            vp.push(prev * (1.0 - wt(l + 1) * (1.0 - gamma + eta * gamma)));
        }
        let s: f64 = (1..=i).map(|j| wt(j).powi(2) / vp[j - 1].powi(2)).sum();
        (vp.clone(), 1.0 / (vp[i - 1].powi(2) / 2.0 * s))
    }

    #[test]
    fn varphi_examples() {
        let iid = params(0.0, 0.0, 0.0);
        assert!((varphi(&iid, 4).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(varphi(&iid, 0).unwrap(), 1.0);
        let (vp, _) = literal(1.0, 0.2, 0.0, 10);
        let v = varphi(&params(1.0, 0.2, 0.0), 10).unwrap();
        assert!((v / vp[10] - 1.0).abs() < 1e-12, "{v} vs {}", vp[10]);
    }

    #[test]
    fn phi_examples() {
        let iid = params(0.0, 0.0, 0.0);
        assert!((phi(&iid, 10).unwrap() - 20.0).abs() < 1e-12);
        for p in [iid, params(3.0, 0.7, 0.2)] {
            assert!((phi(&p, 1).unwrap() - 2.0).abs() < 1e-15);
        }
        let (_, want) = literal(0.5, 0.4, 0.1, 100);
        let got = phi(&params(0.5, 0.4, 0.1), 100).unwrap();
        assert!((got / want - 1.0).abs() < 1e-11, "{got} vs {want}");
        assert!(phi(&params(0.0, 0.0, 0.0), 0).is_err());
    }

    #[test]
    fn log_space_matches_direct_product() {
        for (c, g, e) in [(0.0, 0.3, 0.1), (1.0, 0.4, 0.0), (2.0, 0.9, 0.5), (5.0, 0.2, 0.0)] {
            let curve = SpeedCurve::compute(&params(c, g, e), 50).unwrap();
            let (vp, _) = literal(c, g, e, 50);
            for j in 0..=50 {
                let rel = (curve.log_varphi[j].exp() / vp[j] - 1.0).abs();
                assert!(rel < 1e-10, "c={c} j={j} rel={rel}");
            }
        }
    }

    #[test]
    fn curve_agrees_with_pointwise_phi() {
        let p = params(1.5, 0.3, 0.2);
        let curve = SpeedCurve::compute(&p, 200).unwrap();
        for i in [1, 2, 17, 200] {
            assert!((curve.phi[i - 1] / phi(&p, i).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_bound_examples() {
        let iid = params(0.0, 0.0, 0.0);
        let b = tail_bound(&iid, 10, 1.0).unwrap();
        assert!((b - 2.0 * (-20.0f64).exp()).abs() < 1e-20);
        assert!((b - 4.12e-9).abs() < 1e-11);
        assert_eq!(tail_bound(&iid, 10, 1e-9).unwrap(), 1.0);
        assert!(tail_bound(&iid, 10, 0.0).is_err());
        assert!(tail_bound(&iid, 10, 1.5).is_err());
    }

    #[test]
    fn misbehavior_curve_matches_pointwise() {
        let p = params(0.5, 0.3, 0.1);
        let spec = MisbehaviorSpec::block(5, 3, 8).unwrap();
        let curve = phi_misbehavior_values(&p, 300, &spec, 0.4).unwrap();
        for i in [1, 8, 9, 20, 150, 300] {
            let one = phi_misbehavior(&p, i, &spec, 0.4).unwrap();
            assert!((curve[i - 1] - one).abs() <= 1e-12 * one.max(1.0), "i={i}");
        }
    }

    #[test]
    fn misbehavior_reduces_to_phi_without_injection() {
        let p = params(0.8, 0.4, 0.1);
        let none = MisbehaviorSpec::none(5);
        for i in [1, 2, 50, 999] {
            let a = phi_misbehavior(&p, i, &none, 0.3).unwrap();
            let b = phi(&p, i).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn misbehavior_zero_up_to_last_injection() {
        let p = params(0.0, 0.2, 0.0);
        let spec = MisbehaviorSpec::new(5, vec![3, 8]).unwrap();
        for i in 1..=8 {
            assert_eq!(phi_misbehavior(&p, i, &spec, 0.5).unwrap(), 0.0);
        }
        assert!(phi_misbehavior(&p, 100, &spec, 0.5).unwrap() > 0.0);
    }

    #[test]
    fn misbehavior_literal_single_injection() {
        // (1, 5, {1}), unweighted, no herding: varphi_j = 1/(j+1), w~_j = 1/j
        let p = params(0.0, 0.0, 0.0);
        let spec = MisbehaviorSpec::new(5, vec![1]).unwrap();
        let (i, eps) = (50usize, 0.5);
        let vp = |j: usize| 1.0 / (j as f64 + 1.0);
        let x = vp(i - 1) / (eps * vp(0));
        let s: f64 = (2..=i).map(|j| (1.0 / j as f64).powi(2) / vp(j - 1).powi(2)).sum();
        let want = (1.0 - x).powi(2) / (vp(i - 1).powi(2) / 2.0 * s);
        let got = phi_misbehavior(&p, i, &spec, eps).unwrap();
        assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
        assert!(got <= phi(&p, i).unwrap());
    }

    #[test]
    fn indicator_switches_off_when_too_close() {
        // x = varphi_{i-1} / (eps varphi_{i_k-1}) = i_k / (eps i) > 1
        let p = params(0.0, 0.0, 0.0);
        let spec = MisbehaviorSpec::new(5, vec![10]).unwrap();
        assert_eq!(phi_misbehavior(&p, 15, &spec, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn phi_inverse_examples() {
        let iid = params(0.0, 0.0, 0.0);
        assert_eq!(phi_inverse(&iid, 20.0, 1000).unwrap(), 10);
        assert_eq!(phi_inverse(&iid, 20.5, 1000).unwrap(), 11);
        assert_eq!(phi_inverse(&iid, 2.0, 1000).unwrap(), 1);
        assert_eq!(phi_inverse(&iid, 0.1, 1000).unwrap(), 1);
        assert!(matches!(
            phi_inverse(&iid, 2001.0, 1000),
            Err(Error::NotReached { .. })
        ));
        assert!(phi_inverse(&iid, -1.0, 1000).is_err());

        let p = params(1.0, 0.4, 0.0);
        let values = phi_values(&p, 5000).unwrap();
        let scan = values.iter().position(|&v| v >= 1000.0).unwrap() + 1;
        assert_eq!(phi_inverse(&p, 1000.0, DEFAULT_HORIZON).unwrap(), scan);
    }

    #[test]
    fn min_ratings_average_iid() {
        let iid = params(0.0, 0.0, 0.0);
        // 25 * 36 / (4 * 0.25) * ln(100), then phi_i = 2i
        let x = 900.0 * 100f64.ln();
        assert!((average_rule_threshold(5, 0.5, 0.1).unwrap() - x).abs() < 1e-9);
        let want = (x / 2.0).ceil() as usize;
        assert_eq!(want, 2073);
        assert_eq!(min_ratings_average(&iid, 0.5, 0.1, DEFAULT_HORIZON).unwrap(), want);
        let tighter = min_ratings_average(&iid, 0.4, 0.1, DEFAULT_HORIZON).unwrap();
        assert!(tighter > want);
        let near_one = min_ratings_average(&iid, 0.5, 0.999_999, DEFAULT_HORIZON).unwrap();
        assert_eq!(near_one, ((900.0 * (10.0f64 / 0.999_999).ln()) / 2.0).ceil() as usize);
    }

    #[test]
    fn min_ratings_majority_iid() {
        let iid = params(0.0, 0.0, 0.0);
        let alpha = OpinionDistribution::new(vec![0.01, 0.02, 0.07, 0.4, 0.5]).unwrap();
        let x = 900.0 / 0.01 * 100f64.ln();
        let got_x = majority_rule_threshold(&alpha, 0.1).unwrap();
        assert!((got_x / x - 1.0).abs() < 1e-12);
        let want = (got_x / 2.0).ceil() as usize;
        assert_eq!(min_ratings_majority(&iid, &alpha, 0.1, DEFAULT_HORIZON).unwrap(), want);

        let uniform = OpinionDistribution::uniform(RatingScale::five_star());
        assert!(matches!(
            min_ratings_majority(&iid, &uniform, 0.1, DEFAULT_HORIZON),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn custom_rule_needs_enough_weights() {
        let p = HerdingParams::constant(
            OpinionDistribution::uniform(RatingScale::five_star()),
            0.2,
            0.0,
            WeightRule::custom(&[1.0; 10]).unwrap(),
        )
        .unwrap();
        assert!(phi(&p, 10).is_ok());
        assert!(phi(&p, 11).is_err());
        assert!(varphi(&p, 9).is_ok());
        assert!(varphi(&p, 10).is_err());
    }

    #[test]
    fn curve_csv_layout() {
        let curve = SpeedCurve::compute(&params(0.0, 0.0, 0.0), 3).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,phi,log_varphi");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("3,6,"));
    }
}
