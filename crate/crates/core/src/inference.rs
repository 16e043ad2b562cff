//! Maximum-likelihood inference of the ground truth `alpha` and the
//! effective herding strength `gamma~ = (1 - eta) gamma`.
//!
//! Under the linear initial-opinion model with constant parameters the
//! `i`-th rating has pmf `gamma~ beta_{i-1} + (1 - gamma~) alpha`, so
//!
//! ```text
//! L(alpha, gamma~) = sum_{i=2..N} ln[ gamma~ beta_{i-1,R_i} + (1 - gamma~) alpha_{R_i} ]
//! ```
//!
//! The objective is not concave. [`infer`] runs projected gradient ascent
//! with Armijo backtracking from several random interior starts and keeps
//! the best one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opinion::{OpinionDistribution, RatingScale};
use crate::ratings::{lagged_masses, RatingSequence};
use crate::rng::HerdRng;
use crate::simplex::project_to_simplex;
use crate::weights::WeightRule;

pub const DEFAULT_PMF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop once one iteration raises the per-rating log-likelihood by less than this.
    pub likelihood_tolerance: f64,
    /// Step tried on the first iteration. Later iterations start from twice
    /// the previously accepted step, capped at `max_step`.
    pub initial_step: f64,
    pub max_step: f64,
    /// Multiplier applied to the step on each rejected trial.
    pub backtrack_factor: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
    pub pmf_floor: f64,
    /// Upper end of the search interval for `gamma~`. Kept below one because
    /// at `gamma~ = 1` the likelihood no longer depends on `alpha`.
    pub gamma_tilde_max: f64,
    pub seed: u64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iterations: 5000,
            likelihood_tolerance: 1e-8,
            initial_step: 1.0,
            max_step: 1e6,
            backtrack_factor: 0.5,
            armijo: 1e-4,
            max_backtracks: 60,
            pmf_floor: DEFAULT_PMF_FLOOR,
            gamma_tilde_max: 0.999,
            seed: 0,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("likelihood_tolerance", self.likelihood_tolerance),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("armijo", self.armijo),
            ("pmf_floor", self.pmf_floor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(0, inf)",
                });
            }
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::Domain {
                name: "backtrack_factor",
                value: self.backtrack_factor,
                domain: "(0, 1)",
            });
        }
        if !(self.gamma_tilde_max > 0.0 && self.gamma_tilde_max <= 1.0) {
            return Err(Error::Domain {
                name: "gamma_tilde_max",
                value: self.gamma_tilde_max,
                domain: "(0, 1]",
            });
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::Domain {
                name: "restarts/max_iterations",
                value: 0.0,
                domain: "[1, inf)",
            });
        }
        Ok(())
    }
}

/// Best restart of [`infer`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub alpha_hat: OpinionDistribution,
    pub gamma_tilde_hat: f64,
    pub log_likelihood: f64,
    pub restarts_run: usize,
    /// Whether the best restart met the tolerance before the iteration cap.
    pub converged: bool,
}

impl InferenceResult {
    /// Single-line JSON record.
    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// The likelihood with the history-dependent part precomputed.
///
/// `beta_{i-1,R_i}` depends only on the ratings and the rule, so it is
/// folded once; every evaluation afterwards is `O(N)`.
#[derive(Debug, Clone)]
pub struct LikelihoodModel {
    scale: RatingScale,
    /// `R_i - 1` for `i = 2..=N`.
    levels: Vec<usize>,
    /// `beta_{i-1,R_i}` for `i = 2..=N`.
    lagged: Vec<f64>,
    floor: f64,
}

impl LikelihoodModel {
    pub fn new(ratings: &RatingSequence, rule: &WeightRule, floor: f64) -> Result<Self> {
        if ratings.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: ratings.len(),
            });
        }
        Ok(Self {
            scale: ratings.scale(),
            levels: ratings.ratings()[1..].iter().map(|r| r - 1).collect(),
            lagged: lagged_masses(ratings, rule)?,
            floor,
        })
    }

    /// Number of likelihood terms (`N - 1`).
    pub fn terms(&self) -> usize {
        self.levels.len()
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    fn value_raw(&self, alpha: &[f64], g: f64) -> f64 {
        self.levels
            .iter()
            .zip(&self.lagged)
            .map(|(&m, &b)| (g * b + (1.0 - g) * alpha[m]).max(self.floor).ln())
            .sum()
    }

    fn gradient_raw(&self, alpha: &[f64], g: f64) -> (Vec<f64>, f64) {
        let mut d_alpha = vec![0.0; alpha.len()];
        let mut d_gamma = 0.0;
        for (&m, &b) in self.levels.iter().zip(&self.lagged) {
            let t = g * b + (1.0 - g) * alpha[m];
            if t > self.floor {
                d_alpha[m] += (1.0 - g) / t;
                d_gamma += (b - alpha[m]) / t;
            }
        }
        (d_alpha, d_gamma)
    }

    pub fn log_likelihood(&self, alpha: &OpinionDistribution, gamma_tilde: f64) -> Result<f64> {
        self.check(alpha, gamma_tilde)?;
        Ok(self.value_raw(alpha.probs(), gamma_tilde))
    }

    /// `(dL/d alpha_m for each m, dL/d gamma~)`.
    pub fn gradient(&self, alpha: &OpinionDistribution, gamma_tilde: f64) -> Result<(Vec<f64>, f64)> {
        self.check(alpha, gamma_tilde)?;
        Ok(self.gradient_raw(alpha.probs(), gamma_tilde))
    }

    fn check(&self, alpha: &OpinionDistribution, gamma_tilde: f64) -> Result<()> {
        if alpha.levels() != self.scale.levels() {
            return Err(Error::ScaleMismatch {
                expected: self.scale.levels(),
                got: alpha.levels(),
            });
        }
        if !(0.0..=1.0).contains(&gamma_tilde) {
            return Err(Error::Domain {
                name: "gamma_tilde",
                value: gamma_tilde,
                domain: "[0, 1]",
            });
        }
        Ok(())
    }
}

/// `L(alpha, gamma~)` with the default pmf floor.
pub fn log_likelihood(
    alpha: &OpinionDistribution,
    gamma_tilde: f64,
    ratings: &RatingSequence,
    rule: &WeightRule,
) -> Result<f64> {
    LikelihoodModel::new(ratings, rule, DEFAULT_PMF_FLOOR)?.log_likelihood(alpha, gamma_tilde)
}

/// Analytic gradient of [`log_likelihood`].
pub fn grad_log_likelihood(
    alpha: &OpinionDistribution,
    gamma_tilde: f64,
    ratings: &RatingSequence,
    rule: &WeightRule,
) -> Result<(Vec<f64>, f64)> {
    LikelihoodModel::new(ratings, rule, DEFAULT_PMF_FLOOR)?.gradient(alpha, gamma_tilde)
}

/// Outcome of one projected-gradient run.
#[derive(Debug, Clone)]
pub(crate) struct Ascent {
    pub alpha: Vec<f64>,
    pub gamma: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    /// Log-likelihood after each iteration, starting with the start point.
    /// Only recorded on request; the tests read it.
    #[allow(dead_code)]
    pub trace: Vec<f64>,
}

/// Projected gradient ascent on the per-rating mean log-likelihood.
///
/// `alpha` and `gamma~` are updated as two blocks, each with its own Armijo
/// backtracking step. The objective is far more curved in `alpha` than in
/// `gamma~`, and a single shared step crawls along `gamma~`.
pub(crate) fn ascend(
    model: &LikelihoodModel,
    mut alpha: Vec<f64>,
    mut gamma: f64,
    config: &InferenceConfig,
    keep_trace: bool,
) -> Ascent {
    let scale = 1.0 / model.terms() as f64;
    gamma = gamma.clamp(0.0, config.gamma_tilde_max);
    let mut value = model.value_raw(&alpha, gamma) * scale;
    let mut trace = Vec::new();
    if keep_trace {
        trace.push(value / scale);
    }
    let mut converged = false;
    let mut hint_alpha = config.initial_step;
    let mut hint_gamma = config.initial_step;
    for _ in 0..config.max_iterations {
        let start = value;

        let g_alpha: Vec<f64> = model.gradient_raw(&alpha, gamma).0.iter().map(|g| g * scale).collect();
        let alpha_step = line_search(config, &mut hint_alpha, value, |step| {
            let trial: Vec<f64> = alpha.iter().zip(&g_alpha).map(|(a, g)| a + step * g).collect();
            let cand = project_to_simplex(&trial);
            let directional: f64 = cand.iter().zip(&alpha).zip(&g_alpha).map(|((c, a), g)| g * (c - a)).sum();
            let v = model.value_raw(&cand, gamma) * scale;
            (cand, v, directional)
        });
        if let Some((a, v)) = alpha_step {
            alpha = a;
            value = v;
        }

        let g_gamma = model.gradient_raw(&alpha, gamma).1 * scale;
        let gamma_step = line_search(config, &mut hint_gamma, value, |step| {
            let cand = (gamma + step * g_gamma).clamp(0.0, config.gamma_tilde_max);
            let v = model.value_raw(&alpha, cand) * scale;
            (cand, v, g_gamma * (cand - gamma))
        });
        if let Some((g, v)) = gamma_step {
            gamma = g;
            value = v;
        }

        if keep_trace {
            trace.push(value / scale);
        }
        if value - start < config.likelihood_tolerance {
            converged = true;
            break;
        }
    }
    Ascent {
        alpha,
        gamma,
        log_likelihood: value / scale,
        converged,
        trace,
    }
}

/// Armijo backtracking from `hint`. `eval(step)` returns the projected
/// candidate, its objective and the first-order gain `g . (candidate - x)`.
/// On success the next hint is twice the accepted step.
fn line_search<T>(
    config: &InferenceConfig,
    hint: &mut f64,
    value: f64,
    mut eval: impl FnMut(f64) -> (T, f64, f64),
) -> Option<(T, f64)> {
    let mut step = *hint;
    for _ in 0..=config.max_backtracks {
        let (cand, v, directional) = eval(step);
        if directional <= 0.0 {
            // projected step does not move: already stationary in this block
            return None;
        }
        if v >= value + config.armijo * directional {
            *hint = (2.0 * step).min(config.max_step);
            return Some((cand, v));
        }
        step *= config.backtrack_factor;
    }
    None
}

/// Random interior start: `alpha` uniform on the simplex, `gamma~` uniform on `[0.05, 0.95]`.
pub(crate) fn starting_point(seed: u64, restart: usize, levels: usize) -> (Vec<f64>, f64) {
    let mut rng = HerdRng::for_stream(seed, restart as u64);
    let alpha = rng.simplex_point(levels);
    let gamma = rng.uniform_in(0.05, 0.95);
    (alpha, gamma)
}

/// Multi-start maximum-likelihood estimate of `(alpha, gamma~)`.
///
/// Restarts run in parallel; the one with the largest log-likelihood wins
/// (ties to the lowest restart index). Deterministic given `config.seed`.
pub fn infer(
    ratings: &RatingSequence,
    rule: &WeightRule,
    config: &InferenceConfig,
) -> Result<InferenceResult> {
    config.validate()?;
    let model = LikelihoodModel::new(ratings, rule, config.pmf_floor)?;
    let levels = ratings.scale().levels();
    let runs: Vec<Ascent> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let (alpha, gamma) = starting_point(config.seed, r, levels);
            ascend(&model, alpha, gamma, config, false)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| {
            if run.log_likelihood > best.log_likelihood {
                run
            } else {
                best
            }
        })
        .expect("at least one restart");
    if !best.log_likelihood.is_finite() {
        return Err(Error::NonFinite(format!(
            "log-likelihood {} at the best restart",
            best.log_likelihood
        )));
    }
    Ok(InferenceResult {
        alpha_hat: OpinionDistribution::from_convex(best.alpha),
        gamma_tilde_hat: best.gamma,
        log_likelihood: best.log_likelihood.min(0.0),
        restarts_run: config.restarts,
        converged: best.converged,
    })
}

/// `E_alpha = |alpha_hat - alpha*|_1 / |alpha*|_1` and
/// `E_gamma = |gamma_hat - gamma*| / gamma*`.
pub fn relative_errors(
    result: &InferenceResult,
    alpha_star: &OpinionDistribution,
    gamma_tilde_star: f64,
) -> Result<(f64, f64)> {
    result.alpha_hat.same_scale(alpha_star)?;
    if gamma_tilde_star == 0.0 {
        return Err(Error::ZeroReference);
    }
    let norm: f64 = alpha_star.probs().iter().map(|p| p.abs()).sum();
    let e_alpha = result.alpha_hat.l1_distance(alpha_star) / norm;
    let e_gamma = (result.gamma_tilde_hat - gamma_tilde_star).abs() / gamma_tilde_star;
    Ok((e_alpha, e_gamma))
}

/// Per-step herding strengths that maximize the unconstrained full-model
/// likelihood for a fixed `(alpha, Theta)`.
///
/// Each term `ln(gamma_i theta_{i,R_{i+1}} + (1 - gamma_i) alpha_{R_{i+1}})`
/// is monotone in `gamma_i`, so the maximizer sits at a corner:
/// `gamma*_i = 0` when `theta_{i,R_{i+1}} <= alpha_{R_{i+1}}`, else 1.
/// Returns `N - 1` values for `i = 1..N-1`; `thetas[i-1]` is `theta_i`.
pub fn optimal_gamma_witness(
    alpha: &OpinionDistribution,
    thetas: &[OpinionDistribution],
    ratings: &RatingSequence,
) -> Result<Vec<f64>> {
    let n = ratings.len();
    check_witness_inputs(alpha, thetas, ratings)?;
    Ok((1..n)
        .map(|i| {
            let next = ratings.ratings()[i];
            if thetas[i - 1].mass(next) <= alpha.mass(next) {
                0.0
            } else {
                1.0
            }
        })
        .collect())
}

/// `sum_{i=1..N-1} ln(gamma_i theta_{i,R_{i+1}} + (1 - gamma_i) alpha_{R_{i+1}})`.
pub fn full_model_log_likelihood(
    alpha: &OpinionDistribution,
    gammas: &[f64],
    thetas: &[OpinionDistribution],
    ratings: &RatingSequence,
) -> Result<f64> {
    let n = ratings.len();
    check_witness_inputs(alpha, thetas, ratings)?;
    if gammas.len() < n.saturating_sub(1) {
        return Err(Error::LengthMismatch {
            what: "herding strengths",
            expected: n - 1,
            got: gammas.len(),
        });
    }
    Ok((1..n)
        .map(|i| {
            let next = ratings.ratings()[i];
            let g = gammas[i - 1];
            (g * thetas[i - 1].mass(next) + (1.0 - g) * alpha.mass(next)).ln()
        })
        .sum())
}

fn check_witness_inputs(
    alpha: &OpinionDistribution,
    thetas: &[OpinionDistribution],
    ratings: &RatingSequence,
) -> Result<()> {
    let n = ratings.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if thetas.len() < n - 1 {
        return Err(Error::LengthMismatch {
            what: "initial opinions",
            expected: n - 1,
            got: thetas.len(),
        });
    }
    if alpha.levels() != ratings.scale().levels() {
        return Err(Error::ScaleMismatch {
            expected: ratings.scale().levels(),
            got: alpha.levels(),
        });
    }
    for theta in &thetas[..n - 1] {
        theta.same_scale(alpha)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herding::{simulate, HerdingParams};

    fn five() -> RatingScale {
        RatingScale::five_star()
    }

    fn seq(r: &[usize]) -> RatingSequence {
        RatingSequence::honest(five(), r.to_vec()).unwrap()
    }

    fn synthetic(n: usize, gamma: f64, seed: u64) -> RatingSequence {
        let alpha = OpinionDistribution::new(vec![0.0, 0.0, 0.1, 0.4, 0.5]).unwrap();
        let p = HerdingParams::constant(alpha, gamma, 0.0, WeightRule::Unweighted).unwrap();
        simulate(&p, n, seed, None).unwrap()
    }

    #[test]
    fn likelihood_examples() {
        let u = WeightRule::Unweighted;
        let uniform = OpinionDistribution::uniform(five());
        let l = log_likelihood(&uniform, 0.0, &seq(&[3, 3]), &u).unwrap();
        assert!((l - 0.2f64.ln()).abs() < 1e-15);
        assert_eq!(log_likelihood(&uniform, 1.0, &seq(&[3, 3]), &u).unwrap(), 0.0);

        // [5,1,5], gamma~ = 1/2, alpha = (1/5, 0, 0, 0, 4/5):
        //   i=2: beta_1 = e_5, R=1 -> 1/2 * 0 + 1/2 * 1/5 = 1/10
        //   i=3: beta_2 = (1/2,0,0,0,1/2), R=5 -> 1/2 * 1/2 + 1/2 * 4/5 = 13/20
        let alpha = OpinionDistribution::new(vec![0.2, 0.0, 0.0, 0.0, 0.8]).unwrap();
        let l = log_likelihood(&alpha, 0.5, &seq(&[5, 1, 5]), &u).unwrap();
        assert!((l - (0.1f64.ln() + 0.65f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn likelihood_needs_two_ratings() {
        let uniform = OpinionDistribution::uniform(five());
        assert!(matches!(
            log_likelihood(&uniform, 0.5, &seq(&[3]), &WeightRule::Unweighted),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
        let cfg = InferenceConfig::default();
        assert!(infer(&seq(&[3]), &WeightRule::Unweighted, &cfg).is_err());
    }

    #[test]
    fn floor_keeps_likelihood_finite() {
        let alpha = OpinionDistribution::degenerate(five(), 5).unwrap();
        let l = log_likelihood(&alpha, 0.0, &seq(&[5, 1]), &WeightRule::Unweighted).unwrap();
        assert!((l - DEFAULT_PMF_FLOOR.ln()).abs() < 1e-9);
        let (g, _) = grad_log_likelihood(&alpha, 0.0, &seq(&[5, 1]), &WeightRule::Unweighted).unwrap();
        assert_eq!(g, vec![0.0; 5]);
    }

    #[test]
    fn gradient_closed_forms() {
        let u = WeightRule::Unweighted;
        let uniform = OpinionDistribution::uniform(five());
        let s = seq(&[2, 3, 3, 5, 3, 1]);
        let (ga, _) = grad_log_likelihood(&uniform, 0.0, &s, &u).unwrap();
        // counts over R_2..R_N: level1:1, level3:3, level5:1 -> count / (1/5)
        let want = [5.0, 0.0, 15.0, 0.0, 5.0];
        for (a, b) in ga.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }

        let alpha = OpinionDistribution::new(vec![0.3, 0.1, 0.2, 0.2, 0.2]).unwrap();
        let g = 0.4;
        let (_, gg) = grad_log_likelihood(&alpha, g, &seq(&[5, 1]), &u).unwrap();
        let term = g * 0.0 + (1.0 - g) * 0.3;
        assert!((gg - (0.0 - 0.3) / term).abs() < 1e-12);
    }

    #[test]
    fn ascent_never_decreases() {
        let s = synthetic(800, 0.7, 3);
        let model = LikelihoodModel::new(&s, &WeightRule::Unweighted, DEFAULT_PMF_FLOOR).unwrap();
        let cfg = InferenceConfig::default();
        for r in 0..5 {
            let (a, g) = starting_point(11, r, 5);
            let run = ascend(&model, a, g, &cfg, true);
            assert!(run.trace.len() > 1);
            for w in run.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9 * w[0].abs(), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn infer_is_deterministic() {
        let s = synthetic(600, 0.6, 8);
        let cfg = InferenceConfig {
            seed: 5,
            restarts: 4,
            ..Default::default()
        };
        let a = infer(&s, &WeightRule::Unweighted, &cfg).unwrap();
        let b = infer(&s, &WeightRule::Unweighted, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.log_likelihood <= 0.0);
        assert!((0.0..=1.0).contains(&a.gamma_tilde_hat));
        assert_eq!(a.restarts_run, 4);
    }

    #[test]
    fn constant_ratings_concentrate_alpha() {
        let s = seq(&vec![5; 200]);
        let r = infer(&s, &WeightRule::Unweighted, &InferenceConfig::default()).unwrap();
        assert!(r.alpha_hat.mass(5) >= 0.9, "{:?}", r);
    }

    #[test]
    fn relative_error_examples() {
        let a5 = OpinionDistribution::degenerate(five(), 5).unwrap();
        let a1 = OpinionDistribution::degenerate(five(), 1).unwrap();
        let mk = |alpha: OpinionDistribution, g| InferenceResult {
            alpha_hat: alpha,
            gamma_tilde_hat: g,
            log_likelihood: -1.0,
            restarts_run: 1,
            converged: true,
        };
        assert_eq!(relative_errors(&mk(a5.clone(), 0.8), &a5, 0.8).unwrap(), (0.0, 0.0));
        assert_eq!(relative_errors(&mk(a1, 0.8), &a5, 0.8).unwrap().0, 2.0);
        let (_, eg) = relative_errors(&mk(a5.clone(), 0.6), &a5, 0.8).unwrap();
        assert!((eg - 0.25).abs() < 1e-15);
        assert!(matches!(
            relative_errors(&mk(a5.clone(), 0.6), &a5, 0.0),
            Err(Error::ZeroReference)
        ));
    }

    #[test]
    fn witness_tie_goes_to_zero() {
        let alpha = OpinionDistribution::uniform(five());
        let s = seq(&[1, 2, 3]);
        let thetas = vec![alpha.clone(), alpha.clone()];
        assert_eq!(optimal_gamma_witness(&alpha, &thetas, &s).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn witness_follows_perfect_thetas() {
        let alpha = OpinionDistribution::new(vec![0.1, 0.2, 0.3, 0.2, 0.2]).unwrap();
        let s = seq(&[4, 2, 5, 5, 1]);
        let thetas: Vec<_> = s.ratings()[1..]
            .iter()
            .map(|&r| OpinionDistribution::degenerate(five(), r).unwrap())
            .collect();
        let g = optimal_gamma_witness(&alpha, &thetas, &s).unwrap();
        assert_eq!(g, vec![1.0; 4]);
        assert_eq!(full_model_log_likelihood(&alpha, &g, &thetas, &s).unwrap(), 0.0);
    }

    #[test]
    fn witness_validates_lengths() {
        let alpha = OpinionDistribution::uniform(five());
        let s = seq(&[1, 2, 3]);
        assert!(matches!(
            optimal_gamma_witness(&alpha, &[alpha.clone()], &s),
            Err(Error::LengthMismatch { .. })
        ));
        let three = OpinionDistribution::uniform(RatingScale::new(3).unwrap());
        assert!(optimal_gamma_witness(&three, &[three.clone(), three.clone()], &s).is_err());
    }

    #[test]
    fn result_json_is_one_line() {
        let r = InferenceResult {
            alpha_hat: OpinionDistribution::uniform(RatingScale::new(2).unwrap()),
            gamma_tilde_hat: 0.25,
            log_likelihood: -3.5,
            restarts_run: 10,
            converged: true,
        };
        let line = r.to_json_line().unwrap();
        assert!(!line.contains('\n'));
        assert_eq!(
            line,
            r#"{"alpha_hat":[0.5,0.5],"gamma_tilde_hat":0.25,"log_likelihood":-3.5,"restarts_run":10,"converged":true}"#
        );
        let back: InferenceResult = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }
}
