//! Seeded Monte Carlo harnesses.
//!
//! Every round derives its own generator stream from the base seed and the
//! round number, and rounds are reduced in index order, so results do not
//! depend on thread count or scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herding::{simulate, HerdingParams, MisbehaviorSpec, Simulator};
use crate::inference::{infer, relative_errors, InferenceConfig};
use crate::rng::derive_seed;

/// Simulate-then-infer error study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorStudy {
    pub params: HerdingParams,
    pub sizes: Vec<usize>,
    pub rounds: usize,
    pub misbehavior: Option<MisbehaviorSpec>,
    pub inference: InferenceConfig,
    pub seed: u64,
}

/// One simulate-infer round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub n: usize,
    pub round: usize,
    pub e_alpha: f64,
    pub e_gamma: f64,
    pub gamma_tilde_hat: f64,
}

/// Mean relative errors at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    pub e_alpha_mean: f64,
    pub e_gamma_mean: f64,
    /// Standard errors of the two means.
    pub e_alpha_se: f64,
    pub e_gamma_se: f64,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub rows: Vec<ErrorRow>,
    pub samples: Vec<ErrorSample>,
}

impl ErrorStudy {
    /// The estimation target `gamma~* = (1 - eta) gamma`; parameters must be constant.
    pub fn gamma_tilde_star(&self) -> f64 {
        self.params.gamma_tilde(1)
    }

    pub fn run(&self) -> Result<ErrorCurve> {
        if self.rounds == 0 {
            return Err(Error::Domain {
                name: "rounds",
                value: 0.0,
                domain: "[1, inf)",
            });
        }
        let g_star = self.gamma_tilde_star();
        let jobs: Vec<(usize, usize)> = self
            .sizes
            .iter()
            .flat_map(|&n| (0..self.rounds).map(move |r| (n, r)))
            .collect();
        let samples = jobs
            .into_par_iter()
            .map(|(n, round)| {
                let sim_seed = derive_seed(self.seed, (n as u64) << 32 | round as u64);
                let ratings = simulate(&self.params, n, sim_seed, self.misbehavior.as_ref())?;
                let config = InferenceConfig {
                    seed: derive_seed(sim_seed, 1),
                    ..self.inference.clone()
                };
                let result = infer(&ratings, &self.params.rule, &config)?;
                let (e_alpha, e_gamma) = relative_errors(&result, &self.params.alpha, g_star)?;
                Ok(ErrorSample {
                    n,
                    round,
                    e_alpha,
                    e_gamma,
                    gamma_tilde_hat: result.gamma_tilde_hat,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = self
            .sizes
            .iter()
            .map(|&n| {
                let at: Vec<&ErrorSample> = samples.iter().filter(|s| s.n == n).collect();
                let (ma, sa) = mean_and_se(at.iter().map(|s| s.e_alpha));
                let (mg, sg) = mean_and_se(at.iter().map(|s| s.e_gamma));
                ErrorRow {
                    n,
                    e_alpha_mean: ma,
                    e_gamma_mean: mg,
                    e_alpha_se: sa,
                    e_gamma_se: sg,
                    rounds: at.len(),
                }
            })
            .collect();
        Ok(ErrorCurve { rows, samples })
    }
}

/// Sample mean and standard error of the mean (zero error for one sample).
pub fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `runs` independent simulations up to the largest checkpoint and
/// returns `beta_i` at each checkpoint: `result[run][checkpoint][level]`.
pub fn beta_snapshots(
    params: &HerdingParams,
    checkpoints: &[usize],
    runs: usize,
    seed: u64,
    misbehavior: Option<&MisbehaviorSpec>,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    let horizon = sorted.last().copied().unwrap_or(0);
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut sim = Simulator::new(params, horizon, derive_seed(seed, run as u64), misbehavior)?;
            let mut snaps = Vec::with_capacity(checkpoints.len());
            for &cp in checkpoints {
                while sim.position() < cp {
                    sim.step();
                }
                snaps.push(sim.beta().to_vec());
            }
            Ok(snaps)
        })
        .collect()
}

/// Median of `|beta_i - alpha|_1` across runs, per checkpoint.
pub fn median_l1_deviation(
    params: &HerdingParams,
    checkpoints: &[usize],
    runs: usize,
    seed: u64,
    misbehavior: Option<&MisbehaviorSpec>,
) -> Result<Vec<f64>> {
    let snaps = beta_snapshots(params, checkpoints, runs, seed, misbehavior)?;
    let alpha = params.alpha.probs();
    Ok((0..checkpoints.len())
        .map(|c| {
            let mut d: Vec<f64> = snaps
                .iter()
                .map(|run| run[c].iter().zip(alpha).map(|(b, a)| (b - a).abs()).sum())
                .collect();
            median(&mut d)
        })
        .collect())
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fraction of runs with `|beta_{i,m} - alpha_m| > eps`:
/// `result[checkpoint][eps][level]`.
pub fn exceedance_frequencies(
    params: &HerdingParams,
    checkpoints: &[usize],
    epsilons: &[f64],
    runs: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let snaps = beta_snapshots(params, checkpoints, runs, seed, None)?;
    let alpha = params.alpha.probs();
    Ok((0..checkpoints.len())
        .map(|c| {
            epsilons
                .iter()
                .map(|&eps| {
                    (0..alpha.len())
                        .map(|m| {
                            let hits = snaps
                                .iter()
                                .filter(|run| (run[c][m] - alpha[m]).abs() > eps)
                                .count();
                            hits as f64 / runs as f64
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}
