//! Independent reference computations shared by the integration tests.
//!
//! Everything here works from raw weights `w_j = j^c` and direct sums, with
//! no use of the library's recursions.

#![allow(dead_code)]

/// `beta_i` for `i = 0..=N` from the defining weighted average
/// (`beta_0` is all zeros).
pub fn beta_prefixes(ratings: &[usize], levels: usize, c: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; levels]];
    for i in 1..=ratings.len() {
        let total: f64 = (1..=i).map(|j| (j as f64).powf(c)).sum();
        let mut b = vec![0.0; levels];
        for j in 1..=i {
            b[ratings[j - 1] - 1] += (j as f64).powf(c) / total;
        }
        out.push(b);
    }
    out
}

/// `sum_{i=2..N} ln(g beta_{i-1,R_i} + (1 - g) alpha_{R_i})` with `alpha`
/// an arbitrary vector (no simplex constraint), for finite differences.
pub fn log_likelihood(alpha: &[f64], g: f64, ratings: &[usize], c: f64) -> f64 {
    let betas = beta_prefixes(ratings, alpha.len(), c);
    (2..=ratings.len())
        .map(|i| {
            let m = ratings[i - 1] - 1;
            (g * betas[i - 1][m] + (1.0 - g) * alpha[m]).ln()
        })
        .sum()
}

/// Central differences of [`log_likelihood`] in every `alpha_m` and in `g`.
pub fn finite_difference_gradient(alpha: &[f64], g: f64, ratings: &[usize], c: f64, h: f64) -> (Vec<f64>, f64) {
    let d_alpha = (0..alpha.len())
        .map(|m| {
            let mut up = alpha.to_vec();
            let mut down = alpha.to_vec();
            up[m] += h;
            down[m] -= h;
            (log_likelihood(&up, g, ratings, c) - log_likelihood(&down, g, ratings, c)) / (2.0 * h)
        })
        .collect();
    let d_g = (log_likelihood(alpha, g + h, ratings, c) - log_likelihood(alpha, g - h, ratings, c)) / (2.0 * h);
    (d_alpha, d_g)
}

/// `sum_{i=1..N-1} ln(gamma_i theta_{i,R_{i+1}} + (1 - gamma_i) alpha_{R_{i+1}})`.
pub fn full_model_log_likelihood(alpha: &[f64], gammas: &[f64], thetas: &[Vec<f64>], ratings: &[usize]) -> f64 {
    (1..ratings.len())
        .map(|i| {
            let m = ratings[i] - 1;
            (gammas[i - 1] * thetas[i - 1][m] + (1.0 - gammas[i - 1]) * alpha[m]).ln()
        })
        .sum()
}

/// `phi_i` straight from the product and sum definitions, for constant
/// `gamma~` and `w_j = j^c`, in plain floating point.
pub fn phi_direct(c: f64, gamma_tilde: f64, i: usize) -> f64 {
    let w: Vec<f64> = (1..=i + 1).map(|j| (j as f64).powf(c)).collect();
    let wt = |j: usize| w[j - 1] / w[..j].iter().sum::<f64>();
    let mut varphi = vec![1.0];
    for l in 1..=i {
        varphi.push(varphi[l - 1] * (1.0 - wt(l + 1) * (1.0 - gamma_tilde)));
    }
    let s: f64 = (1..=i).map(|j| wt(j).powi(2) / varphi[j - 1].powi(2)).sum();
    2.0 / (varphi[i - 1].powi(2) * s)
}

/// Small deterministic generator for test inputs (SplitMix64).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// A point of the simplex with every entry at least `floor`.
    pub fn interior_simplex(&mut self, m: usize, floor: f64) -> Vec<f64> {
        let e: Vec<f64> = (0..m).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let s: f64 = e.iter().sum();
        e.iter().map(|x| floor + (1.0 - m as f64 * floor) * x / s).collect()
    }

    pub fn ratings(&mut self, n: usize, levels: usize) -> Vec<usize> {
        (0..n).map(|_| self.int(1, levels)).collect()
    }
}
