//! Euclidean projection onto the probability simplex.

/// Nearest point (in Euclidean distance) of `{x >= 0, sum x = 1}` to `v`.
///
/// Sort-based threshold method: with `u` sorted descending, find the largest
/// `rho` such that `u_rho > (sum_{r<=rho} u_r - 1) / rho`, then shift by that
/// threshold and clip at zero. `O(M log M)`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    assert!(!v.is_empty(), "cannot project an empty vector");
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}
