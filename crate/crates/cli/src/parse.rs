//! Flag value parsers.

use std::fmt;

use herdlab_core::{MisbehaviorSpec, OpinionDistribution, RatingScale, SequenceSpec, WeightRule};

/// A bad flag value. Maps to exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn number(s: &str, what: &str) -> anyhow::Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("{what}: `{s}` is not a number")))
}

pub fn float_list(s: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',').map(|x| number(x, what)).collect()
}

pub fn alpha(s: &str, levels: usize) -> anyhow::Result<OpinionDistribution> {
    let probs = float_list(s, "--alpha")?;
    if probs.len() != levels {
        return Err(usage(format!(
            "--alpha has {} entries but --levels is {levels}",
            probs.len()
        )));
    }
    Ok(OpinionDistribution::new(probs)?)
}

/// `c=<c>` or a bare exponent.
pub fn rule(s: &str) -> anyhow::Result<WeightRule> {
    let v = s.trim();
    let c = v.strip_prefix("c=").unwrap_or(v);
    Ok(WeightRule::power_law(number(c, "--rule")?)?)
}

pub fn sequence(s: &str) -> anyhow::Result<SequenceSpec> {
    Ok(s.parse::<SequenceSpec>()?)
}

pub fn sequence_list(s: &str) -> anyhow::Result<Vec<SequenceSpec>> {
    s.split(',').map(sequence).collect()
}

/// `k,m,indices` where indices are positions or inclusive ranges `a-b`,
/// e.g. `50,5,51-100` or `3,1,10,20,30`.
pub fn misbehavior(s: &str, scale: RatingScale) -> anyhow::Result<MisbehaviorSpec> {
    let bad = || usage(format!("--misbehave `{s}`: expected k,m,indices"));
    let mut parts = s.split(',').map(str::trim);
    let k: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
    let m: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
    let mut indices = Vec::new();
    for p in parts {
        match p.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.parse().map_err(|_| bad())?;
                let b: usize = b.parse().map_err(|_| bad())?;
                indices.extend(a..=b);
            }
            None => indices.push(p.parse().map_err(|_| bad())?),
        }
    }
    if indices.len() != k {
        return Err(usage(format!(
            "--misbehave declares k={k} but lists {} positions",
            indices.len()
        )));
    }
    scale.check(m)?;
    Ok(MisbehaviorSpec::new(m, indices)?)
}

/// Comma list, or `start:stop:step` inclusive of `stop` up to rounding.
pub fn grid(s: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [_] => float_list(s, what),
        [a, b, step] => {
            let (a, b, step) = (number(a, what)?, number(b, what)?, number(step, what)?);
            if !(step > 0.0) || b < a {
                return Err(usage(format!("{what}: bad range `{s}`")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|k| a + k as f64 * step).collect())
        }
        _ => Err(usage(format!("{what}: bad grid `{s}`"))),
    }
}

pub fn usize_list(s: &str, what: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| usage(format!("{what}: `{x}` is not a positive integer")))
        })
        .collect()
}
