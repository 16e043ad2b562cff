use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use herdlab_core::experiment::ErrorStudy;
use herdlab_core::ingest::{self, ColumnMap, Dataset};
use herdlab_core::speed::{phi_misbehavior_values, phi_values};
use herdlab_core::{
    aggregate, average_score, majority, HerdingParams, InferenceConfig, OpinionDistribution,
    RatingScale, RatingSequence,
};

use crate::output::Run;
use crate::parse::{self, usage};
use crate::{Columns, Common};

/// Upper limit on rows produced by `phi`.
const MAX_PHI_EVALUATIONS: usize = 1_000_000;

fn scale(common: &Common) -> anyhow::Result<RatingScale> {
    Ok(RatingScale::new(common.levels)?)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> herdlab_core::Result<()>) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn load_input(path: &PathBuf, scale: RatingScale, cols: &Columns) -> anyhow::Result<Dataset> {
    let columns = ColumnMap {
        item_id: cols.item_column.clone(),
        order_key: cols.order_column.clone(),
        rating: cols.rating_column.clone(),
    };
    ingest::load_csv(path, scale, &columns).map_err(|e| match e {
        herdlab_core::Error::Io(io) => usage(format!("cannot read {}: {io}", path.display())),
        other => other.into(),
    })
}

fn inference_config(restarts: usize, seed: u64) -> InferenceConfig {
    InferenceConfig {
        restarts,
        seed,
        ..InferenceConfig::default()
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Ground-truth distribution, comma separated.
    #[arg(long)]
    pub alpha: String,
    /// Herding strength: a constant or `a*(1-1/i)`.
    #[arg(long, default_value = "0")]
    pub gamma: String,
    /// Review selection accuracy: a constant or `a*(1-1/i)`.
    #[arg(long, default_value = "0")]
    pub eta: String,
    /// Aggregation rule `c=<c>` (weights i^c).
    #[arg(long, default_value = "c=0")]
    pub rule: String,
    #[arg(long)]
    pub n: usize,
    /// Injection `k,m,indices`, e.g. `50,5,51-100`.
    #[arg(long)]
    pub misbehave: Option<String>,
}

#[derive(Serialize)]
struct SimulationSummary {
    n: usize,
    final_aggregate: OpinionDistribution,
    average_score: f64,
    majority: usize,
    satisfies_herding_bound: bool,
}

pub fn simulate(a: &SimulateArgs) -> anyhow::Result<()> {
    let scale = scale(&a.common)?;
    let params = HerdingParams::new(
        parse::alpha(&a.alpha, scale.levels())?,
        parse::sequence(&a.gamma)?,
        parse::sequence(&a.eta)?,
        parse::rule(&a.rule)?,
    )?;
    let misbehavior = a
        .misbehave
        .as_deref()
        .map(|s| parse::misbehavior(s, scale))
        .transpose()?;
    let run = Run::start(&a.common.out, a.common.stdout)?;
    let seq = herdlab_core::simulate(&params, a.n, a.common.seed, misbehavior.as_ref())?;

    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(["item_id", "order_key", "rating", "misbehaving"])?;
        for (k, (r, m)) in seq.ratings().iter().zip(seq.misbehaving()).enumerate() {
            w.write_record(["sim", &(k + 1).to_string(), &r.to_string(), &(*m as u8).to_string()])?;
        }
        w.flush()?;
    }
    run.write_data("ratings.csv", &buf)?;

    let summary = if seq.is_empty() {
        None
    } else {
        let beta = aggregate(&seq, &params.rule)?;
        Some(SimulationSummary {
            n: seq.len(),
            average_score: average_score(&beta),
            majority: majority(&beta),
            satisfies_herding_bound: params.satisfies_herding_bound(),
            final_aggregate: beta,
        })
    };
    run.write("summary.json", &json_bytes(&summary)?)?;
    run.finish("simulate", a.common.seed, a)
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::Writer::from_writer(buf)
}

#[derive(Debug, Args, Serialize)]
pub struct PhiArgs {
    #[command(flatten)]
    pub common: Common,
    /// Exponents: comma list or `start:stop:step`.
    #[arg(long, default_value = "0")]
    pub c: String,
    /// Herding strengths, comma separated (constants or `a*(1-1/i)`).
    #[arg(long, default_value = "0")]
    pub gamma: String,
    /// Review selection accuracies, comma separated.
    #[arg(long, default_value = "0")]
    pub eta: String,
    /// Largest index.
    #[arg(long, default_value_t = 1000)]
    pub i_max: usize,
    /// Emit every k-th index (always including `i_max`).
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    /// Also report the metric under the injection `k,m,indices`.
    #[arg(long)]
    pub misbehave: Option<String>,
    /// Deviation used by the injection-adjusted metric.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

pub fn phi(a: &PhiArgs) -> anyhow::Result<()> {
    let scale = scale(&a.common)?;
    let cs = parse::grid(&a.c, "--c")?;
    let gammas = parse::sequence_list(&a.gamma)?;
    let etas = parse::sequence_list(&a.eta)?;
    if a.i_max == 0 || a.every == 0 {
        return Err(usage("--i-max and --every must be positive"));
    }
    let indices: Vec<usize> = (1..=a.i_max)
        .filter(|i| i % a.every == 0 || *i == a.i_max || *i == 1)
        .collect();
    let evaluations = cs.len() * gammas.len() * etas.len() * indices.len();
    if evaluations > MAX_PHI_EVALUATIONS {
        return Err(usage(format!(
            "grid has {evaluations} evaluations; the limit is {MAX_PHI_EVALUATIONS}"
        )));
    }
    let misbehavior = a
        .misbehave
        .as_deref()
        .map(|s| parse::misbehavior(s, scale))
        .transpose()?;
    let alpha = OpinionDistribution::uniform(scale);
    let mut combos = Vec::new();
    for &c in &cs {
        for g in &gammas {
            for e in &etas {
                let rule = parse::rule(&c.to_string())?;
                combos.push((c, HerdingParams::new(alpha.clone(), *g, *e, rule)?));
            }
        }
    }
    let run = Run::start(&a.common.out, a.common.stdout)?;
    let curves = combos
        .par_iter()
        .map(|(_, p)| {
            let base = phi_values(p, a.i_max)?;
            let tilde = misbehavior
                .as_ref()
                .map(|m| phi_misbehavior_values(p, a.i_max, m, a.epsilon))
                .transpose()?;
            Ok((base, tilde))
        })
        .collect::<herdlab_core::Result<Vec<_>>>()?;

    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        let mut header = vec!["c", "gamma", "eta", "i", "phi"];
        if misbehavior.is_some() {
            header.push("phi_misbehavior");
        }
        w.write_record(header)?;
        for ((c, p), (base, tilde)) in combos.iter().zip(&curves) {
            for &i in &indices {
                let mut row = vec![
                    c.to_string(),
                    p.gamma.to_string(),
                    p.eta.to_string(),
                    i.to_string(),
                    base[i - 1].to_string(),
                ];
                if let Some(t) = tilde {
                    row.push(t[i - 1].to_string());
                }
                w.write_record(row)?;
            }
        }
        w.flush()?;
    }
    run.write_data("phi.csv", &buf)?;
    run.finish("phi", a.common.seed, a)
}

#[derive(Debug, Args, Serialize)]
pub struct InferArgs {
    #[command(flatten)]
    pub common: Common,
    /// Ratings CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Item to analyze; required when the file holds several.
    #[arg(long)]
    pub item: Option<String>,
    #[command(flatten)]
    pub columns: Columns,
    /// Aggregation rule the platform used, `c=<c>`.
    #[arg(long, default_value = "c=0")]
    pub rule: String,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
}

pub fn infer(a: &InferArgs) -> anyhow::Result<()> {
    let scale = scale(&a.common)?;
    let rule = parse::rule(&a.rule)?;
    let data = load_input(&a.input, scale, &a.columns)?;
    let seq: &RatingSequence = match &a.item {
        Some(id) => data
            .items
            .get(id)
            .ok_or_else(|| usage(format!("item `{id}` not found in {}", a.input.display())))?,
        None if data.items.len() == 1 => data.items.values().next().expect("one item"),
        None if data.items.is_empty() => return Err(usage("input has no ratings")),
        None => {
            return Err(usage(format!(
                "input holds {} items; choose one with --item",
                data.items.len()
            )))
        }
    };
    let run = Run::start(&a.common.out, a.common.stdout)?;
    let result = herdlab_core::infer(seq, &rule, &inference_config(a.restarts, a.common.seed))?;
    let mut line = result.to_json_line()?.into_bytes();
    line.push(b'\n');
    run.write_data("result.json", &line)?;
    run.finish("infer", a.common.seed, a)
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "0,0,0.1,0.4,0.5")]
    pub alpha: String,
    /// Effective herding strength used for simulation (with eta = 0).
    #[arg(long, default_value_t = 0.8)]
    pub gamma_tilde: f64,
    #[arg(long, default_value = "c=0")]
    pub rule: String,
    /// Sequence lengths, comma separated.
    #[arg(long, default_value = "500,1000,2000,5000")]
    pub sizes: String,
    #[arg(long, default_value_t = 20)]
    pub rounds: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Injection `k,m,indices`, e.g. `50,5,51-100`.
    #[arg(long)]
    pub misbehave: Option<String>,
}

pub fn mc(a: &McArgs) -> anyhow::Result<()> {
    let scale = scale(&a.common)?;
    if a.rounds == 0 {
        return Err(usage("--rounds must be at least 1"));
    }
    if !(a.gamma_tilde > 0.0 && a.gamma_tilde <= 1.0) {
        return Err(usage("--gamma-tilde must be in (0, 1] for relative errors"));
    }
    let params = HerdingParams::constant(
        parse::alpha(&a.alpha, scale.levels())?,
        a.gamma_tilde,
        0.0,
        parse::rule(&a.rule)?,
    )?;
    let sizes = parse::usize_list(&a.sizes, "--sizes")?;
    if sizes.iter().any(|&n| n < 2) {
        return Err(usage("--sizes entries must be at least 2"));
    }
    let misbehavior = a
        .misbehave
        .as_deref()
        .map(|s| parse::misbehavior(s, scale))
        .transpose()?;
    let run = Run::start(&a.common.out, a.common.stdout)?;
    let study = ErrorStudy {
        params,
        sizes,
        rounds: a.rounds,
        misbehavior,
        inference: inference_config(a.restarts, 0),
        seed: a.common.seed,
    };
    let curve = study.run()?;

    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(["N", "E_alpha_mean", "E_gamma_mean", "rounds"])?;
        for r in &curve.rows {
            w.write_record([
                r.n.to_string(),
                r.e_alpha_mean.to_string(),
                r.e_gamma_mean.to_string(),
                r.rounds.to_string(),
            ])?;
        }
        w.flush()?;
    }
    run.write_data("errors.csv", &buf)?;

    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(["N", "round", "E_alpha", "E_gamma", "gamma_tilde_hat"])?;
        for s in &curve.samples {
            w.write_record([
                s.n.to_string(),
                s.round.to_string(),
                s.e_alpha.to_string(),
                s.e_gamma.to_string(),
                s.gamma_tilde_hat.to_string(),
            ])?;
        }
        w.flush()?;
    }
    run.write("rounds.csv", &buf)?;
    run.finish("mc", a.common.seed, a)
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Ratings CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub columns: Columns,
    /// Items with fewer ratings are skipped.
    #[arg(long, default_value_t = 2000)]
    pub min_ratings: usize,
    /// Aggregation rule the platform used, `c=<c>`.
    #[arg(long, default_value = "c=0")]
    pub rule: String,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Index at which the exponent sweep reads the speed metric.
    #[arg(long, default_value_t = ingest::DEFAULT_EVAL_INDEX)]
    pub eval_index: usize,
    /// Exponents for the sweep: comma list or `start:stop:step`.
    #[arg(long, default_value = "0:4:0.1")]
    pub c_grid: String,
}

#[derive(Serialize)]
struct AnalysisSummary {
    data_rows: usize,
    loaded_rows: usize,
    out_of_range_rows: usize,
    unparseable_lines: Vec<usize>,
    items_loaded: usize,
    items_below_min_ratings: usize,
    items_analyzed: usize,
    excluded_not_converged: Vec<String>,
    mean_gamma_tilde: f64,
    speedup: ingest::Speedup,
    speedup_percent: i64,
}

pub fn analyze(a: &AnalyzeArgs) -> anyhow::Result<()> {
    let scale = scale(&a.common)?;
    let rule = parse::rule(&a.rule)?;
    let grid = parse::grid(&a.c_grid, "--c-grid")?;
    if !grid.contains(&0.0) {
        return Err(usage("--c-grid must include 0 as the baseline"));
    }
    if a.eval_index == 0 {
        return Err(usage("--eval-index must be positive"));
    }
    let data = load_input(&a.input, scale, &a.columns)?;
    let items_loaded = data.items.len();
    let (items, dropped): (BTreeMap<_, _>, usize) = ingest::filter_items(data.items, a.min_ratings);
    if items.is_empty() {
        return Err(usage(format!("no item has at least {} ratings", a.min_ratings)));
    }
    let run = Run::start(&a.common.out, a.common.stdout)?;
    let analysis = ingest::analyze_dataset(&items, &rule, &inference_config(a.restarts, a.common.seed))?;
    let sweep = ingest::exponent_sweep(scale.levels(), analysis.mean_gamma_tilde, &grid, a.eval_index)?;
    let speedup = ingest::speedup_from_sweep(&sweep)?;

    run.write_data("items.jsonl", &csv_bytes(|b| ingest::write_items_jsonl(&analysis.items, b))?)?;
    run.write("cdf.csv", &csv_bytes(|b| ingest::write_cdf_csv(&analysis.cdf, b))?)?;
    run.write("sweep.csv", &csv_bytes(|b| ingest::write_sweep_csv(&sweep, b))?)?;
    let summary = AnalysisSummary {
        data_rows: data.report.data_rows,
        loaded_rows: data.report.loaded,
        out_of_range_rows: data.report.out_of_range,
        unparseable_lines: data.report.unparseable_lines,
        items_loaded,
        items_below_min_ratings: dropped,
        items_analyzed: items.len(),
        excluded_not_converged: analysis.excluded,
        mean_gamma_tilde: analysis.mean_gamma_tilde,
        speedup_percent: ingest::speedup_percent(speedup.ratio),
        speedup,
    };
    run.write("summary.json", &json_bytes(&summary)?)?;
    run.finish("analyze", a.common.seed, a)
}
