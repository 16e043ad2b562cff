//! Rating datasets on disk: loading, per-item inference, and the fleet
//! summaries (herding-strength CDF and the recency-exponent sweep).
//!
//! Input is a headed, comma-separated UTF-8 file with one rating per row.
//! The default columns are `item_id`, `order_key` and `rating`; other
//! columns are ignored. Order keys are integers or RFC 3339 timestamps.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, FixedOffset};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herding::HerdingParams;
use crate::inference::{infer, InferenceConfig, InferenceResult};
use crate::opinion::{OpinionDistribution, RatingScale};
use crate::ratings::RatingSequence;
use crate::rng::derive_seed;
use crate::speed::phi;
use crate::weights::WeightRule;

/// Largest tolerated share of unparseable data rows.
pub const MAX_UNPARSEABLE_FRACTION: f64 = 0.01;

/// Index at which the exponent sweep reads `phi` unless told otherwise.
pub const DEFAULT_EVAL_INDEX: usize = 5000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub item_id: String,
    pub order_key: String,
    pub rating: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            item_id: "item_id".into(),
            order_key: "order_key".into(),
            rating: "rating".into(),
        }
    }
}

/// Sort key for rows within an item. Integers sort before timestamps if a
/// file mixes the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OrderKey {
    Integer(i64),
    Timestamp(DateTime<FixedOffset>),
}

impl OrderKey {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<i64>() {
            return Some(Self::Integer(v));
        }
        DateTime::parse_from_rfc3339(s).ok().map(Self::Timestamp)
    }
}

/// What happened to the rows of a loaded file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub data_rows: usize,
    pub loaded: usize,
    /// Rows whose rating parsed but lies outside the scale.
    pub out_of_range: usize,
    /// File line numbers (header is line 1) of rows that did not parse.
    pub unparseable_lines: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub items: BTreeMap<String, RatingSequence>,
    pub report: LoadReport,
}

pub fn load_csv(path: impl AsRef<Path>, scale: RatingScale, columns: &ColumnMap) -> Result<Dataset> {
    read_csv(BufReader::new(File::open(path)?), scale, columns)
}

/// Parses a ratings table and groups it per item in ascending order-key
/// order. Ties keep file order.
pub fn read_csv<R: Read>(reader: R, scale: RatingScale, columns: &ColumnMap) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (ci, co, cr) = (
        find(&columns.item_id)?,
        find(&columns.order_key)?,
        find(&columns.rating)?,
    );

    let mut report = LoadReport::default();
    let mut rows: BTreeMap<String, Vec<(OrderKey, usize)>> = BTreeMap::new();
    for record in rdr.records() {
        report.data_rows += 1;
        let line = report.data_rows + 1;
        let record = match record {
            Ok(r) => r,
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(_) => {
                report.unparseable_lines.push(line);
                continue;
            }
        };
        let line = record.position().map_or(line, |p| p.line() as usize);
        let parsed = (|| {
            let item = record.get(ci)?.trim();
            let key = OrderKey::parse(record.get(co)?)?;
            let rating = record.get(cr)?.trim().parse::<i64>().ok()?;
            (!item.is_empty()).then(|| (item.to_string(), key, rating))
        })();
        let Some((item, key, rating)) = parsed else {
            report.unparseable_lines.push(line);
            continue;
        };
        if rating < 1 || !scale.contains(rating as usize) {
            report.out_of_range += 1;
            continue;
        }
        rows.entry(item).or_default().push((key, rating as usize));
        report.loaded += 1;
    }

    let bad = report.unparseable_lines.len();
    if bad as f64 > MAX_UNPARSEABLE_FRACTION * report.data_rows as f64 {
        return Err(Error::Unparseable {
            bad,
            total: report.data_rows,
            rows: report.unparseable_lines,
        });
    }
    if bad > 0 {
        log::warn!("skipped {bad} unparseable rows at lines {:?}", report.unparseable_lines);
    }
    if report.out_of_range > 0 {
        log::warn!(
            "skipped {} rows with ratings outside 1..={}",
            report.out_of_range,
            scale.levels()
        );
    }

    let items = rows
        .into_iter()
        .map(|(item, mut v)| {
            v.sort_by_key(|(k, _)| *k);
            let seq = RatingSequence::honest(scale, v.into_iter().map(|(_, r)| r).collect())?;
            Ok((item, seq))
        })
        .collect::<Result<_>>()?;
    Ok(Dataset { items, report })
}

/// Writes sequences in the loader's format with `order_key = 1..N`.
pub fn write_csv<W: Write>(items: &BTreeMap<String, RatingSequence>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item_id", "order_key", "rating"])?;
    for (item, seq) in items {
        for (k, r) in seq.ratings().iter().enumerate() {
            w.write_record([item.as_str(), &(k + 1).to_string(), &r.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Keeps items with at least `min_ratings` ratings; also returns how many were dropped.
pub fn filter_items(
    items: BTreeMap<String, RatingSequence>,
    min_ratings: usize,
) -> (BTreeMap<String, RatingSequence>, usize) {
    let before = items.len();
    let kept: BTreeMap<_, _> = items
        .into_iter()
        .filter(|(_, s)| s.len() >= min_ratings)
        .collect();
    let dropped = before - kept.len();
    log::info!("{} of {before} items have at least {min_ratings} ratings", kept.len());
    (kept, dropped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemAnalysis {
    pub item_id: String,
    pub n_ratings: usize,
    pub result: InferenceResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub gamma_tilde: f64,
    pub cumulative_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetAnalysis {
    /// Every analyzed item, in item-id order.
    pub items: Vec<ItemAnalysis>,
    /// Items whose best restart did not converge; left out of the CDF and mean.
    pub excluded: Vec<String>,
    pub cdf: Vec<CdfRow>,
    pub mean_gamma_tilde: f64,
}

/// Per-item seed, stable under adding or removing other items.
fn item_seed(seed: u64, item: &str) -> u64 {
    // FNV-1a
    let h = item
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    derive_seed(seed, h)
}

/// Infers `(alpha, gamma~)` for every item, in parallel.
pub fn analyze_dataset(
    items: &BTreeMap<String, RatingSequence>,
    rule: &WeightRule,
    config: &InferenceConfig,
) -> Result<DatasetAnalysis> {
    if items.is_empty() {
        return Err(Error::DegenerateInput("no items to analyze".into()));
    }
    let list: Vec<(&String, &RatingSequence)> = items.iter().collect();
    let analyses = list
        .into_par_iter()
        .map(|(id, seq)| {
            let cfg = InferenceConfig {
                seed: item_seed(config.seed, id),
                ..config.clone()
            };
            Ok(ItemAnalysis {
                item_id: id.clone(),
                n_ratings: seq.len(),
                result: infer(seq, rule, &cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut excluded = Vec::new();
    let mut gammas = Vec::new();
    for a in &analyses {
        if a.result.converged {
            gammas.push(a.result.gamma_tilde_hat);
        } else {
            log::warn!("inference for item {} did not converge; excluded", a.item_id);
            excluded.push(a.item_id.clone());
        }
    }
    if gammas.is_empty() {
        return Err(Error::DegenerateInput("no item converged".into()));
    }
    let mean_gamma_tilde = gammas.iter().sum::<f64>() / gammas.len() as f64;
    Ok(DatasetAnalysis {
        items: analyses,
        excluded,
        cdf: cdf_table(&gammas),
        mean_gamma_tilde,
    })
}

/// Empirical CDF: sorted values with cumulative fractions `k / n`.
pub fn cdf_table(values: &[f64]) -> Vec<CdfRow> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    v.into_iter()
        .enumerate()
        .map(|(k, g)| CdfRow {
            gamma_tilde: g,
            cumulative_fraction: (k + 1) as f64 / n,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c: f64,
    pub i: usize,
    pub phi: f64,
}

/// `c = 0, 0.1, ..., 4`.
pub fn default_c_grid() -> Vec<f64> {
    (0..=40).map(|k| k as f64 / 10.0).collect()
}

/// `phi_i` at one index across recency exponents, with constant `gamma`
/// and `eta = 0`. The speed metric does not involve `alpha`.
pub fn exponent_sweep(levels: usize, gamma: f64, c_grid: &[f64], eval_index: usize) -> Result<Vec<SweepRow>> {
    let alpha = OpinionDistribution::uniform(RatingScale::new(levels)?);
    c_grid
        .par_iter()
        .map(|&c| {
            let params = HerdingParams::constant(alpha.clone(), gamma, 0.0, WeightRule::power_law(c)?)?;
            Ok(SweepRow {
                c,
                i: eval_index,
                phi: phi(&params, eval_index)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Speedup {
    pub best_c: f64,
    pub phi_best: f64,
    pub phi_baseline: f64,
    /// `phi_best / phi_baseline - 1`.
    pub ratio: f64,
}

pub fn speedup_ratio(phi_best: f64, phi_baseline: f64) -> f64 {
    phi_best / phi_baseline - 1.0
}

/// Ratio as a whole percentage.
pub fn speedup_percent(ratio: f64) -> i64 {
    (ratio * 100.0).round() as i64
}

/// Best exponent of a sweep against the `c = 0` row.
pub fn speedup_from_sweep(rows: &[SweepRow]) -> Result<Speedup> {
    let base = rows
        .iter()
        .find(|r| r.c == 0.0)
        .ok_or_else(|| Error::DegenerateInput("sweep has no c = 0 row".into()))?;
    let best = rows
        .iter()
        .fold(base, |b, r| if r.phi > b.phi { r } else { b });
    Ok(Speedup {
        best_c: best.c,
        phi_best: best.phi,
        phi_baseline: base.phi,
        ratio: speedup_ratio(best.phi, base.phi),
    })
}

pub fn write_items_jsonl<W: Write>(items: &[ItemAnalysis], mut out: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_items_jsonl<R: BufRead>(input: R) -> Result<Vec<ItemAnalysis>> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

pub fn write_cdf_csv<W: Write>(cdf: &[CdfRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in cdf {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five() -> RatingScale {
        RatingScale::five_star()
    }

    fn load(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), five(), &ColumnMap::default())
    }

    #[test]
    fn single_item_in_order() {
        let d = load("item_id,order_key,rating\na,3,5\na,1,2\na,2,4\n").unwrap();
        assert_eq!(d.items.len(), 1);
        assert_eq!(d.items["a"].ratings(), &[2, 4, 5]);
        assert_eq!(d.report.loaded, 3);
    }

    #[test]
    fn interleaved_items_and_stable_ties() {
        let d = load("rating,item_id,order_key\n1,x,5\n2,y,1\n3,x,5\n4,y,0\n5,x,2\n").unwrap();
        assert_eq!(d.items["x"].ratings(), &[5, 1, 3]);
        assert_eq!(d.items["y"].ratings(), &[4, 2]);
    }

    #[test]
    fn timestamps_sort_chronologically() {
        let d = load(
            "item_id,order_key,rating\n\
             a,2020-01-02T00:00:00Z,1\n\
             a,2020-01-01T23:00:00-02:00,2\n\
             a,2020-01-01T00:00:00Z,3\n",
        )
        .unwrap();
        // 23:00-02:00 is 01:00Z on the 2nd, after midnight.
        assert_eq!(d.items["a"].ratings(), &[3, 1, 2]);
    }

    #[test]
    fn out_of_range_ratings_skipped_and_counted() {
        let d = load("item_id,order_key,rating\na,1,0\na,2,3\na,3,6\n").unwrap();
        assert_eq!(d.items["a"].ratings(), &[3]);
        assert_eq!(d.report.out_of_range, 2);
    }

    #[test]
    fn unparseable_over_threshold_is_fatal() {
        let err = load("item_id,order_key,rating\na,1,3\na,x,3\na,3,three\n").unwrap_err();
        match err {
            Error::Unparseable { bad, total, rows } => {
                assert_eq!((bad, total), (2, 3));
                assert_eq!(rows, vec![3, 4]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unparseable_under_threshold_is_skipped() {
        let mut text = String::from("item_id,order_key,rating\n");
        for k in 0..200 {
            text.push_str(&format!("a,{k},4\n"));
        }
        text.push_str("a,oops,4\n");
        let d = load(&text).unwrap();
        assert_eq!(d.items["a"].len(), 200);
        assert_eq!(d.report.unparseable_lines, vec![202]);
    }

    #[test]
    fn custom_columns_and_missing_column() {
        let cols = ColumnMap {
            item_id: "product".into(),
            order_key: "time".into(),
            rating: "stars".into(),
        };
        let d = read_csv("product,time,stars,text\np,1,4,hi\n".as_bytes(), five(), &cols).unwrap();
        assert_eq!(d.items["p"].ratings(), &[4]);
        assert!(matches!(load("item_id,rating\na,1\n"), Err(Error::MissingColumn(c)) if c == "order_key"));
    }

    #[test]
    fn write_then_read_round_trips() {
        let mut items = BTreeMap::new();
        items.insert("b".to_string(), RatingSequence::honest(five(), vec![1, 5, 5, 2]).unwrap());
        items.insert("a,quoted".to_string(), RatingSequence::honest(five(), vec![3]).unwrap());
        let mut buf = Vec::new();
        write_csv(&items, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), five(), &ColumnMap::default()).unwrap();
        assert_eq!(back.items, items);
    }

    #[test]
    fn filter_counts() {
        let mut items = BTreeMap::new();
        for (k, n) in [1999usize, 2000, 2500, 10].into_iter().enumerate() {
            items.insert(k.to_string(), RatingSequence::honest(five(), vec![3; n]).unwrap());
        }
        let (kept, dropped) = filter_items(items.clone(), 2000);
        assert_eq!(kept.keys().cloned().collect::<Vec<_>>(), vec!["1", "2"]);
        assert_eq!(dropped, 2);
        assert_eq!(filter_items(items.clone(), 1).0, items);
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let cdf = cdf_table(&[0.5, 0.1, 0.3, 0.3]);
        assert_eq!(cdf.last().unwrap().cumulative_fraction, 1.0);
        for w in cdf.windows(2) {
            assert!(w[0].gamma_tilde <= w[1].gamma_tilde);
            assert!(w[0].cumulative_fraction < w[1].cumulative_fraction);
        }
    }

    #[test]
    fn speedup_examples() {
        assert_eq!(speedup_percent(speedup_ratio(3919.0, 2785.0)), 41);
        assert_eq!(speedup_percent(speedup_ratio(3266.0, 2011.0)), 62);
        let rows = [
            SweepRow { c: 0.0, i: 5000, phi: 2785.0 },
            SweepRow { c: 0.5, i: 5000, phi: 3919.0 },
            SweepRow { c: 1.0, i: 5000, phi: 3000.0 },
        ];
        let s = speedup_from_sweep(&rows).unwrap();
        assert_eq!(s.best_c, 0.5);
        assert_eq!(speedup_percent(s.ratio), 41);
    }

    #[test]
    fn sweep_csv_round_trip() {
        let rows = exponent_sweep(5, 0.4, &[0.0, 0.5, 1.0], 200).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert!(buf.starts_with(b"c,i,phi\n"));
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn empty_dataset_rejected() {
        let err = analyze_dataset(&BTreeMap::new(), &WeightRule::Unweighted, &InferenceConfig::default());
        assert!(matches!(err, Err(Error::DegenerateInput(_))));
    }
}
