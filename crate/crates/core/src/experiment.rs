//! Sample-size sweeps: discrepancy and lower bound per scheme and size,
//! averaged over seeds, plus log-log slopes.
//!
//! All sizes for one `(scheme, seed)` pair come from a single sample, so they
//! are prefixes of each other and are enumerated in one pass.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::discrepancy::lower_bound;
use crate::enumerator::{enumerate_prefixes, global_rank_bound, subset_space_size, EnumerationConfig};
use crate::error::{Error, Result};
use crate::samplers::{sample, SamplerSpec, Scheme};

pub const DEFAULT_BUDGET_SECONDS: f64 = 600.0;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub dim: usize,
    pub sizes: Vec<usize>,
    /// Generator seeds for MC schemes, skip offsets for QMC schemes.
    pub seeds: Vec<u64>,
    pub budget_seconds: f64,
    pub enumeration: EnumerationConfig<f64>,
}

/// One `(scheme, seed, N)` measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Run {
    pub scheme: Scheme,
    pub seed: u64,
    #[serde(rename = "N")]
    pub size: usize,
    pub delta: f64,
    pub delta_tilde: f64,
    pub wall_time_seconds: f64,
    pub min_bound: usize,
    pub subsets_enumerated: u128,
    pub subsets_pruned: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    /// Some seeds were skipped by the budget.
    Partial,
    Skipped,
}

/// Seed-averaged result for one `(scheme, N)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub scheme: Scheme,
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub seeds: usize,
    pub delta: Option<f64>,
    pub delta_tilde: Option<f64>,
    pub ratio: Option<f64>,
    pub wall_time_seconds: f64,
    pub status: RowStatus,
}

#[derive(Debug, Clone, Default)]
pub struct Experiment {
    pub runs: Vec<Run>,
    pub rows: Vec<ExperimentRow>,
}

/// Parses `start:stop:step` (inclusive stop) or a single size.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("sizes {spec:?} are not start:stop:step"));
    let parts: Vec<usize> = spec
        .split(':')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = match parts[..] {
        [n] => vec![n],
        [a, b] => (a..=b).collect(),
        [a, b, s] if s > 0 => (a..=b).step_by(s).collect(),
        _ => return Err(bad()),
    };
    if sizes.is_empty() || sizes[0] == 0 {
        return Err(bad());
    }
    Ok(sizes)
}

/// Parses a comma list of seeds or inclusive ranges `a-b`.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = |p: &str| Error::Config(format!("seed entry {p:?} is not an integer or a-b range"));
    let mut seeds = Vec::new();
    for p in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match p.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(p))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(p))?;
                if a > b {
                    return Err(bad(p));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(p.parse().map_err(|_| bad(p))?),
        }
    }
    if seeds.is_empty() {
        return Err(Error::Config("no seeds given".into()));
    }
    Ok(seeds)
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `log Delta` against `log N` over the completed rows of `scheme`.
pub fn loglog_slope(rows: &[ExperimentRow], scheme: Scheme) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.scheme == scheme)
        .filter_map(|r| r.delta.map(|d| ((r.size as f64).log10(), d.log10())))
        .unzip();
    least_squares_slope(&x, &y)
}

fn subset_cost(size: usize, bound: usize) -> f64 {
    subset_space_size(size as u64, bound as u64)
        .map(|c| c as f64)
        .unwrap_or(f64::INFINITY)
}

/// Runs every `(scheme, seed)` pair over all sizes. Sizes whose projected
/// runtime would exceed what is left of the budget are skipped; the
/// projection scales the last measured time per subset.
pub fn run_experiment(cfg: &ExperimentConfig, mut log: impl FnMut(&str)) -> Result<Experiment> {
    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let Some(&largest) = sizes.last() else {
        return Err(Error::Config("no sample sizes".into()));
    };
    if cfg.schemes.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::Config("no schemes or seeds".into()));
    }
    let start = Instant::now();
    let mut rate: Option<f64> = None;
    let mut runs = Vec::new();
    let jobs = cfg.schemes.len() * cfg.seeds.len();
    for (job, (&scheme, &seed)) in cfg
        .schemes
        .iter()
        .flat_map(|s| cfg.seeds.iter().map(move |k| (s, k)))
        .enumerate()
    {
        let ps = sample::<f64>(&SamplerSpec::new(scheme, cfg.dim, largest, seed)?)?;
        let bound = global_rank_bound(&ps, cfg.enumeration.tol.rank_tol).min_bound;
        if rate.is_none() {
            let probe = ps.prefix(sizes[0])?;
            let t = Instant::now();
            enumerate_prefixes(&probe, &[sizes[0]], &cfg.enumeration)?;
            rate = Some(t.elapsed().as_secs_f64() / subset_cost(sizes[0], bound).max(1.0));
        }
        let remaining = cfg.budget_seconds - start.elapsed().as_secs_f64();
        let per_subset = rate.unwrap_or(0.0);
        let kept: Vec<usize> = sizes
            .iter()
            .copied()
            .filter(|&s| per_subset * subset_cost(s, bound) <= remaining)
            .collect();
        if kept.len() < sizes.len() {
            log(&format!(
                "warning: {scheme} seed {seed}: {} size(s) from N = {} skipped, projected runtime exceeds the remaining budget of {remaining:.1} s",
                sizes.len() - kept.len(),
                sizes[kept.len()],
            ));
        }
        if let Some(&top) = kept.last() {
            let t = Instant::now();
            let reports = enumerate_prefixes(&ps, &kept, &cfg.enumeration)?;
            let elapsed = t.elapsed().as_secs_f64();
            rate = Some(elapsed / subset_cost(top, bound).max(1.0));
            for (r, &s) in reports.iter().zip(&kept) {
                runs.push(Run {
                    scheme,
                    seed,
                    size: s,
                    delta: r.delta,
                    delta_tilde: lower_bound(&ps.prefix(s)?)?,
                    wall_time_seconds: r.wall_time,
                    min_bound: r.rank.min_bound,
                    subsets_enumerated: r.stats.subsets_enumerated,
                    subsets_pruned: r.stats.subsets_pruned,
                });
            }
        }
        log(&format!(
            "{:3.0}% {scheme} seed {seed} done ({:.1} s elapsed)",
            100.0 * (job + 1) as f64 / jobs as f64,
            start.elapsed().as_secs_f64()
        ));
    }
    let rows = aggregate(cfg, &sizes, &runs);
    Ok(Experiment { runs, rows })
}

fn aggregate(cfg: &ExperimentConfig, sizes: &[usize], runs: &[Run]) -> Vec<ExperimentRow> {
    let mut schemes = cfg.schemes.clone();
    schemes.sort_unstable();
    schemes.dedup();
    let mut rows = Vec::new();
    for &scheme in &schemes {
        for &size in sizes {
            let sel: Vec<&Run> = runs.iter().filter(|r| r.scheme == scheme && r.size == size).collect();
            let k = sel.len();
            let mean = |f: &dyn Fn(&Run) -> f64| (k > 0).then(|| sel.iter().map(|r| f(r)).sum::<f64>() / k as f64);
            let status = if k == 0 {
                RowStatus::Skipped
            } else if k < cfg.seeds.len() {
                RowStatus::Partial
            } else {
                RowStatus::Ok
            };
            rows.push(ExperimentRow {
                scheme,
                n: cfg.dim,
                size,
                seeds: k,
                delta: mean(&|r| r.delta),
                delta_tilde: mean(&|r| r.delta_tilde),
                ratio: mean(&|r| r.delta_tilde / r.delta),
                wall_time_seconds: sel.iter().map(|r| r.wall_time_seconds).sum(),
                status,
            });
        }
    }
    rows
}

/// Main CSV: one row per `(scheme, N)`, sorted.
pub fn write_rows_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

pub fn write_runs_csv<W: Write>(runs: &[Run], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in runs {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

/// Companion CSV of `log10 N` against `log10 Delta` for completed rows.
pub fn write_loglog_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "N", "log10_N", "log10_delta"])
        .map_err(csv_err)?;
    for r in rows {
        if let Some(d) = r.delta {
            w.write_record([
                r.scheme.to_string(),
                r.size.to_string(),
                (r.size as f64).log10().to_string(),
                d.log10().to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(budget: f64) -> ExperimentConfig {
        ExperimentConfig {
            schemes: vec![Scheme::LambertSobol, Scheme::GaussMc],
            dim: 3,
            sizes: vec![10, 20, 30],
            seeds: vec![0, 1],
            budget_seconds: budget,
            enumeration: EnumerationConfig::default().with_threads(1),
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_sizes("50:200:50").unwrap(), vec![50, 100, 150, 200]);
        assert_eq!(parse_sizes("7").unwrap(), vec![7]);
        assert_eq!(parse_sizes("3:5").unwrap(), vec![3, 4, 5]);
        assert!(parse_sizes("0:10:5").is_err());
        assert!(parse_sizes("5:1:1").is_err());
        assert!(parse_sizes("1:5:0").is_err());
        assert!(parse_sizes("a").is_err());
        assert_eq!(parse_seeds("1,4-6, 9").unwrap(), vec![1, 4, 5, 6, 9]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("3-1").is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = (1..10).map(|k| (k as f64).log10()).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.75 * v).collect();
        assert!((least_squares_slope(&x, &y).unwrap() + 0.75).abs() < 1e-12);
        assert!(least_squares_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn rows_are_sorted_and_consistent() {
        let exp = run_experiment(&cfg(600.0), |_| {}).unwrap();
        assert_eq!(exp.runs.len(), 12);
        assert_eq!(exp.rows.len(), 6);
        assert_eq!(exp.rows[0].scheme, Scheme::GaussMc);
        for r in &exp.rows {
            assert_eq!(r.status, RowStatus::Ok);
            let ratio = r.ratio.unwrap();
            assert!(ratio > 0.0 && ratio <= 1.0 + 1e-12);
        }
        let mut buf = Vec::new();
        write_rows_csv(&exp.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("scheme,n,N,seeds,delta,delta_tilde,ratio,wall_time_seconds,status\n"));
        assert_eq!(text.lines().count(), 7);
        let mut buf = Vec::new();
        write_loglog_csv(&exp.rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }

    #[test]
    fn exhausted_budget_skips_rows() {
        let exp = run_experiment(&cfg(-1.0), |_| {}).unwrap();
        assert!(exp.runs.is_empty());
        assert!(exp
            .rows
            .iter()
            .all(|r| r.status == RowStatus::Skipped && r.delta.is_none()));
        let mut buf = Vec::new();
        write_loglog_csv(&exp.rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }
}
