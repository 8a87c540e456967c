//! Point files and JSON reports.
//!
//! A point file holds one point per line as whitespace-separated decimals;
//! lines starting with `#` and blank lines are ignored. Numbers are written
//! with 17 significant digits so that files round-trip exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Serialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::discrepancy::DirectionalSupremum;
use crate::enumerator::{subset_space_size, DiscrepancyReport};
use crate::error::Error as CoreError;
use crate::points::{norm, unit_tolerance, PointSet};
use crate::scalar::Real;
use crate::subset::Family;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct NonUnitRow {
    /// 1-based line in the file.
    pub line: usize,
    /// 0-based point index.
    pub index: usize,
    pub norm: f64,
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("{} point(s) are not unit vectors (tolerance {tol}): {}", offenders.len(), describe(offenders))]
    NotUnit { offenders: Vec<NonUnitRow>, tol: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
}

fn describe(rows: &[NonUnitRow]) -> String {
    rows.iter()
        .map(|r| format!("point {} (line {}) has norm {}", r.index, r.line, r.norm))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parses a point file, listing every row outside the unit tolerance.
pub fn read_points<T: Real, R: BufRead>(reader: R) -> Result<PointSet<T>, ReadError> {
    let mut dim = None;
    let mut data = Vec::new();
    let mut lines = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut fields = 0;
        for tok in body.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| ReadError::Malformed {
                line: line_no,
                message: format!("cannot parse {tok:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(ReadError::Malformed {
                    line: line_no,
                    message: format!("non-finite value {tok:?}"),
                });
            }
            data.push(T::of(v));
            fields += 1;
        }
        match dim {
            None if fields < 2 => {
                return Err(ReadError::Malformed {
                    line: line_no,
                    message: format!("{fields} field(s); points need at least 2"),
                })
            }
            None => dim = Some(fields),
            Some(d) if d != fields => {
                return Err(ReadError::Malformed {
                    line: line_no,
                    message: format!("{fields} field(s), expected {d}"),
                })
            }
            Some(_) => {}
        }
        lines.push(line_no);
    }
    let dim = dim.ok_or(ReadError::Malformed {
        line: 0,
        message: "no points in file".into(),
    })?;
    let tol = unit_tolerance::<T>();
    let offenders: Vec<_> = data
        .chunks_exact(dim)
        .zip(&lines)
        .enumerate()
        .filter_map(|(index, (row, &line))| {
            let nrm = norm(row);
            (!((nrm - T::one()).abs() <= tol)).then(|| NonUnitRow {
                line,
                index,
                norm: nrm.to_f64_lossy(),
            })
        })
        .collect();
    if !offenders.is_empty() {
        return Err(ReadError::NotUnit {
            offenders,
            tol: tol.to_f64_lossy(),
        });
    }
    Ok(PointSet::new(dim, data)?)
}

pub fn read_points_file<T: Real>(path: &std::path::Path) -> Result<PointSet<T>, ReadError> {
    let f = std::fs::File::open(path)?;
    read_points(std::io::BufReader::new(f))
}

/// `x` in 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_points<T: Real, W: Write>(ps: &PointSet<T>, header: &[String], mut out: W) -> std::io::Result<()> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    let mut line = String::new();
    for p in ps.iter() {
        line.clear();
        for (k, v) in p.iter().enumerate() {
            if k > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{}", format_real(v.to_f64_lossy()));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// JSON number with 17 significant digits, `null` when not finite.
fn num(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { format_real(x) } else { "null".into() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Phi1 => "phi1",
        Family::Phi0 => "phi0",
        Family::Skip => "none",
    }
}

#[derive(Serialize)]
struct ArgmaxJson {
    w: Vec<Box<RawValue>>,
    t: Box<RawValue>,
    subset: Vec<usize>,
    family: &'static str,
    negated: bool,
    empirical: Box<RawValue>,
    cap_measure: Box<RawValue>,
}

#[derive(Serialize)]
struct ReportJson {
    delta: Box<RawValue>,
    delta1: Box<RawValue>,
    delta0: Box<RawValue>,
    delta_tilde: Option<Box<RawValue>>,
    argmax: ArgmaxJson,
    n: usize,
    #[serde(rename = "N")]
    sample_size: usize,
    min_bound: usize,
    subset_space_size: Option<u128>,
    subsets_enumerated: u128,
    subsets_pruned: u128,
    subsets_skipped_rank: u128,
    subsets_skipped_gamma: u128,
    gamma_tol: Box<RawValue>,
    rank_tol: Box<RawValue>,
    threads: usize,
    wall_time_seconds: Box<RawValue>,
    tool_version: &'static str,
}

/// Report as pretty JSON; `delta_tilde` is written as `null` when absent.
pub fn report_json<T: Real>(report: &DiscrepancyReport<T>, delta_tilde: Option<T>) -> String {
    let f = |x: T| num(x.to_f64_lossy());
    let json = ReportJson {
        delta: f(report.delta),
        delta1: f(report.delta1),
        delta0: f(report.delta0),
        delta_tilde: delta_tilde.map(f),
        argmax: ArgmaxJson {
            w: report.argmax_cap.w.iter().map(|&v| f(v)).collect(),
            t: f(report.argmax_cap.t),
            subset: report.argmax_subset.clone(),
            family: family_name(report.argmax_family),
            negated: report.argmax_negated,
            empirical: f(report.argmax_empirical),
            cap_measure: f(report.argmax_cap_measure),
        },
        n: report.dimension,
        sample_size: report.sample_size,
        min_bound: report.rank.min_bound,
        subset_space_size: subset_space_size(report.sample_size as u64, report.rank.min_bound as u64).ok(),
        subsets_enumerated: report.stats.subsets_enumerated,
        subsets_pruned: report.stats.subsets_pruned,
        subsets_skipped_rank: report.stats.subsets_skipped_rank,
        subsets_skipped_gamma: report.stats.subsets_skipped_gamma,
        gamma_tol: f(report.tolerances.gamma_tol),
        rank_tol: f(report.tolerances.rank_tol),
        threads: report.thread_count,
        wall_time_seconds: num(report.wall_time),
        tool_version: TOOL_VERSION,
    };
    serde_json::to_string_pretty(&json).expect("report serialises")
}

#[derive(Serialize)]
struct DirectionJson {
    index: usize,
    value: Box<RawValue>,
    argmax_t: Box<RawValue>,
    attained_side: crate::discrepancy::Attainment,
}

#[derive(Serialize)]
struct LowerBoundJson {
    delta_tilde: Box<RawValue>,
    n: usize,
    #[serde(rename = "N")]
    sample_size: usize,
    directions: Vec<DirectionJson>,
    wall_time_seconds: Box<RawValue>,
    tool_version: &'static str,
}

/// Lower-bound report: `delta_tilde` and the supremum at every sample direction.
pub fn lower_bound_json<T: Real>(ps: &PointSet<T>, details: &[DirectionalSupremum<T>], wall_time: f64) -> String {
    let best = details.iter().fold(T::zero(), |m, d| m.max(d.value));
    let json = LowerBoundJson {
        delta_tilde: num(best.to_f64_lossy()),
        n: ps.dim(),
        sample_size: ps.len(),
        directions: details
            .iter()
            .enumerate()
            .map(|(index, d)| DirectionJson {
                index,
                value: num(d.value.to_f64_lossy()),
                argmax_t: num(d.argmax_t.to_f64_lossy()),
                attained_side: d.attained_side,
            })
            .collect(),
        wall_time_seconds: num(wall_time),
        tool_version: TOOL_VERSION,
    };
    serde_json::to_string_pretty(&json).expect("report serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerator::{enumerate, EnumerationConfig};

    fn parse(text: &str) -> Result<PointSet, ReadError> {
        read_points(text.as_bytes())
    }

    #[test]
    fn parses_comments_and_blank_lines() {
        let ps = parse("# header\n\n1 0 0\n  0 1 0  \n# mid\n0\t0\t-1\n").unwrap();
        assert_eq!(ps.len(), 3);
        assert_eq!(ps.dim(), 3);
        assert_eq!(ps.point(2), &[0.0, 0.0, -1.0]);
    }

    #[test]
    fn malformed_lines_are_located() {
        match parse("1 0\n0 x\n") {
            Err(ReadError::Malformed { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("1 0\n0 1 0\n") {
            Err(ReadError::Malformed { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("# only\n1\n") {
            Err(ReadError::Malformed { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("# nothing\n"), Err(ReadError::Malformed { .. })));
        assert!(matches!(parse("1 inf\n"), Err(ReadError::Malformed { line: 1, .. })));
    }

    #[test]
    fn lists_every_non_unit_row() {
        match parse("1 0\n0.5 0.5\n0 1\n2 0\n") {
            Err(ReadError::NotUnit { offenders, .. }) => {
                let where_: Vec<_> = offenders.iter().map(|o| (o.index, o.line)).collect();
                assert_eq!(where_, vec![(1, 2), (3, 4)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let rows = vec![vec![0.6, 0.8, 0.0], vec![1.0 / 3f64.sqrt(); 3]];
        let ps = PointSet::from_rows(&rows).unwrap();
        let mut a = Vec::new();
        write_points(&ps, &["test".into()], &mut a).unwrap();
        let back: PointSet = read_points(&a[..]).unwrap();
        assert_eq!(back, ps);
        let mut b = Vec::new();
        write_points(&back, &["test".into()], &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn report_keys() {
        let ps = PointSet::from_rows(&[vec![0.0, 0.0, 1.0]]).unwrap();
        let r = enumerate(&ps, &EnumerationConfig::default().with_threads(1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report_json(&r, Some(1.0))).unwrap();
        for key in [
            "delta",
            "delta1",
            "delta0",
            "argmax",
            "n",
            "N",
            "min_bound",
            "subsets_enumerated",
            "subsets_skipped_rank",
            "subsets_skipped_gamma",
            "gamma_tol",
            "rank_tol",
            "threads",
            "wall_time_seconds",
            "tool_version",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["w", "t", "subset", "family"] {
            assert!(v["argmax"].get(key).is_some(), "{key}");
        }
        assert_eq!(v["delta"].as_f64(), Some(1.0));
        assert_eq!(v["N"].as_u64(), Some(1));
    }
}
