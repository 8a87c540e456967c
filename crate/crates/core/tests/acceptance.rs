//! Acceptance suite: one PASS/FAIL line per criterion.

use std::time::Instant;

use capdisc::experiment::{run_experiment, ExperimentConfig, ExperimentRow, Run};
use capdisc::oracle::cross_check;
use capdisc::{
    boundary_residual, cap_measure, enumerate, lower_bound, sample, subset_space_size, unit_residual,
    DiscrepancyReport, EnumerationConfig, Family, GridSpec, PointSet, SamplerSpec, Scheme, SubsetAlgebra,
};

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Post-condition violations gathered from every instance.
#[derive(Default)]
struct Post {
    instances: usize,
    failures: Vec<String>,
}

impl Post {
    fn report(&mut self, label: &str, ps: &PointSet, r: &DiscrepancyReport) {
        self.instances += 1;
        let res = boundary_residual(ps, &r.argmax_subset, &r.argmax_cap);
        let touching = ps
            .iter()
            .map(|x| (x.iter().zip(&r.argmax_cap.w).map(|(a, b)| a * b).sum::<f64>() - r.argmax_cap.t).abs())
            .fold(f64::INFINITY, f64::min);
        if !(res <= 1e-8 && touching <= 1e-8) {
            self.failures.push(format!("{label}: boundary residual {res:e}"));
        }
        if !(r.argmax_empirical + 1e-10 >= r.argmax_cap_measure) {
            self.failures.push(format!(
                "{label}: argmax empirical {} < cap {}",
                r.argmax_empirical, r.argmax_cap_measure
            ));
        }
        let tilde = lower_bound(ps).unwrap();
        if !(tilde <= r.delta + 1e-10) {
            self.failures
                .push(format!("{label}: lower bound {tilde} > delta {}", r.delta));
        }
        if r.argmax_family == Family::Phi1 && !(unit_residual(&r.argmax_cap) <= 1e-8) {
            self.failures.push(format!("{label}: argmax direction not unit"));
        }
    }

    /// Unit norm of every tangent-family direction, subset by subset.
    fn all_phi1(&mut self, label: &str, ps: &PointSet, min_bound: usize) {
        let alg = SubsetAlgebra::new(ps);
        let mut idx = Vec::new();
        let mut worst: f64 = 0.0;
        fn walk(alg: &SubsetAlgebra<'_>, idx: &mut Vec<usize>, from: usize, bound: usize, worst: &mut f64) {
            for k in from..alg.points().len() {
                idx.push(k);
                let cand = alg.classify(idx, bound).unwrap();
                if cand.family == Family::Phi1 {
                    for c in &cand.caps {
                        *worst = worst.max(unit_residual(c));
                    }
                }
                if idx.len() < bound {
                    walk(alg, idx, k + 1, bound, worst);
                }
                idx.pop();
            }
        }
        walk(&alg, &mut idx, 0, min_bound, &mut worst);
        if !(worst <= 1e-8) {
            self.failures
                .push(format!("{label}: tangent direction norm residual {worst:e}"));
        }
    }
}

fn cfg(threads: usize) -> EnumerationConfig {
    EnumerationConfig::default().with_threads(threads)
}

fn gauss(n: usize, count: usize, seed: u64) -> PointSet {
    sample(&SamplerSpec::new(Scheme::GaussMc, n, count, seed).unwrap()).unwrap()
}

fn single_point(post: &mut Post) -> Check {
    let mut worst_err: f64 = 0.0;
    let mut worst_time: f64 = 0.0;
    for n in 2..=6 {
        for seed in 0..5 {
            let ps = gauss(n, 1, 100 + seed);
            let t = Instant::now();
            let r = enumerate(&ps, &cfg(1)).unwrap();
            worst_time = worst_time.max(t.elapsed().as_secs_f64());
            worst_err = worst_err.max((r.delta - 1.0).abs());
            post.report(&format!("single n={n}"), &ps, &r);
        }
    }
    Check::new(
        worst_err <= 1e-12 && worst_time < 1e-3,
        format!(
            "max |delta - 1| = {worst_err:.1e}, slowest run {:.3} ms",
            worst_time * 1e3
        ),
    )
}

fn cap_identities() -> Check {
    let mut worst_reflect: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    for n in 2..=8 {
        for i in 0..1000 {
            let t = -1.0 + 2.0 * i as f64 / 999.0;
            let a = cap_measure(n, t).unwrap();
            let b = cap_measure(n, -t).unwrap();
            worst_reflect = worst_reflect.max((a + b - 1.0).abs());
            if n == 2 {
                worst_closed = worst_closed.max((a - t.acos() / std::f64::consts::PI).abs());
            }
            if n == 3 {
                worst_closed = worst_closed.max((a - (1.0 - t) / 2.0).abs());
            }
        }
    }
    Check::new(
        worst_reflect <= 1e-10 && worst_closed <= 1e-10,
        format!("reflection {worst_reflect:.1e}, closed forms {worst_closed:.1e}"),
    )
}

fn oracle_equivalence(post: &mut Post) -> Check {
    let grid = GridSpec::new(1e-3).unwrap();
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut worst_gap: f64 = 0.0;
    for k in 0..100u64 {
        let (n, count) = if k < 50 {
            (2, 1 + (k as usize % 16))
        } else {
            (3, 1 + (k as usize % 12))
        };
        let ps = gauss(n, count, 5000 + k);
        let v = cross_check(&ps, &grid, &cfg(0)).unwrap();
        worst_gap = worst_gap.max(v.delta - v.grid_bound);
        if !(v.delta >= v.grid_bound - 1e-10 && v.delta - v.grid_bound <= 5e-3) || !v.pass {
            failures.push(format!("instance {k}: {:?}", v.failures));
        }
        let r = enumerate(&ps, &cfg(0)).unwrap();
        post.report(&format!("oracle instance {k}"), &ps, &r);
        post.all_phi1(&format!("oracle instance {k}"), &ps, r.rank.min_bound);
    }
    let secs = t.elapsed().as_secs_f64();
    Check::new(
        failures.is_empty(),
        format!(
            "100 instances, largest gap {worst_gap:.2e}, {secs:.0} s{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    )
}

fn figure_one(post: &mut Post) -> Check {
    let h: f64 = 0.5e-3;
    let ps = PointSet::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![-h.cos(), h.sin(), 0.0],
        vec![-h.cos(), -h.sin(), 0.0],
    ])
    .unwrap();
    let r = enumerate(&ps, &cfg(0)).unwrap();
    post.report("figure one", &ps, &r);
    post.all_phi1("figure one", &ps, r.rank.min_bound);
    let lo = 2.0 / 3.0 - 1e-2;
    Check::new(
        r.delta > lo && r.delta < 2.0 / 3.0,
        format!("delta = {:.9} in ({lo:.6}, {:.6})", r.delta, 2.0 / 3.0),
    )
}

fn determinism(post: &mut Post) -> Check {
    let mut mismatches = Vec::new();
    for k in 0..10u64 {
        let n = 2 + (k as usize % 4);
        let ps = gauss(n, 12 + 3 * k as usize, 700 + k);
        let runs: Vec<DiscrepancyReport> = [1, 2, 8]
            .iter()
            .map(|&th| {
                let mut r = enumerate(&ps, &cfg(th)).unwrap();
                r.wall_time = 0.0;
                r.thread_count = 0;
                r
            })
            .collect();
        let same_bits = runs.iter().all(|r| r.delta.to_bits() == runs[0].delta.to_bits());
        if !same_bits || runs.iter().any(|r| r != &runs[0]) {
            mismatches.push(k);
        }
        post.report(&format!("determinism {k}"), &ps, &runs[0]);
    }
    Check::new(
        mismatches.is_empty(),
        format!("10 instances x threads {{1, 2, 8}}, mismatching instances {mismatches:?}"),
    )
}

fn inversions(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[1] > w[0]).count()
}

fn rows_for(rows: &[ExperimentRow], scheme: Scheme) -> Vec<&ExperimentRow> {
    rows.iter().filter(|r| r.scheme == scheme).collect()
}

fn ratio_shape(rows: &[ExperimentRow], secs: f64) -> Check {
    let sel: Vec<&ExperimentRow> = rows_for(rows, Scheme::GaussMc)
        .into_iter()
        .filter(|r| r.size % 100 == 0)
        .collect();
    let ratio: Vec<f64> = sel.iter().map(|r| r.ratio.unwrap()).collect();
    let delta: Vec<f64> = sel.iter().map(|r| r.delta.unwrap()).collect();
    let tilde: Vec<f64> = sel.iter().map(|r| r.delta_tilde.unwrap()).collect();
    let mean = ratio.iter().sum::<f64>() / ratio.len() as f64;
    let sd = (ratio.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (ratio.len() - 1) as f64).sqrt();
    let rsd = sd / mean;
    let (inv_d, inv_t) = (inversions(&delta), inversions(&tilde));
    Check::new(
        sel.len() == 10 && rsd <= 0.15 && inv_d <= 1 && inv_t <= 1 && secs <= 1800.0,
        format!(
            "N = 100..1000, mean ratio {mean:.3}, relative sd {:.1}%, inversions delta {inv_d} / lower bound {inv_t}, gauss-mc runs {secs:.0} s",
            100.0 * rsd
        ),
    )
}

fn slopes(rows: &[ExperimentRow], runs: &[Run]) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for scheme in Scheme::ALL {
        let (lo, hi) = if scheme.is_qmc() {
            (-0.85, -0.60)
        } else {
            (-0.60, -0.40)
        };
        let slope = capdisc::experiment::loglog_slope(rows, scheme).unwrap_or(f64::NAN);
        let complete = rows_for(rows, scheme).len() == 20;
        ok &= complete && slope >= lo && slope <= hi;
        parts.push(format!("{scheme} {slope:.3} in [{lo}, {hi}]"));
    }
    let mean_delta = |scheme: Scheme, seed: u64| {
        let v: Vec<f64> = runs
            .iter()
            .filter(|r| r.scheme == scheme && r.seed == seed)
            .map(|r| r.delta)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let wins = sobol_skips()
        .into_iter()
        .filter(|&k| mean_delta(Scheme::LambertSobol, k) <= mean_delta(Scheme::GaussSobol, k))
        .count();
    ok &= wins >= 7;
    parts.push(format!("lambert-sobol <= gauss-sobol in {wins}/10 skips"));
    Check::new(ok, parts.join(", "))
}

fn ledger(runs: &[Run]) -> Check {
    let exact = subset_space_size(1000, 3).unwrap();
    let r = runs
        .iter()
        .find(|r| r.scheme == Scheme::GaussMc && r.seed == 0 && r.size == 1000)
        .expect("N = 1000 run");
    let visited = r.subsets_enumerated + r.subsets_pruned;
    Check::new(
        exact == 166_667_500 && r.min_bound == 3 && visited == exact,
        format!(
            "C(1000,1)+C(1000,2)+C(1000,3) = {exact}, enumerated {} + pruned {} = {visited}",
            r.subsets_enumerated, r.subsets_pruned
        ),
    )
}

fn sobol_skips() -> Vec<u64> {
    (0..10).map(|k| 1000 * k).collect()
}

fn main() {
    let mut post = Post::default();
    let mut results: Vec<(u8, &str, Check)> = Vec::new();
    let line = |id: u8, name: &'static str, c: Check, results: &mut Vec<(u8, &str, Check)>| {
        println!(
            "criterion {id}: {} - {name}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
        results.push((id, name, c));
    };

    line(1, "single point", single_point(&mut post), &mut results);
    line(2, "cap measure identities", cap_identities(), &mut results);
    let c3 = oracle_equivalence(&mut post);
    let c5 = figure_one(&mut post);
    let c6 = determinism(&mut post);

    // Sample-size sweeps on S^2, sizes 50..1000 step 50, ten seeds or skips.
    let sizes: Vec<usize> = (1..=20).map(|k| 50 * k).collect();
    let base = ExperimentConfig {
        schemes: vec![Scheme::GaussMc, Scheme::LambertMc],
        dim: 3,
        sizes,
        seeds: (0..10).collect(),
        budget_seconds: f64::INFINITY,
        enumeration: cfg(0),
    };
    let t = Instant::now();
    let gauss_mc = run_experiment(
        &ExperimentConfig {
            schemes: vec![Scheme::GaussMc],
            ..base.clone()
        },
        |_| {},
    )
    .unwrap();
    let gauss_secs = t.elapsed().as_secs_f64();
    let lambert_mc = run_experiment(
        &ExperimentConfig {
            schemes: vec![Scheme::LambertMc],
            ..base.clone()
        },
        |_| {},
    )
    .unwrap();
    let qmc = run_experiment(
        &ExperimentConfig {
            schemes: vec![Scheme::GaussSobol, Scheme::LambertSobol],
            seeds: sobol_skips(),
            ..base.clone()
        },
        |_| {},
    )
    .unwrap();
    let rows: Vec<ExperimentRow> = [&gauss_mc, &lambert_mc, &qmc]
        .iter()
        .flat_map(|e| e.rows.iter().cloned())
        .collect();
    let runs: Vec<Run> = [&gauss_mc, &lambert_mc, &qmc]
        .iter()
        .flat_map(|e| e.runs.iter().cloned())
        .collect();
    for (scheme, seed) in [(Scheme::GaussMc, 0), (Scheme::LambertSobol, 0)] {
        let ps = sample(&SamplerSpec::new(scheme, 3, 1000, seed).unwrap()).unwrap();
        let r = enumerate(&ps, &cfg(0)).unwrap();
        post.report(&format!("{scheme} N=1000"), &ps, &r);
    }

    line(3, "grid oracle equivalence", c3, &mut results);
    let c4 = Check::new(
        post.failures.is_empty(),
        format!(
            "{} instances{}",
            post.instances,
            if post.failures.is_empty() {
                String::new()
            } else {
                format!("; {}", post.failures.join("; "))
            }
        ),
    );
    line(4, "structural post-conditions", c4, &mut results);
    line(5, "clustered equatorial triple", c5, &mut results);
    line(6, "determinism across thread counts", c6, &mut results);
    line(
        7,
        "lower bound ratio shape",
        ratio_shape(&rows, gauss_secs),
        &mut results,
    );
    line(8, "log-log slopes", slopes(&rows, &runs), &mut results);
    line(9, "subset ledger", ledger(&runs), &mut results);

    let failed: Vec<u8> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
