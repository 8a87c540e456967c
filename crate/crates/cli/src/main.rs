use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use capdisc::experiment::{self, ExperimentConfig, DEFAULT_BUDGET_SECONDS};
use capdisc::io::{self, ReadError};
use capdisc::samplers::MC_GENERATOR;
use capdisc::{
    cross_check, enumerate, lower_bound, lower_bound_details, sample, EnumerationConfig, GridSpec, PointSet,
    SamplerSpec, Scheme,
};
use clap::{Args, Parser, Subcommand};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_UNIT: u8 = 3;
const EXIT_UNSUPPORTED: u8 = 4;

/// Exact spherical cap discrepancy of point sets on the unit sphere.
#[derive(Parser)]
#[command(name = "capdisc", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact discrepancy by subset enumeration.
    Compute(ComputeArgs),
    /// Lower bound from the sample directions.
    LowerBound(LowerBoundArgs),
    /// Generate a sample.
    Sample(SampleArgs),
    /// Discrepancy against sample size for one or all schemes.
    Experiment(ExperimentArgs),
    /// Cross-check the exact value against a direction grid (n = 2, 3).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Threads {
    /// Worker threads (0 = all cores).
    #[arg(long, env = "CAPDISC_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct Tols {
    #[arg(long, default_value_t = 1e-10)]
    gamma_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    rank_tol: f64,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(long)]
    points: PathBuf,
    #[command(flatten)]
    threads: Threads,
    #[command(flatten)]
    tols: Tols,
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    count: usize,
    /// Generator seed (MC schemes).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sequence offset (Sobol schemes).
    #[arg(long, default_value_t = 0)]
    skip: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Scheme name or `all`.
    #[arg(long, default_value = "all")]
    scheme: String,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// `start:stop:step`, stop inclusive.
    #[arg(long, default_value = "50:1000:50")]
    sizes: String,
    /// Seeds (MC) or skip offsets (Sobol): `0,1,5-9`.
    #[arg(long, default_value = "0")]
    seeds: String,
    #[arg(long)]
    out: PathBuf,
    /// Total runtime budget in seconds.
    #[arg(long, default_value_t = DEFAULT_BUDGET_SECONDS)]
    budget: f64,
    #[command(flatten)]
    threads: Threads,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    points: PathBuf,
    /// Direction grid step in radians.
    #[arg(long, default_value_t = 1e-3)]
    grid_resolution: f64,
    #[command(flatten)]
    threads: Threads,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<capdisc::Error> for Failure {
    fn from(e: capdisc::Error) -> Self {
        Failure::new(EXIT_FAIL, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_FAIL, e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

fn load(path: &Path) -> Result<PointSet, Failure> {
    io::read_points_file(path).map_err(|e| {
        let code = match e {
            ReadError::Malformed { .. } => EXIT_INPUT,
            ReadError::NotUnit { .. } => EXIT_NOT_UNIT,
            ReadError::Io(_) | ReadError::Core(_) => EXIT_INPUT,
        };
        Failure::new(code, format!("{}: {e}", path.display()))
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn config(threads: &Threads, tols: Option<&Tols>) -> Result<EnumerationConfig, Failure> {
    let mut cfg = EnumerationConfig::default().with_threads(threads.threads);
    if let Some(t) = tols {
        for (name, v) in [("gamma-tol", t.gamma_tol), ("rank-tol", t.rank_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Failure::new(EXIT_INPUT, format!("--{name} {v} must lie in (0, 1)")));
            }
        }
        cfg.tol.gamma_tol = t.gamma_tol;
        cfg.tol.rank_tol = t.rank_tol;
    }
    Ok(cfg)
}

fn compute(a: ComputeArgs) -> Outcome {
    let ps = load(&a.points)?;
    let cfg = config(&a.threads, Some(&a.tols))?;
    let report = enumerate(&ps, &cfg)?;
    let tilde = lower_bound(&ps)?;
    emit(a.output.as_deref(), &io::report_json(&report, Some(tilde)))?;
    Ok(ExitCode::SUCCESS)
}

fn lower_bound_cmd(a: LowerBoundArgs) -> Outcome {
    let ps = load(&a.points)?;
    let t = Instant::now();
    let details = lower_bound_details(&ps)?;
    emit(
        a.output.as_deref(),
        &io::lower_bound_json(&ps, &details, t.elapsed().as_secs_f64()),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn parse_scheme(name: &str) -> Result<Scheme, Failure> {
    name.parse()
        .map_err(|e: capdisc::Error| Failure::new(EXIT_INPUT, e.to_string()))
}

fn sample_cmd(a: SampleArgs) -> Outcome {
    let scheme = parse_scheme(&a.scheme)?;
    if scheme.is_lambert() && a.dim != 3 {
        return Err(Failure::new(
            EXIT_UNSUPPORTED,
            format!("{scheme} is only defined on S^2 (--dim 3), got --dim {}", a.dim),
        ));
    }
    let seed = if scheme.is_qmc() { a.skip } else { a.seed };
    let spec = SamplerSpec::new(scheme, a.dim, a.count, seed).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let ps: PointSet = sample(&spec)?;
    let source = if scheme.is_qmc() {
        format!("skip {seed}, Sobol index 0 excluded")
    } else {
        format!("seed {seed}, {MC_GENERATOR}")
    };
    let header = vec![format!("scheme {scheme}, n {}, N {}, {source}", a.dim, a.count)];
    match &a.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            io::write_points(&ps, &header, &mut w)?;
            w.flush()?;
        }
        None => io::write_points(&ps, &header, std::io::stdout().lock())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn loglog_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}_loglog.csv"))
}

fn experiment_cmd(a: ExperimentArgs) -> Outcome {
    let schemes = if a.scheme == "all" {
        Scheme::ALL.to_vec()
    } else {
        vec![parse_scheme(&a.scheme)?]
    };
    if a.dim != 3 && schemes.iter().any(|s| s.is_lambert()) {
        return Err(Failure::new(EXIT_UNSUPPORTED, "Lambert schemes require --dim 3"));
    }
    let input = |e: capdisc::Error| Failure::new(EXIT_INPUT, e.to_string());
    let cfg = ExperimentConfig {
        schemes,
        dim: a.dim,
        sizes: experiment::parse_sizes(&a.sizes).map_err(input)?,
        seeds: experiment::parse_seeds(&a.seeds).map_err(input)?,
        budget_seconds: a.budget,
        enumeration: config(&a.threads, None)?,
    };
    let exp = experiment::run_experiment(&cfg, |line| eprintln!("{line}"))?;
    experiment::write_rows_csv(&exp.rows, BufWriter::new(File::create(&a.out)?))?;
    let ll = loglog_path(&a.out);
    experiment::write_loglog_csv(&exp.rows, BufWriter::new(File::create(&ll)?))?;
    for s in &cfg.schemes {
        if let Some(slope) = experiment::loglog_slope(&exp.rows, *s) {
            eprintln!("{s}: log-log slope {slope:.3}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Outcome {
    let ps = load(&a.points)?;
    if !(2..=3).contains(&ps.dim()) {
        return Err(Failure::new(
            EXIT_UNSUPPORTED,
            format!("grid verification supports n = 2 or 3, file has n = {}", ps.dim()),
        ));
    }
    if ps.len() > capdisc::oracle::MAX_CROSS_CHECK_POINTS {
        return Err(Failure::new(
            EXIT_UNSUPPORTED,
            format!(
                "grid verification supports at most {} points, file has {}",
                capdisc::oracle::MAX_CROSS_CHECK_POINTS,
                ps.len()
            ),
        ));
    }
    let grid = GridSpec::new(a.grid_resolution).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let cfg = config(&a.threads, None)?;
    let v = cross_check(&ps, &grid, &cfg)?;
    println!(
        "{}: delta {} grid bound {} gap {:.3e} (tolerance {:.3e})",
        if v.pass { "PASS" } else { "FAIL" },
        io::format_real(v.delta),
        io::format_real(v.grid_bound),
        (v.delta - v.grid_bound).abs(),
        v.tolerance
    );
    for f in &v.failures {
        println!("  {f}");
    }
    Ok(if v.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Compute(a) => compute(a),
        Cmd::LowerBound(a) => lower_bound_cmd(a),
        Cmd::Sample(a) => sample_cmd(a),
        Cmd::Experiment(a) => experiment_cmd(a),
        Cmd::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
