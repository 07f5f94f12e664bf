//! The `partcache` command line.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error,
//! 3 cache or serve-count violation, 4 exhaustive budget exceeded,
//! 5 validation failure.

pub mod sweep;
pub mod table;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{stp_rlnc, stp_uc};
use crate::config::ExperimentConfig;
use crate::error::{Error, Violation};
use crate::model::{default_serve_counts, RlncAllocation, UcAllocation};
use crate::optimize::{solve_with_budget, Allocation, Design, Method, DEFAULT_EXHAUSTIVE_BUDGET};
use crate::sim::{
    simulate_baseline, simulate_rlnc, simulate_uc, Baseline, McEstimate, SimOptions, SimReport, DEFAULT_TRIALS,
};
use crate::validation::{self, ValidationOptions, CHECK_IDS};

use sweep::{run_sweep, write_sweep, SweepSpec};
use table::{fmt_real, join_codes, join_reals, Table, ANALYZE_COLUMNS, OPTIMIZE_COLUMNS, SIMULATE_COLUMNS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONSTRAINT: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "partcache", version, about = "Partition-based caching in SIC-enabled wireless networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Rlnc,
    Uc,
}

impl From<Kind> for Design {
    fn from(k: Kind) -> Design {
        match k {
            Kind::Rlnc => Design::Rlnc,
            Kind::Uc => Design::Uc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimKind {
    Rlnc,
    Uc,
    Baseline1,
    Baseline2,
    Baseline3,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form success probability of one allocation.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        design: Kind,
        /// Per-file codes, e.g. "2,2,1,0,0" (0 = not cached).
        #[arg(long)]
        codes: String,
        /// Per-file serve counts for the uncoded design; defaults to M for split files.
        #[arg(long)]
        serve: Option<String>,
        /// Also estimate by Monte Carlo.
        #[arg(long)]
        simulate: bool,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choose a cache allocation.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        design: Kind,
        #[arg(long, default_value = "greedy", value_parser = parse_method)]
        method: Method,
        /// Largest number of candidates the exhaustive search may visit.
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate for an allocation or a reference scheme.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        design: SimKind,
        #[arg(long)]
        codes: Option<String>,
        #[arg(long)]
        serve: Option<String>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate designs over a parameter grid, one CSV per design.
    Sweep {
        spec: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the sweep file's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the sweep file's trial count.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Run the built-in cross-checks.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run only these checks (repeatable).
        #[arg(long = "check", value_parser = clap::value_parser!(u8).range(1..=CHECK_IDS.len() as i64))]
        checks: Vec<u8>,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Constraint(Violation::CodeExceedsSic { .. }) => EXIT_USAGE,
        Error::Constraint(_) => EXIT_CONSTRAINT,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::Quadrature { .. } | Error::InsufficientBaseStations { .. } => EXIT_FAILURE,
        Error::InvalidParameter { .. }
        | Error::InvalidPopularity(_)
        | Error::LengthMismatch { .. }
        | Error::Domain(_)
        | Error::UnsupportedInstance(_)
        | Error::Hypothesis(_)
        | Error::TruncationTooLarge { .. }
        | Error::Parse { .. } => EXIT_USAGE,
    }
}

enum Failure {
    Lib(Error),
    Io(PathBuf, io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs the CLI with process stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// Runs the CLI, writing results to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Io(path, e)) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            EXIT_FAILURE
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Analyze { config, design, codes, serve, simulate, trials, seed, out: path } => {
            let exp = ExperimentConfig::load(&config)?;
            let t = analyze(&exp, design, &codes, serve.as_deref(), simulate.then(|| SimOptions::new(trials, seed)))?;
            emit(&t, path.as_deref(), out)?;
        }
        Command::Optimize { config, design, method, budget, out: path } => {
            let exp = ExperimentConfig::load(&config)?;
            let a = exp.popularity()?;
            let r = solve_with_budget(design.into(), &a, &exp.system, method, budget)?;
            let mut t = Table::new(&OPTIMIZE_COLUMNS);
            t.push(vec![
                design_name(r.allocation.design()).into(),
                r.method.to_string(),
                fmt_real(r.guarantee),
                r.certified_optimal.to_string(),
                join_codes(r.allocation.codes()),
                r.allocation.serve_counts().map(join_codes).unwrap_or_default(),
                fmt_real(r.objective),
                r.asymptotic_value.map(fmt_real).unwrap_or_default(),
            ]);
            emit(&t, path.as_deref(), out)?;
        }
        Command::Simulate { config, design, codes, serve, trials, seed, out: path } => {
            let exp = ExperimentConfig::load(&config)?;
            let t = simulate(&exp, design, codes.as_deref(), serve.as_deref(), &SimOptions::new(trials, seed))?;
            emit(&t, path.as_deref(), out)?;
        }
        Command::Sweep { spec, out: dir, seed, trials } => {
            let mut spec_v = SweepSpec::load(&spec)?;
            if seed.is_some() {
                spec_v.seed = seed;
            }
            if let Some(n) = trials {
                spec_v.trials = n;
            }
            let outputs = run_sweep(&spec_v)?;
            let written = write_sweep(&spec_v, &outputs, &dir).map_err(|e| Failure::Io(dir.clone(), e))?;
            for p in written {
                writeln!(out, "{}", p.display()).map_err(|e| Failure::Io("<stdout>".into(), e))?;
            }
        }
        Command::Validate { seed, checks } => {
            let opts = ValidationOptions { seed, ..ValidationOptions::default() };
            let ids = if checks.is_empty() { CHECK_IDS.to_vec() } else { checks };
            let mut failed = 0;
            for id in ids {
                let report = validation::run_check(id, &opts);
                failed += usize::from(!report.passed);
                writeln!(out, "{report}").map_err(|e| Failure::Io("<stdout>".into(), e))?;
            }
            if failed > 0 {
                let _ = writeln!(out, "{failed} check(s) failed");
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(EXIT_OK)
}

fn emit(t: &Table, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, t.to_csv()).map_err(|e| Failure::Io(p.to_path_buf(), e)),
        None => out.write_all(t.to_csv().as_bytes()).map_err(|e| Failure::Io("<stdout>".into(), e)),
    }
}

fn design_name(d: Design) -> &'static str {
    match d {
        Design::Rlnc => "rlnc",
        Design::Uc => "uc",
    }
}

/// Parses "2, 2,0" style lists.
pub fn parse_code_list(s: &str, what: &'static str) -> Result<Vec<u32>, Error> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::param(what, format!("`{}` is not a nonnegative integer", t.trim()))))
        .collect()
}

fn allocation(exp: &ExperimentConfig, kind: Kind, codes: &str, serve: Option<&str>) -> Result<Allocation, Error> {
    let codes = parse_code_list(codes, "codes")?;
    Ok(match kind {
        Kind::Rlnc => {
            if serve.is_some() {
                return Err(Error::param("serve", "serve counts only apply to the uncoded design"));
            }
            Allocation::Rlnc(RlncAllocation::new(codes))
        }
        Kind::Uc => {
            let serve = match serve {
                Some(s) => parse_code_list(s, "serve")?,
                None => default_serve_counts(&codes, exp.system.sic_capability()),
            };
            Allocation::Uc(UcAllocation::new(codes, serve))
        }
    })
}

fn analyze(
    exp: &ExperimentConfig,
    kind: Kind,
    codes: &str,
    serve: Option<&str>,
    sim: Option<SimOptions>,
) -> Result<Table, Error> {
    let a = exp.popularity()?;
    let cfg = &exp.system;
    let alloc = allocation(exp, kind, codes, serve)?;
    let (stp, report) = match &alloc {
        Allocation::Rlnc(x) => {
            let stp = stp_rlnc(x, &a, cfg)?;
            (stp, sim.map(|o| simulate_rlnc(x, &a, cfg, &o)).transpose()?)
        }
        Allocation::Uc(x) => {
            let stp = stp_uc(x, &a, cfg)?;
            (stp, sim.map(|o| simulate_uc(x, &a, cfg, &o)).transpose()?)
        }
    };
    let est = report.map(|r| r.overall);
    let mut t = Table::new(&ANALYZE_COLUMNS);
    t.push(vec![
        design_name(alloc.design()).into(),
        join_codes(alloc.codes()),
        alloc.serve_counts().map(join_codes).unwrap_or_default(),
        join_reals(&stp.per_file),
        fmt_real(stp.total),
        est.map(|e| fmt_real(e.mean)).unwrap_or_default(),
        est.map(|e| fmt_real(e.ci_half_width)).unwrap_or_default(),
        est.map(|e| e.trials.to_string()).unwrap_or_default(),
        est.map(|e| e.seed.to_string()).unwrap_or_default(),
    ]);
    Ok(t)
}

fn simulate(
    exp: &ExperimentConfig,
    kind: SimKind,
    codes: Option<&str>,
    serve: Option<&str>,
    opts: &SimOptions,
) -> Result<Table, Error> {
    let a = exp.popularity()?;
    let cfg = &exp.system;
    let need_codes = || codes.ok_or_else(|| Error::param("codes", "required for the rlnc and uc designs"));
    let baseline = |b: Baseline| -> Result<(String, SimReport), Error> {
        if codes.is_some() || serve.is_some() {
            return Err(Error::param("codes", "reference schemes take no allocation"));
        }
        Ok((format!("baseline{}", b.id()), simulate_baseline(b, &a, cfg, opts)?))
    };
    let (name, report) = match kind {
        SimKind::Rlnc | SimKind::Uc => {
            let k = if kind == SimKind::Rlnc { Kind::Rlnc } else { Kind::Uc };
            match allocation(exp, k, need_codes()?, serve)? {
                Allocation::Rlnc(x) => ("rlnc".to_string(), simulate_rlnc(&x, &a, cfg, opts)?),
                Allocation::Uc(x) => ("uc".to_string(), simulate_uc(&x, &a, cfg, opts)?),
            }
        }
        SimKind::Baseline1 => baseline(Baseline::MostPopular)?,
        SimKind::Baseline2 => baseline(Baseline::Uniform)?,
        SimKind::Baseline3 => baseline(Baseline::WaterFill)?,
    };
    let mut t = Table::new(&SIMULATE_COLUMNS);
    let row = |scope: String, e: &McEstimate| {
        vec![
            name.clone(),
            scope,
            fmt_real(e.mean),
            fmt_real(e.ci_half_width),
            e.trials.to_string(),
            e.seed.to_string(),
        ]
    };
    t.push(row("overall".into(), &report.overall));
    for (n, e) in report.per_file.iter().enumerate() {
        t.push(row(format!("file:{}", n + 1), e));
    }
    Ok(t)
}
