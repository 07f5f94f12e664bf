//! Parameter sweeps: one CSV per design, one row per grid point.
//!
//! A sweep file holds the configuration keys plus
//!
//! ```text
//! variable = file_size            # file_size | sic_capability | cache_size | zipf_gamma
//! grid = 2e2, 5e2, 1e3, 2e3       # ascending
//! designs = rlnc-greedy, uc-greedy, baseline1
//! evaluation = both               # analytic | simulate | both
//! trials = 10000
//! seed = 1
//! gnuplot = true                  # optional, writes plot.gp next to the CSVs
//! ```
//!
//! Besides the optimized designs, `rlnc-fixed:2/2/0/0/0` and
//! `uc-fixed:2/2/0/0/0` evaluate a given allocation at every grid point.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::{parse_entries, parse_value, Entry, ExperimentConfig};
use crate::error::{Error, Result};
use crate::model::{default_serve_counts, Popularity, RlncAllocation, UcAllocation};
use crate::optimize::{self, Allocation, Method};
use crate::sim::{simulate_cases, Baseline, McEstimate, SimCase, SimDesign, SimOptions, DEFAULT_TRIALS};

use super::table::{fmt_real, Table, SWEEP_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    FileSize,
    SicCapability,
    CacheSize,
    ZipfGamma,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepVariable::FileSize => "file_size",
            SweepVariable::SicCapability => "sic_capability",
            SweepVariable::CacheSize => "cache_size",
            SweepVariable::ZipfGamma => "zipf_gamma",
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "file_size" => SweepVariable::FileSize,
            "sic_capability" => SweepVariable::SicCapability,
            "cache_size" => SweepVariable::CacheSize,
            "zipf_gamma" => SweepVariable::ZipfGamma,
            other => return Err(Error::param("variable", format!("unknown sweep variable `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepDesign {
    RlncGreedy,
    RlncExhaustive,
    UcGreedy,
    UcExhaustive,
    Baseline(Baseline),
    AsymptoticSmall,
    AsymptoticLarge,
    RlncFixed(Vec<u32>),
    UcFixed(Vec<u32>),
}

impl fmt::Display for SweepDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fixed = |codes: &[u32]| codes.iter().map(u32::to_string).collect::<Vec<_>>().join("/");
        match self {
            SweepDesign::RlncGreedy => f.write_str("rlnc-greedy"),
            SweepDesign::RlncExhaustive => f.write_str("rlnc-exhaustive"),
            SweepDesign::UcGreedy => f.write_str("uc-greedy"),
            SweepDesign::UcExhaustive => f.write_str("uc-exhaustive"),
            SweepDesign::Baseline(b) => write!(f, "baseline{}", b.id()),
            SweepDesign::AsymptoticSmall => f.write_str("asymptotic-small"),
            SweepDesign::AsymptoticLarge => f.write_str("asymptotic-large"),
            SweepDesign::RlncFixed(c) => write!(f, "rlnc-fixed:{}", fixed(c)),
            SweepDesign::UcFixed(c) => write!(f, "uc-fixed:{}", fixed(c)),
        }
    }
}

impl FromStr for SweepDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let codes = |body: &str| -> Result<Vec<u32>> {
            body.split('/')
                .map(|t| t.trim().parse().map_err(|_| Error::param("designs", format!("bad code `{t}` in `{s}`"))))
                .collect()
        };
        Ok(match s {
            "rlnc-greedy" => SweepDesign::RlncGreedy,
            "rlnc-exhaustive" => SweepDesign::RlncExhaustive,
            "uc-greedy" => SweepDesign::UcGreedy,
            "uc-exhaustive" => SweepDesign::UcExhaustive,
            "baseline1" => SweepDesign::Baseline(Baseline::MostPopular),
            "baseline2" => SweepDesign::Baseline(Baseline::Uniform),
            "baseline3" => SweepDesign::Baseline(Baseline::WaterFill),
            "asymptotic-small" => SweepDesign::AsymptoticSmall,
            "asymptotic-large" => SweepDesign::AsymptoticLarge,
            _ => {
                if let Some(body) = s.strip_prefix("rlnc-fixed:") {
                    SweepDesign::RlncFixed(codes(body)?)
                } else if let Some(body) = s.strip_prefix("uc-fixed:") {
                    SweepDesign::UcFixed(codes(body)?)
                } else {
                    return Err(Error::param("designs", format!("unknown design `{s}`")));
                }
            }
        })
    }
}

impl SweepDesign {
    fn file_stem(&self) -> String {
        self.to_string().replace([':', '/'], "-")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Analytic,
    Simulate,
    Both,
}

impl Evaluation {
    fn analytic(self) -> bool {
        self != Evaluation::Simulate
    }

    fn simulate(self) -> bool {
        self != Evaluation::Analytic
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub designs: Vec<SweepDesign>,
    pub evaluation: Evaluation,
    pub trials: u64,
    pub seed: Option<u64>,
    pub gnuplot: bool,
}

const SWEEP_KEYS: [&str; 7] = ["variable", "grid", "designs", "evaluation", "trials", "seed", "gnuplot"];

fn list(entry: &Entry) -> Vec<String> {
    entry.value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (base, rest) = ExperimentConfig::from_entries(parse_entries(text)?)?;
        if let Some(e) = rest.iter().find(|e| !SWEEP_KEYS.contains(&e.key.as_str())) {
            return Err(Error::Parse { line: e.line, message: format!("unknown key `{}`", e.key) });
        }
        let find = |key: &str| rest.iter().find(|e| e.key == key);
        let need = |key: &str| {
            find(key).ok_or_else(|| Error::Parse { line: 0, message: format!("missing required key `{key}`") })
        };
        let at = |e: &Entry, err: Error| Error::Parse { line: e.line, message: err.to_string() };

        let e = need("variable")?;
        let variable: SweepVariable = e.value.parse().map_err(|err| at(e, err))?;

        let e = need("grid")?;
        let grid = list(e)
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| at(e, Error::param("grid", format!("not a number: `{t}`")))))
            .collect::<Result<Vec<_>>>()?;
        if grid.is_empty() {
            return Err(at(e, Error::param("grid", "must not be empty")));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(at(e, Error::param("grid", "must be strictly ascending")));
        }
        if matches!(variable, SweepVariable::SicCapability | SweepVariable::CacheSize)
            && grid.iter().any(|g| g.fract() != 0.0 || *g < 1.0)
        {
            return Err(at(e, Error::param("grid", "integer variables need positive integer grid values")));
        }

        let e = need("designs")?;
        let designs = list(e).iter().map(|t| t.parse().map_err(|err| at(e, err))).collect::<Result<Vec<SweepDesign>>>()?;
        if designs.is_empty() {
            return Err(at(e, Error::param("designs", "must list at least one design")));
        }

        let evaluation = match find("evaluation") {
            None => Evaluation::Analytic,
            Some(e) => match e.value.as_str() {
                "analytic" => Evaluation::Analytic,
                "simulate" => Evaluation::Simulate,
                "both" => Evaluation::Both,
                other => return Err(at(e, Error::param("evaluation", format!("unknown evaluation `{other}`")))),
            },
        };
        if !evaluation.simulate() {
            if let Some(b) = designs.iter().find(|d| matches!(d, SweepDesign::Baseline(_))) {
                return Err(Error::param("evaluation", format!("{b} has no closed form; use simulate or both")));
            }
        }
        let trials = find("trials").map(parse_value).transpose()?.unwrap_or(DEFAULT_TRIALS);
        let seed = find("seed").map(parse_value).transpose()?;
        let gnuplot = find("gnuplot").map(parse_value).transpose()?.unwrap_or(false);
        Ok(SweepSpec { base, variable, grid, designs, evaluation, trials, seed, gnuplot })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Parse { line: 0, message: format!("cannot read {}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    /// Configuration at one grid point.
    pub fn point(&self, value: f64) -> Result<ExperimentConfig> {
        let mut p = self.base.system.params();
        let mut gamma = self.base.zipf_gamma;
        match self.variable {
            SweepVariable::FileSize => p.file_size_bits = value,
            SweepVariable::SicCapability => p.sic_capability = value as u32,
            SweepVariable::CacheSize => p.cache_size = value as u32,
            SweepVariable::ZipfGamma => gamma = value,
        }
        if !(gamma > 0.0) {
            return Err(Error::param("zipf_gamma", "must be positive"));
        }
        Ok(ExperimentConfig { system: crate::model::SystemConfig::new(p)?, zipf_gamma: gamma })
    }
}

/// One design's results over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub design: SweepDesign,
    pub table: Table,
}

fn allocation(design: &SweepDesign, a: &Popularity, cfg: &crate::model::SystemConfig) -> Result<Option<Allocation>> {
    Ok(Some(match design {
        SweepDesign::RlncGreedy => optimize::solve_rlnc(a, cfg, Method::Greedy)?.allocation,
        SweepDesign::RlncExhaustive => optimize::solve_rlnc(a, cfg, Method::Exhaustive)?.allocation,
        SweepDesign::UcGreedy => optimize::solve_uc(a, cfg, Method::Greedy)?.allocation,
        SweepDesign::UcExhaustive => optimize::solve_uc(a, cfg, Method::Exhaustive)?.allocation,
        SweepDesign::AsymptoticSmall => optimize::asymptotic_opt_rlnc_small(a, cfg)?.allocation,
        SweepDesign::AsymptoticLarge => optimize::asymptotic_opt_rlnc_large(a, cfg)?.allocation,
        SweepDesign::RlncFixed(codes) => Allocation::Rlnc(RlncAllocation::new(codes.clone())),
        SweepDesign::UcFixed(codes) => {
            Allocation::Uc(UcAllocation::new(codes.clone(), default_serve_counts(codes, cfg.sic_capability())))
        }
        SweepDesign::Baseline(_) => return Ok(None),
    }))
}

/// Runs the sweep. Simulating without a seed uses seed 0 and starts each
/// table with a `warning` row.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepOutput>> {
    let seed_missing = spec.evaluation.simulate() && spec.seed.is_none();
    let seed = spec.seed.unwrap_or(0);
    let mut outputs: Vec<SweepOutput> =
        spec.designs.iter().map(|d| SweepOutput { design: d.clone(), table: Table::new(&SWEEP_COLUMNS) }).collect();
    if seed_missing {
        for out in &mut outputs {
            let mut row = vec![String::new(); SWEEP_COLUMNS.len()];
            row[0] = "warning".into();
            row[1] = "simulation requested without a seed; using seed 0".into();
            row[2] = out.design.to_string();
            row[7] = "0".into();
            out.table.push(row);
        }
    }
    for &value in &spec.grid {
        let point = spec.point(value)?;
        let cfg = point.system;
        let a = point.popularity()?;
        let mut objectives = Vec::new();
        let mut cases = Vec::new();
        for d in &spec.designs {
            let alloc = allocation(d, &a, &cfg)?;
            let objective = match (&alloc, spec.evaluation.analytic()) {
                (Some(x), true) => Some(x.evaluate(&a, &cfg)?),
                _ => None,
            };
            objectives.push(objective);
            let design = match (d, alloc) {
                (SweepDesign::Baseline(b), _) => SimDesign::Baseline(*b),
                (_, Some(Allocation::Rlnc(x))) => SimDesign::Rlnc(x),
                (_, Some(Allocation::Uc(x))) => SimDesign::Uc(x),
                (_, None) => unreachable!("only baselines lack an allocation"),
            };
            cases.push(SimCase { design, cfg });
        }
        let estimates: Vec<Option<McEstimate>> = if spec.evaluation.simulate() {
            let opts = SimOptions::new(spec.trials, seed);
            simulate_cases(&cases, &a, &opts)?.into_iter().map(|r| Some(r.overall)).collect()
        } else {
            vec![None; cases.len()]
        };
        for ((out, objective), est) in outputs.iter_mut().zip(objectives).zip(estimates) {
            let blank = String::new;
            out.table.push(vec![
                spec.variable.as_str().to_string(),
                fmt_real(value),
                out.design.to_string(),
                objective.map_or_else(blank, fmt_real),
                est.map_or_else(blank, |e| fmt_real(e.mean)),
                est.map_or_else(blank, |e| fmt_real(e.ci_half_width)),
                est.map_or_else(blank, |e| e.trials.to_string()),
                if spec.evaluation.simulate() { seed.to_string() } else { blank() },
            ]);
        }
    }
    Ok(outputs)
}

/// Writes `<stem>.csv` per design (and `plot.gp` if asked) into `dir`.
pub fn write_sweep(spec: &SweepSpec, outputs: &[SweepOutput], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for out in outputs {
        let path = dir.join(format!("{}.csv", out.design.file_stem()));
        fs::write(&path, out.table.to_csv())?;
        written.push(path);
    }
    if spec.gnuplot {
        let path = dir.join("plot.gp");
        fs::write(&path, gnuplot_script(spec, outputs))?;
        written.push(path);
    }
    Ok(written)
}

fn gnuplot_script(spec: &SweepSpec, outputs: &[SweepOutput]) -> String {
    let mut s = String::from("set datafile separator ','\nset key outside\nset ylabel 'success probability'\n");
    s += &format!("set xlabel '{}'\n", spec.variable.as_str());
    if spec.variable == SweepVariable::FileSize {
        s += "set logscale x\n";
    }
    let mut plots = Vec::new();
    for out in outputs {
        let file = format!("{}.csv", out.design.file_stem());
        // `every ::1` skips the header; warning rows have no numbers and are ignored
        if spec.evaluation.analytic() && !matches!(out.design, SweepDesign::Baseline(_)) {
            plots.push(format!("'{file}' every ::1 using 2:4 with lines title '{} analytic'", out.design));
        }
        if spec.evaluation.simulate() {
            plots.push(format!("'{file}' every ::1 using 2:5:6 with yerrorbars title '{} simulated'", out.design));
        }
    }
    s += &format!("plot {}\n", plots.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "n_files = 5\ncache_size = 2\nsic_capability = 3\npath_loss_exp = 4\n\
                        bandwidth_hz = 10e6\nslot_duration_s = 1e-3\nfile_size_bits = 1e4\n";

    #[test]
    fn parses_designs() {
        for name in ["rlnc-greedy", "uc-exhaustive", "baseline3", "asymptotic-small", "rlnc-fixed:2/2/0/0/0"] {
            assert_eq!(name.parse::<SweepDesign>().unwrap().to_string(), name);
        }
        assert!("baseline4".parse::<SweepDesign>().is_err());
        assert!("rlnc-fixed:2/x".parse::<SweepDesign>().is_err());
        assert_eq!("uc-fixed:1/2".parse::<SweepDesign>().unwrap().file_stem(), "uc-fixed-1-2");
    }

    #[test]
    fn spec_rules() {
        let ok = format!("{BASE}variable = file_size\ngrid = 1e3, 1e4\ndesigns = rlnc-greedy\n");
        let spec = SweepSpec::parse(&ok).unwrap();
        assert_eq!(spec.evaluation, Evaluation::Analytic);
        assert_eq!(spec.grid, vec![1e3, 1e4]);
        let empty = format!("{BASE}variable = file_size\ngrid = 1e3\ndesigns = \n");
        assert!(SweepSpec::parse(&empty).is_err());
        let unsorted = format!("{BASE}variable = file_size\ngrid = 1e4, 1e3\ndesigns = rlnc-greedy\n");
        assert!(SweepSpec::parse(&unsorted).is_err());
        let baseline = format!("{BASE}variable = file_size\ngrid = 1e3\ndesigns = baseline1\n");
        assert!(SweepSpec::parse(&baseline).is_err());
        let frac = format!("{BASE}variable = sic_capability\ngrid = 1.5\ndesigns = rlnc-greedy\n");
        assert!(SweepSpec::parse(&frac).is_err());
        let stray = format!("{BASE}variable = file_size\ngrid = 1e3\ndesigns = rlnc-greedy\ncolor = red\n");
        assert!(matches!(SweepSpec::parse(&stray), Err(Error::Parse { line: 11, .. })));
    }

    #[test]
    fn analytic_sweep_rows() {
        let text = format!("{BASE}variable = sic_capability\ngrid = 1, 2, 3\ndesigns = rlnc-greedy, uc-greedy\n");
        let spec = SweepSpec::parse(&text).unwrap();
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out.len(), 2);
        for o in &out {
            assert_eq!(o.table.rows.len(), 3);
            assert_eq!(o.table.get(0, "mc_mean"), Some(""));
        }
        // M = 1: both designs store the top-K whole files.
        assert_eq!(out[0].table.get(0, "objective"), out[1].table.get(0, "objective"));
    }

    #[test]
    fn missing_seed_adds_warning_row() {
        let text = format!(
            "{BASE}variable = file_size\ngrid = 1e4\ndesigns = baseline1\nevaluation = simulate\ntrials = 200\n"
        );
        let spec = SweepSpec::parse(&text).unwrap();
        let out = run_sweep(&spec).unwrap();
        assert_eq!(out[0].table.rows.len(), 2);
        assert_eq!(out[0].table.get(0, "variable"), Some("warning"));
        assert_eq!(out[0].table.get(1, "seed"), Some("0"));
    }
}
