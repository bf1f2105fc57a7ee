//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # enriched convection-diffusion
//! problem = singular_cd
//! eps = 1e-4
//! forcing = const:1
//! n_points = 50
//! output_dir = out/ecd
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::problems::{Ansatz, ProblemKind, ProblemSpec};
use crate::reference::DEFAULT_ORACLE_MESH;
use crate::training::{Sampling, TrainConfig};

pub const DEFAULT_N_SEEDS: usize = 3;

/// Forcing as written in a config file. `File` paths are resolved against
/// the config file's directory by [`ExperimentConfig::load`].
#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSelector {
    Const(f64),
    Cos,
    File(PathBuf),
}

impl FromStr for ForcingSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "cos" {
            return Ok(ForcingSelector::Cos);
        }
        if let Some(c) = s.strip_prefix("const:") {
            return parse_finite(c).map(ForcingSelector::Const);
        }
        if let Some(p) = s.strip_prefix("file:") {
            let p = p.trim();
            if p.is_empty() {
                return Err("empty forcing file path".into());
            }
            return Ok(ForcingSelector::File(PathBuf::from(p)));
        }
        Err(format!("unknown forcing `{s}` (expected const:<c>, cos or file:<path>)"))
    }
}

impl FromStr for Sampling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "equispaced" => Ok(Sampling::Equispaced),
            "uniform_random" | "random" => Ok(Sampling::UniformRandom),
            other => Err(format!("unknown sampling `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub eps: Option<f64>,
    pub eps_list: Vec<f64>,
    pub forcing: ForcingSelector,
    pub enrichment: bool,
    pub train: TrainConfig,
    pub output_dir: PathBuf,
    pub n_seeds: usize,
    pub reference_mesh: usize,
    lines: KeyLines,
}

/// Line on which each semantically checked key was set (0 when defaulted).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct KeyLines {
    problem: usize,
    eps: usize,
    eps_list: usize,
    forcing: usize,
    enrichment: usize,
    last: usize,
}

const KEYS: &[&str] = &[
    "problem",
    "eps",
    "eps_list",
    "forcing",
    "enrichment",
    "n_points",
    "width",
    "max_iters",
    "lr",
    "beta1",
    "beta2",
    "adam_eps",
    "patience",
    "min_rel_improve",
    "seed",
    "sampling",
    "init_scale",
    "output_dir",
    "n_seeds",
    "reference_mesh",
];

fn parse_finite(s: &str) -> std::result::Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("bad number `{}`", s.trim())),
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v = parse_finite(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {v}"))
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn parse_int<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

impl ExperimentConfig {
    /// Parses config text. Errors carry the 1-based line they refer to.
    pub fn parse(text: &str) -> Result<Self> {
        let mut problem = None;
        let mut eps = None;
        let mut eps_list = Vec::new();
        let mut forcing = None;
        let mut enrichment = None;
        let mut train = TrainConfig::default();
        let mut output_dir = PathBuf::from("out");
        let mut n_seeds = DEFAULT_N_SEEDS;
        let mut reference_mesh = DEFAULT_ORACLE_MESH;
        let mut lines = KeyLines::default();
        let mut seen: Vec<&str> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            lines.last = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line: line_no, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let key = *KEYS.iter().find(|k| **k == key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
            if seen.contains(&key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push(key);
            if value.is_empty() && key != "eps_list" {
                return Err(err(format!("missing value for `{key}`")));
            }
            let r: std::result::Result<(), String> = (|| {
                match key {
                    "problem" => {
                        problem = Some(value.parse::<ProblemKind>().map_err(|e| e.to_string())?);
                        lines.problem = line_no;
                    }
                    "eps" => {
                        eps = Some(parse_positive(value)?);
                        lines.eps = line_no;
                    }
                    "eps_list" => {
                        eps_list = value
                            .split(|c: char| c == ',' || c.is_whitespace())
                            .filter(|s| !s.is_empty())
                            .map(parse_positive)
                            .collect::<std::result::Result<_, _>>()?;
                        lines.eps_list = line_no;
                    }
                    "forcing" => {
                        forcing = Some(value.parse::<ForcingSelector>()?);
                        lines.forcing = line_no;
                    }
                    "enrichment" => {
                        enrichment = Some(parse_bool(value)?);
                        lines.enrichment = line_no;
                    }
                    "n_points" => train.n_points = parse_int(value)?,
                    "width" => train.width = parse_int(value)?,
                    "max_iters" => train.max_iters = parse_int(value)?,
                    "lr" => train.lr = parse_finite(value)?,
                    "beta1" => train.beta1 = parse_finite(value)?,
                    "beta2" => train.beta2 = parse_finite(value)?,
                    "adam_eps" => train.adam_eps = parse_finite(value)?,
                    "patience" => train.patience = parse_int(value)?,
                    "min_rel_improve" => train.min_rel_improve = parse_finite(value)?,
                    "seed" => train.seed = parse_int(value)?,
                    "sampling" => train.sampling = value.parse()?,
                    "init_scale" => train.init_scale = parse_finite(value)?,
                    "output_dir" => output_dir = PathBuf::from(value),
                    "n_seeds" => {
                        n_seeds = parse_int(value)?;
                        if n_seeds == 0 {
                            return Err("n_seeds must be positive".into());
                        }
                    }
                    "reference_mesh" => reference_mesh = parse_int(value)?,
                    _ => unreachable!(),
                }
                Ok(())
            })();
            r.map_err(err)?;
            // training hyper-parameters are checked as a group, but the
            // error should still point at the offending line
            if !matches!(key, "problem" | "eps" | "eps_list" | "forcing" | "enrichment" | "output_dir" | "n_seeds" | "reference_mesh") {
                train.validate().map_err(|e| err(strip_invalid(e)))?;
            }
        }

        let problem = problem.ok_or(Error::Config { line: lines.last, message: "missing required key `problem`".into() })?;
        if problem.is_regular() && enrichment == Some(true) {
            return Err(Error::Config {
                line: lines.enrichment,
                message: format!("{problem} has no corrector; enrichment must be false"),
            });
        }
        let default_forcing = if problem == ProblemKind::Burgers { -1.0 } else { 1.0 };
        Ok(Self {
            problem,
            eps,
            eps_list,
            forcing: forcing.unwrap_or(ForcingSelector::Const(default_forcing)),
            enrichment: enrichment.unwrap_or(!problem.is_regular()),
            train,
            output_dir,
            n_seeds,
            reference_mesh,
            lines,
        })
    }

    /// Reads and parses `path`; relative `output_dir` and forcing-file paths
    /// are taken relative to the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let ForcingSelector::File(p) = &cfg.forcing {
            if p.is_relative() {
                cfg.forcing = ForcingSelector::File(base.join(p));
            }
        }
        Ok(cfg)
    }

    /// Loads the forcing named by the selector.
    pub fn resolve_forcing(&self) -> Result<Forcing> {
        match &self.forcing {
            ForcingSelector::Const(c) => Ok(Forcing::Const(*c)),
            ForcingSelector::Cos => Ok(Forcing::Cos),
            ForcingSelector::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                Forcing::parse_table(&text).map_err(|e| match e {
                    Error::Config { line, message } => Error::Config { line, message: format!("{}: {message}", p.display()) },
                    other => other,
                })
            }
        }
    }

    /// `eps` for single runs. Regular problems ignore it and default to 1.
    pub fn single_eps(&self) -> Result<f64> {
        match self.eps {
            Some(e) => Ok(e),
            None if self.problem.is_regular() => Ok(1.0),
            None => Err(Error::Config {
                line: self.lines.last,
                message: format!("`eps` is required for {}", self.problem),
            }),
        }
    }

    /// Nonempty `eps_list` for sweeps.
    pub fn sweep_eps(&self) -> Result<&[f64]> {
        if self.eps_list.is_empty() {
            let line = if self.lines.eps_list > 0 { self.lines.eps_list } else { self.lines.last };
            return Err(Error::Config { line, message: "`eps_list` must name at least one eps".into() });
        }
        Ok(&self.eps_list)
    }

    /// Builds the problem at `eps`. Forcing conditions that fail are reported
    /// against the `forcing` line.
    pub fn problem_spec(&self, eps: f64) -> Result<ProblemSpec> {
        let forcing = self.resolve_forcing()?;
        let forcing_line = if self.lines.forcing > 0 { self.lines.forcing } else { self.lines.problem };
        let spec = ProblemSpec::new(self.problem, eps, forcing).map_err(|e| match e {
            e @ (Error::DataConditionViolation { .. } | Error::InvalidArgument(_)) => {
                Error::Config { line: forcing_line, message: e.to_string() }
            }
            other => other,
        })?;
        if self.problem.is_regular() {
            return Ok(spec);
        }
        let ansatz = if self.enrichment { Ansatz::Enriched } else { Ansatz::Plain };
        spec.with_ansatz(ansatz).map_err(|e| match e {
            Error::DegenerateCorrector(_) => Error::Config {
                line: if self.lines.enrichment > 0 { self.lines.enrichment } else { forcing_line },
                message: format!("{e}; set enrichment = false"),
            },
            other => other,
        })
    }
}

fn strip_invalid(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}
