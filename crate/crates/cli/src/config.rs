use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cfrac::Expr;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_CELLS: usize = 512;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    FitFn,
    EvalFn,
    FitFunctional,
    Verify,
    ReduceCheck,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::FitFn => "fit-fn",
            Mode::EvalFn => "eval-fn",
            Mode::FitFunctional => "fit-functional",
            Mode::Verify => "verify",
            Mode::ReduceCheck => "reduce-check",
        })
    }
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| CliError::Config(format!("unknown mode '{s}'")))
    }
}

/// A node given either as a number or as an expression string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NodeSpec {
    Number(f64),
    Text(String),
}

/// The JSON document as written by the user.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub mode: Option<Mode>,
    /// `f(x)` for fit-fn, `f(s)` for the functional modes.
    pub f: Option<String>,
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
    pub values: Option<Vec<f64>>,
    pub n_cells: Option<usize>,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub at: Option<Vec<f64>>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub at: Option<Vec<f64>>,
}

/// Output locations shared by the functional modes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub out: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct FunctionalJob {
    pub f: String,
    pub nodes: Vec<String>,
    pub n_cells: usize,
    pub tolerance: f64,
    pub outputs: Outputs,
}

/// A validated job.
#[derive(Debug, Clone)]
pub enum Job {
    FitFn {
        nodes: Vec<f64>,
        values: Vec<f64>,
        out: Option<PathBuf>,
    },
    EvalFn {
        model: PathBuf,
        at: Vec<f64>,
    },
    FitFunctional(FunctionalJob),
    Verify(FunctionalJob),
    ReduceCheck(FunctionalJob),
}

impl Job {
    pub fn mode(&self) -> Mode {
        match self {
            Job::FitFn { .. } => Mode::FitFn,
            Job::EvalFn { .. } => Mode::EvalFn,
            Job::FitFunctional(_) => Mode::FitFunctional,
            Job::Verify(_) => Mode::Verify,
            Job::ReduceCheck(_) => Mode::ReduceCheck,
        }
    }
}

fn parse(text: &str, var: &str, what: &str) -> Result<Expr, CliError> {
    Expr::parse(text, var).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

fn node_text(spec: &NodeSpec) -> String {
    match spec {
        NodeSpec::Number(v) => format!("{v:?}"),
        NodeSpec::Text(t) => t.clone(),
    }
}

fn resolve(base: &Path, p: Option<PathBuf>) -> Option<PathBuf> {
    p.map(|p| if p.is_absolute() { p } else { base.join(p) })
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.out = resolve(base, cfg.out);
        cfg.sidecar = resolve(base, cfg.sidecar);
        cfg.plot = resolve(base, cfg.plot);
        cfg.model = resolve(base, cfg.model);
        Ok(cfg)
    }

    /// Applies overrides and checks everything the chosen mode needs.
    pub fn into_job(self, over: Overrides) -> Result<Job, CliError> {
        let mode = match (over.mode, self.mode) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Config(format!(
                    "command '{a}' does not match config mode '{b}'"
                )))
            }
            (Some(m), _) | (None, Some(m)) => m,
            (None, None) => return Err(CliError::Config("no mode given".into())),
        };
        let n_cells = over.grid.or(self.n_cells).unwrap_or(DEFAULT_CELLS);
        let tolerance = over.tol.or(self.tolerance).unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(CliError::Config(format!("invalid tolerance {tolerance}")));
        }
        let out = over.out.or(self.out);

        match mode {
            Mode::FitFn => {
                let nodes = self
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(i, spec)| match spec {
                        NodeSpec::Number(v) => Ok(*v),
                        NodeSpec::Text(t) => parse(t, "x", &format!("node {i}"))?
                            .as_const()
                            .ok_or_else(|| CliError::Config(format!("node {i} is not a constant"))),
                    })
                    .collect::<Result<Vec<f64>, CliError>>()?;
                if nodes.is_empty() {
                    return Err(CliError::Config("fit-fn needs at least one node".into()));
                }
                let values = match (self.values, self.f) {
                    (Some(v), _) => v,
                    (None, Some(f)) => {
                        let e = parse(&f, "x", "f")?;
                        nodes
                            .iter()
                            .map(|&x| {
                                e.eval_at(x)
                                    .map_err(|err| CliError::Config(format!("f at x = {x}: {err}")))
                            })
                            .collect::<Result<_, _>>()?
                    }
                    (None, None) => {
                        return Err(CliError::Config("fit-fn needs 'values' or 'f'".into()))
                    }
                };
                if values.len() != nodes.len() {
                    return Err(CliError::Config(format!(
                        "{} nodes but {} values",
                        nodes.len(),
                        values.len()
                    )));
                }
                Ok(Job::FitFn { nodes, values, out })
            }
            Mode::EvalFn => {
                let model = self
                    .model
                    .ok_or_else(|| CliError::Config("eval-fn needs 'model'".into()))?;
                let at = over
                    .at
                    .or(self.at)
                    .ok_or_else(|| CliError::Config("eval-fn needs evaluation points ('at' or --at)".into()))?;
                Ok(Job::EvalFn { model, at })
            }
            Mode::FitFunctional | Mode::Verify | Mode::ReduceCheck => {
                let f = self
                    .f
                    .ok_or_else(|| CliError::Config(format!("{mode} needs 'f'")))?;
                parse(&f, "s", "f")?;
                if self.nodes.len() < 2 {
                    return Err(CliError::Config(format!(
                        "{mode} needs at least two node functions (n >= 1), got {}",
                        self.nodes.len()
                    )));
                }
                let nodes: Vec<String> = self.nodes.iter().map(node_text).collect();
                for (i, t) in nodes.iter().enumerate() {
                    parse(t, "z", &format!("node x_{i}"))?;
                }
                if n_cells < cfrac::grid::MIN_CELLS {
                    return Err(CliError::Config(format!(
                        "grid must have at least {} cells, got {n_cells}",
                        cfrac::grid::MIN_CELLS
                    )));
                }
                let job = FunctionalJob {
                    f,
                    nodes,
                    n_cells,
                    tolerance,
                    outputs: Outputs {
                        out,
                        sidecar: self.sidecar,
                        plot: self.plot,
                    },
                };
                Ok(match mode {
                    Mode::FitFunctional => Job::FitFunctional(job),
                    Mode::Verify => Job::Verify(job),
                    _ => Job::ReduceCheck(job),
                })
            }
        }
    }
}
