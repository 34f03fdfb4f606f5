//! Command-line definitions and config assembly (flags > config file > defaults).

use std::path::{Path, PathBuf};

use afem::adapt::AdaptiveConfig;
use afem::estimate::EstimatorKind;
use afem::problems::PROBLEM_NAMES;
use afem::recovery::{RecoveryMode, Weighting};
use anyhow::Context;
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "afem",
    version,
    about = "Adaptive P1 finite elements with recovery-based error estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the adaptive loop with one estimator.
    Run(RunArgs),
    /// Run the adaptive loop once per estimator and tabulate the results.
    Compare(CompareArgs),
    /// Check a problem's data against its exact solution.
    ValidateProblem(ValidateArgs),
    /// Write the initial mesh of a problem.
    ExportMesh(ExportArgs),
}

fn problem_parser() -> PossibleValuesParser {
    PossibleValuesParser::new(PROBLEM_NAMES)
}

fn estimator_parser() -> impl TypedValueParser<Value = EstimatorKind> {
    PossibleValuesParser::new(EstimatorKind::ALL.map(EstimatorKind::name))
        .map(|s| s.parse::<EstimatorKind>().expect("possible value"))
}

fn depth_parser() -> impl TypedValueParser<Value = usize> {
    PossibleValuesParser::new(["1", "3"]).map(|s| s.parse::<usize>().expect("possible value"))
}

fn recovery_parser() -> impl TypedValueParser<Value = RecoveryMode> {
    PossibleValuesParser::new(["global", "subdomain"]).map(|s| s.parse::<RecoveryMode>().expect("possible value"))
}

fn weights_parser() -> impl TypedValueParser<Value = Weighting> {
    PossibleValuesParser::new(["area", "arithmetic"]).map(|s| s.parse::<Weighting>().expect("possible value"))
}

/// Adaptive-loop settings shared by `run` and `compare`.
#[derive(Debug, Args)]
pub struct LoopArgs {
    #[arg(long, value_parser = problem_parser())]
    pub problem: String,
    /// Bulk parameter of marking strategy E.
    #[arg(long)]
    pub theta_e: Option<f64>,
    /// Bulk parameter of the oscillation marking R.
    #[arg(long = "theta-0")]
    pub theta_0: Option<f64>,
    /// Stop when the estimator drops to this value.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub max_dofs: Option<usize>,
    /// Bisections per marked element.
    #[arg(long, value_parser = depth_parser())]
    pub depth: Option<usize>,
    /// Recovery mode; defaults to `subdomain` for piecewise-constant coefficients.
    #[arg(long, value_parser = recovery_parser())]
    pub recovery: Option<RecoveryMode>,
    /// Weights of the nodal averaging.
    #[arg(long, value_parser = weights_parser())]
    pub weights: Option<Weighting>,
    /// JSON file with adaptive-loop settings; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "afem-out")]
    pub out: PathBuf,
    /// Record wall-clock seconds per iteration in the history.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: LoopArgs,
    #[arg(long, value_parser = estimator_parser())]
    pub estimator: Option<EstimatorKind>,
    /// Write `mesh_XXXX.vtk` for every iteration.
    #[arg(long)]
    pub vtk: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: LoopArgs,
    /// Two or more estimators, repeated or comma separated.
    #[arg(long, required = true, value_delimiter = ',', value_parser = estimator_parser())]
    pub estimator: Vec<EstimatorKind>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_parser = problem_parser())]
    pub problem: String,
    /// Sample points per check.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MeshFormat {
    Vtk,
    Text,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_parser = problem_parser())]
    pub problem: String,
    /// Output file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Output format; inferred from the extension when omitted (`.vtk` or text).
    #[arg(long, value_enum)]
    pub format: Option<MeshFormat>,
    /// Uniform refinements applied before export.
    #[arg(long, default_value_t = 0)]
    pub uniform: usize,
}

fn read_config(path: &Path) -> anyhow::Result<AdaptiveConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl LoopArgs {
    /// Defaults, overridden by the config file, overridden by flags.
    pub fn adaptive_config(&self, estimator: Option<EstimatorKind>) -> anyhow::Result<AdaptiveConfig> {
        let mut c = match &self.config {
            Some(path) => read_config(path)?,
            None => AdaptiveConfig::default(),
        };
        if let Some(v) = estimator {
            c.estimator = v;
        }
        if let Some(v) = self.theta_e {
            c.theta_e = v;
        }
        if let Some(v) = self.theta_0 {
            c.theta_0 = v;
        }
        if let Some(v) = self.tol {
            c.tolerance = v;
        }
        if let Some(v) = self.max_iter {
            c.max_iterations = v;
        }
        if let Some(v) = self.max_dofs {
            c.max_dofs = v;
        }
        if let Some(v) = self.depth {
            c.depth = v;
        }
        if self.recovery.is_some() {
            c.recovery = self.recovery;
        }
        if let Some(v) = self.weights {
            c.weighting = v;
        }
        if self.timing {
            c.record_timing = true;
        }
        c.validate()?;
        Ok(c)
    }
}
