use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use adaptive_dg_core::adapt::{AlphaPolicy, RunConfig};
use adaptive_dg_core::assembly::{parse_methods, MethodKind};
use adaptive_dg_core::marking::{MarkingConfig, MarkingStrategy};
use adaptive_dg_core::solver::DEFAULT_REL_TOL;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "adaptive-dg", version, about = "Adaptive weakly penalized DG solver for the Poisson problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the adaptive loop for one method and marking strategy.
    Run(RunArgs),
    /// Evaluate the exact identities and equivalences on fixed meshes.
    Verify(VerifyArgs),
    /// Run every method with every marking strategy.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct LoopArgs {
    /// `square-sine`, `lshape-const` or a mesh file in node/element format (f = 1).
    #[arg(long, default_value = "square-sine")]
    pub problem: String,
    /// `auto` or a positive number.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    /// Bulk fraction for edge marking, used by both strategies.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Bulk fraction for volume marking in the switching strategy.
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    /// Bulk fraction for the supplementary volume marking of `ch`.
    #[arg(long, default_value_t = 0.3)]
    pub sigma_osc: f64,
    /// Switch to volume marking when ‖hf‖² exceeds this times the jump total.
    #[arg(long, default_value_t = 1.0)]
    pub gamma_switch: f64,
    /// Weight of ‖hf‖² in the monitored contraction quantity.
    #[arg(long, default_value_t = 10.0)]
    pub gamma_monitor: f64,
    #[arg(long, default_value_t = 50_000)]
    pub max_dofs: usize,
    #[arg(long, default_value_t = 40)]
    pub max_iterations: usize,
    /// Relative residual tolerance of the linear solver.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    /// Refine every triangle instead of marking.
    #[arg(long)]
    pub uniform: bool,
}

impl Default for LoopArgs {
    fn default() -> Self {
        Self {
            problem: "square-sine".into(),
            alpha: "auto".into(),
            theta: 0.5,
            sigma: 0.3,
            sigma_osc: 0.3,
            gamma_switch: 1.0,
            gamma_monitor: 10.0,
            max_dofs: 50_000,
            max_iterations: 40,
            rel_tol: DEFAULT_REL_TOL,
            uniform: false,
        }
    }
}

impl LoopArgs {
    pub fn alpha_policy(&self) -> CliResult<AlphaPolicy> {
        if self.alpha.eq_ignore_ascii_case("auto") {
            return Ok(AlphaPolicy::Auto);
        }
        match self.alpha.parse::<f64>() {
            Ok(a) if a > 0.0 && a.is_finite() => Ok(AlphaPolicy::Fixed(a)),
            _ => Err(CliError::Config(format!(
                "--alpha must be `auto` or a positive number, got `{}`",
                self.alpha
            ))),
        }
    }

    pub fn run_config(&self, method: MethodKind, strategy: MarkingStrategy) -> CliResult<RunConfig> {
        let cfg = RunConfig {
            method,
            alpha: self.alpha_policy()?,
            marking: MarkingConfig {
                strategy,
                theta_ch: self.theta,
                theta_bms: self.theta,
                sigma: self.sigma,
                gamma_switch: self.gamma_switch,
                sigma_osc: self.sigma_osc,
            },
            max_dofs: self.max_dofs,
            max_iterations: self.max_iterations,
            rel_tol: self.rel_tol,
            gamma_monitor: self.gamma_monitor,
            uniform: self.uniform,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value = "ip")]
    pub method: String,
    /// `ch` or `bms`.
    #[arg(long, default_value = "ch")]
    pub marking: String,
    #[command(flatten)]
    pub common: LoopArgs,
    #[arg(long, default_value = "adaptive-dg-out")]
    pub out: PathBuf,
    /// Skip the per-iteration mesh, VTK and estimator files.
    #[arg(long)]
    pub no_snapshots: bool,
    /// Also write each assembled matrix in coordinate format.
    #[arg(long)]
    pub export_matrix: bool,
}

impl RunArgs {
    pub fn new(out: PathBuf) -> Self {
        Self {
            method: "ip".into(),
            marking: "ch".into(),
            common: LoopArgs::default(),
            out,
            no_snapshots: false,
            export_matrix: false,
        }
    }

    pub fn run_config(&self) -> CliResult<RunConfig> {
        let method = self.method.parse::<MethodKind>()?;
        let strategy = self.marking.parse::<MarkingStrategy>()?;
        self.common.run_config(method, strategy)
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "square-sine")]
    pub problem: String,
    /// Comma-separated methods or `all`.
    #[arg(long, default_value = "all")]
    pub method: String,
    /// Uniform refinements of the initial mesh to check, starting from 0.
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    /// Random samples per identity.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
}

impl VerifyArgs {
    pub fn methods(&self) -> CliResult<Vec<MethodKind>> {
        Ok(parse_methods(&self.method)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Comma-separated methods or `all`.
    #[arg(long, default_value = "all")]
    pub methods: String,
    /// Comma-separated marking strategies.
    #[arg(long, default_value = "ch,bms")]
    pub markings: String,
    #[command(flatten)]
    pub common: LoopArgs,
    #[arg(long, default_value = "adaptive-dg-sweep")]
    pub out: PathBuf,
    /// Write the per-iteration files for every run.
    #[arg(long)]
    pub snapshots: bool,
}

impl SweepArgs {
    pub fn strategies(&self) -> CliResult<Vec<MarkingStrategy>> {
        self.markings
            .split(',')
            .map(|s| s.trim().parse::<MarkingStrategy>().map_err(CliError::from))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn run_arguments_map_to_config() {
        let cli = Cli::try_parse_from([
            "adaptive-dg", "run", "--method", "ldg", "--alpha", "0.01", "--marking", "bms", "--theta", "0.4",
            "--gamma-switch", "2", "--uniform",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        let cfg = args.run_config().unwrap();
        assert_eq!(cfg.method, MethodKind::Ldg);
        assert_eq!(cfg.alpha, AlphaPolicy::Fixed(0.01));
        assert_eq!(cfg.marking.strategy, MarkingStrategy::BeckerMaoShi);
        assert_eq!(cfg.marking.theta_bms, 0.4);
        assert_eq!(cfg.marking.theta_ch, 0.4);
        assert_eq!(cfg.marking.gamma_switch, 2.0);
        assert!(cfg.uniform);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut args = RunArgs::new("x".into());
        args.common.alpha = "-3".into();
        assert_eq!(args.run_config().unwrap_err().exit_code(), crate::error::EXIT_INVALID_CONFIG);
        let mut args = RunArgs::new("x".into());
        args.common.theta = 1.5;
        assert_eq!(args.run_config().unwrap_err().exit_code(), crate::error::EXIT_INVALID_CONFIG);
        let mut args = RunArgs::new("x".into());
        args.method = "sipg".into();
        assert_eq!(args.run_config().unwrap_err().exit_code(), crate::error::EXIT_INVALID_CONFIG);
    }
}
