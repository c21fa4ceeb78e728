//! `qmetrics`: Fisher-information reports, measurement-drift landscape scans,
//! stability Hessians and Cramér–Rao experiments from a TOML scenario file.
//!
//! Exit codes: 0 success, 2 configuration error, 3 consistency failure,
//! 4 zero-information instance.

mod commands;
mod config;
mod emit;

use clap::{Args, Parser, Subcommand};
use commands::{write_out, CmdError};
use config::{ConfigError, ScenarioConfig, ThetaSpec};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "qmetrics", version, about = "Fisher information and measurement stability toolkit")]
struct Cli {
    /// Scenario file (TOML); flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Overrides shared by the scenario-driven subcommands.
#[derive(Args, Default)]
struct ScenarioArgs {
    /// Hamiltonian preset: pauli_x|pauli_y|pauli_z|spin_jx|spin_jy|spin_jz
    #[arg(long)]
    hamiltonian: Option<String>,
    /// Spin quantum number for spin_* presets
    #[arg(long)]
    j: Option<f64>,
    /// Probe kind: max_variance|noon|eigenstate|literal
    #[arg(long)]
    probe: Option<String>,
    /// Probe superposition phase chi
    #[arg(long)]
    chi: Option<f64>,
    /// Eigenstate index for the eigenstate probe
    #[arg(long)]
    probe_index: Option<usize>,
    /// Basis kind: eq11|eigenbasis|jx_eigenbasis|literal
    #[arg(long)]
    basis: Option<String>,
    /// Evaluation point(s); repeat the flag for several
    #[arg(long = "theta")]
    theta: Vec<f64>,
}

impl ScenarioArgs {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if self.hamiltonian.is_some() {
            cfg.hamiltonian.preset = self.hamiltonian.clone();
            cfg.hamiltonian.matrix = None;
        }
        if self.j.is_some() {
            cfg.hamiltonian.j = self.j;
        }
        if self.probe.is_some() {
            cfg.probe.kind = self.probe.clone();
        }
        if self.chi.is_some() {
            cfg.probe.chi = self.chi;
        }
        if self.probe_index.is_some() {
            cfg.probe.index = self.probe_index;
        }
        if self.basis.is_some() {
            cfg.basis.kind = self.basis.clone();
        }
        if !self.theta.is_empty() {
            cfg.theta = Some(ThetaSpec::Many(self.theta.clone()));
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fisher information report at the configured theta point(s)
    Report {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Drift-axis landscape scan: CSV grid plus a JSON summary sidecar
    Scan {
        /// Spin quantum number for the scan
        #[arg(long)]
        j: Option<f64>,
        /// NOON-state phase chi
        #[arg(long)]
        chi: Option<f64>,
        /// Basis kind: jx|eq11
        #[arg(long)]
        basis_kind: Option<String>,
        /// Grid points along omega_y (inclusive [0, pi])
        #[arg(long)]
        grid_ny: Option<usize>,
        /// Grid points along omega_z (exclusive [0, 2pi))
        #[arg(long)]
        grid_nz: Option<usize>,
        /// CSV output path
        #[arg(long, default_value = "landscape.csv")]
        output: PathBuf,
    },
    /// Numeric and analytic Hessian of the information surface under drift
    Stability {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Drift generator preset, same names as hamiltonian presets
        #[arg(long)]
        drift: Option<String>,
        /// Scale factor on the drift generator
        #[arg(long)]
        drift_scale: Option<f64>,
        /// Drift amplitude at which to evaluate
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Monte-Carlo maximum-likelihood run against the Cramér–Rao bound
    Crb {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        theta_true: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("QMETRICS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("QMETRICS_THREADS must be a non-negative integer, got '{raw}'")))?;
    if n == 0 {
        return Ok(()); // 0 means automatic sizing
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("thread pool setup failed: {e}")))
}

fn run(cli: Cli) -> Result<String, CmdError> {
    configure_threads()?;
    let mut cfg = ScenarioConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Report { scenario } => {
            scenario.apply(&mut cfg);
            commands::cmd_report(&cfg)
        }
        Command::Scan { j, chi, basis_kind, grid_ny, grid_nz, output } => {
            if j.is_some() {
                cfg.scan.j = *j;
            }
            if chi.is_some() {
                cfg.scan.chi = *chi;
            }
            if basis_kind.is_some() {
                cfg.scan.basis_kind = basis_kind.clone();
            }
            if grid_ny.is_some() {
                cfg.scan.grid_ny = *grid_ny;
            }
            if grid_nz.is_some() {
                cfg.scan.grid_nz = *grid_nz;
            }
            commands::cmd_scan(&cfg, output)
        }
        Command::Stability { scenario, drift, drift_scale, omega } => {
            scenario.apply(&mut cfg);
            if drift.is_some() {
                cfg.drift.preset = drift.clone();
                cfg.drift.matrix = None;
            }
            if drift_scale.is_some() {
                cfg.drift.scale = *drift_scale;
            }
            if omega.is_some() {
                cfg.drift.omega = *omega;
            }
            commands::cmd_stability(&cfg)
        }
        Command::Crb { scenario, theta_true, samples, trials, seed } => {
            scenario.apply(&mut cfg);
            if theta_true.is_some() {
                cfg.crb.theta_true = *theta_true;
            }
            if samples.is_some() {
                cfg.crb.samples = *samples;
            }
            if trials.is_some() {
                cfg.crb.trials = *trials;
            }
            if seed.is_some() {
                cfg.crb.seed = *seed;
            }
            commands::cmd_crb(&cfg)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => write_out(&text),
        Err(e) => {
            eprintln!("qmetrics: {}", e.message);
            std::process::exit(e.exit_code);
        }
    }
}
