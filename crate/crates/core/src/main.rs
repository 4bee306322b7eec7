use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cavity_jumps::config::{read_config_file, resolve, ConfigFile, ExperimentKind, Overrides, WORKERS_ENV};
use cavity_jumps::experiment::{run_experiment, RunOutcome};
use cavity_jumps::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    /// Closed-form rates, populations and timescales.
    Analytic,
    /// Quick invariant checks of the generators and solvers.
    Validate,
    /// Emission records of a trajectory ensemble.
    Simulate,
    /// Binned click counts and light/dark period statistics.
    Telegraph,
    /// Singlet fidelity after a click-free wait.
    Fidelity,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Analytic => ExperimentKind::Analytic,
            Kind::Validate => ExperimentKind::Validate,
            Kind::Simulate => ExperimentKind::Simulate,
            Kind::Telegraph => ExperimentKind::Telegraph,
            Kind::Fidelity => ExperimentKind::Fidelity,
        }
    }
}

/// Two atoms in a driven cavity: trajectories, telegraph statistics and
/// heralded singlet preparation.
#[derive(Debug, Parser)]
#[command(version, allow_negative_numbers = true)]
struct Cli {
    kind: Kind,
    /// TOML file with [model] and [run] tables; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0: one per core). Falls back to $CAVITY_JUMPS_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    n_traj: Option<usize>,
    /// Trajectory length in units of T_dark.
    #[arg(long)]
    horizon_tdark: Option<f64>,
    /// Detector efficiencies, comma separated.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// No-click windows in units of T_dark, comma separated.
    #[arg(long, value_delimiter = ',')]
    t_wait: Option<Vec<f64>>,
    /// Photon-number cutoff.
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    omega_l: Option<f64>,
    #[arg(long)]
    omega_m: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

fn workers(flag: Option<usize>, env: Option<String>) -> cavity_jumps::Result<Option<usize>> {
    match (flag, env) {
        (Some(w), _) => Ok(Some(w)),
        (None, Some(v)) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::config("workers", format!("{WORKERS_ENV}={v:?} is not a thread count"))),
        (None, None) => Ok(None),
    }
}

fn run(cli: Cli, env_workers: Option<String>) -> cavity_jumps::Result<RunOutcome> {
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => ConfigFile::default(),
    };
    let overrides = Overrides {
        kind: Some(cli.kind.into()),
        g: cli.g,
        kappa: cli.kappa,
        gamma0: cli.gamma0,
        gamma1: cli.gamma1,
        omega_l: cli.omega_l,
        omega_m: cli.omega_m,
        delta: cli.delta,
        n_max: cli.nmax,
        n_traj: cli.n_traj,
        horizon_tdark: cli.horizon_tdark,
        seed: cli.seed,
        eta: cli.eta,
        t_wait: cli.t_wait,
        out: cli.out,
        workers: workers(cli.workers, env_workers)?,
    };
    run_experiment(&resolve(file, &overrides)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli, std::env::var(WORKERS_ENV).ok()) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            println!("wrote {}", outcome.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
