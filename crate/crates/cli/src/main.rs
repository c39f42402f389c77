use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modctx_cli::config::{BoundOverrides, EigenOverrides, GridOverrides, UnitOverrides};
use modctx_cli::{CliError, Format, Outcome, Overrides, RunConfig};
use modctx_core::cv_sim::StateSpec;

/// Modular-variable contextuality experiments.
#[derive(Parser)]
#[command(name = "modctx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "grid-M", global = true)]
    grid_m: Option<usize>,
    #[arg(long = "grid-K", global = true)]
    grid_k: Option<usize>,
    /// Must equal 2KM when given.
    #[arg(long = "grid-N", global = true)]
    grid_n: Option<usize>,
    /// Rational value of ħ, e.g. `1` or `3/2`.
    #[arg(long, global = true)]
    hbar: Option<String>,
    /// Rational value of p₀.
    #[arg(long, global = true)]
    p0: Option<String>,
    #[arg(long, global = true)]
    shots: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// State spec as JSON, e.g. `{"family":"random","seed":3}`.
    #[arg(long, global = true)]
    state: Option<String>,
    /// Directory for report and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the context product identities exactly.
    VerifyAlgebra {
        #[arg(long, hide = true)]
        perturb: bool,
    },
    /// Maximize the noncontextual objective and sample random models.
    Bound {
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Evaluate the six context expectations and S.
    Violate {
        /// Run the built-in list of eight states.
        #[arg(long)]
        sweep: bool,
    },
    /// Sequentially measure every context.
    Sample,
    /// Build the {C, c, γ} eigenbasis and check its eigenvalue relations.
    Eigenbasis {
        #[arg(long)]
        v1_index: Option<i64>,
        #[arg(long)]
        v2_index: Option<i64>,
        #[arg(long)]
        kappa_index: Option<i64>,
        #[arg(long)]
        epsilon_index: Option<i64>,
    },
}

fn flag_overrides(cli: &Cli) -> Result<Overrides, CliError> {
    let c = &cli.common;
    let state = c
        .state
        .as_deref()
        .map(|s| serde_json::from_str::<StateSpec>(s).map_err(|e| CliError::Config(format!("invalid --state: {e}"))))
        .transpose()?;
    let format = c.format.as_deref().map(str::parse::<Format>).transpose()?;
    let mut o = Overrides {
        grid: GridOverrides { m: c.grid_m, k: c.grid_k, n: c.grid_n },
        units: UnitOverrides { hbar: c.hbar.clone(), p0: c.p0.clone() },
        state,
        shots: c.shots,
        seed: c.seed,
        out: c.out.clone(),
        format,
        ..Default::default()
    };
    match &cli.command {
        Command::Bound { step, tol, samples } => {
            o.bound = BoundOverrides { step: *step, tol: *tol, samples: *samples };
        }
        Command::Eigenbasis { v1_index, v2_index, kappa_index, epsilon_index } => {
            o.eigenbasis = EigenOverrides {
                v1_index: *v1_index,
                v2_index: *v2_index,
                kappa_index: *kappa_index,
                epsilon_index: *epsilon_index,
            };
        }
        _ => {}
    }
    Ok(o)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let flags = flag_overrides(cli)?;
    let file = match &cli.common.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let cfg = RunConfig::resolve(flags.over(file))?;
    let outcome = match &cli.command {
        Command::VerifyAlgebra { perturb } => modctx_cli::verify_algebra(&cfg, *perturb)?,
        Command::Bound { .. } => modctx_cli::bound(&cfg)?,
        Command::Violate { sweep } => modctx_cli::violate(&cfg, *sweep)?,
        Command::Sample => modctx_cli::sample(&cfg)?,
        Command::Eigenbasis { .. } => modctx_cli::eigenbasis(&cfg)?,
    };
    if let Some(dir) = &cfg.out {
        outcome.write_artifacts(dir)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
            if let Some(msg) = &outcome.failure {
                eprintln!("verification failed: {msg}");
            }
            ExitCode::from(outcome.status.code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status().code())
        }
    }
}
