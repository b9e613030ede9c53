//! `dunkl`: runs kernel, asymptotic, heat and Wiener experiments from a
//! JSON config and writes CSV or JSON.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dunkl", version, about = "Dunkl kernel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout if absent); overrides `output.path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Group order, γ, orbits, c_k and positive roots.
    GroupInfo(Common),
    /// Series values of E_k(x, y) with tail bounds and eigen-residuals.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Overrides `kernel.tol`.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Limit vector v along admissible curves.
    Asym {
        #[command(flatten)]
        common: Common,
        /// Overrides `asym.t_final`.
        #[arg(long)]
        t_final: Option<f64>,
        /// Overrides `asym.trace`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Short-time heat kernel ratios.
    Heat(Common),
    /// Ball averages of |E_k(ix, ·)|².
    Wiener(Common),
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DUNKL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DUNKL_THREADS must be a positive integer, got {v:?}")))?;
    // fails only if a pool already exists
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(p) = &common.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    threads()?;
    let (cfg, out) = match &cli.command {
        Command::GroupInfo(c) => {
            let cfg = load(c)?;
            let out = commands::group_info(&cfg)?;
            (cfg, out)
        }
        Command::Kernel { common, tol } => {
            let mut cfg = load(common)?;
            if let (Some(t), Some(k)) = (tol, cfg.kernel.as_mut()) {
                k.tol = *t;
            }
            let out = commands::kernel(&cfg)?;
            (cfg, out)
        }
        Command::Asym { common, t_final, trace } => {
            let mut cfg = load(common)?;
            if let Some(a) = cfg.asym.as_mut() {
                if let Some(t) = t_final {
                    a.t_final = *t;
                }
                if let Some(p) = trace {
                    a.trace = Some(p.clone());
                }
            }
            let out = commands::asym(&cfg)?;
            if let Some(p) = cfg.asym.as_ref().and_then(|a| a.trace.as_ref()) {
                out.write_table(p)?;
            }
            (cfg, out)
        }
        Command::Heat(c) => {
            let cfg = load(c)?;
            let out = commands::heat(&cfg)?;
            (cfg, out)
        }
        Command::Wiener(c) => {
            let cfg = load(c)?;
            let out = commands::wiener(&cfg)?;
            (cfg, out)
        }
    };
    out.emit(cfg.output.format, cfg.output.path.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dunkl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
