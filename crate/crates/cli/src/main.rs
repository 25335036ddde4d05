//! `kinld`: command-line runs of the closed forms, the min-plus scheme, the kinetic solver,
//! the velocity-jump sampler and the front tracker.

mod cmd;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cmd::Shared;
use config::{ConfigFile, Resolver};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "kinld", version, about = "Large deviations of a Gaussian velocity-jump process")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory (default kinld-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel maps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimum value mu(t,x;w) on a (t, x) grid.
    Mu(cmd::closed::MuArgs),
    /// Fundamental solution phi(t,x,v;w) on a (t, x, v) grid.
    Phi(cmd::closed::PhiArgs),
    /// Min-plus recursion mu_n from a Dirac or file datum.
    Scheme(cmd::minplus::SchemeArgs),
    /// Hopf-Lax representation u(t,x,v) and min_v u.
    Hopflax(cmd::minplus::HopflaxArgs),
    /// Kinetic BGK solver with Hopf-Cole diagnostics.
    Kinetic(cmd::kinetic::KineticArgs),
    /// Monte-Carlo ensemble of the velocity-jump process.
    Pdmp(cmd::pdmp::PdmpArgs),
    /// Reaction front location and spreading-rate fit.
    Front(cmd::front::FrontArgs),
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut resolver = Resolver::new(&file);
    let out = resolver.get("out", cli.common.out, PathBuf::from("kinld-out"))?;
    let seed = resolver.optional("seed", cli.common.seed)?;
    if let Some(n) = resolver.optional::<usize>("threads", cli.common.threads)? {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let sh = Shared { out, seed, resolver: &mut resolver };
    let result = match cli.command {
        Command::Mu(a) => cmd::closed::run_mu(a, sh),
        Command::Phi(a) => cmd::closed::run_phi(a, sh),
        Command::Scheme(a) => cmd::minplus::run_scheme_cmd(a, sh),
        Command::Hopflax(a) => cmd::minplus::run_hopflax(a, sh),
        Command::Kinetic(a) => cmd::kinetic::run_kinetic(a, sh),
        Command::Pdmp(a) => cmd::pdmp::run_pdmp(a, sh),
        Command::Front(a) => cmd::front::run_front(a, sh),
    };
    for k in resolver.unused() {
        log::warn!("config key `{k}` is not used by this subcommand");
    }
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
