//! `pdmp`: Monte-Carlo ensemble of the velocity-jump process.

use clap::Args;
use serde::Serialize;

use kinld::closed_form::mu_zero;
use kinld::pdmp::{rate_vs_mu, simulate, summarize, InitialVelocity, SimConfig};

use super::{require, Shared};
use crate::error::{CliError, Context};
use crate::output::{num, Run};

#[derive(Debug, Args)]
pub struct PdmpArgs {
    /// Scaling parameter (default 0.05).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Final time (default 1).
    #[arg(long)]
    pub t: Option<f64>,
    /// Number of particles (default 100000).
    #[arg(long)]
    pub n: Option<usize>,
    /// Initial velocity: a number, or `equilibrium` for Normal(0, eps) draws (default equilibrium).
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<String>,
    /// Samples written to the CSV dump (default 10000).
    #[arg(long)]
    pub dump: Option<usize>,
    /// Histogram bin width for the empirical rate (default 0.02).
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Density floor for the rate comparison (default 1e-4).
    #[arg(long)]
    pub min_density: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PdmpConfig {
    epsilon: f64,
    t: f64,
    n: usize,
    initial: String,
    seed: u64,
    dump: usize,
    bin_width: f64,
    min_density: f64,
}

fn parse_initial(s: &str) -> Result<InitialVelocity, CliError> {
    if s.eq_ignore_ascii_case("equilibrium") {
        return Ok(InitialVelocity::Equilibrium);
    }
    s.parse()
        .map(InitialVelocity::Fixed)
        .map_err(|_| CliError::Usage(format!("--initial: expected a number or `equilibrium`, got {s:?}")))
}

pub fn run_pdmp(args: PdmpArgs, mut sh: Shared) -> Result<(), CliError> {
    let r = &mut sh.resolver;
    let cfg = PdmpConfig {
        epsilon: r.get("epsilon", args.epsilon, 0.05)?,
        t: r.get("t", args.t, 1.0)?,
        n: r.get("n", args.n, 100_000)?,
        initial: r.get("initial", args.initial, "equilibrium".to_string())?,
        seed: sh.seed.unwrap_or(0),
        dump: r.get("dump", args.dump, 10_000)?,
        bin_width: r.get("bin_width", args.bin_width, 0.02)?,
        min_density: r.get("min_density", args.min_density, 1e-4)?,
    };
    require(cfg.bin_width > 0.0, || "--bin-width must be > 0".into())?;
    let sim = SimConfig {
        epsilon: cfg.epsilon,
        t_final: cfg.t,
        n_particles: cfg.n,
        initial: parse_initial(&cfg.initial)?,
        seed: cfg.seed,
    };
    sim.validate().ctx("pdmp")?;
    let samples = simulate(&sim).ctx("pdmp")?;
    let summary = summarize(&samples, &sim, cfg.bin_width).ctx("pdmp")?;

    let mut run = Run::new(&sh.out, "pdmp")?;
    let m = &summary.x;
    let drift = match sim.initial {
        InitialVelocity::Fixed(w) => w * cfg.epsilon * -(-cfg.t / cfg.epsilon).exp_m1(),
        InitialVelocity::Equilibrium => 0.0,
    };
    run.check(
        "mean position within 3 SE",
        false,
        (m.mean - drift).abs() <= 3.0 * m.se_mean,
        format!("mean {:e}, expected {drift:e}, SE {:e}", m.mean, m.se_mean),
    );
    if let Some(oracle) = summary.variance_oracle {
        run.check(
            "position variance within 3 SE of 2 eps^2 t - 2 eps^3 (1 - e^{-t/eps})",
            false,
            (m.variance - oracle).abs() <= 3.0 * m.se_variance,
            format!("variance {:e}, oracle {oracle:e}, SE {:e}", m.variance, m.se_variance),
        );
        run.check(
            "final velocity ~ Normal(0, eps) (KS, 1%)",
            false,
            summary.ks_statistic < summary.ks_critical_1pct,
            format!("KS {:e}, critical {:e}", summary.ks_statistic, summary.ks_critical_1pct),
        );
    }
    run.check("jump count ~ Poisson(t/eps)", false, summary.jumps.pass, format!("z = {:.3}", summary.jumps.z));

    let dump = cfg.dump.min(samples.len());
    run.csv(
        "pdmp_samples.csv",
        "final (x, v) and jump count of the first particles of the ensemble",
        &["index", "x", "v", "jumps"],
        (0..dump).map(|i| vec![i.to_string(), num(samples.x[i]), num(samples.v[i]), samples.jumps[i].to_string()]),
    )?;
    run.csv(
        "pdmp_rates.csv",
        "empirical rate -eps ln(density of x_t) per histogram bin, against mu(t,x;0)",
        &["x", "count", "density", "rate", "mu"],
        summary.rates.bins.iter().map(|b| {
            vec![
                num(b.x_center),
                b.count.to_string(),
                num(b.density),
                num(b.rate),
                mu_zero(cfg.t, b.x_center).0.to_string(),
            ]
        }),
    )?;
    let compared = rate_vs_mu(&summary.rates, cfg.t, cfg.min_density);
    let within = compared.iter().filter(|c| c.2.abs() <= 0.2).count();
    run.check(
        "empirical rate within 20% of mu (moderate deviations)",
        false,
        within == compared.len(),
        format!("{within}/{} bins with density >= {:e} within 20%", compared.len(), cfg.min_density),
    );
    run.json("pdmp_summary.json", "moments, KS statistic, jump counts and the empirical rate table", &summary)?;
    run.finish(&cfg, &summary.x)
}
