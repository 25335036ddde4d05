//! `front`: reaction front location, spreading-rate fit and the Freidlin sweep.

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use kinld::closed_form::RateParams;
use kinld::front::{bounds_check, fit_exponent, freidlin_profile, front_trace, FrontQuery, RateBounds};

use super::{require, Shared};
use crate::error::{CliError, Context};
use crate::output::{num, Run};

#[derive(Debug, Args)]
pub struct FrontArgs {
    /// Reaction rate (default 1).
    #[arg(long)]
    pub r: Option<f64>,
    /// Tail exponent of the velocity law (default 2).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Initial velocity (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
    /// Times, list syntax (default 10:100).
    #[arg(long)]
    pub t: Option<String>,
    /// Number of random Freidlin profile queries (default 0).
    #[arg(long)]
    pub freidlin: Option<usize>,
}

#[derive(Debug, Serialize)]
struct FrontConfig {
    r: f64,
    gamma: f64,
    w: f64,
    t: Vec<f64>,
    freidlin: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct FitReport {
    exponent: f64,
    prefactor: f64,
    residuals: Vec<f64>,
    onset: Option<f64>,
    conjecture: f64,
    conjecture_exponent: f64,
    bounds: Option<RateBounds<f64>>,
    note: &'static str,
}

pub fn run_front(args: FrontArgs, mut sh: Shared) -> Result<(), CliError> {
    let r = &mut sh.resolver;
    let cfg = FrontConfig {
        r: r.get("r", args.r, 1.0)?,
        gamma: r.get("gamma", args.gamma, 2.0)?,
        w: r.get("w", args.w, 0.0)?,
        t: r.list("t", args.t.as_deref(), "10:100")?,
        freidlin: r.get("freidlin", args.freidlin, 0)?,
        seed: sh.seed.unwrap_or(0),
    };
    require(cfg.t.len() >= 5, || "--t: the fit needs at least 5 times".into())?;
    let params = RateParams::new(cfg.r, cfg.gamma).ctx("front")?;
    let trace = front_trace(&FrontQuery { params, w: cfg.w, times: cfg.t.clone() }).ctx("front")?;
    let p = 1.0 + 1.0 / cfg.gamma;

    let mut run = Run::new(&sh.out, "front")?;
    let after: Vec<_> = trace.points.iter().filter(|q| trace.onset.is_some_and(|o| q.t >= o)).collect();
    let monotone = after.windows(2).all(|q| q[1].x >= q[0].x);
    run.check("X nondecreasing after onset", true, monotone, format!("{} points after onset", after.len()));
    let dev = after.iter().map(|q| (q.x / (trace.conjecture * q.t.powf(p)) - 1.0).abs()).fold(0.0, f64::max);
    run.check(
        "X(t) = a t^(1+1/gamma) after onset",
        true,
        dev <= 1e-8,
        format!("max relative deviation {dev:e} over {} points", after.len()),
    );
    let bounds = if cfg.gamma == 2.0 {
        let b = bounds_check(cfg.r).ctx("front")?;
        run.check("prefactor inside the bound sandwich", true, b.inside, format!("{} <= {} <= {}", b.lower, b.conjecture, b.upper));
        Some(b)
    } else {
        None
    };

    let so_far: Vec<Option<f64>> = (0..trace.points.len())
        .map(|k| {
            let head = &trace.points[..=k];
            let ts: Vec<f64> = head.iter().map(|q| q.t).collect();
            let xs: Vec<f64> = head.iter().map(|q| q.x).collect();
            fit_exponent(&ts, &xs).ok().map(|f| f.exponent)
        })
        .collect();
    run.csv(
        "front.csv",
        "front location X(t) = sup{x >= 0 : mu_r(t,x;w) <= 0}, realizing branch, and the log-log exponent fitted up to t",
        &["t", "X", "branch", "exponent_so_far"],
        trace.points.iter().zip(&so_far).map(|(q, e)| {
            vec![num(q.t), num(q.x), q.branch.to_string(), e.map(num).unwrap_or_else(|| "nan".into())]
        }),
    )?;
    let report = FitReport {
        exponent: trace.fit.exponent,
        prefactor: trace.fit.prefactor,
        residuals: trace.fit.residuals.clone(),
        onset: trace.onset,
        conjecture: trace.conjecture,
        conjecture_exponent: p,
        bounds,
        note: "rates assume the truncation conjecture for the reaction problem",
    };
    run.json("front_fit.json", "log-log fit X = a t^b with onset of the power-law regime", &report)?;

    if cfg.freidlin > 0 {
        require(cfg.gamma == 2.0, || "--freidlin needs --gamma 2".into())?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let queries: Vec<[f64; 4]> = (0..cfg.freidlin)
            .map(|_| {
                let t: f64 = rng.random_range(0.05..5.0);
                let x: f64 = rng.random_range(0.01..10.0);
                let v = rng.random_range(0.0..1.0) * x / t;
                [t, x, v, rng.random_range(0.0..3.0)]
            })
            .collect();
        let profiles: Vec<(bool, bool, f64)> = queries
            .par_iter()
            .map(|&[t, x, v, w]| {
                freidlin_profile(t, x, v, w, &params).map(|p| (p.unimodal, p.linear_leg_concave, p.linear_leg_curvature))
            })
            .collect::<kinld::Result<_>>()
            .ctx("front")?;
        let unimodal = profiles.iter().filter(|p| p.0).count();
        let concave = profiles.iter().filter(|p| p.1).count();
        run.check("Freidlin profiles unimodal", false, unimodal == profiles.len(), format!("{unimodal}/{}", profiles.len()));
        run.check("linear-leg profiles concave", false, concave == profiles.len(), format!("{concave}/{}", profiles.len()));
        run.csv(
            "freidlin.csv",
            "mu_r(tau, x(tau); w) along extremal paths ending in t <= x/v: unimodality and linear-leg concavity",
            &["t", "x", "v", "w", "unimodal", "concave", "max_second_difference"],
            queries.iter().zip(&profiles).map(|(q, p)| {
                vec![num(q[0]), num(q[1]), num(q[2]), num(q[3]), p.0.to_string(), p.1.to_string(), num(p.2)]
            }),
        )?;
    }
    run.finish(&cfg, &report)
}
