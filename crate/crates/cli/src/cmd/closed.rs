//! `mu` and `phi`: closed-form fundamental solutions with optional brute-force oracles.

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use kinld::closed_form::{heat_rate, mu, mu_brute, phi, phi_brute};
use kinld::Extended;

use super::{require, Shared};
use crate::error::CliError;
use crate::output::{num, Run};

#[derive(Debug, Args)]
pub struct MuArgs {
    /// Times: `a`, `a,b,...`, `a:b` (unit steps) or `a:b:n` (default 1:10).
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Positions, same syntax (default -15:15:301).
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Initial velocity (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
    /// Add the brute-force oracle column.
    #[arg(long)]
    pub brute: bool,
    /// Oracle resolution (default 600).
    #[arg(long)]
    pub brute_n: Option<usize>,
    /// Allowed oracle discrepancy (default 5e-3).
    #[arg(long)]
    pub tol_brute: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MuConfig {
    t: Vec<f64>,
    x: Vec<f64>,
    w: f64,
    brute: bool,
    brute_n: usize,
    tol_brute: f64,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    /// Times (default 1).
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Positions (default -3:3:61).
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Final velocities (default -2:2:41).
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Initial velocity (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
    #[arg(long)]
    pub brute: bool,
    /// Oracle resolution (default 200).
    #[arg(long)]
    pub brute_n: Option<usize>,
    /// Allowed oracle discrepancy (default 1e-2).
    #[arg(long)]
    pub tol_brute: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PhiConfig {
    t: Vec<f64>,
    x: Vec<f64>,
    v: Vec<f64>,
    w: f64,
    brute: bool,
    brute_n: usize,
    tol_brute: f64,
}

#[derive(Debug, Default, Serialize)]
struct OracleSummary {
    rows: usize,
    max_oracle_gap: Option<f64>,
    max_overshoot: Option<f64>,
}

fn check_times(t: &[f64]) -> Result<(), CliError> {
    require(t.iter().all(|t| *t >= 0.0), || "--t: times must be >= 0".into())
}

/// Records the oracle invariants and returns `(max |exact - brute|, max (exact - brute)+)`.
fn oracle_checks(run: &mut Run, pairs: &[(Extended, Extended)], tol: f64) -> (f64, f64) {
    let gap = pairs.iter().map(|(e, b)| e.abs_diff(*b)).fold(0.0, f64::max);
    let over = pairs
        .iter()
        .map(|(e, b)| match (e, b) {
            (Extended::Finite(e), Extended::Finite(b)) => (e - b) / b.abs().max(1.0),
            (Extended::PlusInfinity, Extended::Finite(_)) => f64::INFINITY,
            _ => 0.0,
        })
        .fold(0.0, f64::max);
    run.check("closed form <= oracle", true, over <= 1e-12, format!("max relative overshoot {over:e}"));
    run.check("closed form matches oracle", true, gap <= tol, format!("max |exact - oracle| = {gap:e}, tolerance {tol:e}"));
    (gap, over)
}

pub fn run_mu(args: MuArgs, mut sh: Shared) -> Result<(), CliError> {
    let r = &mut sh.resolver;
    let cfg = MuConfig {
        t: r.list("t", args.t.as_deref(), "1:10")?,
        x: r.list("x", args.x.as_deref(), "-15:15:301")?,
        w: r.get("w", args.w, 0.0)?,
        brute: r.flag("brute", args.brute)?,
        brute_n: r.get("brute_n", args.brute_n, 600)?,
        tol_brute: r.get("tol_brute", args.tol_brute, 5e-3)?,
    };
    check_times(&cfg.t)?;
    require(cfg.w.is_finite(), || "--w must be finite".into())?;
    require(cfg.brute_n >= 2, || "--brute-n must be >= 2".into())?;

    let points: Vec<(f64, f64)> = cfg.t.iter().flat_map(|&t| cfg.x.iter().map(move |&x| (t, x))).collect();
    let values: Vec<(Extended, &'static str, Option<Extended>)> = points
        .par_iter()
        .map(|&(t, x)| {
            let (m, tag) = mu(t, x, cfg.w);
            (m, tag.as_str(), cfg.brute.then(|| mu_brute(t, x, cfg.w, cfg.brute_n)))
        })
        .collect();

    let mut run = Run::new(&sh.out, "mu")?;
    let mut header = vec!["t", "x", "mu", "branch", "heat"];
    if cfg.brute {
        header.push("mu_brute");
    }
    let rows = points.iter().zip(&values).map(|(&(t, x), (m, tag, b))| {
        let mut row = vec![num(t), num(x), m.to_string(), tag.to_string(), heat_rate(t, x).to_string()];
        if let Some(b) = b {
            row.push(b.to_string());
        }
        row
    });
    run.csv(
        "mu.csv",
        "mu(t,x;w): minimum over final velocities of the fundamental solution, with branch tag and the heat-equation rate x^2/(4t)",
        &header,
        rows,
    )?;
    let mut summary = OracleSummary { rows: points.len(), ..Default::default() };
    if cfg.brute {
        let pairs: Vec<(Extended, Extended)> = values.iter().map(|(m, _, b)| (*m, b.unwrap())).collect();
        let (gap, over) = oracle_checks(&mut run, &pairs, cfg.tol_brute);
        summary.max_oracle_gap = Some(gap);
        summary.max_overshoot = Some(over);
    }
    run.finish(&cfg, &summary)
}

pub fn run_phi(args: PhiArgs, mut sh: Shared) -> Result<(), CliError> {
    let r = &mut sh.resolver;
    let cfg = PhiConfig {
        t: r.list("t", args.t.as_deref(), "1")?,
        x: r.list("x", args.x.as_deref(), "-3:3:61")?,
        v: r.list("v", args.v.as_deref(), "-2:2:41")?,
        w: r.get("w", args.w, 0.0)?,
        brute: r.flag("brute", args.brute)?,
        brute_n: r.get("brute_n", args.brute_n, 200)?,
        tol_brute: r.get("tol_brute", args.tol_brute, 1e-2)?,
    };
    check_times(&cfg.t)?;
    require(cfg.w.is_finite(), || "--w must be finite".into())?;
    require(cfg.brute_n >= 2, || "--brute-n must be >= 2".into())?;

    let (xs, vs) = (&cfg.x, &cfg.v);
    let points: Vec<(f64, f64, f64)> =
        cfg.t.iter().flat_map(|&t| xs.iter().flat_map(move |&x| vs.iter().map(move |&v| (t, x, v)))).collect();
    let values: Vec<(Extended, Option<Extended>)> = points
        .par_iter()
        .map(|&(t, x, v)| (phi(t, x, v, cfg.w), cfg.brute.then(|| phi_brute(t, x, v, cfg.w, cfg.brute_n))))
        .collect();

    let mut run = Run::new(&sh.out, "phi")?;
    let floor = points
        .iter()
        .zip(&values)
        .map(|(&(_, _, v), (p, _))| (0.5 * v * v - p.to_float()).max(0.0))
        .fold(0.0, f64::max);
    run.check("phi >= v^2/2", true, floor <= 1e-12, format!("max deficit {floor:e}"));
    let mut header = vec!["t", "x", "v", "phi"];
    if cfg.brute {
        header.push("phi_brute");
    }
    let rows = points.iter().zip(&values).map(|(&(t, x, v), (p, b))| {
        let mut row = vec![num(t), num(x), num(v), p.to_string()];
        if let Some(b) = b {
            row.push(b.to_string());
        }
        row
    });
    run.csv("phi.csv", "phi(t,x,v;w): fundamental solution started from a Dirac mass at (0, w)", &header, rows)?;
    let mut summary = OracleSummary { rows: points.len(), ..Default::default() };
    if cfg.brute {
        let pairs: Vec<(Extended, Extended)> = values.iter().map(|(p, b)| (*p, b.unwrap())).collect();
        let (gap, over) = oracle_checks(&mut run, &pairs, cfg.tol_brute);
        summary.max_oracle_gap = Some(gap);
        summary.max_overshoot = Some(over);
    }
    run.finish(&cfg, &summary)
}
