//! `kinetic`: BGK runs with Hopf-Cole diagnostics and the WKB comparison table.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use kinld::kinetic::{
    apriori_report, constraint_gap, default_velocity_grid, dirac_like, run as evolve, wkb_error, AprioriSlack, Boundary,
    KineticField, KineticRun, Transport, WKBField, Window,
};
use kinld::Grid;

use super::{require, Shared};
use crate::error::{CliError, Context};
use crate::output::{num, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Datum {
    /// Mollified Dirac mass at x = 0 with Maxwellian velocities.
    Dirac,
    /// `v^2/2 + 1 + cos(2 pi x / P)/2` with P = nx dx, periodic on the grid.
    Bounded,
    /// `v^2/2` on |x| < 1, no mass elsewhere.
    Compact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    Absorbing,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TransportArg {
    Linear,
    LogLinear,
}

#[derive(Debug, Args)]
pub struct KineticArgs {
    /// Scaling parameters, list syntax (default 0.1).
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Final time (default 1).
    #[arg(long)]
    pub t: Option<f64>,
    /// Time step as a multiple of epsilon (default 0.25).
    #[arg(long)]
    pub dt_factor: Option<f64>,
    /// Reaction rate (default 0).
    #[arg(long)]
    pub r: Option<f64>,
    /// Space nodes (default 401).
    #[arg(long)]
    pub nx: Option<usize>,
    /// Velocity nodes, odd (default 201).
    #[arg(long)]
    pub nv: Option<usize>,
    /// Space half-width (default 2.1).
    #[arg(long)]
    pub x_half: Option<f64>,
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
    #[arg(long, value_enum)]
    pub transport: Option<TransportArg>,
    #[arg(long, value_enum)]
    pub datum: Option<Datum>,
    /// Hopf-Cole snapshot every this many steps (default 0: initial and final only).
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Compare u^eps with phi(t,x,v;0) on the window and tabulate the error.
    #[arg(long)]
    pub compare_phi: bool,
    /// Half-width of the square (x, v) comparison window (default 2).
    #[arg(long)]
    pub window: Option<f64>,
    /// Skip the per-snapshot (x, v, f, u) dumps.
    #[arg(long)]
    pub no_fields: bool,
    /// Allowed relative mass drift (default 1e-8).
    #[arg(long)]
    pub tol_mass: Option<f64>,
    /// Absolute slack of the a priori bounds on b (default 1e-6).
    #[arg(long)]
    pub tol_apriori: Option<f64>,
}

#[derive(Debug, Serialize)]
struct KineticConfig {
    epsilon: Vec<f64>,
    t: f64,
    dt_factor: f64,
    r: f64,
    nx: usize,
    nv: usize,
    x_half: f64,
    boundary: BoundaryArg,
    transport: TransportArg,
    datum: Datum,
    snapshot_every: usize,
    compare_phi: bool,
    window: f64,
    no_fields: bool,
    tol_mass: f64,
    tol_apriori: f64,
}

#[derive(Debug, Serialize)]
struct EpsilonRow {
    epsilon: f64,
    dt: f64,
    steps: usize,
    mass_drift: f64,
    sup_error: Option<f64>,
    constraint_gap: f64,
    apriori_violations: Option<usize>,
    max_principle: Option<String>,
}

fn initial(cfg: &KineticConfig, eps: f64) -> Result<KineticField, CliError> {
    let x = Grid::symmetric(cfg.x_half, cfg.nx).ctx("kinetic")?;
    let v = default_velocity_grid(eps, cfg.nv).ctx("kinetic")?;
    let b = match cfg.boundary {
        BoundaryArg::Absorbing => Boundary::Absorbing,
        BoundaryArg::Periodic => Boundary::Periodic,
    };
    let f = match cfg.datum {
        Datum::Dirac => dirac_like(eps, x, v, b),
        Datum::Bounded => {
            let k = std::f64::consts::TAU / (x.spacing() * x.n as f64);
            KineticField::from_wkb(eps, x, v, b, |x, v| 0.5 * v * v + 1.0 + 0.5 * (k * x).cos())
        }
        Datum::Compact => {
            KineticField::from_wkb(eps, x, v, b, |x, v| if x.abs() < 1.0 { 0.5 * v * v } else { f64::INFINITY })
        }
    }
    .ctx("kinetic")?;
    Ok(f.with_transport(match cfg.transport {
        TransportArg::Linear => Transport::Linear,
        TransportArg::LogLinear => Transport::LogLinear,
    }))
}

fn field_rows<'a>(w: &'a WKBField, f: &'a KineticField) -> impl Iterator<Item = Vec<String>> + 'a {
    (0..w.x.n).flat_map(move |i| {
        (0..w.v.n).map(move |j| vec![num(w.x.node(i)), num(w.v.node(j)), num(f.get(i, j)), w.u_at(i, j).to_string()])
    })
}

pub fn run_kinetic(args: KineticArgs, mut sh: Shared) -> Result<(), CliError> {
    let r = &mut sh.resolver;
    let cfg = KineticConfig {
        epsilon: r.list("epsilon", args.epsilon.as_deref(), "0.1")?,
        t: r.get("t", args.t, 1.0)?,
        dt_factor: r.get("dt_factor", args.dt_factor, 0.25)?,
        r: r.get("r", args.r, 0.0)?,
        nx: r.get("nx", args.nx, 401)?,
        nv: r.get("nv", args.nv, 201)?,
        x_half: r.get("x_half", args.x_half, 2.1)?,
        boundary: r.get("boundary", args.boundary, BoundaryArg::Absorbing)?,
        transport: r.get("transport", args.transport, TransportArg::Linear)?,
        datum: r.get("datum", args.datum, Datum::Dirac)?,
        snapshot_every: r.get("snapshot_every", args.snapshot_every, 0)?,
        compare_phi: r.flag("compare_phi", args.compare_phi)?,
        window: r.get("window", args.window, 2.0)?,
        no_fields: r.flag("no_fields", args.no_fields)?,
        tol_mass: r.get("tol_mass", args.tol_mass, 1e-8)?,
        tol_apriori: r.get("tol_apriori", args.tol_apriori, 1e-6)?,
    };
    require(cfg.epsilon.iter().all(|e| *e > 0.0), || "--epsilon values must be > 0".into())?;
    require(cfg.t > 0.0 && cfg.dt_factor > 0.0, || "--t and --dt-factor must be > 0".into())?;
    require(cfg.r >= 0.0, || "--r must be >= 0".into())?;

    let mut run = Run::new(&sh.out, "kinetic")?;
    let window = Window::square(cfg.window);
    let mut table = Vec::new();
    for (k, &eps) in cfg.epsilon.iter().enumerate() {
        let f0 = initial(&cfg, eps)?;
        let margin = window.margin_cells(&f0.x);
        let run_cfg = KineticRun { dt: cfg.dt_factor * eps, t_final: cfg.t, r: cfg.r, snapshot_every: cfg.snapshot_every };
        let out = match evolve(f0, &run_cfg) {
            Ok(out) => out,
            Err(e @ kinld::Error::MaxPrincipleViolation { .. }) => {
                run.check(&format!("maximum principle (eps={eps})"), true, false, e.to_string());
                table.push(EpsilonRow {
                    epsilon: eps,
                    dt: run_cfg.dt,
                    steps: 0,
                    mass_drift: f64::NAN,
                    sup_error: None,
                    constraint_gap: f64::NAN,
                    apriori_violations: None,
                    max_principle: Some(e.to_string()),
                });
                continue;
            }
            Err(e) => return Err(CliError::from_core("kinetic", e)),
        };
        let last = out.snapshots.last().expect("at least the initial snapshot");
        if cfg.r > 0.0 {
            run.check(&format!("maximum principle (eps={eps})"), true, true, format!("{} steps", out.steps));
        }
        if cfg.r == 0.0 {
            let conservative = cfg.boundary == BoundaryArg::Periodic && cfg.transport == TransportArg::Linear;
            run.check(
                &format!("mass conservation (eps={eps})"),
                conservative,
                out.mass_drift <= cfg.tol_mass,
                format!("relative drift {:e}", out.mass_drift),
            );
        }
        let mut apriori = None;
        if cfg.datum == Datum::Bounded && cfg.r == 0.0 {
            let slack = AprioriSlack { absolute: cfg.tol_apriori, lip_v: last.x.spacing(), ..Default::default() };
            let rep = apriori_report(&out.snapshots, &slack);
            let hard = cfg.boundary == BoundaryArg::Periodic;
            run.check(&format!("a priori bounds on b (eps={eps})"), hard, rep.holds(), rep.violations.join("; "));
            apriori = Some(rep.violations.len());
        }
        let mut sup = None;
        if cfg.compare_phi {
            run.check(
                &format!("window margin (eps={eps})"),
                true,
                margin >= 5.0,
                format!("{margin:.1} cells between window and boundary"),
            );
            sup = Some(wkb_error(last, &window, 0.0));
        }
        if !cfg.no_fields {
            for (s, snap) in out.snapshots.iter().enumerate() {
                let is_last = s + 1 == out.snapshots.len();
                // Only the final snapshot has its density at hand; earlier ones are rebuilt from u.
                let f = if is_last { out.field.clone() } else { density_of(snap, &out.field) };
                run.csv(
                    &format!("kinetic_eps{k}_snap{s}.csv"),
                    &format!("f^eps and u^eps = -eps ln f^eps at t = {} for eps = {eps}", snap.time),
                    &["x", "v", "f", "u"],
                    field_rows(snap, &f),
                )?;
            }
        }
        table.push(EpsilonRow {
            epsilon: eps,
            dt: run_cfg.dt,
            steps: out.steps,
            mass_drift: out.mass_drift,
            sup_error: sup,
            constraint_gap: constraint_gap(last, &window),
            apriori_violations: apriori,
            max_principle: None,
        });
    }
    if cfg.compare_phi {
        let errs: Vec<f64> = table.iter().filter_map(|r| r.sup_error).collect();
        if errs.len() >= 2 {
            let decreasing = errs.windows(2).all(|p| p[1] < p[0]);
            run.check("WKB error decreases along epsilon", false, decreasing, format!("{errs:?}"));
        }
    }
    let rows = table.iter().map(|r| {
        vec![
            num(r.epsilon),
            num(r.dt),
            r.steps.to_string(),
            num(r.mass_drift),
            r.sup_error.map(num).unwrap_or_default(),
            num(r.constraint_gap),
        ]
    });
    run.csv(
        "kinetic_table.csv",
        "per-epsilon diagnostics: mass drift, sup over the window of |u^eps - phi(t,x,v;0)|, max of u - min_v u - v^2/2",
        &["epsilon", "dt", "steps", "mass_drift", "sup_error", "constraint_gap"],
        rows,
    )?;
    run.finish(&cfg, &table)
}

/// Density `exp(-u/eps)` on the grids of `like`.
fn density_of(snap: &WKBField, like: &KineticField) -> KineticField {
    let mut f = like.clone();
    f.time = snap.time;
    for (dst, u) in f.f.iter_mut().zip(&snap.u) {
        *dst = u.value().map_or(0.0, |u| (-u / snap.epsilon).exp());
    }
    f
}
