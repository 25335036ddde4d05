//! `scheme` and `hopflax`: the min-plus recursion and grid Hopf-Lax evaluation.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kinld::closed_form::{mu, phi};
use kinld::grid::{UniformGrid, VelocityGrid};
use kinld::io::read_phase_csv;
use kinld::minplus::{
    hopflax_min_with, hopflax_u_with, mu_n_closed, run_scheme, PhaseField, Refinement, SchemeState,
};
use kinld::Extended;

use super::{require, Shared};
use crate::error::{CliError, Context};
use crate::output::{num, Run};

/// Velocity grid of spacing `dv` covering `[-half, half]`, with `w` required to be a node.
fn velocity_grid(half: f64, dv: f64, w: f64) -> Result<VelocityGrid<f64>, CliError> {
    require(dv > 0.0 && half > 0.0, || "velocity grid needs --dv > 0 and a positive half-width".into())?;
    let cells = (half / dv).ceil().max(1.0) as usize;
    let g = VelocityGrid::symmetric(cells as f64 * dv, 2 * cells + 1).ctx("grid")?;
    require(g.node_index(w).is_some(), || format!("--w {w} is not a node of the velocity grid (spacing {dv})"))?;
    Ok(g)
}

fn space_grid(half: f64, dx: f64) -> Result<UniformGrid<f64>, CliError> {
    require(dx > 0.0 && half > 0.0, || "space grid needs --dx > 0 and --x-half > 0".into())?;
    UniformGrid::with_spacing(-half, half, dx).ctx("grid")
}

fn load_datum(path: &PathBuf) -> Result<PhaseField<f64>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("--datum-file {}: {e}", path.display())))?;
    read_phase_csv(BufReader::new(file)).ctx("datum")
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    /// Time step (default 0.25).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of steps (default 40).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Velocity of the Dirac datum at x = 0 (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
    /// Space grid half-width (default 12).
    #[arg(long)]
    pub x_half: Option<f64>,
    /// Space step (default 0.05).
    #[arg(long)]
    pub dx: Option<f64>,
    /// Velocity grid half-width (default 2 max(1, x_max - x_min) / dt).
    #[arg(long)]
    pub v_half: Option<f64>,
    /// Velocity step (default 0.25).
    #[arg(long)]
    pub dv: Option<f64>,
    /// Phase-field datum as CSV (x,v,value); replaces the Dirac datum.
    #[arg(long)]
    pub datum_file: Option<PathBuf>,
    /// Half-width of the window used for the error against mu(t_n, x; w) (default 5).
    #[arg(long)]
    pub window: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SchemeConfig {
    dt: f64,
    steps: usize,
    w: f64,
    x_half: f64,
    dx: f64,
    v_half: f64,
    dv: f64,
    datum_file: Option<PathBuf>,
    window: f64,
}

#[derive(Debug, Serialize)]
struct SchemeSummary {
    nodes: usize,
    steps: usize,
    max_recursion_error: Option<f64>,
    final_window_error: Option<f64>,
    boundary_hits: usize,
}

pub fn run_scheme_cmd(args: SchemeArgs, mut sh: Shared) -> Result<(), CliError> {
    let r = &mut sh.resolver;
    let dt = r.get("dt", args.dt, 0.25)?;
    let x_half = r.get("x_half", args.x_half, 12.0)?;
    let cfg = SchemeConfig {
        dt,
        steps: r.get("steps", args.steps, 40)?,
        w: r.get("w", args.w, 0.0)?,
        x_half,
        dx: r.get("dx", args.dx, 0.05)?,
        v_half: r.get("v_half", args.v_half, 2.0 * (2.0 * x_half).max(1.0) / dt)?,
        dv: r.get("dv", args.dv, 0.25)?,
        datum_file: r.optional("datum_file", args.datum_file)?,
        window: r.get("window", args.window, 5.0)?,
    };
    require(cfg.dt > 0.0 && cfg.dt.is_finite(), || "--dt must be > 0".into())?;
    require(cfg.steps >= 1, || "--steps must be >= 1".into())?;

    let dirac = cfg.datum_file.is_none();
    let u0 = match &cfg.datum_file {
        Some(p) => load_datum(p)?,
        None => {
            let x = space_grid(cfg.x_half, cfg.dx)?;
            let v = velocity_grid(cfg.v_half, cfg.dv, cfg.w)?;
            PhaseField::dirac(x, v, 0.0, cfg.w).ctx("scheme")?
        }
    };
    let grid = u0.x;
    let mut state = SchemeState::new(u0, cfg.dt).ctx("scheme")?;
    run_scheme(&mut state, cfg.steps);

    let mut run = Run::new(&sh.out, "scheme")?;
    let closed: Vec<Vec<Extended>> = if dirac {
        state
            .history
            .par_iter()
            .enumerate()
            .map(|(n, _)| (0..grid.n).map(|i| mu_n_closed(n, cfg.dt, grid.node(i), cfg.w)).collect())
            .collect()
    } else {
        vec![]
    };
    let continuous = |n: usize, x: f64| if n == 0 { None } else { Some(mu(state.time(n), x, cfg.w).0) };

    let mut summary = SchemeSummary {
        nodes: grid.n,
        steps: cfg.steps,
        max_recursion_error: None,
        final_window_error: None,
        boundary_hits: state.boundary_hits,
    };
    if dirac {
        let err = state
            .history
            .iter()
            .zip(&closed)
            .flat_map(|(f, c)| f.values.iter().zip(c).map(|(a, b)| a.abs_diff(*b)))
            .fold(0.0, f64::max);
        let slack = 2.0 * grid.spacing();
        run.check("recursion matches closed-form mu_n", true, err <= slack, format!("max error {err:e}, slack {slack:e}"));
        summary.max_recursion_error = Some(err);
        let last = state.step_count();
        let werr = (0..grid.n)
            .filter(|&i| grid.node(i).abs() <= cfg.window)
            .map(|i| state.history[last].values[i].abs_diff(continuous(last, grid.node(i)).unwrap()))
            .fold(0.0, f64::max);
        summary.final_window_error = Some(werr);
    }
    let rising = state
        .history
        .windows(2)
        .flat_map(|p| p[1].values.iter().zip(&p[0].values).map(|(a, b)| (*a > *b) as usize))
        .sum::<usize>();
    run.check("mu_{n+1} <= mu_n", true, rising == 0, format!("{rising} increasing nodes"));
    run.check(
        "minimizers inside the domain",
        false,
        state.boundary_hits == 0,
        format!("{} minimizers on the spatial boundary", state.boundary_hits),
    );

    let mut header = vec!["n", "t", "x", "mu_n"];
    if dirac {
        header.extend(["mu_n_closed", "mu"]);
    }
    let st = &state;
    let rows = st.history.iter().enumerate().flat_map(|(n, f)| {
        let closed = &closed;
        let continuous = &continuous;
        (0..grid.n).map(move |i| {
            let x = grid.node(i);
            let mut row = vec![n.to_string(), num(st.time(n)), num(x), f.values[i].to_string()];
            if dirac {
                row.push(closed[n][i].to_string());
                row.push(continuous(n, x).map_or_else(|| "inf".into(), |m| m.to_string()));
            }
            row
        })
    });
    run.csv(
        "scheme.csv",
        "mu_n(x): min-plus recursion for the minimum value at t_n = n dt, with its closed form and the continuous limit mu(t_n,x;w)",
        &header,
        rows,
    )?;
    run.finish(&cfg, &summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RefineMode {
    Grid,
    Golden,
}

#[derive(Debug, Args)]
pub struct HopflaxArgs {
    /// Times (default 1).
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Positions (default -2:2:41).
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Final velocities (default -2:2:21).
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Velocity of the Dirac datum at x = 0 (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
    /// Datum grid half-width in x (default 3).
    #[arg(long)]
    pub x_half: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    /// Datum grid half-width in v (default 3).
    #[arg(long)]
    pub v_half: Option<f64>,
    #[arg(long)]
    pub dv: Option<f64>,
    /// Phase-field datum as CSV (x,v,value); replaces the Dirac datum.
    #[arg(long)]
    pub datum_file: Option<PathBuf>,
    /// Search for the infimum over (y, w): grid nodes or grid plus golden-section refinement.
    #[arg(long, value_enum)]
    pub refine: Option<RefineMode>,
    /// Golden-section iterations (default 20).
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Serialize)]
struct HopflaxConfig {
    t: Vec<f64>,
    x: Vec<f64>,
    v: Vec<f64>,
    w: f64,
    x_half: f64,
    dx: f64,
    v_half: f64,
    dv: f64,
    datum_file: Option<PathBuf>,
    refine: RefineMode,
    iterations: usize,
}

#[derive(Debug, Serialize)]
struct HopflaxSummary {
    points: usize,
    max_error_vs_phi: Option<f64>,
    max_constraint_gap: f64,
}

pub fn run_hopflax(args: HopflaxArgs, mut sh: Shared) -> Result<(), CliError> {
    let r = &mut sh.resolver;
    let refine_default = RefineMode::Golden;
    let cfg = HopflaxConfig {
        t: r.list("t", args.t.as_deref(), "1")?,
        x: r.list("x", args.x.as_deref(), "-2:2:41")?,
        v: r.list("v", args.v.as_deref(), "-2:2:21")?,
        w: r.get("w", args.w, 0.0)?,
        x_half: r.get("x_half", args.x_half, 3.0)?,
        dx: r.get("dx", args.dx, 0.05)?,
        v_half: r.get("v_half", args.v_half, 3.0)?,
        dv: r.get("dv", args.dv, 0.05)?,
        datum_file: r.optional("datum_file", args.datum_file)?,
        refine: r.get("refine", args.refine, refine_default)?,
        iterations: r.get("iterations", args.iterations, 20)?,
    };
    require(cfg.t.iter().all(|t| *t > 0.0), || "--t: times must be > 0".into())?;
    let how = match cfg.refine {
        RefineMode::Grid => Refinement::Grid,
        RefineMode::Golden => Refinement::GoldenSection { iterations: cfg.iterations },
    };
    let dirac = cfg.datum_file.is_none();
    let u0 = match &cfg.datum_file {
        Some(p) => load_datum(p)?,
        None => {
            let x = space_grid(cfg.x_half, cfg.dx)?;
            let v = velocity_grid(cfg.v_half, cfg.dv, cfg.w)?;
            PhaseField::dirac(x, v, 0.0, cfg.w).ctx("hopflax")?
        }
    };

    let tx: Vec<(f64, f64)> = cfg.t.iter().flat_map(|&t| cfg.x.iter().map(move |&x| (t, x))).collect();
    let mins: Vec<Extended> = tx.par_iter().map(|&(t, x)| hopflax_min_with(&u0, t, x, how)).collect();
    let full: Vec<Vec<Extended>> =
        tx.par_iter().map(|&(t, x)| cfg.v.iter().map(|&v| hopflax_u_with(&u0, t, x, v, how)).collect()).collect();

    let mut run = Run::new(&sh.out, "hopflax")?;
    let mut gap = f64::NEG_INFINITY;
    for (k, row) in full.iter().enumerate() {
        for (u, &v) in row.iter().zip(&cfg.v) {
            if let (Extended::Finite(u), Extended::Finite(m)) = (u, mins[k]) {
                gap = gap.max(u - m - 0.5 * v * v);
            }
        }
    }
    run.check("u <= min_v u + v^2/2", true, gap <= 1e-9, format!("max gap {gap:e}"));
    let mut phi_err = None;
    if dirac {
        let err = tx
            .iter()
            .zip(&full)
            .flat_map(|(&(t, x), row)| row.iter().zip(&cfg.v).map(move |(u, &v)| u.abs_diff(phi(t, x, v, cfg.w))))
            .fold(0.0, f64::max);
        run.check("Dirac datum reproduces phi", true, err <= 1e-9, format!("max |u - phi| = {err:e}"));
        phi_err = Some(err);
    }

    let mut header = vec!["t", "x", "v", "u"];
    if dirac {
        header.push("phi");
    }
    let rows = tx.iter().zip(&full).flat_map(|(&(t, x), row)| {
        let v = &cfg.v;
        row.iter().zip(v).map(move |(u, &v)| {
            let mut out = vec![num(t), num(x), num(v), u.to_string()];
            if dirac {
                out.push(phi(t, x, v, cfg.w).to_string());
            }
            out
        })
    });
    run.csv("hopflax.csv", "u(t,x,v): Hopf-Lax representation inf over (y,w) of phi(t,x-y,v;w) + u0(y,w)", &header, rows)?;
    let mut header = vec!["t", "x", "min_u"];
    if dirac {
        header.push("mu");
    }
    let rows = tx.iter().zip(&mins).map(|(&(t, x), m)| {
        let mut out = vec![num(t), num(x), m.to_string()];
        if dirac {
            out.push(mu(t, x, cfg.w).0.to_string());
        }
        out
    });
    run.csv("hopflax_min.csv", "min_v u(t,x,v): Hopf-Lax representation through mu(t,x-y;w)", &header, rows)?;
    let summary = HopflaxSummary { points: tx.len() * cfg.v.len(), max_error_vs_phi: phi_err, max_constraint_gap: gap };
    run.finish(&cfg, &summary)
}
