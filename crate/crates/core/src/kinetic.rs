//! Semi-Lagrangian solver for the ε-scaled BGK equation with optional
//! monostable reaction, the Hopf-Cole transform and a priori bound checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::phi;
use crate::error::{Error, Result};
use crate::extended::ExtendedValue;
use crate::grid::{UniformGrid, VelocityGrid};

type Grid = UniformGrid<f64>;
type VGrid = VelocityGrid<f64>;
type Ev = ExtendedValue<f64>;

/// Gaussian tail tolerance used to size the default velocity grid.
pub const VELOCITY_TAIL_TOL: f64 = 1e-12;

/// Spatial boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Boundary {
    /// `f = 0` outside the domain.
    #[default]
    Absorbing,
    /// Period `n_x * dx`.
    Periodic,
}

/// `(2 pi eps)^{-1/2} exp(-v^2 / (2 eps))`.
pub fn maxwellian(epsilon: f64, v: f64) -> f64 {
    (-v * v / (2.0 * epsilon)).exp() / (2.0 * std::f64::consts::PI * epsilon).sqrt()
}

/// Symmetric velocity grid of half-width `6 sqrt(eps |ln tol|)`.
pub fn default_velocity_grid(epsilon: f64, n_v: usize) -> Result<VGrid> {
    let half = 6.0 * (epsilon * VELOCITY_TAIL_TOL.ln().abs()).sqrt();
    VelocityGrid::symmetric(half, n_v)
}

/// Trapezoid weights of a uniform grid.
pub fn trapezoid_weights(g: &Grid) -> Vec<f64> {
    let h = g.spacing();
    let mut w = vec![h; g.n];
    w[0] = 0.5 * h;
    w[g.n - 1] = 0.5 * h;
    w
}

/// Maxwellian rescaled to unit trapezoid mass on `v`.
pub fn discrete_maxwellian(epsilon: f64, v: &VGrid) -> Vec<f64> {
    let m: Vec<f64> = v.nodes().iter().map(|&vj| maxwellian(epsilon, vj)).collect();
    let z: f64 = trapezoid_weights(v).iter().zip(&m).map(|(w, m)| w * m).sum();
    m.into_iter().map(|m| m / z).collect()
}

/// Interpolation used at the foot of each characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Transport {
    /// Linear in `f`; conserves discrete mass.
    #[default]
    Linear,
    /// Linear in `-eps ln f` (geometric in `f`); keeps Gaussian tails sharp, does not conserve mass.
    LogLinear,
}

/// Density on an `(x, v)` grid, stored velocity-major (`f[j * n_x + i]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticField {
    pub epsilon: f64,
    pub x: Grid,
    pub v: VGrid,
    pub boundary: Boundary,
    #[serde(default)]
    pub transport: Transport,
    pub time: f64,
    pub f: Vec<f64>,
}

impl KineticField {
    pub fn from_fn(
        epsilon: f64,
        x: Grid,
        v: VGrid,
        boundary: Boundary,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon", format!("must be > 0, got {epsilon}")));
        }
        let xs = x.nodes();
        let mut vals = Vec::with_capacity(x.n * v.n);
        for j in 0..v.n {
            let vj = v.node(j);
            vals.extend(xs.iter().map(|&xi| f(xi, vj)));
        }
        if let Some(bad) = vals.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
            return Err(Error::invalid("f", format!("values must be finite and >= 0, found {bad}")));
        }
        Ok(KineticField { epsilon, x, v, boundary, transport: Transport::Linear, time: 0.0, f: vals })
    }

    /// `f = exp(-u0 / eps)`.
    pub fn from_wkb(epsilon: f64, x: Grid, v: VGrid, boundary: Boundary, u0: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::from_fn(epsilon, x, v, boundary, |x, v| (-u0(x, v) / epsilon).exp())
    }

    pub fn with_transport(mut self, transport: Transport) -> Self {
        self.transport = transport;
        self
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.x.n + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.f[self.idx(i, j)]
    }

    /// `dx * sum_i sum_j w_j f_ij`.
    pub fn mass(&self) -> f64 {
        self.x.spacing() * rho(self).iter().sum::<f64>()
    }

    /// Nodewise upper bound `eps^{1/2} M_eps(v)` used by the reaction equation.
    pub fn cap(&self) -> Vec<f64> {
        let s = self.epsilon.sqrt();
        discrete_maxwellian(self.epsilon, &self.v).into_iter().map(|m| s * m).collect()
    }
}

/// Trapezoid quadrature of `f` over `v` on each x-node.
pub fn rho(field: &KineticField) -> Vec<f64> {
    let w = trapezoid_weights(&field.v);
    let nx = field.x.n;
    let mut out = vec![0.0; nx];
    for (j, wj) in w.iter().enumerate() {
        let row = &field.f[j * nx..(j + 1) * nx];
        for (o, f) in out.iter_mut().zip(row) {
            *o += wj * f;
        }
    }
    let trunc = velocity_truncation(field);
    if trunc > 1e-10 {
        log::warn!("velocity grid truncation: boundary mass fraction {trunc:.3e}");
    }
    out
}

/// Fraction of total mass carried by the two endpoint velocity rows.
pub fn velocity_truncation(field: &KineticField) -> f64 {
    let nx = field.x.n;
    let last = field.v.n - 1;
    let w = trapezoid_weights(&field.v);
    let (mut edge, mut total) = (0.0, 0.0);
    for i in 0..nx {
        for (j, wj) in w.iter().enumerate() {
            total += wj * field.get(i, j);
        }
        edge += w[0] * field.get(i, 0) + w[last] * field.get(i, last);
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

/// Samples `src` at `i - s` (in cells).
fn shift_line(src: &[f64], s: f64, boundary: Boundary, transport: Transport, out: &mut [f64]) {
    let n = src.len() as i64;
    let m = s.floor();
    let theta = s - m;
    let m = m as i64;
    let at = |k: i64| -> f64 {
        match boundary {
            Boundary::Periodic => src[k.rem_euclid(n) as usize],
            Boundary::Absorbing if (0..n).contains(&k) => src[k as usize],
            Boundary::Absorbing => 0.0,
        }
    };
    for (i, o) in out.iter_mut().enumerate() {
        let k = i as i64 - m;
        *o = if theta == 0.0 {
            at(k)
        } else {
            let (a, b) = (at(k - 1), at(k));
            match transport {
                Transport::Linear => theta * a + (1.0 - theta) * b,
                Transport::LogLinear if a > 0.0 && b > 0.0 => (theta * a.ln() + (1.0 - theta) * b.ln()).exp(),
                Transport::LogLinear => 0.0,
            }
        };
    }
}

/// Relaxation weights `(g0, g1)` with `eps (g0 + g1) = int_0^h e^{-s/eps} ds`,
/// linear in `s` between the node and the foot of the characteristic.
fn relaxation_weights(dt: f64, epsilon: f64) -> (f64, f64) {
    let a = dt / epsilon;
    let total = -(-a).exp_m1();
    let g1 = if a < 1e-4 { a / 2.0 - a * a / 3.0 } else { (total - a * (-a).exp()) / a };
    (total - g1, g1)
}

/// One step of `f(t+dt) = e^{-dt/eps} f(t, x - dt v) + eps^{-1} M(v) int_0^dt rho(t, x - s v) e^{-s/eps} ds`.
pub fn duhamel_step(field: &KineticField, dt: f64) -> KineticField {
    if dt > field.epsilon {
        log::warn!("duhamel step dt = {dt} exceeds epsilon = {}", field.epsilon);
    }
    let nx = field.x.n;
    let h = field.x.spacing();
    let decay = (-dt / field.epsilon).exp();
    let (g0, g1) = relaxation_weights(dt, field.epsilon);
    let mhat = discrete_maxwellian(field.epsilon, &field.v);
    let rho_t = rho(field);
    let mut f = vec![0.0; field.f.len()];
    f.par_chunks_mut(nx).enumerate().for_each(|(j, out)| {
        let s = field.v.node(j) * dt / h;
        let src = &field.f[j * nx..(j + 1) * nx];
        shift_line(src, s, field.boundary, field.transport, out);
        let mut rho_foot = vec![0.0; nx];
        shift_line(&rho_t, s, field.boundary, field.transport, &mut rho_foot);
        for i in 0..nx {
            out[i] = decay * out[i] + mhat[j] * (g0 * rho_t[i] + g1 * rho_foot[i]);
        }
    });
    KineticField { f, time: field.time + dt, ..field.clone() }
}

/// Exact reaction flow over `tau` with `rho` frozen: `f -> cap + (f - cap) exp(-r rho tau / eps^{3/2})`.
fn react(field: &mut KineticField, tau: f64, r: f64) {
    if r == 0.0 {
        return;
    }
    let nx = field.x.n;
    let cap = field.cap();
    let rate = r * tau / field.epsilon.powf(1.5);
    let rho_t = rho(field);
    field.f.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, f) in row.iter_mut().enumerate() {
            let k = (-rate * rho_t[i]).exp();
            *f = cap[j] + (*f - cap[j]) * k;
        }
    });
}

/// Checks `0 <= f <= eps^{1/2} M_eps(v)` nodewise, with relative slack `rel`.
pub fn check_max_principle(field: &KineticField, rel: f64) -> Result<()> {
    let nx = field.x.n;
    for j in 0..field.v.n {
        let cap = field.epsilon.sqrt() * maxwellian(field.epsilon, field.v.node(j));
        for i in 0..nx {
            let f = field.get(i, j);
            if !(f >= 0.0) || f > cap * (1.0 + rel) {
                return Err(Error::MaxPrincipleViolation { ix: i, iv: j, f, cap });
            }
        }
    }
    Ok(())
}

/// Relative slack of the maximum-principle check.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-12;

/// Strang step: half reaction, Duhamel transport-relaxation, half reaction.
pub fn reaction_step(field: &KineticField, dt: f64, r: f64) -> Result<KineticField> {
    if r == 0.0 {
        return Ok(duhamel_step(field, dt));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("r", format!("must be >= 0, got {r}")));
    }
    let mut f = field.clone();
    react(&mut f, 0.5 * dt, r);
    let mut f = duhamel_step(&f, dt);
    react(&mut f, 0.5 * dt, r);
    check_max_principle(&f, MAX_PRINCIPLE_SLACK)?;
    Ok(f)
}

/// Hopf-Cole image `u = -eps ln f` and `b = u - v^2/2`, velocity-major like [`KineticField`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WKBField {
    pub epsilon: f64,
    pub x: Grid,
    pub v: VGrid,
    pub time: f64,
    pub u: Vec<Ev>,
    pub b: Vec<Ev>,
}

impl WKBField {
    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> Ev {
        self.u[j * self.x.n + i]
    }

    #[inline]
    pub fn b_at(&self, i: usize, j: usize) -> Ev {
        self.b[j * self.x.n + i]
    }
}

pub fn hopf_cole(field: &KineticField) -> WKBField {
    let nx = field.x.n;
    let mut u = Vec::with_capacity(field.f.len());
    let mut b = Vec::with_capacity(field.f.len());
    for j in 0..field.v.n {
        let half_v2 = 0.5 * field.v.node(j).powi(2);
        for i in 0..nx {
            let f = field.get(i, j);
            let ui = if f > 0.0 { Ev::Finite(-field.epsilon * f.ln()) } else { Ev::PlusInfinity };
            u.push(ui);
            b.push(ui.shift(-half_v2));
        }
    }
    WKBField { epsilon: field.epsilon, x: field.x, v: field.v, time: field.time, u, b }
}

/// Rectangular `(x, v)` window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: (f64, f64),
    pub v: (f64, f64),
}

impl Window {
    pub fn square(half: f64) -> Self {
        Window { x: (-half, half), v: (-half, half) }
    }

    fn nodes<'a>(&self, x: &'a Grid, v: &'a VGrid) -> impl Iterator<Item = (usize, usize)> + 'a {
        let xr: Vec<usize> = (0..x.n).filter(|&i| (self.x.0..=self.x.1).contains(&x.node(i))).collect();
        let vr: Vec<usize> = (0..v.n).filter(|&j| (self.v.0..=self.v.1).contains(&v.node(j))).collect();
        vr.into_iter().flat_map(move |j| xr.clone().into_iter().map(move |i| (i, j)))
    }

    /// Minimum number of cells between the window and the spatial boundary.
    pub fn margin_cells(&self, x: &Grid) -> f64 {
        ((self.x.0 - x.min).min(x.max - self.x.1)) / x.spacing()
    }
}

/// `sup |u - phi(t, x, v; w)|` over the window nodes.
pub fn wkb_error(wkb: &WKBField, window: &Window, w: f64) -> f64 {
    window
        .nodes(&wkb.x, &wkb.v)
        .map(|(i, j)| wkb.u_at(i, j).abs_diff(phi(wkb.time, wkb.x.node(i), wkb.v.node(j), w)))
        .fold(0.0, f64::max)
}

/// `max (u - min_w u - v^2/2)` over the window nodes, minimum taken over the full velocity grid.
pub fn constraint_gap(wkb: &WKBField, window: &Window) -> f64 {
    let mins: Vec<Ev> = (0..wkb.x.n)
        .map(|i| (0..wkb.v.n).map(|j| wkb.u_at(i, j)).fold(Ev::PlusInfinity, Ev::min))
        .collect();
    window
        .nodes(&wkb.x, &wkb.v)
        .filter_map(|(i, j)| {
            let rhs = mins[i].shift(0.5 * wkb.v.node(j).powi(2));
            match (wkb.u_at(i, j), rhs) {
                (Ev::Finite(a), Ev::Finite(b)) => Some(a - b),
                _ => None,
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Upper barrier `v^2/2 + t + ((|x| + (t/2)|v| + 1) / (t/2))^2 / 2` for data supported on `(-1, 1)`.
pub fn upper_barrier(t: f64, x: f64, v: f64) -> f64 {
    let q = (x.abs() + 0.5 * t * v.abs() + 1.0) / (0.5 * t);
    0.5 * v * v + t + 0.5 * q * q
}

/// `(max (u - upper_barrier), max (lower_barrier - u))` over the window; positive entries are excesses.
pub fn barrier_excess(wkb: &WKBField, window: &Window) -> (f64, f64) {
    let eps = wkb.epsilon;
    let lower_shift = -0.5 * eps * (2.0 * std::f64::consts::PI * eps).ln();
    let mut up = f64::NEG_INFINITY;
    let mut lo = f64::NEG_INFINITY;
    for (i, j) in window.nodes(&wkb.x, &wkb.v) {
        let (x, v) = (wkb.x.node(i), wkb.v.node(j));
        let u = wkb.u_at(i, j).to_float();
        up = up.max(u - upper_barrier(wkb.time, x, v));
        lo = lo.max(0.5 * v * v + lower_shift - u);
    }
    (up, lo)
}

/// Discrete sup norm and Lipschitz constants of `b` on its finite nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BNorms {
    pub time: f64,
    pub sup: f64,
    pub lip_x: f64,
    pub lip_v: f64,
}

pub fn b_norms(wkb: &WKBField) -> BNorms {
    let (nx, nv) = (wkb.x.n, wkb.v.n);
    let (hx, hv) = (wkb.x.spacing(), wkb.v.spacing());
    let mut sup = 0.0f64;
    let mut lip_x = 0.0f64;
    let mut lip_v = 0.0f64;
    for j in 0..nv {
        for i in 0..nx {
            let Ev::Finite(b) = wkb.b_at(i, j) else { continue };
            sup = sup.max(b.abs());
            if i + 1 < nx {
                if let Ev::Finite(c) = wkb.b_at(i + 1, j) {
                    lip_x = lip_x.max((c - b).abs() / hx);
                }
            }
            if j + 1 < nv {
                if let Ev::Finite(c) = wkb.b_at(i, j + 1) {
                    lip_v = lip_v.max((c - b).abs() / hv);
                }
            }
        }
    }
    BNorms { time: wkb.time, sup, lip_x, lip_v }
}

/// Tolerances added to each a priori bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriSlack {
    pub absolute: f64,
    pub sup: f64,
    pub lip_x: f64,
    pub lip_v: f64,
}

impl Default for AprioriSlack {
    fn default() -> Self {
        AprioriSlack { absolute: 1e-6, sup: 0.0, lip_x: 0.0, lip_v: 0.0 }
    }
}

/// Per-snapshot comparison against the initial norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    pub initial: BNorms,
    pub snapshots: Vec<BNorms>,
    pub violations: Vec<String>,
}

impl AprioriReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `sup|b(t)| <= sup|b0|`, `Lip_x b(t) <= Lip_x b0` and `Lip_v b(t) <= Lip_v b0 + t Lip_x b0`.
pub fn apriori_report(history: &[WKBField], slack: &AprioriSlack) -> AprioriReport {
    let Some(first) = history.first() else {
        return AprioriReport {
            initial: BNorms { time: 0.0, sup: 0.0, lip_x: 0.0, lip_v: 0.0 },
            snapshots: vec![],
            violations: vec!["empty history".into()],
        };
    };
    let b0 = b_norms(first);
    let mut violations = Vec::new();
    let snapshots: Vec<BNorms> = history.iter().map(b_norms).collect();
    for s in &snapshots {
        let t = s.time - b0.time;
        let checks = [
            ("(i) sup|b|", s.sup, b0.sup + slack.sup),
            ("(ii) Lip_x b", s.lip_x, b0.lip_x + slack.lip_x),
            ("(iv) Lip_v b", s.lip_v, b0.lip_v + t * b0.lip_x + slack.lip_v),
        ];
        for (name, got, bound) in checks {
            if got > bound + slack.absolute {
                violations.push(format!("t={:.6}: {name} = {got:.9e} exceeds {bound:.9e}", s.time));
            }
        }
    }
    AprioriReport { initial: b0, snapshots, violations }
}

/// Time loop parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticRun {
    pub dt: f64,
    pub t_final: f64,
    pub r: f64,
    /// Hopf-Cole snapshot every `snapshot_every` steps (0: final only).
    pub snapshot_every: usize,
}

impl KineticRun {
    /// `dt = eps / 4`.
    pub fn with_default_dt(epsilon: f64, t_final: f64) -> Self {
        KineticRun { dt: epsilon / 4.0, t_final, r: 0.0, snapshot_every: 0 }
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Output of [`run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticOutput {
    pub field: KineticField,
    pub snapshots: Vec<WKBField>,
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Maximum `|mass_k / mass_0 - 1|` over the run.
    pub mass_drift: f64,
    pub steps: usize,
}

/// Runs to `t_final`, shortening the last step to land on it.
pub fn run(initial: KineticField, cfg: &KineticRun) -> Result<KineticOutput> {
    if !(cfg.dt > 0.0) || !(cfg.t_final >= 0.0) {
        return Err(Error::invalid("dt/t_final", "dt must be > 0 and t_final >= 0"));
    }
    if cfg.r > 0.0 {
        check_max_principle(&initial, MAX_PRINCIPLE_SLACK)?;
    }
    let m0 = initial.mass();
    let steps = cfg.steps();
    let mut snapshots = vec![hopf_cole(&initial)];
    let mut field = initial;
    let mut drift = 0.0f64;
    let start = field.time;
    for k in 0..steps {
        let dt = cfg.dt.min(start + cfg.t_final - field.time);
        field = reaction_step(&field, dt, cfg.r)?;
        if m0 > 0.0 {
            drift = drift.max((field.mass() / m0 - 1.0).abs());
        }
        if cfg.snapshot_every > 0 && (k + 1) % cfg.snapshot_every == 0 && k + 1 < steps {
            snapshots.push(hopf_cole(&field));
        }
    }
    if steps > 0 {
        snapshots.push(hopf_cole(&field));
    }
    let final_mass = field.mass();
    Ok(KineticOutput { field, snapshots, initial_mass: m0, final_mass, mass_drift: drift, steps })
}

/// Mollified Dirac datum `u0 = x^2 / (2 sigma^2) + v^2 / 2` with `sigma = 2 dx`.
pub fn dirac_like(epsilon: f64, x: Grid, v: VGrid, boundary: Boundary) -> Result<KineticField> {
    // f-space width is sigma * sqrt(eps), below dx for eps < 1/4.
    let sigma = 2.0 * x.spacing();
    KineticField::from_wkb(epsilon, x, v, boundary, |x, v| x * x / (2.0 * sigma * sigma) + 0.5 * v * v)
}
