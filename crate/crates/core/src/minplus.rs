//! Min-plus fields, the time-discrete recursion for the minimum value
//! `mu_n`, its closed-form solution, and grid Hopf-Lax evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{mu, phi};
use crate::error::{Error, Result};
use crate::extended::{min_all, ExtendedValue};
use crate::grid::{Locus, UniformGrid, VelocityGrid};
use crate::scalar::{is_zero_within, lit, Real};

type Ev<T> = ExtendedValue<T>;

fn lerp<T: Real>(a: Ev<T>, b: Ev<T>, theta: T) -> Ev<T> {
    match (a, b) {
        (Ev::Finite(a), Ev::Finite(b)) => Ev::Finite(a + (b - a) * theta),
        _ => Ev::PlusInfinity,
    }
}

fn interp_line<T: Real>(values: impl Fn(usize) -> Ev<T>, loc: Option<Locus<T>>) -> Ev<T> {
    match loc {
        None => Ev::PlusInfinity,
        Some(l) if l.is_node() => values(l.i),
        Some(l) => lerp(values(l.i), values(l.i + 1), l.theta),
    }
}

/// Cost values over a spatial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuField<T> {
    pub grid: UniformGrid<T>,
    pub values: Vec<Ev<T>>,
}

impl<T: Real> MuField<T> {
    pub fn new(grid: UniformGrid<T>, values: Vec<Ev<T>>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.n)));
        }
        Ok(MuField { grid, values })
    }

    pub fn from_fn(grid: UniformGrid<T>, f: impl Fn(T) -> Ev<T>) -> Self {
        let values = (0..grid.n).map(|i| f(grid.node(i))).collect();
        MuField { grid, values }
    }

    /// Linear interpolation; `+∞` outside the grid or next to a `+∞` node.
    pub fn at(&self, x: T) -> Ev<T> {
        interp_line(|i| self.values[i], self.grid.locate(x))
    }

    pub fn min_value(&self) -> Ev<T> {
        min_all(self.values.iter().copied())
    }

    fn finite_indices(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i].is_finite()).collect()
    }
}

/// Cost values over a phase-space grid, stored x-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseField<T> {
    pub x: UniformGrid<T>,
    pub v: VelocityGrid<T>,
    pub values: Vec<Ev<T>>,
}

impl<T: Real> PhaseField<T> {
    pub fn new(x: UniformGrid<T>, v: VelocityGrid<T>, values: Vec<Ev<T>>) -> Result<Self> {
        if values.len() != x.n * v.n {
            return Err(Error::GridMismatch(format!("{} values for {}x{} nodes", values.len(), x.n, v.n)));
        }
        Ok(PhaseField { x, v, values })
    }

    pub fn from_fn(x: UniformGrid<T>, v: VelocityGrid<T>, f: impl Fn(T, T) -> Ev<T>) -> Self {
        let mut values = Vec::with_capacity(x.n * v.n);
        for i in 0..x.n {
            let xi = x.node(i);
            for j in 0..v.n {
                values.push(f(xi, v.node(j)));
            }
        }
        PhaseField { x, v, values }
    }

    pub fn constant(x: UniformGrid<T>, v: VelocityGrid<T>, c: Ev<T>) -> Self {
        PhaseField { x, v, values: vec![c; x.n * v.n] }
    }

    /// `0` at the node `(x0, w0)` and `+∞` elsewhere.
    pub fn dirac(x: UniformGrid<T>, v: VelocityGrid<T>, x0: T, w0: T) -> Result<Self> {
        let i = x.node_index(x0).ok_or_else(|| Error::invalid("x0", format!("{x0} is not a grid node")))?;
        let j = v.node_index(w0).ok_or_else(|| Error::invalid("w0", format!("{w0} is not a grid node")))?;
        let mut f = Self::constant(x, v, Ev::PlusInfinity);
        f.values[i * v.n + j] = Ev::zero();
        Ok(f)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Ev<T> {
        self.values[i * self.v.n + j]
    }

    pub fn column(&self, i: usize) -> &[Ev<T>] {
        &self.values[i * self.v.n..(i + 1) * self.v.n]
    }

    pub fn column_min(&self, i: usize) -> Ev<T> {
        min_all(self.column(i).iter().copied())
    }

    /// `min_v u(x, v)` on every x-node.
    pub fn min_over_v(&self) -> MuField<T> {
        MuField { grid: self.x, values: (0..self.x.n).map(|i| self.column_min(i)).collect() }
    }

    /// Linear interpolation in `v` on x-node `i`.
    pub fn at_column(&self, i: usize, v: T) -> Ev<T> {
        let col = self.column(i);
        interp_line(|j| col[j], self.v.locate(v))
    }

    /// Bilinear interpolation; `+∞` outside or when any contributing corner is `+∞`.
    pub fn at(&self, x: T, v: T) -> Ev<T> {
        let (Some(lx), Some(lv)) = (self.x.locate(x), self.v.locate(v)) else {
            return Ev::PlusInfinity;
        };
        let row = |i: usize| interp_line(|j| self.get(i, j), Some(lv));
        if lx.is_node() {
            row(lx.i)
        } else {
            lerp(row(lx.i), row(lx.i + 1), lx.theta)
        }
    }

    pub fn shifted(&self, c: T) -> Self {
        PhaseField { x: self.x, v: self.v, values: self.values.iter().map(|e| e.shift(c)).collect() }
    }
}

/// Enforces `u <= min_w u + v^2/2` nodewise.
pub fn project_initial<T: Real>(u0: &PhaseField<T>) -> PhaseField<T> {
    let half: T = lit(0.5);
    let mut out = u0.clone();
    for i in 0..u0.x.n {
        let m = u0.column_min(i);
        for j in 0..u0.v.n {
            let vj = u0.v.node(j);
            let k = i * u0.v.n + j;
            out.values[k] = out.values[k].min(m.shift(half * vj * vj));
        }
    }
    out
}

/// Maximum violation of `u <= min_w u + v^2/2` over the grid, `0` when satisfied.
pub fn constraint_violation<T: Real>(u: &PhaseField<T>) -> T {
    let half: T = lit(0.5);
    let mut worst = T::zero();
    for i in 0..u.x.n {
        let m = u.column_min(i);
        for j in 0..u.v.n {
            let vj = u.v.node(j);
            if let (Ev::Finite(a), Ev::Finite(b)) = (u.get(i, j), m.shift(half * vj * vj)) {
                worst = worst.max(a - b);
            } else if u.get(i, j).is_finite() {
                continue;
            } else if m.is_finite() {
                worst = T::infinity();
            }
        }
    }
    worst
}

/// History of the recursion for `mu_n` together with its datum.
///
/// The datum is kept as given; the constraint projection is applied
/// exactly inside each step through the term `mu_0(y) + |x - y|^2 / (2 t^2)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeState<T> {
    pub dt: T,
    pub u0: PhaseField<T>,
    pub history: Vec<MuField<T>>,
    /// Nodes whose minimizing foot point sat on the domain boundary.
    pub boundary_hits: usize,
    #[serde(skip)]
    finite: Vec<Vec<usize>>,
}

impl<T: Real> SchemeState<T> {
    pub fn new(u0: PhaseField<T>, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let mu0 = u0.min_over_v();
        let finite = vec![mu0.finite_indices()];
        Ok(SchemeState { dt, u0, history: vec![mu0], boundary_hits: 0, finite })
    }

    /// Index `n` of the latest field `mu_n`.
    pub fn step_count(&self) -> usize {
        self.history.len() - 1
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * lit::<T>(k as f64)
    }

    pub fn latest(&self) -> &MuField<T> {
        self.history.last().expect("history is never empty")
    }

    fn ensure_cache(&mut self) {
        if self.finite.len() != self.history.len() {
            self.finite = self.history.iter().map(MuField::finite_indices).collect();
        }
    }
}

/// Advances the recursion by one step and returns `mu_{n+1}`.
pub fn scheme_step<T: Real>(state: &mut SchemeState<T>) -> &MuField<T> {
    state.ensure_cache();
    let n = state.step_count();
    let grid = state.history[0].grid;
    let tn1 = state.time(n + 1);
    let two: T = lit(2.0);
    let u0_cols: Vec<usize> = (0..state.u0.x.n).filter(|&i| state.u0.column_min(i).is_finite()).collect();
    let st = &*state;

    let results: Vec<(Ev<T>, bool)> = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let mut best = st.history[n].values[i];
            let mut foot = i;
            let mut offer = |val: Ev<T>, y: usize| {
                if val < best {
                    best = val;
                    foot = y;
                }
            };
            for &iy in &u0_cols {
                let y = st.u0.x.node(iy);
                let v = (x - y) / tn1;
                offer(st.u0.at_column(iy, v).shift(tn1), iy);
            }
            // k = n + 1 on mu_0 is the exact constraint projection of the datum.
            for k in 1..=n + 1 {
                let src = if k == n + 1 { 0 } else { n - k };
                let tk = st.time(k);
                let inv = T::one() / (two * tk * tk);
                let m = &st.history[src];
                for &iy in &st.finite[src] {
                    let d = x - grid.node(iy);
                    offer(m.values[iy].shift(d * d * inv + tk), iy);
                }
            }
            let at_edge = best.is_finite() && foot != i && (foot == 0 || foot + 1 == grid.n);
            (best, at_edge)
        })
        .collect();

    let hits = results.iter().filter(|r| r.1).count();
    if hits > 0 {
        log::warn!("scheme step {}: {hits} minimizers touch the spatial boundary", n + 1);
    }
    state.boundary_hits += hits;
    let field = MuField { grid, values: results.into_iter().map(|r| r.0).collect() };
    state.finite.push(field.finite_indices());
    state.history.push(field);
    state.latest()
}

/// Runs `steps` scheme steps.
pub fn run_scheme<T: Real>(state: &mut SchemeState<T>, steps: usize) {
    for _ in 0..steps {
        scheme_step(state);
    }
}

/// Closed-form `mu_n` for a Dirac datum at `(0, w)`.
pub fn mu_n_closed<T: Real>(n: usize, dt: T, x: T, w: T) -> Ev<T> {
    let time = |k: usize| dt * lit::<T>(k as f64);
    let two: T = lit(2.0);
    let term = |i: usize, k: usize| -> Ev<T> {
        let d = x - time(i) * w;
        let head = if k == 0 {
            Ev::indicator(is_zero_within(d, x))
        } else {
            let tk = time(k);
            Ev::Finite(d * d / (two * tk * tk))
        };
        head.shift(time(i + k))
    };
    if w == T::zero() {
        return min_all((0..=n).map(|k| term(0, k)));
    }
    let mut best = term(n, 0).min(term(0, n));
    for i in 0..n {
        for k in 0..(n - i) {
            best = best.min(term(i, k));
        }
    }
    best
}

/// How the Hopf-Lax infimum over `(y, w)` is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Refinement {
    /// Grid nodes only.
    Grid,
    /// Grid nodes, then a golden-section pass in `y` and in `w` around the grid argmin.
    GoldenSection { iterations: usize },
}

impl Default for Refinement {
    fn default() -> Self {
        Refinement::GoldenSection { iterations: 20 }
    }
}

fn golden_section<T: Real>(lo: T, hi: T, iterations: usize, f: impl Fn(T) -> Ev<T>) -> (T, Ev<T>) {
    let g: T = lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn grid_argmin<T: Real>(u0: &PhaseField<T>, f: impl Fn(T, T) -> Ev<T> + Sync) -> (Ev<T>, usize, usize) {
    (0..u0.x.n)
        .into_par_iter()
        .map(|i| {
            let y = u0.x.node(i);
            let mut best = (Ev::PlusInfinity, i, 0);
            for j in 0..u0.v.n {
                let uij = u0.get(i, j);
                if !uij.is_finite() {
                    continue;
                }
                let val = f(y, u0.v.node(j)) + uij;
                if val < best.0 {
                    best = (val, i, j);
                }
            }
            best
        })
        .reduce(
            || (Ev::PlusInfinity, 0, 0),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a },
        )
}

fn refine<T: Real>(
    u0: &PhaseField<T>,
    best: (Ev<T>, usize, usize),
    iterations: usize,
    f: impl Fn(T, T) -> Ev<T>,
) -> Ev<T> {
    let (val, i, j) = best;
    if !val.is_finite() {
        return val;
    }
    let obj = |y: T, w: T| f(y, w) + u0.at(y, w);
    let (ylo, yhi) = (u0.x.node(i.saturating_sub(1)), u0.x.node((i + 1).min(u0.x.n - 1)));
    let (y, fy) = golden_section(ylo, yhi, iterations, |y| obj(y, u0.v.node(j)));
    let y = if fy < val { y } else { u0.x.node(i) };
    let (wlo, whi) = (u0.v.node(j.saturating_sub(1)), u0.v.node((j + 1).min(u0.v.n - 1)));
    let (_, fw) = golden_section(wlo, whi, iterations, |w| obj(y, w));
    val.min(fy).min(fw)
}

/// `u(t, x, v)` from the datum `u0` through the kernel `phi`.
pub fn hopflax_u<T: Real>(u0: &PhaseField<T>, t: T, x: T, v: T) -> Ev<T> {
    hopflax_u_with(u0, t, x, v, Refinement::default())
}

pub fn hopflax_u_with<T: Real>(u0: &PhaseField<T>, t: T, x: T, v: T, how: Refinement) -> Ev<T> {
    let no_jump = u0.at(x - t * v, v).shift(t);
    let kernel = |y: T, w: T| phi(t, x - y, v, w);
    let best = grid_argmin(u0, kernel);
    let jump = match how {
        Refinement::Grid => best.0,
        Refinement::GoldenSection { iterations } => refine(u0, best, iterations, kernel),
    };
    no_jump.min(jump)
}

/// `min_v u(t, x, v)` from the datum `u0` through `mu`.
pub fn hopflax_min<T: Real>(u0: &PhaseField<T>, t: T, x: T) -> Ev<T> {
    hopflax_min_with(u0, t, x, Refinement::default())
}

pub fn hopflax_min_with<T: Real>(u0: &PhaseField<T>, t: T, x: T, how: Refinement) -> Ev<T> {
    let kernel = |y: T, w: T| mu(t, x - y, w).0;
    let best = grid_argmin(u0, kernel);
    match how {
        Refinement::Grid => best.0,
        Refinement::GoldenSection { iterations } => refine(u0, best, iterations, kernel),
    }
}

/// `u(t_n, x, v)` rebuilt from the stored `mu_k`.
pub fn reconstruct_u<T: Real>(state: &SchemeState<T>, n: usize, x: T, v: T) -> Ev<T> {
    let half_v2 = v * v / lit::<T>(2.0);
    let tn = state.time(n);
    let head = state.u0.at(x - tn * v, v).shift(tn);
    let tail = min_all((0..=n).map(|k| {
        let tk = state.time(k);
        state.history[n - k].at(x - tk * v).shift(tk)
    }));
    head.min(tail.shift(half_v2))
}
