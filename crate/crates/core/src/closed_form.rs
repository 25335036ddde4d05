//! Closed-form minimum values `mu`, kernels `phi`, their reaction and
//! γ-tail variants, extremal trajectories, and brute-force oracles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedValue;
use crate::scalar::{is_zero_within, lit, Real};

/// A point `(t, x, v)` of phase space-time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint<T> {
    pub t: T,
    pub x: T,
    pub v: T,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(t: T, x: T, v: T) -> Result<Self> {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::invalid("t", format!("must be finite and >= 0, got {t}")));
        }
        if !x.is_finite() || !v.is_finite() {
            return Err(Error::invalid("x/v", "must be finite"));
        }
        Ok(PhasePoint { t, x, v })
    }
}

/// Reaction rate `r >= 0` and velocity-tail exponent `gamma >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams<T> {
    pub r: T,
    pub gamma: T,
}

impl<T: Real> RateParams<T> {
    pub fn new(r: T, gamma: T) -> Result<Self> {
        let p = RateParams { r, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Gaussian tails (`gamma = 2`).
    pub fn gaussian(r: T) -> Result<Self> {
        Self::new(r, lit(2.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r >= T::zero()) || !self.r.is_finite() {
            return Err(Error::invalid("r", format!("must be finite and >= 0, got {}", self.r)));
        }
        if !(self.gamma >= T::one()) || !self.gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be finite and >= 1, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Durations of the three flight legs in the kernel minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelSplit<T> {
    pub s1: T,
    pub s2: T,
    pub s3: T,
}

impl<T: Real> TravelSplit<T> {
    pub fn total(&self) -> T {
        self.s1 + self.s2 + self.s3
    }

    pub fn is_admissible(&self, t: T) -> bool {
        self.s1 >= T::zero() && self.s2 >= T::zero() && self.s3 >= T::zero() && self.total() <= t
    }
}

/// Which candidate realizes `mu`. The declaration order is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BranchTag {
    Ballistic,
    PowerLaw,
    EdgeParabola,
}

impl BranchTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchTag::Ballistic => "ballistic",
            BranchTag::PowerLaw => "power_law",
            BranchTag::EdgeParabola => "edge_parabola",
        }
    }
}

impl std::fmt::Display for BranchTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `|x|^{2/3}`.
#[inline]
fn two_thirds<T: Real>(ax: T) -> T {
    let c = ax.cbrt();
    c * c
}

#[inline]
fn ballistic_time<T: Real>(t: T, x: T, w: T) -> Option<T> {
    if w == T::zero() {
        return None;
    }
    let q = x / w;
    let tol = T::indicator_tol() * t.max(T::one());
    if q >= -tol && q <= t + tol {
        Some(q.max(T::zero()))
    } else {
        None
    }
}

struct Best<T> {
    value: ExtendedValue<T>,
    tag: BranchTag,
}

impl<T: Real> Best<T> {
    fn new() -> Self {
        Best { value: ExtendedValue::PlusInfinity, tag: BranchTag::EdgeParabola }
    }

    /// Strict improvement only, so earlier candidates win ties.
    fn offer(&mut self, value: T, tag: BranchTag) {
        let v = ExtendedValue::Finite(value);
        if v < self.value {
            self.value = v;
            self.tag = tag;
        }
    }

    fn finish(self) -> (ExtendedValue<T>, BranchTag) {
        (self.value, self.tag)
    }
}

fn at_time_zero<T: Real>(x: T, w: T) -> (ExtendedValue<T>, BranchTag) {
    if x == T::zero() {
        let tag = if w == T::zero() { BranchTag::PowerLaw } else { BranchTag::Ballistic };
        (ExtendedValue::zero(), tag)
    } else {
        (ExtendedValue::PlusInfinity, BranchTag::EdgeParabola)
    }
}

/// Minimum value started from velocity `0`.
pub fn mu_zero<T: Real>(t: T, x: T) -> (ExtendedValue<T>, BranchTag) {
    if t <= T::zero() {
        return at_time_zero(x, T::zero());
    }
    let ax = x.abs();
    let t32 = t * t.sqrt();
    if ax <= t32 {
        (ExtendedValue::Finite(lit::<T>(1.5) * two_thirds(ax)), BranchTag::PowerLaw)
    } else {
        (ExtendedValue::Finite(x * x / (lit::<T>(2.0) * t * t) + t), BranchTag::EdgeParabola)
    }
}

/// Minimum value `mu(t, x; w)` with the branch that realizes it.
pub fn mu<T: Real>(t: T, x: T, w: T) -> (ExtendedValue<T>, BranchTag) {
    if w == T::zero() {
        return mu_zero(t, x);
    }
    if t <= T::zero() {
        return at_time_zero(x, w);
    }
    let ax = x.abs();
    let t32 = t * t.sqrt();
    let mut best = Best::new();
    if let Some(q) = ballistic_time(t, x, w) {
        best.offer(q, BranchTag::Ballistic);
    }
    if ax <= t32 {
        best.offer(lit::<T>(1.5) * two_thirds(ax), BranchTag::PowerLaw);
    }
    if ax >= t32 {
        best.offer(x * x / (lit::<T>(2.0) * t * t) + t, BranchTag::EdgeParabola);
    }
    best.finish()
}

/// Grid minimization of `cost(x - s1 w, s2) + s1 + s2` over `s1 + s2 <= t`.
///
/// The `s2 = 0` face is an indicator of `x = s1 w`; it is evaluated on the
/// grid and at the exact root `s1 = x / w`.
fn envelope_brute<T: Real>(t: T, x: T, w: T, n: usize, cost: impl Fn(T, T) -> T) -> ExtendedValue<T> {
    let n = n.max(2);
    let h = t / lit::<T>((n - 1) as f64);
    let mut best = ExtendedValue::PlusInfinity;
    let mut offer = |v: T| {
        let v = ExtendedValue::Finite(v);
        if v < best {
            best = v;
        }
    };
    if t <= T::zero() {
        if x == T::zero() {
            offer(T::zero());
        }
        return best;
    }
    for i in 0..n {
        let s1 = lit::<T>(i as f64) * h;
        let d = x - s1 * w;
        if is_zero_within(d, x) {
            offer(s1);
        }
        for j in 1..(n - i) {
            let s2 = lit::<T>(j as f64) * h;
            offer(cost(d, s2) + s1 + s2);
        }
    }
    if let Some(q) = ballistic_time(t, x, w) {
        offer(q);
    }
    best
}

/// Brute-force oracle for [`mu`] on an `n x n` grid of `(s1, s2)`.
pub fn mu_brute<T: Real>(t: T, x: T, w: T, n: usize) -> ExtendedValue<T> {
    let two: T = lit(2.0);
    envelope_brute(t, x, w, n, |d, s2| d * d / (two * s2 * s2))
}

/// Kernel `phi(t, x, v; w)`: cost of reaching `(x, v)` at time `t` from `(0, w)`.
pub fn phi<T: Real>(t: T, x: T, v: T, w: T) -> ExtendedValue<T> {
    let half_v2 = v * v / lit::<T>(2.0);
    if t <= T::zero() {
        let head = ExtendedValue::indicator(v == w).min(ExtendedValue::Finite(half_v2));
        return ExtendedValue::indicator(x == T::zero()) + head;
    }
    if w != T::zero() && v == w && x / t == v {
        return ExtendedValue::Finite(x / w);
    }
    mu(t, x, v).0.min(mu(t, x, w).0).shift(half_v2)
}

/// Brute-force oracle for [`phi`] over an `n^3` grid of [`TravelSplit`].
///
/// The `s2 = 0` face is solved exactly along `s1 w + s3 v = x`.
pub fn phi_brute<T: Real>(t: T, x: T, v: T, w: T, n: usize) -> ExtendedValue<T> {
    let two: T = lit(2.0);
    let half_v2 = v * v / two;
    let no_jump = ExtendedValue::indicator(is_zero_within(x - t * v, x))
        + ExtendedValue::indicator(is_zero_within(v - w, w)).min(ExtendedValue::Finite(half_v2))
        + t;
    if t <= T::zero() {
        return no_jump.min(ExtendedValue::indicator(x == T::zero()) + ExtendedValue::Finite(half_v2));
    }
    let n = n.max(2);
    let h = t / lit::<T>((n - 1) as f64);
    let tol = T::indicator_tol() * t.max(T::one());
    let mut inner = T::infinity();
    for i in 0..n {
        let s1 = lit::<T>(i as f64) * h;
        let base = x - s1 * w;
        for j in 1..(n - i) {
            let s2 = lit::<T>(j as f64) * h;
            let inv = T::one() / (two * s2 * s2);
            let fixed = s1 + s2;
            for k in 0..(n - i - j) {
                let s3 = lit::<T>(k as f64) * h;
                let d = base - s3 * v;
                let val = d * d * inv + fixed + s3;
                if val < inner {
                    inner = val;
                }
            }
        }
    }
    let face = |s1: T, s3: T| -> Option<T> {
        if s1 >= -tol && s3 >= -tol && s1 + s3 <= t + tol {
            Some(s1.max(T::zero()) + s3.max(T::zero()))
        } else {
            None
        }
    };
    for i in 0..n {
        let g = lit::<T>(i as f64) * h;
        let cands = [
            if v != T::zero() {
                face(g, (x - g * w) / v)
            } else if is_zero_within(x - g * w, x) {
                face(g, T::zero())
            } else {
                None
            },
            if w != T::zero() {
                face((x - g * v) / w, g)
            } else if is_zero_within(x - g * v, x) {
                face(T::zero(), g)
            } else {
                None
            },
        ];
        for c in cands.into_iter().flatten() {
            if c < inner {
                inner = c;
            }
        }
    }
    let jump = ExtendedValue::from_float(inner).unwrap_or(ExtendedValue::PlusInfinity).shift(half_v2);
    no_jump.min(jump)
}

/// Spatially homogeneous kernel `min(t + 0_{v=w}, v^2/2)`.
pub fn psi_homog<T: Real>(t: T, v: T, w: T) -> ExtendedValue<T> {
    let stay = ExtendedValue::indicator(is_zero_within(v - w, w)).shift(t);
    stay.min(ExtendedValue::Finite(v * v / lit::<T>(2.0)))
}

/// Minimum value with reaction rate `r`: `mu((1+r)t, (1+r)x; w) - r t`.
pub fn mu_reaction<T: Real>(t: T, x: T, w: T, r: T) -> ExtendedValue<T> {
    mu_reaction_tagged(t, x, w, r).0
}

pub fn mu_reaction_tagged<T: Real>(t: T, x: T, w: T, r: T) -> (ExtendedValue<T>, BranchTag) {
    let s = T::one() + r;
    let (v, tag) = mu(s * t, s * x, w);
    (v.shift(-r * t), tag)
}

/// Minimum value for velocity tails `exp(-|v|^gamma / gamma)` with reaction rate `r`.
pub fn mu_gamma<T: Real>(t: T, x: T, w: T, params: &RateParams<T>) -> Result<(ExtendedValue<T>, BranchTag)> {
    params.validate()?;
    if t <= T::zero() {
        return Ok(at_time_zero(x, w));
    }
    let g = params.gamma;
    let r = params.r;
    let big = T::one() + r;
    let ax = x.abs();
    let mut best = Best::new();
    if let Some(q) = ballistic_time(t, x, w) {
        best.offer(big * q - r * t, BranchTag::Ballistic);
    }
    let p = (big * ax).powf(g / (g + T::one()));
    let s = p / big;
    if s <= t {
        best.offer((T::one() + T::one() / g) * p - r * t, BranchTag::PowerLaw);
    }
    if s >= t {
        best.offer(ax.powf(g) / (g * t.powf(g)) + t, BranchTag::EdgeParabola);
    }
    Ok(best.finish())
}

/// Brute-force oracle for [`mu_gamma`] on an `n x n` grid in rescaled time.
pub fn mu_gamma_brute<T: Real>(t: T, x: T, w: T, params: &RateParams<T>, n: usize) -> Result<ExtendedValue<T>> {
    params.validate()?;
    let g = params.gamma;
    let big = T::one() + params.r;
    let v = envelope_brute(big * t, big * x, w, n, |d, s2| d.abs().powf(g) / (g * s2.powf(g)));
    Ok(v.shift(-params.r * t))
}

/// One constant-velocity leg of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub duration: T,
    pub velocity: T,
}

/// Piecewise-linear extremal path from `(0, 0)` with initial velocity `start.v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub start: PhasePoint<T>,
    pub segments: Vec<Segment<T>>,
    pub cost: ExtendedValue<T>,
    /// Reaction rate the path is priced with.
    pub rate: T,
}

impl<T: Real> Trajectory<T> {
    pub fn duration(&self) -> T {
        self.segments.iter().fold(T::zero(), |a, s| a + s.duration)
    }

    pub fn endpoint(&self) -> T {
        self.segments.iter().fold(self.start.x, |a, s| a + s.duration * s.velocity)
    }

    pub fn final_velocity(&self) -> T {
        self.segments.last().map_or(self.start.v, |s| s.velocity)
    }

    /// Cumulative times at which the velocity changes.
    pub fn switch_times(&self) -> Vec<T> {
        let mut acc = T::zero();
        let mut out = Vec::new();
        for s in &self.segments[..self.segments.len().saturating_sub(1)] {
            acc = acc + s.duration;
            out.push(acc);
        }
        out
    }

    pub fn position_at(&self, tau: T) -> T {
        let mut x = self.start.x;
        let mut left = tau;
        for s in &self.segments {
            if left <= T::zero() {
                break;
            }
            let d = s.duration.min(left);
            x = x + d * s.velocity;
            left = left - d;
        }
        x
    }

    /// Jump costs `u^2/2` plus `(1+r)` per unit of non-resting time, minus `r` per unit of time.
    pub fn path_cost(&self) -> T {
        let big = T::one() + self.rate;
        let mut prev = self.start.v;
        let mut cost = T::zero();
        for s in &self.segments {
            if s.velocity != prev {
                cost = cost + s.velocity * s.velocity / lit::<T>(2.0);
            }
            if s.velocity != T::zero() {
                cost = cost + big * s.duration;
            }
            prev = s.velocity;
        }
        cost - self.rate * self.duration()
    }
}

/// Extremal trajectory realizing `phi(t, x, v; w)`.
pub fn trajectory<T: Real>(t: T, x: T, v: T, w: T) -> Result<Trajectory<T>> {
    if !(t > T::zero()) {
        return Err(Error::NoTrajectory);
    }
    let cost = phi(t, x, v, w);
    if !cost.is_finite() {
        return Err(Error::NoTrajectory);
    }
    let seg = |duration: T, velocity: T| Segment { duration, velocity };
    let mut segs = Vec::with_capacity(3);
    if w != T::zero() && v == w && x / t == v {
        segs.push(seg(t, w));
    } else {
        let (mv, tag_v) = mu(t, x, v);
        let (mw, tag_w) = mu(t, x, w);
        let (via, tag, from_start) = if mw <= mv { (w, tag_w, true) } else { (v, tag_v, false) };
        match tag {
            BranchTag::Ballistic if from_start => {
                let q = (x / via).max(T::zero()).min(t);
                segs.push(seg(q, via));
                segs.push(seg(t - q, T::zero()));
            }
            BranchTag::Ballistic => {
                let q = (x / via).max(T::zero()).min(t);
                segs.push(seg(t - q, T::zero()));
                segs.push(seg(q, via));
            }
            BranchTag::PowerLaw | BranchTag::EdgeParabola => {
                let s = t.min(two_thirds(x.abs()));
                if s > T::zero() {
                    segs.push(seg(s, x / s));
                }
                segs.push(seg(t - s, T::zero()));
            }
        }
        segs.retain(|s| s.duration > T::zero());
        if segs.last().is_none_or(|s| s.velocity != v) {
            segs.push(seg(T::zero(), v));
        }
    }
    Ok(Trajectory {
        start: PhasePoint { t: T::zero(), x: T::zero(), v: w },
        segments: segs,
        cost,
        rate: T::zero(),
    })
}

/// Extremal trajectory for the reaction-rescaled kernel `phi((1+r)t, (1+r)x, v; w) - r t`.
pub fn trajectory_reaction<T: Real>(t: T, x: T, v: T, w: T, r: T) -> Result<Trajectory<T>> {
    let big = T::one() + r;
    let mut tr = trajectory(big * t, big * x, v, w)?;
    for s in &mut tr.segments {
        s.duration = s.duration / big;
    }
    tr.cost = tr.cost.shift(-r * t);
    tr.rate = r;
    Ok(tr)
}

/// Heat-equation minimum value `x^2 / (4t)`, for contrast with [`mu_zero`].
pub fn heat_rate<T: Real>(t: T, x: T) -> ExtendedValue<T> {
    if t <= T::zero() {
        ExtendedValue::indicator(x == T::zero())
    } else {
        ExtendedValue::Finite(x * x / (lit::<T>(4.0) * t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(v: ExtendedValue<f64>) -> f64 {
        v.value().expect("finite")
    }

    #[test]
    fn mu_zero_examples() {
        assert_eq!(mu_zero(1.0, 0.0).0, ExtendedValue::Finite(0.0));
        assert_eq!(mu_zero(1.0, 1.0), (ExtendedValue::Finite(1.5), BranchTag::PowerLaw));
        assert_eq!(mu_zero(1.0, 2.0), (ExtendedValue::Finite(3.0), BranchTag::EdgeParabola));
        assert_eq!(mu_zero(0.0, 0.0).0, ExtendedValue::Finite(0.0));
        assert_eq!(mu_zero(0.0, 1e-9).0, ExtendedValue::PlusInfinity);
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu(2.0, 1.0, 1.0), (ExtendedValue::Finite(1.0), BranchTag::Ballistic));
        assert!((fin(mu(1.0, -1.0, 2.0).0) - 1.5).abs() < 1e-15);
        for w in [-3.0, 0.5, 2.0] {
            assert_eq!(mu(1.7, 0.0, w).0, ExtendedValue::Finite(0.0));
        }
        assert_eq!(mu(0.0, 0.3, 1.0).0, ExtendedValue::PlusInfinity);
    }

    #[test]
    fn mu_brute_examples() {
        assert!((fin(mu_brute(2.0, 1.0, 1.0, 400)) - 1.0).abs() < 1e-3);
        assert_eq!(mu_brute(1.0, 0.0, 0.0, 10), ExtendedValue::Finite(0.0));
        assert!((fin(mu_brute(1.0, 2.0, 0.0, 400)) - 3.0).abs() < 1e-3);
        assert!((fin(mu_brute(1.0, -1.0, 2.0, 600)) - 1.5).abs() < 5e-3);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(1.0, 1.0, 1.0, 1.0), ExtendedValue::Finite(1.0));
        assert_eq!(phi(2.5, 0.0, 0.0, 0.0), ExtendedValue::Finite(0.0));
        assert!((fin(phi(1.0, 0.5, 1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(phi(0.0, 0.0, 1.0, 1.0), ExtendedValue::Finite(0.0));
    }

    #[test]
    fn phi_brute_examples() {
        assert_eq!(phi_brute(1.0, 1.0, 1.0, 1.0, 200), ExtendedValue::Finite(1.0));
        assert_eq!(phi_brute(1.0, 0.0, 0.0, 0.0, 10), ExtendedValue::Finite(0.0));
        assert!((fin(phi_brute(1.0, 0.5, 1.0, 0.0, 200)) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_homog(1.0, 0.0, 5.0), ExtendedValue::Finite(0.0));
        assert_eq!(psi_homog(1.0, 0.5, 0.5), ExtendedValue::Finite(0.125));
        assert_eq!(psi_homog(2.0, 3.0, 1.0), ExtendedValue::Finite(4.5));
    }

    #[test]
    fn reaction_examples() {
        let v = fin(mu_reaction(1.0, 0.1, 0.0, 1.0));
        assert!((v - (1.5 * 0.2f64.powf(2.0 / 3.0) - 1.0)).abs() < 1e-12);
        assert!((v + 0.487_007).abs() < 1e-6);
        // x/w = 0.5, ballistic (1+r)x/w - rt = 0 beats the power law.
        assert!(fin(mu_reaction(1.0, 1.0, 2.0, 1.0)).abs() < 1e-15);
        assert_eq!(mu_reaction(1.3, 0.4, 0.7, 0.0), mu(1.3, 0.4, 0.7).0);
    }

    #[test]
    fn gamma_examples() {
        let p1 = RateParams::new(0.0, 1.0).unwrap();
        let (v, tag) = mu_gamma(1.0, 0.5, 0.0, &p1).unwrap();
        assert!((fin(v) - 2.0 * 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(tag, BranchTag::PowerLaw);
        let p2 = RateParams::new(0.0, 2.0).unwrap();
        assert!(fin(mu_gamma(1.3, 0.4, 0.7, &p2).unwrap().0) - fin(mu(1.3, 0.4, 0.7).0) < 1e-14);
        assert!(mu_gamma(1.0, 0.5, 0.0, &RateParams { r: 0.0, gamma: 0.5 }).is_err());
        assert!(RateParams::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let tr = trajectory(1.0, 0.5, 0.0, 0.0).unwrap();
        let s = 0.5f64.powf(2.0 / 3.0);
        assert_eq!(tr.segments.len(), 2);
        assert!((tr.segments[0].duration - s).abs() < 1e-12);
        assert!((tr.segments[0].velocity - 0.5 / s).abs() < 1e-12);
        assert!((tr.path_cost() - 1.5 * s).abs() < 1e-12);

        let rest = trajectory(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(rest.segments, vec![Segment { duration: 1.0, velocity: 0.0 }]);
        assert_eq!(rest.path_cost(), 0.0);

        let b = trajectory(2.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(
            b.segments,
            vec![Segment { duration: 1.0, velocity: 1.0 }, Segment { duration: 1.0, velocity: 0.0 }]
        );
        assert_eq!(b.path_cost(), 1.0);
        assert!(trajectory(0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn f32_instantiation() {
        let (v, tag) = mu::<f32>(2.0, 1.0, 1.0);
        assert_eq!(v, ExtendedValue::Finite(1.0f32));
        assert_eq!(tag, BranchTag::Ballistic);
        assert!((phi::<f32>(1.0, 0.5, 1.0, 0.0).value().unwrap() - 1.0).abs() < 1e-6);
    }
}
