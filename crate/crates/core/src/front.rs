//! Reaction fronts: zero level set of `mu_r`, spreading-rate fits, the
//! bound sandwich and the Freidlin profile check along extremal paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{mu_gamma, trajectory_reaction, BranchTag, RateParams, Trajectory};
use crate::error::{Error, Result};
use crate::extended::ExtendedValue;
use crate::scalar::{lit, to_f64, Real};

/// `((gamma / (1 + gamma)) r)^{1 + 1/gamma} / (1 + r)`.
pub fn rate_conjecture<T: Real>(params: &RateParams<T>) -> T {
    let g = params.gamma;
    (g / (T::one() + g) * params.r).powf(T::one() + T::one() / g) / (T::one() + params.r)
}

/// Known bounds on the Gaussian spreading prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBounds<T> {
    pub lower: T,
    pub upper: T,
    pub conjecture: T,
    pub inside: bool,
}

/// `((r / (r + 2))^{3/2}, sqrt(2 r))` with the `gamma = 2` conjecture placed in it.
pub fn bounds_check<T: Real>(r: T) -> Result<RateBounds<T>> {
    if !(r > T::zero()) {
        return Err(Error::invalid("r", format!("must be > 0, got {r}")));
    }
    let two: T = lit(2.0);
    let lower = (r / (r + two)).powf(lit(1.5));
    let upper = (two * r).sqrt();
    let conjecture = rate_conjecture(&RateParams { r, gamma: two });
    Ok(RateBounds { lower, upper, conjecture, inside: lower <= conjecture && conjecture <= upper })
}

/// Front position with the branch realizing `mu_r` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint<T> {
    pub t: T,
    pub x: T,
    pub branch: BranchTag,
}

/// Extra room above the upper bound for the initial bracket.
const BRACKET_MARGIN: f64 = 0.25;
const MAX_DOUBLINGS: usize = 200;

/// `sup { x >= 0 : mu_gamma(t, x, w) <= 0 }` by bracketing and bisection.
pub fn front_location<T: Real>(t: T, params: &RateParams<T>, w: T) -> Result<T> {
    front_point(t, params, w).map(|p| p.x)
}

pub fn front_point<T: Real>(t: T, params: &RateParams<T>, w: T) -> Result<FrontPoint<T>> {
    params.validate()?;
    if !(params.r > T::zero()) {
        return Err(Error::invalid("r", "front tracking needs r > 0"));
    }
    let below = |x: T| -> Result<(bool, BranchTag)> {
        let (v, tag) = mu_gamma(t, x, w, params)?;
        Ok((v <= ExtendedValue::zero(), tag))
    };
    let (ok0, tag0) = below(T::zero())?;
    if !(t > T::zero()) || !ok0 {
        return Err(Error::NoFront { t: to_f64(t) });
    }
    let mut lo = T::zero();
    let mut lo_tag = tag0;
    let mut hi = (lit::<T>(2.0) * params.r).sqrt() * t.powf(lit(1.5)) * lit(1.0 + BRACKET_MARGIN);
    hi = hi.max(T::min_positive_value());
    let mut expanded = 0;
    loop {
        let (inside, tag) = below(hi)?;
        if !inside {
            break;
        }
        lo = hi;
        lo_tag = tag;
        hi = hi + hi;
        expanded += 1;
        if expanded > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::invalid("bracket", "front not bracketed"));
        }
    }
    let tol: T = lit::<T>(1e-10).max(T::epsilon() * lit(4.0));
    while hi - lo > tol * hi {
        let mid = lo + (hi - lo) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let (inside, tag) = below(mid)?;
        if inside {
            lo = mid;
            lo_tag = tag;
        } else {
            hi = mid;
        }
    }
    Ok(FrontPoint { t, x: lo, branch: lo_tag })
}

/// Log-log least squares fit `X = a t^b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit<T> {
    pub exponent: T,
    pub prefactor: T,
    pub residuals: Vec<T>,
}

pub fn fit_exponent<T: Real>(times: &[T], xs: &[T]) -> Result<PowerFit<T>> {
    if times.len() != xs.len() {
        return Err(Error::DegenerateFit(format!("{} times vs {} positions", times.len(), xs.len())));
    }
    if times.len() < 5 {
        return Err(Error::DegenerateFit(format!("need >= 5 points, got {}", times.len())));
    }
    if let Some(bad) = times.iter().zip(xs).find(|(t, x)| !(**t > T::zero()) || !(**x > T::zero())) {
        return Err(Error::DegenerateFit(format!("non-positive point (t={}, X={})", bad.0, bad.1)));
    }
    let lt: Vec<T> = times.iter().map(|t| t.ln()).collect();
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let n: T = lit(times.len() as f64);
    let mt = lt.iter().fold(T::zero(), |a, &b| a + b) / n;
    let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (a, b) in lt.iter().zip(&lx) {
        sxy = sxy + (*a - mt) * (*b - mx);
        sxx = sxx + (*a - mt) * (*a - mt);
    }
    if sxx <= T::zero() {
        return Err(Error::DegenerateFit("all times equal".into()));
    }
    let exponent = sxy / sxx;
    let intercept = mx - exponent * mt;
    let residuals = lt.iter().zip(&lx).map(|(a, b)| *b - (intercept + exponent * *a)).collect();
    Ok(PowerFit { exponent, prefactor: intercept.exp(), residuals })
}

/// Front-tracking request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontQuery<T> {
    pub params: RateParams<T>,
    pub w: T,
    pub times: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace<T> {
    pub points: Vec<FrontPoint<T>>,
    pub fit: PowerFit<T>,
    /// First time at which the front is no longer realized by the ballistic branch.
    pub onset: Option<T>,
    pub conjecture: T,
}

pub fn front_trace<T: Real>(query: &FrontQuery<T>) -> Result<FrontTrace<T>> {
    if query.times.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::invalid("times", "must be strictly increasing"));
    }
    let points: Vec<FrontPoint<T>> = query
        .times
        .par_iter()
        .map(|&t| front_point(t, &query.params, query.w))
        .collect::<Result<_>>()?;
    let onset = points.iter().find(|p| p.branch != BranchTag::Ballistic).map(|p| p.t);
    let times: Vec<T> = points.iter().map(|p| p.t).collect();
    let xs: Vec<T> = points.iter().map(|p| p.x).collect();
    let fit = fit_exponent(&times, &xs)?;
    Ok(FrontTrace { points, fit, onset, conjecture: rate_conjecture(&query.params) })
}

/// `max(mu_r, 0)` nodewise.
pub fn truncate_min<T: Real>(values: &[ExtendedValue<T>]) -> Vec<ExtendedValue<T>> {
    values.iter().map(|v| v.max(ExtendedValue::zero())).collect()
}

/// `mu_gamma` on a `(t, x)` grid, rows indexed by time.
pub fn mu_r_grid<T: Real>(times: &[T], xs: &[T], params: &RateParams<T>, w: T) -> Result<Vec<Vec<ExtendedValue<T>>>> {
    times
        .iter()
        .map(|&t| xs.iter().map(|&x| mu_gamma(t, x, w, params).map(|r| r.0)).collect())
        .collect()
}

/// Largest `x` whose raw value was clamped by [`truncate_min`], if any.
pub fn clamped_extent<T: Real>(xs: &[T], raw: &[ExtendedValue<T>]) -> Option<T> {
    xs.iter().zip(raw).filter(|(_, v)| **v <= ExtendedValue::zero()).map(|(x, _)| *x).fold(None, |a, x| {
        Some(a.map_or(x, |a: T| a.max(x)))
    })
}

/// Sampled `tau -> mu_r(tau, x(tau); w)` along an extremal trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreidlinProfile<T> {
    pub trajectory: Trajectory<T>,
    pub taus: Vec<T>,
    pub values: Vec<ExtendedValue<T>>,
    /// Increase then decrease, up to the tolerance.
    pub unimodal: bool,
    /// Largest second difference on the first (moving) leg.
    pub linear_leg_curvature: T,
    pub linear_leg_concave: bool,
    pub interior_min: ExtendedValue<T>,
}

pub const FREIDLIN_TOL: f64 = 1e-9;
pub const FREIDLIN_SAMPLES: usize = 400;

/// Checks the zone `x > 0`, `v >= 0`, `t <= x / v`.
pub fn in_zone<T: Real>(t: T, x: T, v: T) -> bool {
    t > T::zero() && x > T::zero() && v >= T::zero() && (v == T::zero() || t * v <= x)
}

/// Profile along the trajectory ending at `(t, x, v)` from `(0, 0, w)`, probed with the same `w`.
pub fn freidlin_profile<T: Real>(t: T, x: T, v: T, w: T, params: &RateParams<T>) -> Result<FreidlinProfile<T>> {
    freidlin_profile_probe(t, x, v, w, w, params, FREIDLIN_SAMPLES)
}

/// As [`freidlin_profile`] with the value probed at initial velocity `probe` and `n` samples.
pub fn freidlin_profile_probe<T: Real>(
    t: T,
    x: T,
    v: T,
    w: T,
    probe: T,
    params: &RateParams<T>,
    n: usize,
) -> Result<FreidlinProfile<T>> {
    params.validate()?;
    if params.gamma != lit(2.0) {
        return Err(Error::invalid("gamma", "trajectories are available for gamma = 2 only"));
    }
    if !in_zone(t, x, v) {
        return Err(Error::NotInZone { t: to_f64(t), x: to_f64(x), v: to_f64(v) });
    }
    let n = n.max(200);
    let traj = trajectory_reaction(t, x, v, w, params.r)?;
    let eval = |tau: T| mu_gamma(tau, traj.position_at(tau), probe, params).map(|r| r.0);
    let tol: T = lit(FREIDLIN_TOL);
    let scale = |a: ExtendedValue<T>, b: ExtendedValue<T>| tol * T::one().max(a.to_float().abs()).max(b.to_float().abs());

    let mut taus: Vec<T> = (0..n).map(|k| t * lit::<T>(k as f64) / lit::<T>((n - 1) as f64)).collect();
    taus.extend(traj.switch_times().into_iter().filter(|s| *s > T::zero() && *s < t));
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    taus.dedup();
    let values: Vec<ExtendedValue<T>> = taus.iter().map(|&s| eval(s)).collect::<Result<_>>()?;

    let mut descending = false;
    let mut unimodal = true;
    for p in values.windows(2) {
        let (a, b) = (p[0], p[1]);
        let (Some(fa), Some(fb)) = (a.value(), b.value()) else {
            unimodal = false;
            break;
        };
        let d = fb - fa;
        let eps = scale(a, b);
        if !descending && d < -eps {
            descending = true;
        } else if descending && d > eps {
            unimodal = false;
            break;
        }
    }

    let leg = traj.segments.first().filter(|s| s.velocity != T::zero()).map_or(T::zero(), |s| s.duration);
    let mut curvature = T::neg_infinity();
    let mut concave = true;
    if leg > T::zero() {
        let m = n / 2;
        let pts: Vec<ExtendedValue<T>> =
            (0..m).map(|k| eval(leg * lit::<T>(k as f64) / lit::<T>((m - 1) as f64))).collect::<Result<_>>()?;
        for q in pts.windows(3) {
            let (Some(a), Some(b), Some(c)) = (q[0].value(), q[1].value(), q[2].value()) else {
                concave = false;
                continue;
            };
            let d2 = a - b - b + c;
            curvature = curvature.max(d2);
            if d2 > tol * T::one().max(a.abs()).max(b.abs()).max(c.abs()) {
                concave = false;
            }
        }
    }
    let interior_min = values[1..values.len() - 1].iter().copied().fold(ExtendedValue::PlusInfinity, ExtendedValue::min);
    Ok(FreidlinProfile {
        trajectory: traj,
        taus,
        values,
        unimodal,
        linear_leg_curvature: curvature,
        linear_leg_concave: concave,
        interior_min,
    })
}
