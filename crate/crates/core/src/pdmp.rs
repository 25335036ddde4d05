//! Monte-Carlo sampler of the velocity-jump process: ballistic flights,
//! jumps at rate `1/eps`, velocities redrawn from `Normal(0, eps)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalCdf};

use crate::closed_form::mu_zero;
use crate::error::{Error, Result};

/// Starting velocity of every particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialVelocity {
    Fixed(f64),
    /// Drawn from `Normal(0, eps)`.
    Equilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub epsilon: f64,
    pub t_final: f64,
    pub n_particles: usize,
    pub initial: InitialVelocity,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("t_final", format!("must be > 0, got {}", self.t_final)));
        }
        if self.n_particles == 0 {
            return Err(Error::invalid("n_particles", "must be >= 1"));
        }
        if let InitialVelocity::Fixed(w) = self.initial {
            if !w.is_finite() {
                return Err(Error::invalid("w0", "must be finite"));
            }
        }
        Ok(())
    }
}

/// Final state of one particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub x: f64,
    pub v: f64,
    pub jumps: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleSet {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub jumps: Vec<u64>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Simulates particle `index`; the stream is keyed by `(seed, index)`.
pub fn simulate_path(cfg: &SimConfig, index: u64) -> PathSample {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let clock = Exp::new(1.0 / cfg.epsilon).expect("rate > 0");
    let redraw = Normal::new(0.0, cfg.epsilon.sqrt()).expect("sd > 0");
    let mut v = match cfg.initial {
        InitialVelocity::Fixed(w) => w,
        InitialVelocity::Equilibrium => redraw.sample(&mut rng),
    };
    let mut x = 0.0;
    let mut t = 0.0;
    let mut jumps = 0;
    loop {
        let tau: f64 = clock.sample(&mut rng);
        if t + tau >= cfg.t_final {
            x += v * (cfg.t_final - t);
            break;
        }
        x += v * tau;
        t += tau;
        v = redraw.sample(&mut rng);
        jumps += 1;
    }
    PathSample { x, v, jumps }
}

/// Simulates the ensemble in parallel; output order is the particle index.
pub fn simulate(cfg: &SimConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let paths: Vec<PathSample> = (0..cfg.n_particles as u64).into_par_iter().map(|i| simulate_path(cfg, i)).collect();
    let mut out = SampleSet {
        x: Vec::with_capacity(paths.len()),
        v: Vec::with_capacity(paths.len()),
        jumps: Vec::with_capacity(paths.len()),
    };
    for p in paths {
        out.x.push(p.x);
        out.v.push(p.v);
        out.jumps.push(p.jumps);
    }
    Ok(out)
}

/// Sample mean and variance with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
}

/// Sequential two-pass moments.
pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len();
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in xs {
        let d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    let variance = m2 / (nf - 1.0).max(1.0);
    let m4 = m4 / nf;
    Moments {
        n,
        mean,
        variance,
        se_mean: (variance / nf).sqrt(),
        se_variance: ((m4 - variance * variance).max(0.0) / nf).sqrt(),
    }
}

/// `Var(x_t) = 2 eps^2 t - 2 eps^3 (1 - e^{-t/eps})` for a stationary initial velocity.
pub fn variance_oracle(epsilon: f64, t: f64) -> f64 {
    2.0 * epsilon * epsilon * t + 2.0 * epsilon.powi(3) * (-t / epsilon).exp_m1()
}

/// Kolmogorov-Smirnov statistic of `xs` against `Normal(0, sd)`.
pub fn ks_normal(xs: &[f64], sd: f64) -> f64 {
    let dist = NormalCdf::new(0.0, sd).expect("sd > 0");
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = dist.cdf(x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value `1.6276 / sqrt(n)`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_61 / (n as f64).sqrt()
}

/// One histogram bin of the empirical rate `-eps ln density`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBin {
    pub x_center: f64,
    pub count: usize,
    pub density: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub bins: Vec<RateBin>,
    /// Non-empty bins dropped for holding fewer than [`MIN_BIN_COUNT`] samples.
    pub suppressed: usize,
}

pub const MIN_BIN_COUNT: usize = 10;

/// Histogram of `xs` on bins `[k w, (k+1) w)`, keeping bins with at least [`MIN_BIN_COUNT`] samples.
pub fn empirical_rate(xs: &[f64], epsilon: f64, bin_width: f64) -> Result<RateTable> {
    if !(bin_width > 0.0) {
        return Err(Error::invalid("bin_width", format!("must be > 0, got {bin_width}")));
    }
    if xs.is_empty() {
        return Err(Error::invalid("samples", "empty sample set"));
    }
    let mut counts = std::collections::BTreeMap::<i64, usize>::new();
    for &x in xs {
        *counts.entry((x / bin_width).floor() as i64).or_default() += 1;
    }
    let n = xs.len() as f64;
    let mut bins = Vec::new();
    let mut suppressed = 0;
    for (k, c) in counts {
        if c < MIN_BIN_COUNT {
            suppressed += 1;
            continue;
        }
        let density = c as f64 / (n * bin_width);
        bins.push(RateBin { x_center: (k as f64 + 0.5) * bin_width, count: c, density, rate: -epsilon * density.ln() });
    }
    Ok(RateTable { bins, suppressed })
}

/// Relative deviation of each bin's rate from `mu(t, x; 0)`, for bins with density `>= min_density`.
pub fn rate_vs_mu(table: &RateTable, t: f64, min_density: f64) -> Vec<(f64, f64, f64)> {
    table
        .bins
        .iter()
        .filter(|b| b.density >= min_density)
        .filter_map(|b| {
            let m = mu_zero(t, b.x_center).0.value()?;
            (m > 0.0).then(|| (b.x_center, b.rate, (b.rate - m) / m))
        })
        .collect()
}

/// Mean jump count against the Poisson mean `t / eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpDiagnostic {
    pub expected: f64,
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

pub fn jump_count_check(samples: &SampleSet, cfg: &SimConfig) -> JumpDiagnostic {
    let counts: Vec<f64> = samples.jumps.iter().map(|&k| k as f64).collect();
    let m = moments(&counts);
    let expected = cfg.t_final / cfg.epsilon;
    let se = (expected / m.n as f64).sqrt();
    let z = (m.mean - expected) / se;
    JumpDiagnostic { expected, mean: m.mean, variance: m.variance, se, z, pass: z.abs() <= 3.0 }
}

/// Aggregated run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdmpSummary {
    pub config: SimConfig,
    pub x: Moments,
    pub v: Moments,
    pub variance_oracle: Option<f64>,
    pub ks_statistic: f64,
    pub ks_critical_1pct: f64,
    pub jumps: JumpDiagnostic,
    pub rates: RateTable,
}

pub fn summarize(samples: &SampleSet, cfg: &SimConfig, bin_width: f64) -> Result<PdmpSummary> {
    Ok(PdmpSummary {
        config: *cfg,
        x: moments(&samples.x),
        v: moments(&samples.v),
        variance_oracle: matches!(cfg.initial, InitialVelocity::Equilibrium).then(|| variance_oracle(cfg.epsilon, cfg.t_final)),
        ks_statistic: ks_normal(&samples.v, cfg.epsilon.sqrt()),
        ks_critical_1pct: ks_critical_1pct(samples.len()),
        jumps: jump_count_check(samples, cfg),
        rates: empirical_rate(&samples.x, cfg.epsilon, bin_width)?,
    })
}

/// Draws one uniform in `[0, 1)` from the stream of particle `index`; used by tests of stream independence.
pub fn stream_uniform(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.random()
}
