//! End-to-end acceptance suite; prints one PASS/FAIL line per criterion.

use std::time::Instant;

use kinld::closed_form::{heat_rate, mu, mu_brute, phi, phi_brute, RateParams};
use kinld::front::{bounds_check, freidlin_profile, front_trace, in_zone, FrontQuery};
use kinld::grid::{UniformGrid, VelocityGrid};
use kinld::kinetic::{
    apriori_report, check_max_principle, default_velocity_grid, dirac_like, reaction_step, run,
    wkb_error, AprioriSlack, Boundary, KineticField, KineticRun, Transport, Window, MAX_PRINCIPLE_SLACK,
};
use kinld::minplus::{mu_n_closed, run_scheme, PhaseField, SchemeState};
use kinld::pdmp::{ks_critical_1pct, ks_normal, moments, simulate, variance_oracle, InitialVelocity, SimConfig};
use kinld::{Extended, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn closed_form_vs_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples: Vec<[f64; 4]> = (0..1000)
        .map(|_| {
            [rng.random_range(0.1..5.0), rng.random_range(-6.0..6.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]
        })
        .collect();
    let (mu_err, mu_above, phi_err, phi_above) = samples
        .par_iter()
        .map(|&[t, x, w, v]| {
            let exact = mu(t, x, w).0;
            let brute = mu_brute(t, x, w, 600);
            let pe = phi(t, x, v, w);
            let pb = phi_brute(t, x, v, w, 200);
            let above = |e: Extended, b: Extended| (e.to_float() - b.to_float()).max(0.0);
            (exact.abs_diff(brute), above(exact, brute), pe.abs_diff(pb), above(pe, pb))
        })
        .reduce(|| (0.0, 0.0, 0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2), a.3.max(b.3)));
    let pass = mu_err <= 5e-3 && phi_err <= 1e-2 && mu_above <= 1e-12 && phi_above <= 1e-12;
    verdict(
        pass,
        format!("max|mu-brute|={mu_err:.3e} max|phi-brute|={phi_err:.3e} overshoot mu={mu_above:.1e} phi={phi_above:.1e}"),
    )
}

fn discrete_recursion() -> Verdict {
    let dt = 0.25;
    let steps = 40;
    let x = UniformGrid::with_spacing(-12.0, 12.0, 0.05).unwrap();
    let v = VelocityGrid::symmetric(4.0, 81).unwrap();
    let slack = 2.0 * x.spacing();
    let mut worst: f64 = 0.0;
    let mut finite_ok = true;
    for w in [0.0, 1.0] {
        let mut state = SchemeState::new(PhaseField::dirac(x, v, 0.0, w).unwrap(), dt).unwrap();
        run_scheme(&mut state, steps);
        for (n, field) in state.history.iter().enumerate() {
            for (i, got) in field.values.iter().enumerate() {
                let want = mu_n_closed(n, dt, x.node(i), w);
                if got.is_finite() != want.is_finite() {
                    finite_ok = false;
                }
                worst = worst.max(got.abs_diff(want));
            }
        }
    }
    verdict(finite_ok && worst <= slack, format!("n<=40, w in {{0,1}}: max|mu_n - closed|={worst:.3e} (slack {slack})"))
}

fn scheme_error(dt: f64, t: f64, window: f64) -> f64 {
    let h = 0.5 * dt.powf(1.5);
    let half = 4.0;
    let cells = (half / h).round() as usize;
    let x = Grid::symmetric(half, 2 * cells + 1).unwrap();
    let v = VelocityGrid::symmetric(1.0, 3).unwrap();
    let mut state = SchemeState::new(PhaseField::dirac(x, v, 0.0, 0.0).unwrap(), dt).unwrap();
    let n = (t / dt).round() as usize;
    run_scheme(&mut state, n);
    let field = &state.history[n];
    (0..x.n)
        .filter(|&i| x.node(i).abs() <= window)
        .map(|i| field.values[i].abs_diff(mu(t, x.node(i), 0.0).0))
        .fold(0.0, f64::max)
}

fn scheme_convergence() -> Verdict {
    let errs: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&dt| scheme_error(dt, 1.0, 2.0)).collect();
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let pass = ratios.iter().all(|r| (1.4..=3.0).contains(r));
    verdict(pass, format!("errors {errs:.4?} ratios {ratios:.3?}"))
}

fn stationary_limit() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut heat_last: f64 = 0.0;
    for k in -1000..=1000 {
        let x = k as f64 / 100.0;
        let expect = 1.5 * x.abs().powf(2.0 / 3.0);
        let t0 = x.abs().powf(2.0 / 3.0);
        for t in [t0, t0 + 1e-3, t0 + 1.0, 2.0 * t0 + 3.0, 50.0, 1e3, 1e6] {
            if t <= 0.0 {
                continue;
            }
            let got = mu(t, x, 0.0).0.to_float();
            worst = worst.max((got - expect).abs() / expect.max(1.0));
        }
        heat_last = heat_last.max(heat_rate(1e6, x).to_float());
    }
    verdict(
        worst <= 1e-12 && heat_last < 1e-4,
        format!("max rel dev from 1.5|x|^(2/3): {worst:.2e}; heat x^2/(4t) at t=1e6: {heat_last:.2e}"),
    )
}

fn kinetic_wkb() -> Verdict {
    let window = Window::square(2.0);
    let mut literal = Vec::new();
    let mut banded = Vec::new();
    let mut margin = f64::INFINITY;
    for eps in [0.2, 0.1, 0.05] {
        let x = Grid::symmetric(2.1, 401).unwrap();
        let v = default_velocity_grid(eps, 201).unwrap();
        margin = margin.min(window.margin_cells(&x));
        let f0 = dirac_like(eps, x, v, Boundary::Absorbing).unwrap().with_transport(Transport::LogLinear);
        let out = run(f0, &KineticRun::with_default_dt(eps, 1.0)).unwrap();
        let wkb = out.snapshots.last().unwrap();
        literal.push(wkb_error(wkb, &window, 0.0));
        let mut off = 0.0f64;
        for j in 0..v.n {
            for i in 0..x.n {
                let (xx, vv) = (x.node(i), v.node(j));
                if xx.abs() <= 2.0 && vv.abs() <= 2.0 && (xx - vv).abs() >= 0.1 {
                    off = off.max(wkb.u_at(i, j).abs_diff(phi(1.0, xx, vv, 0.0)));
                }
            }
        }
        banded.push(off);
    }
    let decreasing = |e: &[f64]| e.windows(2).all(|p| p[1] < p[0]);

    let eps = 0.05;
    let x = Grid::symmetric(2.0, 401).unwrap();
    let v = default_velocity_grid(eps, 201).unwrap();
    let bounded = |x: f64, v: f64| 0.5 * v * v + 1.0 + 0.5 * (std::f64::consts::PI * x).cos();
    let f0 = KineticField::from_wkb(eps, x, v, Boundary::Periodic, bounded).unwrap();
    let drift = run(f0, &KineticRun::with_default_dt(eps, 1.0)).unwrap().mass_drift;

    let mut f = KineticField::from_wkb(eps, x, v, Boundary::Absorbing, bounded).unwrap();
    let mut max_ok = check_max_principle(&f, MAX_PRINCIPLE_SLACK).is_ok();
    for _ in 0..KineticRun::with_default_dt(eps, 1.0).steps() {
        match reaction_step(&f, eps / 4.0, 1.0) {
            Ok(next) => f = next,
            Err(_) => {
                max_ok = false;
                break;
            }
        }
        max_ok &= check_max_principle(&f, MAX_PRINCIPLE_SLACK).is_ok();
    }

    let pass = decreasing(&literal) && decreasing(&banded) && drift <= 1e-8 && max_ok && margin >= 5.0;
    verdict(
        pass,
        format!(
            "sup|u-phi| {literal:.4?}; off |x-v|<0.1 {banded:.4?}; mass drift {drift:.2e}; max principle {max_ok}; margin {margin:.1} cells"
        ),
    )
}

fn apriori_bounds() -> Verdict {
    let eps = 0.1;
    let x = UniformGrid::new(-2.0, 2.0, 161).unwrap();
    let v = default_velocity_grid(eps, 101).unwrap();
    let u0 = |x: f64, v: f64| 0.5 * v * v + 0.2 * (std::f64::consts::PI * x).sin();
    let f0 = KineticField::from_wkb(eps, x, v, Boundary::Periodic, u0).unwrap();
    let out = run(f0, &KineticRun { dt: eps / 4.0, t_final: 1.0, r: 0.0, snapshot_every: 1 }).unwrap();
    let slack = AprioriSlack { lip_v: x.spacing(), ..Default::default() };
    let report = apriori_report(&out.snapshots, &slack);
    let last = report.snapshots.last().unwrap();
    verdict(
        report.holds(),
        format!(
            "{} snapshots, {} violations; sup|b| {:.4}->{:.4}, Lip_x {:.4}->{:.4}, Lip_v {:.4}->{:.4}",
            report.snapshots.len(),
            report.violations.len(),
            report.initial.sup,
            last.sup,
            report.initial.lip_x,
            last.lip_x,
            report.initial.lip_v,
            last.lip_v
        ),
    )
}

fn pdmp_statistics() -> Verdict {
    let cfg = SimConfig { epsilon: 0.05, t_final: 1.0, n_particles: 1_000_000, initial: InitialVelocity::Equilibrium, seed: 2024 };
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    let bits = |s: &kinld::pdmp::SampleSet| -> Vec<u64> { s.x.iter().chain(&s.v).map(|z| z.to_bits()).collect() };
    let replay = bits(&a) == bits(&b) && a.jumps == b.jumps;
    let m = moments(&a.x);
    let oracle = variance_oracle(cfg.epsilon, cfg.t_final);
    let ks = ks_normal(&a.v, cfg.epsilon.sqrt());
    let crit = ks_critical_1pct(a.len());
    let pass = m.mean.abs() <= 3.0 * m.se_mean && (m.variance - oracle).abs() <= 3.0 * m.se_variance && ks < crit && replay;
    verdict(
        pass,
        format!(
            "mean {:.2e} (3SE {:.2e}); var {:.6e} vs {oracle:.6e} (3SE {:.2e}); KS {ks:.2e} < {crit:.2e}; replay {replay}",
            m.mean,
            3.0 * m.se_mean,
            m.variance,
            3.0 * m.se_variance
        ),
    )
}

fn front_rates() -> Verdict {
    let times: Vec<f64> = (0..=18).map(|k| 10.0 * 10f64.powf(k as f64 / 18.0)).collect();
    let fit = |gamma: f64| {
        let q = FrontQuery { params: RateParams::new(1.0, gamma).unwrap(), w: 0.0, times: times.clone() };
        front_trace(&q).unwrap().fit
    };
    let g2 = fit(2.0);
    let g1 = fit(1.0);
    let ok2 = (g2.exponent - 1.5).abs() <= 0.02 && (g2.prefactor / 0.272_166 - 1.0).abs() <= 0.02;
    let ok1 = (g1.exponent - 2.0).abs() <= 0.02 && (g1.prefactor / 0.125 - 1.0).abs() <= 0.02;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let outside = (0..100)
        .filter(|_| {
            let r = 10.0 - rng.random_range(0.0..10.0);
            !bounds_check(r).unwrap().inside
        })
        .count();
    verdict(
        ok2 && ok1 && outside == 0,
        format!(
            "gamma=2: b={:.5} a={:.6}; gamma=1: b={:.5} a={:.6}; sandwich misses {outside}/100",
            g2.exponent, g2.prefactor, g1.exponent, g1.prefactor
        ),
    )
}

fn freidlin_evidence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let queries: Vec<[f64; 5]> = (0..500)
        .map(|_| {
            let t: f64 = rng.random_range(0.05..5.0);
            let x: f64 = rng.random_range(0.01..10.0);
            let v = rng.random_range(0.0..1.0) * x / t;
            [t, x, v, rng.random_range(0.0..3.0), 5.0 - rng.random_range(0.0..5.0)]
        })
        .collect();
    let results: Vec<(bool, bool, f64)> = queries
        .par_iter()
        .map(|&[t, x, v, w, r]| {
            assert!(in_zone(t, x, v));
            let p = freidlin_profile(t, x, v, w, &RateParams::gaussian(r).unwrap()).unwrap();
            (p.unimodal, p.linear_leg_concave, p.linear_leg_curvature)
        })
        .collect();
    let unimodal = results.iter().filter(|r| r.0).count();
    let concave = results.iter().filter(|r| r.1).count();
    let curv = results.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    verdict(
        unimodal == 500 && concave == 500,
        format!("unimodal {unimodal}/500, concave linear leg {concave}/500, max second difference {curv:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("closed form vs brute-force oracles", closed_form_vs_oracle),
        ("discrete recursion matches closed form", discrete_recursion),
        ("scheme convergence rate", scheme_convergence),
        ("stationary limit vs heat contrast", stationary_limit),
        ("kinetic WKB convergence, mass, max principle", kinetic_wkb),
        ("a priori bounds on b", apriori_bounds),
        ("velocity-jump statistics", pdmp_statistics),
        ("front spreading rates", front_rates),
        ("Freidlin unimodality", freidlin_evidence),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let id = format!("{}", k + 1);
        if filter.as_deref().is_some_and(|f| f != id && !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id} [{tag}] {name} ({:.1}s): {}", start.elapsed().as_secs_f64(), v.detail);
        failed += usize::from(!v.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
