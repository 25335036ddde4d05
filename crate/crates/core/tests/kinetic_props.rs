use kinld::kinetic::{
    barrier_excess, check_max_principle, constraint_gap, default_velocity_grid, reaction_step, rho, run, Boundary,
    KineticField, KineticRun, Transport, Window, MAX_PRINCIPLE_SLACK,
};
use kinld::Grid;
use proptest::prelude::*;

fn compact_datum(eps: f64) -> KineticField {
    let x = Grid::symmetric(4.0, 321).unwrap();
    let v = default_velocity_grid(eps, 161).unwrap();
    KineticField::from_wkb(eps, x, v, Boundary::Absorbing, |x, v| if x.abs() < 1.0 { 0.5 * v * v } else { f64::INFINITY })
        .unwrap()
}

#[test]
fn mass_is_conserved_over_ten_relaxation_times() {
    let eps = 0.1;
    let x = Grid::symmetric(2.0, 201).unwrap();
    let v = default_velocity_grid(eps, 121).unwrap();
    let f0 = KineticField::from_wkb(eps, x, v, Boundary::Periodic, |x, v| 0.5 * v * v + 0.3 * (x * 1.5).sin().powi(2))
        .unwrap();
    let cfg = KineticRun::with_default_dt(eps, 10.0 / eps * (eps / 4.0));
    let out = run(f0, &cfg).unwrap();
    assert_eq!(out.steps, 100);
    assert!(out.mass_drift <= 1e-8, "drift {}", out.mass_drift);
}

#[test]
fn log_linear_transport_keeps_positivity() {
    let eps = 0.1;
    let out = run(compact_datum(eps).with_transport(Transport::LogLinear), &KineticRun::with_default_dt(eps, 0.5)).unwrap();
    assert!(out.field.f.iter().all(|f| *f >= 0.0 && f.is_finite()));
}

#[test]
fn compact_data_stay_below_upper_barrier() {
    let window = Window { x: (-1.5, 1.5), v: (-1.0, 1.0) };
    for eps in [0.2, 0.1, 0.05] {
        let out = run(compact_datum(eps), &KineticRun::with_default_dt(eps, 1.0)).unwrap();
        let (up, _) = barrier_excess(out.snapshots.last().unwrap(), &window);
        assert!(up <= 0.0, "eps={eps}: barrier exceeded by {up}");
    }
}

#[test]
fn constraint_gap_shrinks_like_epsilon() {
    let window = Window { x: (-1.5, 1.5), v: (-1.0, 1.0) };
    let mut fitted: f64 = 0.0;
    let mut gaps = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let out = run(compact_datum(eps), &KineticRun::with_default_dt(eps, 1.0)).unwrap();
        let gap = constraint_gap(out.snapshots.last().unwrap(), &window);
        fitted = fitted.max(gap / eps);
        gaps.push(gap);
    }
    assert!(gaps.windows(2).all(|p| p[1] < p[0]), "{gaps:?}");
    assert!(fitted <= 1.5, "gap/eps up to {fitted}");
}

fn bounded_datum(a: f64, b: f64, k: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, v| 0.5 * v * v + 1.0 + a * (k * x).sin() + b * (x * x).cos()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reaction_respects_maximum_principle(
        eps in 0.05f64..0.3, r in 0.0f64..3.0, a in -0.3f64..0.3, b in -0.3f64..0.3, k in 0.5f64..4.0,
        periodic in any::<bool>(),
    ) {
        let x = Grid::symmetric(2.0, 81).unwrap();
        let v = default_velocity_grid(eps, 61).unwrap();
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Absorbing };
        let mut f = KineticField::from_wkb(eps, x, v, boundary, bounded_datum(a, b, k)).unwrap();
        prop_assume!(check_max_principle(&f, MAX_PRINCIPLE_SLACK).is_ok());
        for _ in 0..12 {
            f = reaction_step(&f, eps / 4.0, r).unwrap();
            prop_assert!(f.f.iter().all(|z| *z >= 0.0));
            prop_assert!(check_max_principle(&f, MAX_PRINCIPLE_SLACK).is_ok());
        }
    }

    #[test]
    fn periodic_linear_transport_conserves_mass(
        eps in 0.05f64..0.3, a in -0.5f64..0.5, b in -0.5f64..0.5, k in 0.5f64..4.0,
    ) {
        let x = Grid::symmetric(2.0, 81).unwrap();
        let v = default_velocity_grid(eps, 61).unwrap();
        let f0 = KineticField::from_wkb(eps, x, v, Boundary::Periodic, bounded_datum(a, b, k)).unwrap();
        let out = run(f0, &KineticRun::with_default_dt(eps, 1.0)).unwrap();
        prop_assert!(out.mass_drift <= 1e-8, "drift {}", out.mass_drift);
        prop_assert!(rho(&out.field).iter().all(|r| *r >= 0.0));
    }
}
