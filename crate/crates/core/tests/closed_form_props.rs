use kinld::closed_form::{mu, mu_brute, mu_gamma, mu_gamma_brute, mu_reaction, phi, trajectory, trajectory_reaction, RateParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn mu_is_odd_pair_symmetric(t in 0.01f64..8.0, x in -10.0f64..10.0, w in -4.0f64..4.0) {
        let a = mu(t, x, w).0.to_float();
        let b = mu(t, -x, -w).0.to_float();
        prop_assert!(close(a, b, 1e-13), "{a} vs {b}");
    }

    #[test]
    fn mu_even_at_rest(t in 0.01f64..8.0, x in 0.0f64..10.0) {
        prop_assert_eq!(mu(t, x, 0.0).0, mu(t, -x, 0.0).0);
    }

    #[test]
    fn mu_nonincreasing_in_t(t in 0.01f64..8.0, dt in 0.0f64..4.0, x in -10.0f64..10.0, w in -4.0f64..4.0) {
        let early = mu(t, x, w).0.to_float();
        let late = mu(t + dt, x, w).0.to_float();
        prop_assert!(late <= early + 1e-12 * early.abs().max(1.0), "mu({t})={early} < mu({})={late}", t + dt);
    }

    #[test]
    fn stationary_beyond_two_thirds(x in -10.0f64..10.0, extra in 0.0f64..20.0) {
        let t = x.abs().powf(2.0 / 3.0) + extra;
        prop_assume!(t > 0.0);
        let want = 1.5 * x.abs().powf(2.0 / 3.0);
        prop_assert!(close(mu(t, x, 0.0).0.to_float(), want, 1e-12));
    }

    #[test]
    fn mu_below_brute(t in 0.05f64..5.0, x in -10.0f64..10.0, w in -4.0f64..4.0) {
        let exact = mu(t, x, w).0.to_float();
        let brute = mu_brute(t, x, w, 80).to_float();
        prop_assert!(exact <= brute + 1e-12 * brute.abs().max(1.0), "{exact} > {brute}");
    }

    #[test]
    fn kernel_decomposition(t in 0.05f64..5.0, x in -6.0f64..6.0, v in -3.0f64..3.0, w in -3.0f64..3.0) {
        prop_assume!(!(w != 0.0 && v == w && x / t == v));
        let want = 0.5 * v * v + mu(t, x, v).0.to_float().min(mu(t, x, w).0.to_float());
        prop_assert_eq!(phi(t, x, v, w).to_float(), want);
    }

    #[test]
    fn trajectory_prices_phi(t in 0.05f64..5.0, x in -6.0f64..6.0, v in -3.0f64..3.0, w in -3.0f64..3.0) {
        let path = trajectory(t, x, v, w).unwrap();
        let want = phi(t, x, v, w).to_float();
        prop_assert!(close(path.path_cost(), want, 1e-12), "cost {} vs phi {want}", path.path_cost());
        prop_assert!(close(path.endpoint(), x, 1e-12));
        prop_assert!(close(path.duration(), t, 1e-12));
        prop_assert_eq!(path.final_velocity(), v);
    }

    #[test]
    fn reaction_trajectory_prices_shifted_phi(
        t in 0.05f64..4.0, x in -4.0f64..4.0, v in -2.0f64..2.0, w in -2.0f64..2.0, r in 0.0f64..3.0,
    ) {
        let path = trajectory_reaction(t, x, v, w, r).unwrap();
        let want = path.cost.to_float();
        prop_assert!(close(path.path_cost(), want, 1e-12), "cost {} vs {want}", path.path_cost());
        prop_assert!(close(path.endpoint(), x, 1e-12));
    }
}

#[test]
fn gamma_two_reduces_to_reaction() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let t = rng.random_range(0.01..10.0);
        let x = rng.random_range(-20.0..20.0);
        let w = rng.random_range(-4.0..4.0);
        let r = rng.random_range(0.0..10.0);
        let a = mu_gamma(t, x, w, &RateParams::gaussian(r).unwrap()).unwrap().0.to_float();
        let b = mu_reaction(t, x, w, r).to_float();
        assert!(close(a, b, 1e-12), "(t,x,w,r)=({t},{x},{w},{r}): {a} vs {b}");
    }
}

#[test]
fn phi_at_origin_costs_only_the_final_jump() {
    for v in [-2.0, -0.5, 0.0, 0.5, 2.0] {
        let got = phi(1.0, 0.0, v, 0.0).to_float();
        assert_eq!(got, 0.5 * v * v);
    }
}

#[test]
fn gamma_general_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..300 {
        let t: f64 = rng.random_range(0.1..5.0);
        let x = rng.random_range(-6.0..6.0);
        let w = rng.random_range(-3.0..3.0);
        let p = RateParams::new(rng.random_range(0.0..3.0), rng.random_range(1.0..4.0)).unwrap();
        let exact = mu_gamma(t, x, w, &p).unwrap().0.to_float();
        let brute = mu_gamma_brute(t, x, w, &p, 600).unwrap().to_float();
        assert!(exact <= brute + 1e-9 * (1.0 + brute.abs()), "({t},{x},{w},{p:?}): {exact} > {brute}");
        worst = worst.max((brute - exact) / (1.0 + exact.abs()));
    }
    assert!(worst < 5e-3, "worst relative gap {worst}");
}
