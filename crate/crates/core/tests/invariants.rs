use frackpz_core::diagnostics::{exponent_bootstrap, predicted_gradient_cap};
use frackpz_core::operators::FracLapMatrix;
use frackpz_core::solvers::{gain_recursion, lambda_star_closed_form, schauder_radius, truncated_power};
use frackpz_core::{gagliardo_seminorm, lp_norm, remainder, truncate, weak_lp_norm, DomainSpec, GridFunction};
use proptest::prelude::*;

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncation_splits_the_function(v in values(33), k in 0.1f64..8.0) {
        let d = DomainSpec::interval(-1.0, 1.0, 33).unwrap();
        let u = GridFunction::new(d, v).unwrap();
        let t = truncate(&u, k).unwrap();
        let g = remainder(&u, k).unwrap();
        for i in 0..u.len() {
            prop_assert!((t.values[i] + g.values[i] - u.values[i]).abs() < 1e-12);
            prop_assert!(t.values[i].abs() <= k);
            prop_assert!(g.values[i] == 0.0 || t.values[i].abs() == k);
        }
    }

    #[test]
    fn weak_norm_is_below_strong_norm(v in values(41), p in 1.0f64..4.0) {
        let d = DomainSpec::ball(1.0, 2, 41).unwrap();
        let u = GridFunction::new(d, v).unwrap();
        prop_assert!(weak_lp_norm(&u, p).unwrap() <= lp_norm(&u, p).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn seminorm_is_homogeneous(v in values(24), c in -5.0f64..5.0) {
        let d = DomainSpec::interval(0.0, 1.0, 24).unwrap();
        let u = GridFunction::new(d, v).unwrap().with_zero_boundary();
        let a = gagliardo_seminorm(&u, 0.7).unwrap();
        let b = gagliardo_seminorm(&u.scale(c), 0.7).unwrap();
        prop_assert!((b - c.abs() * a).abs() <= 1e-9 * (1.0 + b));
    }

    #[test]
    fn truncated_power_increases_to_the_power(xi in -50.0f64..50.0, q in 1.01f64..3.0) {
        let mut last = 0.0;
        for n in [1.0, 4.0, 16.0, 64.0] {
            let v = truncated_power(xi, q, n);
            prop_assert!(v >= last && v <= xi.abs().powf(q) && v <= n);
            last = v;
        }
    }

    #[test]
    fn gain_limit_is_a_fixed_point(c in 0.1f64..3.0, q in 1.1f64..3.0, frac in 0.0f64..0.99) {
        let threshold = gain_recursion(c, 0.0, q, 1).unwrap().threshold;
        let c1 = frac * threshold;
        let r = gain_recursion(c, c1, q, 2000).unwrap();
        prop_assert!(!r.diverged);
        let a = r.limit;
        prop_assert!((c * (c1 * a.powf(q) + 1.0) - a).abs() <= 1e-9 * a);
        prop_assert!(r.sequence.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(r.sequence.iter().all(|&x| x <= a * (1.0 + 1e-12)));
    }

    #[test]
    fn gain_recursion_diverges_above_threshold(c in 0.1f64..3.0, q in 1.1f64..3.0, excess in 1.05f64..4.0) {
        let threshold = gain_recursion(c, 0.0, q, 1).unwrap().threshold;
        prop_assert!(gain_recursion(c, excess * threshold, q, 10_000).unwrap().diverged);
    }

    #[test]
    fn lambda_star_solves_the_tangency(e in 0.2f64..0.95, c0 in 0.1f64..5.0, nf in 0.1f64..5.0) {
        let (l, lam) = lambda_star_closed_form(e, c0, nf).unwrap();
        prop_assert!((l.powf(e) - c0 * (l + lam * nf)).abs() <= 1e-10 * l.powf(e));
        prop_assert!((e * l.powf(e - 1.0) - c0).abs() <= 1e-10 * c0);
        let below = schauder_radius(e, c0, nf, 0.5 * lam).unwrap().unwrap();
        prop_assert!(below > 0.0 && below <= l * (1.0 + 1e-12));
        prop_assert!(schauder_radius(e, c0, nf, 1.5 * lam).unwrap().is_none());
    }

    #[test]
    fn bootstrap_ladder_exits(sigma_frac in 1.05f64..6.0, r_frac in 0.01f64..0.99) {
        let (dim, s) = (3usize, 0.8);
        let n = dim as f64;
        let sigma = sigma_frac * n / (2.0 * s - 1.0);
        let p_star = n / (n - 2.0 * s + 1.0);
        let r = exponent_bootstrap(dim, sigma, s, 1.0 + r_frac * (p_star - 1.0), 10_000).unwrap();
        prop_assert!(r.exited && r.increasing);
    }

    #[test]
    fn gradient_cap_never_exceeds_2s(theta in 0.0f64..2.0, s in 0.55f64..0.95) {
        let cap = predicted_gradient_cap(2, s, theta);
        prop_assert!(cap <= 2.0 * s && cap > 0.0);
    }
}

#[test]
fn operator_is_an_m_matrix() {
    for d in [
        DomainSpec::interval(-1.0, 1.0, 65).unwrap(),
        DomainSpec::ball(1.0, 2, 48).unwrap(),
        DomainSpec::ball(1.0, 3, 48).unwrap(),
    ] {
        let op = FracLapMatrix::assemble(&d, 0.7).unwrap();
        let inv = op.inverse().unwrap();
        assert!(inv.iter().all(|&v| v >= -1e-12), "{:?}", d.kind);
        let ones = GridFunction::from_fn(d, |_| 1.0);
        let lu = op.apply(&ones).unwrap();
        assert!(d.interior().all(|i| lu.values[i] > 0.0));
    }
}

#[test]
fn discrete_maximum_principle() {
    let d = DomainSpec::ball(1.0, 2, 64).unwrap();
    let op = FracLapMatrix::assemble(&d, 0.75).unwrap();
    let f = GridFunction::from_fn(d, |r| if r < 0.3 { 1.0 } else { 0.0 });
    let u = op.solve(&f).unwrap();
    assert!(d.interior().all(|i| u.values[i] > 0.0));
    let small = op.solve(&f.scale(0.5)).unwrap();
    assert!(d.interior().all(|i| small.values[i] <= u.values[i]));
}
