use polylap::catalog::{get_solution, parse_params, verify, Params, SolutionSpec};
use polylap::fields::{eval_f, eval_operator, DEFAULT_SEED};
use polylap::reductions::{
    lift_ansatz, ode_residual, s_grid, scaling_weight_check, BuiltinG, OdeKind, ReducedOde, BUILTIN_IDS, S_POINTS,
    S_RANGE,
};
use polylap::{Error, Jet3, JetField, OperatorId};
use proptest::prelude::*;

fn ode(id: &str, items: &[&str]) -> ReducedOde {
    let items: Vec<String> = items.iter().map(|s| s.to_string()).collect();
    ReducedOde::parse(id, &parse_params(&items).unwrap()).unwrap()
}

fn g(id: &str, items: &[&str]) -> BuiltinG {
    let items: Vec<String> = items.iter().map(|s| s.to_string()).collect();
    BuiltinG::get(id, &parse_params(&items).unwrap()).unwrap()
}

fn catalog(id: &str, items: &[&str]) -> SolutionSpec {
    let items: Vec<String> = items.iter().map(|s| s.to_string()).collect();
    get_solution(id, &parse_params(&items).unwrap()).unwrap()
}

fn grid() -> Vec<f64> {
    s_grid(S_RANGE.0, S_RANGE.1, S_POINTS)
}

#[test]
fn stated_exact_solutions_solve_their_odes() {
    for (o, f) in [
        ("rot-linear", "sqrt"),
        ("a3-linear", "atan"),
        ("b2-ode", "eikonal-linear"),
        ("b3-ode", "inv-sqrt2"),
        ("b3-ode", "inv-2s2"),
    ] {
        let r = ode_residual(&ode(o, &[]), &g(f, &[]), &grid()).unwrap();
        assert!(r.passed && r.max_abs_residual <= 1e-12, "{o} with {f}: {}", r.max_abs_residual);
        assert_eq!(r.n_points, 200);
    }
}

#[test]
fn hand_derivatives_of_sqrt() {
    let o = ode("rot-linear", &[]);
    for s in grid() {
        let by_hand = Jet3::from_parts(s.sqrt(), vec![0.5 / s.sqrt()], vec![-0.25 * s.powf(-1.5)], vec![0.375 * s.powf(-2.5)])
            .unwrap();
        assert!(o.residual(s, &by_hand).unwrap().abs() < 1e-13);
        let jet = g("sqrt", &[]).jet(s).unwrap();
        assert!((jet.third(0, 0, 0) - 0.375 * s.powf(-2.5)).abs() < 1e-13);
    }
}

#[test]
fn factor_solutions() {
    let cases: [(&str, &[&str], &str, &[&str]); 8] = [
        ("fullrot", &[], "sqrt", &[]),
        ("a6-E1", &[], "e1-cos", &[]),
        ("a6-E1", &[], "e1-sin", &[]),
        ("a6-E2", &[], "laurent", &[]),
        ("a6-E2", &[], "laurent", &["c=0,0,1"]),
        ("a7-E1", &["alpha=2"], "spiral-a", &["alpha=2"]),
        ("a7-E2", &["alpha=0.5"], "spiral-b", &["alpha=0.5"]),
        ("x1-ode", &[], "quadratic", &[]),
    ];
    for (o, op, f, fp) in cases {
        let r = ode_residual(&ode(o, op), &g(f, fp), &grid()).unwrap();
        assert!(r.max_abs_residual <= 1e-11, "{o} with {f}: {}", r.max_abs_residual);
    }
    let zero = ode_residual(&ode("a4-ode", &[]), &g("zero", &[]), &grid()).unwrap();
    assert_eq!(zero.max_abs_residual, 0.0);
}

#[test]
fn printed_third_order_factor_misses_the_laurent_family() {
    let one_over_s = g("laurent", &["c=0,1,0"]);
    let printed = ode_residual(&ode("a6-E2-printed", &[]), &one_over_s, &grid()).unwrap();
    assert!(printed.max_abs_residual > 1.0);
    // printed form at g = 1/s is 6(s - 1)/s^3
    let o = ode("a6-E2-printed", &[]);
    for s in [0.5, 2.0, 4.0] {
        let r = o.residual(s, &one_over_s.jet(s).unwrap()).unwrap();
        assert!((r - 6.0 * (s - 1.0) / s.powi(3)).abs() < 1e-12);
    }
    let fixed = ode_residual(&ode("a6-E2", &[]), &one_over_s, &grid()).unwrap();
    assert!(fixed.passed);
    // the lifted field is xy, a member of the quadratic family
    let lift = lift_ansatz(&ode("a6-E2", &[]), &one_over_s).unwrap();
    assert!(pointwise_gap(&lift, &catalog("quadratic", &["c=0,0,0,0,1,0"]), 200) <= 1e-12);
}

#[test]
fn non_solutions_fail() {
    let generic = g("generic", &[]);
    for k in OdeKind::ALL {
        let r = ode_residual(&ReducedOde::new(k, None).unwrap(), &generic, &grid()).unwrap();
        assert!(r.max_abs_residual > 1e-3, "{k}: {}", r.max_abs_residual);
    }
}

fn pointwise_gap(a: &SolutionSpec, b: &SolutionSpec, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for p in a.sample(n, 17).unwrap() {
        if !b.contains(&p) {
            continue;
        }
        let (u, v) = (a.jet_at(&p).unwrap(), b.jet_at(&p).unwrap());
        for (x, y) in u.entries().zip(v.entries()) {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
        }
    }
    worst
}

#[test]
fn lifts_reproduce_catalog_entries() {
    let r = 1.0 / 2f64.sqrt();
    let cases: Vec<(ReducedOde, BuiltinG, SolutionSpec)> = vec![
        (ode("rot-linear", &[]), g("sqrt", &[]), catalog("cone", &[])),
        (ode("a3-linear", &[]), g("atan", &[]), catalog("arctan", &[])),
        (ode("b2-ode", &[]), g("eikonal-linear", &[]), catalog("eikonal-quad", &[])),
        (ode("b3-ode", &[]), g("inv-sqrt2", &[]), catalog("quadratic", &[&format!("c=0,0,0,0,{r},0")])),
        (ode("b3-ode", &[]), g("inv-2s2", &[]), catalog("quadratic", &["c=0,0,0,0,0,0.5"])),
        (ode("a6-E1", &[]), g("e1-cos", &[]), catalog("rot-sqrt2", &["c=1,0"])),
        (ode("a6-E1", &[]), g("e1-sin", &[]), catalog("rot-sqrt2", &["c=0,1"])),
        (ode("a7-E1", &["alpha=1"]), g("spiral-a", &["alpha=1"]), catalog("spiral-a", &["alpha=1"])),
        (ode("a7-E2", &["alpha=1.5"]), g("spiral-b", &["alpha=1.5"]), catalog("spiral-b", &["alpha=1.5"])),
        (ode("x1-ode", &[]), g("quadratic", &["c=1,-2,0.5"]), catalog("quadratic", &["c=1,0,-2,0,0,0.5"])),
    ];
    for (o, f, want) in cases {
        let lift = lift_ansatz(&o, &f).unwrap();
        let gap = pointwise_gap(&lift, &want, 200);
        assert!(gap <= 1e-12, "{o} with {}: {gap}", f.id);
        let v = verify(&lift, 500, DEFAULT_SEED).unwrap();
        assert!(v.passed, "{o} with {}: {}", f.id, v.max_residual);
    }
}

#[test]
fn reduced_targets_for_b_cases() {
    let lift = lift_ansatz(&ode("b2-ode", &[]), &g("eikonal-linear", &[])).unwrap();
    assert_eq!(lift.target, OperatorId::REDUCED);
    let u = lift.jet_at(&[1.0, 2.0]).unwrap();
    assert!((eval_f(&u) - 1.0).abs() < 1e-14);
}

// Exact factors linking the PDE residual of a lift to the ODE residual,
// computed symbolically: Pi[g(x^2+y^2)] = 2048 s fullrot, Pi[g(y)] = 4 x1,
// Pi[e^x h(y)] = e^{5x} a4, f[g(x^2+y^2)] - 1 = b2, f[x^2 g(x/y)] - 1 = b3.
fn prefactor(k: OdeKind, p: &[f64], s: f64) -> f64 {
    match k {
        OdeKind::FullRot => 2048.0 * s,
        OdeKind::X1 => 4.0,
        OdeKind::A4 => (5.0 * p[0]).exp(),
        OdeKind::B2 | OdeKind::B3 => 1.0,
        _ => unreachable!(),
    }
}

#[test]
fn pde_residual_of_generic_lift_is_a_multiple_of_the_ode() {
    let generic = g("generic", &[]);
    for k in [OdeKind::FullRot, OdeKind::X1, OdeKind::A4, OdeKind::B2, OdeKind::B3] {
        let o = ReducedOde::new(k, None).unwrap();
        let lift = lift_ansatz(&o, &generic).unwrap();
        for p in lift.sample(30, 5).unwrap() {
            let s = match k {
                OdeKind::FullRot | OdeKind::B2 => p[0] * p[0] + p[1] * p[1],
                OdeKind::B3 => p[0] / p[1],
                _ => p[1],
            };
            if k == OdeKind::FullRot && s > 9.0 {
                continue;
            }
            let u = lift.jet_at(&p).unwrap();
            let pde = match k.target() {
                OperatorId::REDUCED => eval_f(&u) - 1.0,
                op => eval_operator(op, &u).unwrap(),
            };
            let want = prefactor(k, &p, s) * o.residual(s, &generic.jet(s).unwrap()).unwrap();
            assert!((pde - want).abs() <= 1e-8 * want.abs().max(1.0), "{k} at {p:?}: {pde} vs {want}");
        }
    }
}

#[test]
fn scaling_weights() {
    for (alpha, want) in [(12.0 / 5.0, -23.8), (0.0, 5.0), (1.0, -7.0), (0.5, -1.0)] {
        let fit = scaling_weight_check(alpha).unwrap();
        assert_eq!(fit.expected, 5.0 - 12.0 * alpha);
        assert_eq!(fit.term_exponents.len(), 3);
        for w in &fit.term_exponents {
            assert!((w - want).abs() < 1e-8, "alpha={alpha}: {w}");
        }
    }
}

#[test]
fn builtins_and_errors() {
    for id in BUILTIN_IDS {
        let f = BuiltinG::get(id, &Params::new()).unwrap();
        assert!(f.jet(1.3).unwrap().is_finite(), "{id}");
    }
    assert!(matches!(BuiltinG::get("nope", &Params::new()), Err(Error::UnknownId { .. })));
    assert!(matches!(ReducedOde::parse("a5-ode", &Params::new()), Err(Error::UnknownId { .. })));
    let sqrt = g("sqrt", &[]);
    assert!(ode_residual(&ode("rot-linear", &[]), &sqrt, &[-1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fullrot_factors(s in 0.1f64..10.0, g1 in -3.0f64..3.0, g2 in -3.0f64..3.0, g3 in -3.0f64..3.0) {
        let jet = Jet3::from_parts(0.7, vec![g1], vec![g2], vec![g3]).unwrap();
        let full = ode("fullrot", &[]).residual(s, &jet).unwrap();
        let lin = ode("rot-linear", &[]).residual(s, &jet).unwrap();
        let second = s * lin * g3 + (3.0 * s * g2 + 2.0 * g1) * g2;
        let want = lin * second * second;
        prop_assert!((full - want).abs() <= 1e-12 * want.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn e1_solutions_lift_to_pde_solutions(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, x in 0.5f64..5.0, y in 0.5f64..5.0) {
        let a = g("e1-cos", &[]);
        let b = g("e1-sin", &[]);
        let o = ode("a6-E1", &[]);
        let la = lift_ansatz(&o, &a).unwrap();
        let lb = lift_ansatz(&o, &b).unwrap();
        let u = la.jet_at(&[x, y]).unwrap() * c1 + lb.jet_at(&[x, y]).unwrap() * c2;
        let (r, scale) = polylap::fields::normalized_residual(OperatorId::InfPolylap, &u).unwrap();
        prop_assert!(r.abs() / scale <= 1e-9);
    }
}
