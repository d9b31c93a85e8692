use num_rational::Rational64;
use polylap::jets::{pairs, triples};
use polylap::{fd_validate, FnField, Jet3, JetField, Result};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field2<F: Fn(&Jet3, &Jet3) -> Result<Jet3>>(f: F) -> FnField<impl Fn(&[Jet3]) -> Result<Jet3>> {
    FnField::new(2, move |c: &[Jet3]| f(&c[0], &c[1]))
}

#[test]
fn arctan_ratio_matches_finite_differences() {
    let field = field2(|x, y| Ok(x.div(y)?.atan()));
    let jet = field.jet_at(&[1.0, 2.0]).unwrap();
    assert!((jet.value() - 0.5f64.atan()).abs() < 1e-15);
    assert!(fd_validate(&field, &[1.0, 2.0], 1e-4).unwrap() < 1e-6);
}

#[test]
fn arctan_ratio_closed_form_entries() {
    // u = atan(x/y): u_x = y/r2, u_y = -x/r2, u_xx = -2xy/r4, u_xy = (x2-y2)/r4, u_yy = 2xy/r4
    let (x, y) = (1.0f64, 2.0f64);
    let r2 = x * x + y * y;
    let r4 = r2 * r2;
    let field = field2(|x, y| Ok(x.div(y)?.atan()));
    let j = field.jet_at(&[x, y]).unwrap();
    let expect = [y / r2, -x / r2, -2.0 * x * y / r4, (x * x - y * y) / r4, 2.0 * x * y / r4];
    let got = [j.grad(0), j.grad(1), j.hess(0, 0), j.hess(0, 1), j.hess(1, 1)];
    for (e, g) in expect.iter().zip(got) {
        assert!((e - g).abs() < 1e-15, "{e} vs {g}");
    }
}

#[test]
fn exp_times_sin_matches_finite_differences() {
    let field = field2(|x, y| Ok(x.exp() * y.sin()));
    assert!(fd_validate(&field, &[0.3, 0.7], 1e-4).unwrap() < 1e-6);
}

#[test]
fn fractional_power_one_dimensional() {
    let field = FnField::new(1, |c: &[Jet3]| c[0].pow_rational(Rational64::new(12, 5)));
    assert!(fd_validate(&field, &[2.0], 1e-4).unwrap() < 1e-6);
    let j = field.jet_at(&[2.0]).unwrap();
    let r = 2.4f64;
    assert!((j.third(0, 0, 0) - r * (r - 1.0) * (r - 2.0) * 2f64.powf(r - 3.0)).abs() < 1e-13);
}

#[test]
fn quadratic_is_differenced_exactly() {
    let field = field2(|x, y| Ok(&(x * x) * 3.0 - x * y * 2.0 + y * y + x * 0.5 - 1.0));
    for p in [[0.0, 0.0], [1.5, -2.0], [10.0, 7.0]] {
        assert!(fd_validate(&field, &p, 1e-4).unwrap() < 1e-10);
    }
}

/// Cubic polynomial with explicit monomial coefficients and its exact
/// derivatives computed by differentiating monomials term by term.
struct Cubic {
    terms: Vec<(f64, [u32; 2])>,
}

impl Cubic {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut terms = Vec::new();
        for a in 0..=3u32 {
            for b in 0..=(3 - a) {
                terms.push((rng.random_range(-3.0..3.0), [a, b]));
            }
        }
        Self { terms }
    }

    fn deriv(&self, p: [f64; 2], d: [u32; 2]) -> f64 {
        let mut s = 0.0;
        for (c, e) in &self.terms {
            if e[0] < d[0] || e[1] < d[1] {
                continue;
            }
            let mut coef = *c;
            for t in 0..d[0] {
                coef *= f64::from(e[0] - t);
            }
            for t in 0..d[1] {
                coef *= f64::from(e[1] - t);
            }
            s += coef * p[0].powi((e[0] - d[0]) as i32) * p[1].powi((e[1] - d[1]) as i32);
        }
        s
    }

    fn jet(&self, p: [f64; 2]) -> Jet3 {
        let x = Jet3::seed(&p, 0).unwrap();
        let y = Jet3::seed(&p, 1).unwrap();
        let mut u = Jet3::constant(2, 0.0);
        for (c, e) in &self.terms {
            let m = x.powi(e[0] as i32).unwrap() * y.powi(e[1] as i32).unwrap();
            u = u + m * *c;
        }
        u
    }
}

fn multi(idx: &[usize]) -> [u32; 2] {
    let mut d = [0u32; 2];
    for i in idx {
        d[*i] += 1;
    }
    d
}

#[test]
fn polynomial_jets_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..100 {
        let poly = Cubic::random(&mut rng);
        let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let jet = poly.jet(p);
        let scale = poly.terms.iter().map(|(c, _)| c.abs()).sum::<f64>() * 8.0;
        let check = |got: f64, d: [u32; 2]| {
            let want = poly.deriv(p, d);
            assert!((got - want).abs() <= 1e-12 * scale.max(want.abs()), "{got} vs {want}");
        };
        check(jet.value(), [0, 0]);
        for i in 0..2 {
            check(jet.grad(i), multi(&[i]));
        }
        for (i, j) in pairs(2) {
            check(jet.hess(i, j), multi(&[i, j]));
        }
        for (i, j, k) in triples(2) {
            check(jet.third(i, j, k), multi(&[i, j, k]));
        }
    }
}

fn elementary_fields() -> Vec<(&'static str, Box<dyn JetField>, fn(&mut ChaCha8Rng) -> [f64; 2])> {
    fn anywhere(rng: &mut ChaCha8Rng) -> [f64; 2] {
        [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]
    }
    fn positive(rng: &mut ChaCha8Rng) -> [f64; 2] {
        [rng.random_range(0.3..3.0), rng.random_range(0.3..3.0)]
    }
    vec![
        ("add", Box::new(field2(|x, y| Ok(x * x + y * x * y))), anywhere),
        ("sub", Box::new(field2(|x, y| Ok(x * y - y * y * y))), anywhere),
        ("mul", Box::new(field2(|x, y| Ok((x + 1.0) * y.sin()))), anywhere),
        ("div", Box::new(field2(|x, y| x.sin().div(&(y * y + 1.0)))), anywhere),
        ("pow", Box::new(field2(|x, y| (x * y).pow_rational(Rational64::new(7, 3)))), positive),
        ("powi", Box::new(field2(|x, y| (x + y * 2.0).powi(-2))), positive),
        ("exp", Box::new(field2(|x, y| Ok((x * y * 0.5).exp()))), anywhere),
        ("ln", Box::new(field2(|x, y| (x * x + y).ln())), positive),
        ("sin", Box::new(field2(|x, y| Ok((x * 1.3 - y).sin()))), anywhere),
        ("cos", Box::new(field2(|x, y| Ok((x * y).cos()))), anywhere),
        ("arctan", Box::new(field2(|x, y| Ok((x * x - y).atan()))), anywhere),
        ("sqrt", Box::new(field2(|x, y| (x * x + y * y + 0.5).sqrt())), anywhere),
        ("atan2", Box::new(field2(|x, y| (y + 0.1).atan2(&(x - 0.2)))), positive),
    ]
}

#[test]
fn every_elementary_op_passes_fd_at_seeded_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for (name, field, sampler) in elementary_fields() {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = sampler(&mut rng);
            worst = worst.max(fd_validate(field.as_ref(), &p, 1e-4).unwrap());
        }
        assert!(worst < 1e-5, "{name}: {worst:e}");
    }
}

#[test]
fn three_variable_jets() {
    let field = FnField::new(3, |c: &[Jet3]| Ok((&c[0] * &c[1]).exp() * c[2].cos() + &c[2] * &c[2] * &c[0]));
    assert!(fd_validate(&field, &[0.2, -0.4, 0.9], 1e-4).unwrap() < 1e-6);
}

fn arb_jet() -> impl Strategy<Value = Jet3> {
    (
        -2.0..2.0f64,
        prop::collection::vec(-2.0..2.0f64, 2),
        prop::collection::vec(-2.0..2.0f64, 3),
        prop::collection::vec(-2.0..2.0f64, 4),
    )
        .prop_map(|(v, g, h, t)| Jet3::from_parts(v, g, h, t).unwrap())
}

fn close(a: &Jet3, b: &Jet3, tol: f64) -> bool {
    a.entries().zip(b.entries()).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
}

fn abs(a: &Jet3) -> Jet3 {
    let v: Vec<f64> = a.entries().map(f64::abs).collect();
    Jet3::from_parts(v[0], v[1..3].to_vec(), v[3..6].to_vec(), v[6..10].to_vec()).unwrap()
}

/// Entrywise agreement relative to `scale`, a jet whose entries bound the
/// magnitude of every term summed into the compared entries.
fn close_scaled(a: &Jet3, b: &Jet3, scale: &Jet3, tol: f64) -> bool {
    a.entries()
        .zip(b.entries())
        .zip(scale.entries())
        .all(|((x, y), s)| (x - y).abs() <= tol * s.max(f64::MIN_POSITIVE))
}

proptest! {
    #[test]
    fn mul_commutes(a in arb_jet(), b in arb_jet()) {
        prop_assert!(close_scaled(&(&a * &b), &(&b * &a), &(abs(&a) * abs(&b)), 1e-14));
    }

    #[test]
    fn mul_associates(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
        let scale = abs(&a) * abs(&b) * abs(&c);
        prop_assert!(close_scaled(&(&(&a * &b) * &c), &(&a * &(&b * &c)), &scale, 1e-14));
    }

    #[test]
    fn exp_ln_round_trip(a in arb_jet()) {
        let back = a.exp().ln().unwrap();
        prop_assert!(close(&back, &a, 1e-12));
    }

    #[test]
    fn operations_stay_finite(a in arb_jet(), b in arb_jet()) {
        prop_assert!((&a * &b).exp().sin().is_finite());
        prop_assert!(a.atan().cos().is_finite());
    }
}
