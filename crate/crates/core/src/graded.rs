//! The map `f[u] = u_xx^2 + 2 u_xy^2 + u_yy^2` on homogeneous polynomials.
//!
//! `f` sends the degree-`k` component `A_k` (dimension `k + 1`) into
//! `A_{2k-4}` (dimension `2k - 3`). Its coefficients are quadratic forms
//! `F_{m,n}` in the coefficients of `u`. Arithmetic is exact over the
//! Gaussian rationals.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::rng;
use crate::jets::Jet3;

pub type GaussRat = Complex<BigRational>;

pub fn gauss(re: i64, im: i64) -> GaussRat {
    Complex::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
}

fn real(r: BigRational) -> GaussRat {
    Complex::new(r, BigRational::zero())
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    b
}

pub fn fmt_gauss(c: &GaussRat) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => c.re.to_string(),
        (true, false) => format!("{}i", c.im),
        _ => {
            let sign = if c.im < BigRational::zero() { "-" } else { "+" };
            format!("({} {} {}i)", c.re, sign, c.im.abs())
        }
    }
}

/// `u = sum_i coeffs[i] x^{k-i} y^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogPoly {
    k: usize,
    coeffs: Vec<GaussRat>,
}

impl HomogPoly {
    pub fn new(coeffs: Vec<GaussRat>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a degree-k polynomial needs k + 1 coefficients".into()));
        }
        Ok(Self { k: coeffs.len() - 1, coeffs })
    }

    pub fn from_real(coeffs: &[BigRational]) -> Result<Self> {
        Self::new(coeffs.iter().cloned().map(real).collect())
    }

    pub fn zero(k: usize) -> Self {
        Self { k, coeffs: vec![GaussRat::zero(); k + 1] }
    }

    /// `(x + i y)^k`.
    pub fn holomorphic(k: usize) -> Self {
        let mut ipow = gauss(1, 0);
        let mut coeffs = Vec::with_capacity(k + 1);
        for i in 0..=k {
            coeffs.push(ipow.clone() * real(BigRational::from_integer(binomial(k, i))));
            ipow *= gauss(0, 1);
        }
        Self { k, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im.is_zero())
    }

    pub fn conj(&self) -> Self {
        Self { k: self.k, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        Self { k: self.k, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.k != other.k {
            return Err(Error::DimensionMismatch { expected: self.k, found: other.k });
        }
        Ok(Self { k: self.k, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![GaussRat::zero(); self.k + other.k + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + a * b;
            }
        }
        Self { k: self.k + other.k, coeffs }
    }

    /// `d/dx`; the derivative of a constant is the degree-0 zero.
    pub fn dx(&self) -> Self {
        if self.k == 0 {
            return Self::zero(0);
        }
        let coeffs = (0..self.k)
            .map(|i| &self.coeffs[i] * real(BigRational::from_integer(((self.k - i) as i64).into())))
            .collect();
        Self { k: self.k - 1, coeffs }
    }

    pub fn dy(&self) -> Self {
        if self.k == 0 {
            return Self::zero(0);
        }
        let coeffs = (1..=self.k)
            .map(|i| &self.coeffs[i] * real(BigRational::from_integer((i as i64).into())))
            .collect();
        Self { k: self.k - 1, coeffs }
    }

    pub fn eval(&self, x: &GaussRat, y: &GaussRat) -> GaussRat {
        let mut s = GaussRat::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut t = c.clone();
            for _ in 0..self.k - i {
                t *= x;
            }
            for _ in 0..i {
                t *= y;
            }
            s += t;
        }
        s
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> Result<f64> {
        self.require_real()?;
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| to_f64(&c.re) * x.powi((self.k - i) as i32) * y.powi(i as i32))
            .sum())
    }

    /// Third-order jet of a real polynomial at `p`.
    pub fn jet_at(&self, p: [f64; 2]) -> Result<Jet3> {
        self.require_real()?;
        let c = Jet3::coordinates(&p)?;
        let mut u = Jet3::constant(2, 0.0);
        for (i, a) in self.coeffs.iter().enumerate() {
            let term = c[0].powi((self.k - i) as i32)? * c[1].powi(i as i32)?;
            u = u + term * to_f64(&a.re);
        }
        Ok(u)
    }

    fn require_real(&self) -> Result<()> {
        if self.is_real() {
            Ok(())
        } else {
            Err(Error::InvalidArgument("polynomial has non-real coefficients".into()))
        }
    }
}

impl fmt::Display for HomogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let (px, py) = (self.k - i, i);
            write!(f, "{}", fmt_gauss(c))?;
            match px {
                0 => {}
                1 => f.write_str("*x")?,
                _ => write!(f, "*x^{px}")?,
            }
            match py {
                0 => {}
                1 => f.write_str("*y")?,
                _ => write!(f, "*y^{py}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FImage {
    pub poly: HomogPoly,
    /// `u` lies in `A_0 + A_1`, where `f` vanishes identically.
    pub kernel: bool,
}

/// `f[u]` computed exactly.
pub fn apply_f(u: &HomogPoly) -> FImage {
    if u.k < 2 {
        return FImage { poly: HomogPoly::zero(0), kernel: true };
    }
    let ux = u.dx();
    let uxx = ux.dx();
    let uxy = ux.dy();
    let uyy = u.dy().dy();
    let two = gauss(2, 0);
    let sum = uxx.mul(&uxx).add(&uxy.mul(&uxy).scale(&two)).and_then(|s| s.add(&uyy.mul(&uyy)));
    FImage { poly: sum.expect("equal degrees"), kernel: false }
}

/// `F_{m,n}(alpha) = alpha^T Q alpha` with `Q` symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    /// Exponents of the monomial `x^m y^n` this form is the coefficient of.
    pub m: usize,
    pub n: usize,
    pub matrix: Vec<Vec<BigRational>>,
}

impl QuadraticForm {
    pub fn eval(&self, alpha: &[GaussRat]) -> GaussRat {
        let mut s = GaussRat::zero();
        for (a, row) in alpha.iter().zip(&self.matrix) {
            for (b, q) in alpha.iter().zip(row) {
                if !q.is_zero() {
                    s += a * b * real(q.clone());
                }
            }
        }
        s
    }

    fn to_f64(&self) -> DMatrix<f64> {
        let d = self.matrix.len();
        DMatrix::from_fn(d, d, |i, j| to_f64(&self.matrix[i][j]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSystem {
    pub k: usize,
    pub forms: Vec<QuadraticForm>,
}

fn unit(k: usize, a: usize) -> HomogPoly {
    let mut u = HomogPoly::zero(k);
    u.coeffs[a] = gauss(1, 0);
    u
}

/// The `2k - 3` coefficient forms of `f` on `A_k`, recovered by polarization
/// from `f` at unit vectors and their pairwise sums.
pub fn build_system(k: usize) -> Result<QuadraticSystem> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("f vanishes on A_{k}; need k >= 2")));
    }
    let d = k + 1;
    let out = 2 * k - 3;
    let diag: Vec<HomogPoly> = (0..d).map(|a| apply_f(&unit(k, a)).poly).collect();
    let half = BigRational::new(1.into(), 2.into());
    let mut mats = vec![vec![vec![BigRational::zero(); d]; d]; out];
    for a in 0..d {
        for (m, mat) in mats.iter_mut().enumerate() {
            mat[a][a] = diag[a].coeffs[m].re.clone();
        }
        for b in a + 1..d {
            let pair = apply_f(&unit(k, a).add(&unit(k, b))?).poly;
            for (m, mat) in mats.iter_mut().enumerate() {
                let q = (&pair.coeffs[m].re - &diag[a].coeffs[m].re - &diag[b].coeffs[m].re) * &half;
                mat[a][b] = q.clone();
                mat[b][a] = q;
            }
        }
    }
    let forms = mats
        .into_iter()
        .enumerate()
        .map(|(i, matrix)| QuadraticForm { m: 2 * k - 4 - i, n: i, matrix })
        .collect();
    Ok(QuadraticSystem { k, forms })
}

impl QuadraticSystem {
    pub fn n_vars(&self) -> usize {
        self.k + 1
    }

    pub fn eval(&self, alpha: &[GaussRat]) -> Result<Vec<GaussRat>> {
        if alpha.len() != self.n_vars() {
            return Err(Error::DimensionMismatch { expected: self.n_vars(), found: alpha.len() });
        }
        Ok(self.forms.iter().map(|f| f.eval(alpha)).collect())
    }

    pub fn export(&self) -> SystemExport {
        let frac = |r: &BigRational| format!("{}/{}", r.numer(), r.denom());
        SystemExport {
            k: self.k,
            n_vars: self.n_vars(),
            n_forms: self.forms.len(),
            forms: self
                .forms
                .iter()
                .map(|f| FormExport {
                    m: f.m,
                    n: f.n,
                    matrix: f.matrix.iter().map(|row| row.iter().map(frac).collect()).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormExport {
    pub m: usize,
    pub n: usize,
    /// Symmetric matrix entries as `numerator/denominator`.
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemExport {
    pub k: usize,
    pub n_vars: usize,
    pub n_forms: usize,
    pub forms: Vec<FormExport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HolomorphicReport {
    pub k: usize,
    pub point: Vec<String>,
    pub f_is_zero: bool,
    pub system_is_zero: bool,
    pub point_is_nonzero: bool,
    pub passed: bool,
}

/// Whether `(x + i y)^k` is a nonzero complex root of the system.
pub fn holomorphic_check(k: usize) -> Result<HolomorphicReport> {
    let sys = build_system(k)?;
    let u = HomogPoly::holomorphic(k);
    let f_is_zero = apply_f(&u).poly.is_zero();
    let system_is_zero = sys.eval(&u.coeffs)?.iter().all(Zero::is_zero);
    let point_is_nonzero = !u.is_zero();
    Ok(HolomorphicReport {
        k,
        point: u.coeffs.iter().map(fmt_gauss).collect(),
        f_is_zero,
        system_is_zero,
        point_is_nonzero,
        passed: f_is_zero && system_is_zero && point_is_nonzero,
    })
}

pub const PROBE_ITERATIONS: usize = 200;
pub const PROBE_ZERO: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialityReport {
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub iterations: usize,
    /// Smallest value of `sum F^2` found on the unit sphere.
    pub min_on_sphere: f64,
    /// Trials whose last step moved less than `1e-12`.
    pub converged: usize,
    /// Minima at or below `1e-18`; each would be a nonzero real root.
    pub nonzero_roots: usize,
    pub passed: bool,
    pub note: String,
}

/// Multi-start search for nonzero real roots of the system.
///
/// The forms are homogeneous, so a nonzero root exists iff `sum F^2`
/// vanishes somewhere on the unit sphere. Each trial runs projected
/// gradient descent with Armijo backtracking from a random unit vector.
pub fn real_triviality_check(k: usize, trials: usize, seed: u64) -> Result<TrivialityReport> {
    let sys = build_system(k)?;
    let qs: Vec<DMatrix<f64>> = sys.forms.iter().map(QuadraticForm::to_f64).collect();
    let d = k + 1;
    let objective = |a: &DVector<f64>| -> (f64, DVector<f64>) {
        let mut val = 0.0;
        let mut grad = DVector::zeros(d);
        for q in &qs {
            let qa = q * a;
            let f = a.dot(&qa);
            val += f * f;
            grad += qa * (4.0 * f);
        }
        (val, grad)
    };
    let mut r = rng(seed);
    let mut min_on_sphere = f64::INFINITY;
    let mut converged = 0;
    let mut nonzero_roots = 0;
    for _ in 0..trials {
        let mut a = DVector::from_fn(d, |_, _| r.random_range(-1.0..1.0));
        if a.norm() == 0.0 {
            a[0] = 1.0;
        }
        a /= a.norm();
        let (mut val, mut grad) = objective(&a);
        let mut last_step = f64::INFINITY;
        for _ in 0..PROBE_ITERATIONS {
            let tangent = &grad - &a * grad.dot(&a);
            let slope = tangent.norm_squared();
            if slope == 0.0 {
                last_step = 0.0;
                break;
            }
            let mut t = 1.0 / (1.0 + grad.norm());
            let mut moved = false;
            for _ in 0..60 {
                let mut b = &a - &tangent * t;
                b /= b.norm();
                let (v, g) = objective(&b);
                if v <= val - 1e-4 * t * slope {
                    last_step = (&b - &a).norm();
                    a = b;
                    val = v;
                    grad = g;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                last_step = 0.0;
                break;
            }
        }
        if last_step < 1e-12 {
            converged += 1;
        }
        if val <= PROBE_ZERO {
            nonzero_roots += 1;
        }
        min_on_sphere = min_on_sphere.min(val);
    }
    Ok(TrivialityReport {
        k,
        trials,
        seed,
        iterations: PROBE_ITERATIONS,
        min_on_sphere,
        converged,
        nonzero_roots,
        passed: nonzero_roots == 0,
        note: "numerical evidence from local minimization, not a proof".into(),
    })
}
