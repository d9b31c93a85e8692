//! Third-order truncated Taylor jets in `n <= 4` variables.
//!
//! A [`Jet3`] carries the value, gradient, Hessian and third-derivative
//! tensor of a scalar field at a point. Only the unique entries of the
//! symmetric tensors are stored, in nondecreasing multi-index order, so
//! `hess(0, 1)` and `hess(1, 0)` read the same slot.
//!
//! Products use the Leibniz rule and unary functions use the order-3
//! Faa di Bruno formula
//!
//! ```text
//! (f o u)_i   = f' u_i
//! (f o u)_ij  = f'' u_i u_j + f' u_ij
//! (f o u)_ijk = f''' u_i u_j u_k + f'' (u_ij u_k + u_ik u_j + u_jk u_i) + f' u_ijk
//! ```

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Number of unique second-order entries for `n` variables.
pub const fn hess_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Number of unique third-order entries for `n` variables.
pub const fn third_len(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

fn sort2(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

fn sort3(i: usize, j: usize, k: usize) -> (usize, usize, usize) {
    let mut v = [i, j, k];
    v.sort_unstable();
    (v[0], v[1], v[2])
}

/// Slot of `(i, j)` in the canonical Hessian storage.
pub fn hess_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = sort2(i, j);
    // pairs (a, b) with a < i come first: n + (n - 1) + ... + (n - i + 1)
    i * (2 * n + 1 - i) / 2 + (j - i)
}

/// Slot of `(i, j, k)` in the canonical third-order storage.
pub fn third_index(n: usize, i: usize, j: usize, k: usize) -> usize {
    let (i, j, k) = sort3(i, j, k);
    let mut idx = 0;
    for a in 0..i {
        idx += hess_len(n - a);
    }
    for b in i..j {
        idx += n - b;
    }
    idx + (k - j)
}

/// All `(i, j)` with `i <= j < n`, in storage order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(hess_len(n));
    for i in 0..n {
        for j in i..n {
            out.push((i, j));
        }
    }
    out
}

/// All `(i, j, k)` with `i <= j <= k < n`, in storage order.
pub fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(third_len(n));
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                out.push((i, j, k));
            }
        }
    }
    out
}

#[derive(Clone, PartialEq)]
pub struct Jet3 {
    n: usize,
    val: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    third: Vec<f64>,
}

impl fmt::Debug for Jet3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet3")
            .field("n", &self.n)
            .field("val", &self.val)
            .field("grad", &self.grad)
            .field("hess", &self.hess)
            .field("third", &self.third)
            .finish()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

impl Jet3 {
    pub fn constant(n: usize, value: f64) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "unsupported jet dimension {n}");
        Self {
            n,
            val: value,
            grad: vec![0.0; n],
            hess: vec![0.0; hess_len(n)],
            third: vec![0.0; third_len(n)],
        }
    }

    /// Jet of the coordinate function `x_component` at `point`.
    pub fn seed(point: &[f64], component: usize) -> Result<Self> {
        let n = point.len();
        check_dim(n)?;
        if component >= n {
            return Err(Error::IndexOutOfRange { index: component, n });
        }
        let mut jet = Self::constant(n, point[component]);
        jet.grad[component] = 1.0;
        Ok(jet)
    }

    /// Jets of every coordinate function at `point`.
    pub fn coordinates(point: &[f64]) -> Result<Vec<Self>> {
        (0..point.len()).map(|c| Self::seed(point, c)).collect()
    }

    /// Builds a jet from raw canonical storage.
    pub fn from_parts(val: f64, grad: Vec<f64>, hess: Vec<f64>, third: Vec<f64>) -> Result<Self> {
        let n = grad.len();
        check_dim(n)?;
        if hess.len() != hess_len(n) {
            return Err(Error::DimensionMismatch { expected: hess_len(n), found: hess.len() });
        }
        if third.len() != third_len(n) {
            return Err(Error::DimensionMismatch { expected: third_len(n), found: third.len() });
        }
        Ok(Self { n, val, grad, hess, third })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn value(&self) -> f64 {
        self.val
    }

    pub fn grad(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[hess_index(self.n, i, j)]
    }

    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[third_index(self.n, i, j, k)]
    }

    pub fn grad_slice(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess_slice(&self) -> &[f64] {
        &self.hess
    }

    pub fn third_slice(&self) -> &[f64] {
        &self.third
    }

    /// Every stored entry: value, gradient, Hessian, third tensor.
    pub fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.val)
            .chain(self.grad.iter().copied())
            .chain(self.hess.iter().copied())
            .chain(self.third.iter().copied())
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(f64::is_finite)
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch { expected: self.n, found: other.n })
        } else {
            Ok(())
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "jet dimension mismatch");
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect();
        Self {
            n: self.n,
            val: op(self.val, other.val),
            grad: zip(&self.grad, &other.grad),
            hess: zip(&self.hess, &other.hess),
            third: zip(&self.third, &other.third),
        }
    }

    fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            val: op(self.val),
            grad: self.grad.iter().map(|x| op(*x)).collect(),
            hess: self.hess.iter().map(|x| op(*x)).collect(),
            third: self.third.iter().map(|x| op(*x)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.val += c;
        out
    }

    /// Leibniz product.
    pub fn mul_jet(&self, b: &Self) -> Self {
        assert_eq!(self.n, b.n, "jet dimension mismatch");
        let a = self;
        let n = a.n;
        let mut out = Self::constant(n, a.val * b.val);
        for i in 0..n {
            out.grad[i] = a.grad[i] * b.val + a.val * b.grad[i];
        }
        for (s, (i, j)) in pairs(n).into_iter().enumerate() {
            out.hess[s] = a.hess[s] * b.val
                + a.grad[i] * b.grad[j]
                + a.grad[j] * b.grad[i]
                + a.val * b.hess[s];
        }
        for (s, (i, j, k)) in triples(n).into_iter().enumerate() {
            let ah = |p, q| a.hess[hess_index(n, p, q)];
            let bh = |p, q| b.hess[hess_index(n, p, q)];
            out.third[s] = a.third[s] * b.val
                + ah(i, j) * b.grad[k]
                + ah(i, k) * b.grad[j]
                + ah(j, k) * b.grad[i]
                + a.grad[i] * bh(j, k)
                + a.grad[j] * bh(i, k)
                + a.grad[k] * bh(i, j)
                + a.val * b.third[s];
        }
        out
    }

    /// Composes a scalar function with this jet given `[f, f', f'', f''']`
    /// evaluated at the jet's value.
    pub fn compose(&self, d: [f64; 4]) -> Self {
        let n = self.n;
        let u = self;
        let mut out = Self::constant(n, d[0]);
        for i in 0..n {
            out.grad[i] = d[1] * u.grad[i];
        }
        for (s, (i, j)) in pairs(n).into_iter().enumerate() {
            out.hess[s] = d[2] * u.grad[i] * u.grad[j] + d[1] * u.hess[s];
        }
        for (s, (i, j, k)) in triples(n).into_iter().enumerate() {
            let uh = |p, q| u.hess[hess_index(n, p, q)];
            out.third[s] = d[3] * u.grad[i] * u.grad[j] * u.grad[k]
                + d[2] * (uh(i, j) * u.grad[k] + uh(i, k) * u.grad[j] + uh(j, k) * u.grad[i])
                + d[1] * u.third[s];
        }
        out
    }

    pub fn recip(&self) -> Result<Self> {
        let a = self.val;
        if a == 0.0 {
            return Err(Error::DivisionByZero);
        }
        let r = 1.0 / a;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.mul_jet(&other.recip()?))
    }

    pub fn exp(&self) -> Self {
        let e = self.val.exp();
        self.compose([e; 4])
    }

    pub fn ln(&self) -> Result<Self> {
        let a = self.val;
        if !(a > 0.0) {
            return Err(Error::Domain { op: "ln", value: a });
        }
        let r = 1.0 / a;
        Ok(self.compose([a.ln(), r, -r * r, 2.0 * r * r * r]))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn atan(&self) -> Self {
        let a = self.val;
        let q = 1.0 / (1.0 + a * a);
        self.compose([a.atan(), q, -2.0 * a * q * q, (6.0 * a * a - 2.0) * q * q * q])
    }

    pub fn sqrt(&self) -> Result<Self> {
        let a = self.val;
        if !(a > 0.0) {
            return Err(Error::Domain { op: "sqrt", value: a });
        }
        let r = a.sqrt();
        Ok(self.compose([r, 0.5 / r, -0.25 / (a * r), 0.375 / (a * a * r)]))
    }

    /// `self^p` for rational `p`. Non-integer exponents need a positive base;
    /// negative integer exponents need a nonzero base.
    pub fn pow_rational(&self, p: Rational64) -> Result<Self> {
        let a = self.val;
        if p.is_integer() {
            let k = *p.numer();
            if k < 0 && a == 0.0 {
                return Err(Error::DivisionByZero);
            }
            let k = i32::try_from(k).map_err(|_| Error::InvalidArgument(format!("exponent {p} too large")))?;
            // falling factorial k (k-1) ... (k-m+1) a^(k-m), exactly zero once it passes 0
            let term = |m: i32| -> f64 {
                let mut c = 1.0;
                for t in 0..m {
                    c *= f64::from(k - t);
                }
                if c == 0.0 {
                    0.0
                } else {
                    c * a.powi(k - m)
                }
            };
            return Ok(self.compose([term(0), term(1), term(2), term(3)]));
        }
        if !(a > 0.0) {
            return Err(Error::Domain { op: "pow_rational", value: a });
        }
        let r = p.to_f64().expect("finite rational");
        let v = a.powf(r);
        let d1 = r * v / a;
        let d2 = (r - 1.0) * d1 / a;
        let d3 = (r - 2.0) * d2 / a;
        Ok(self.compose([v, d1, d2, d3]))
    }

    pub fn powi(&self, k: i32) -> Result<Self> {
        self.pow_rational(Rational64::from_integer(i64::from(k)))
    }

    /// Four-quadrant angle of `(x, y) = (other, self)`.
    pub fn atan2(&self, x: &Self) -> Result<Self> {
        self.same_dim(x)?;
        let (yv, xv) = (self.val, x.val);
        if xv == 0.0 && yv == 0.0 {
            return Err(Error::Domain { op: "atan2", value: 0.0 });
        }
        // derivatives agree with arctan(y/x) or -arctan(x/y) up to a locally constant shift
        let mut out = if xv.abs() >= yv.abs() {
            self.div(x)?.atan()
        } else {
            x.div(self)?.atan().scale(-1.0)
        };
        out.val = yv.atan2(xv);
        Ok(out)
    }
}

impl Add for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: &Jet3) -> Jet3 {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: &Jet3) -> Jet3 {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet3 {
            type Output = Jet3;
            fn $m(self, rhs: Jet3) -> Jet3 {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet3> for Jet3 {
            type Output = Jet3;
            fn $m(self, rhs: &Jet3) -> Jet3 {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet3> for &Jet3 {
            type Output = Jet3;
            fn $m(self, rhs: Jet3) -> Jet3 {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet3 {
    type Output = Jet3;
    fn add(self, rhs: f64) -> Jet3 {
        self.add_scalar(rhs)
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: f64) -> Jet3 {
        self.add_scalar(rhs)
    }
}

impl Sub<f64> for &Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: f64) -> Jet3 {
        self.add_scalar(-rhs)
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: f64) -> Jet3 {
        self.add_scalar(-rhs)
    }
}

impl Mul<f64> for &Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

impl Mul<&Jet3> for f64 {
    type Output = Jet3;
    fn mul(self, rhs: &Jet3) -> Jet3 {
        rhs.scale(self)
    }
}

impl Mul<Jet3> for f64 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        rhs.scale(self)
    }
}

/// Elementary operations accepted by [`combine`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    PowRational(Rational64),
    Exp,
    Ln,
    Sin,
    Cos,
    Arctan,
    Sqrt,
    /// `atan2(args[0], args[1])`, i.e. the angle of the point `(args[1], args[0])`.
    Atan2,
}

impl JetOp {
    pub fn arity(self) -> usize {
        match self {
            JetOp::Add | JetOp::Sub | JetOp::Mul | JetOp::Div | JetOp::Atan2 => 2,
            _ => 1,
        }
    }
}

/// Applies `op` to `args`, checking arity, dimensions and domains.
pub fn combine(op: JetOp, args: &[Jet3]) -> Result<Jet3> {
    if args.len() != op.arity() {
        return Err(Error::InvalidArgument(format!(
            "{op:?} takes {} argument(s), got {}",
            op.arity(),
            args.len()
        )));
    }
    if args.len() == 2 {
        args[0].same_dim(&args[1])?;
    }
    let a = &args[0];
    match op {
        JetOp::Add => Ok(a + &args[1]),
        JetOp::Sub => Ok(a - &args[1]),
        JetOp::Mul => Ok(a * &args[1]),
        JetOp::Div => a.div(&args[1]),
        JetOp::PowRational(p) => a.pow_rational(p),
        JetOp::Exp => Ok(a.exp()),
        JetOp::Ln => a.ln(),
        JetOp::Sin => Ok(a.sin()),
        JetOp::Cos => Ok(a.cos()),
        JetOp::Arctan => Ok(a.atan()),
        JetOp::Sqrt => a.sqrt(),
        JetOp::Atan2 => a.atan2(&args[1]),
    }
}

/// A scalar field that can be evaluated as a third-order jet.
pub trait JetField {
    fn dim(&self) -> usize;
    fn jet_at(&self, point: &[f64]) -> Result<Jet3>;

    /// Whether `point` lies in the field's declared domain.
    fn contains(&self, _point: &[f64]) -> bool {
        true
    }

    fn domain_label(&self) -> String {
        format!("R^{}", self.dim())
    }
}

/// Wraps a closure over coordinate jets as a [`JetField`].
pub struct FnField<F> {
    n: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&[Jet3]) -> Result<Jet3>,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> JetField for FnField<F>
where
    F: Fn(&[Jet3]) -> Result<Jet3>,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn jet_at(&self, point: &[f64]) -> Result<Jet3> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: point.len() });
        }
        (self.f)(&Jet3::coordinates(point)?)
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Worst relative gap between the jet of `field` at `point` and central
/// finite differences with step `h`.
///
/// Each order is differenced from the order below it: gradients from
/// values, Hessian entries from gradients at `point +- h e_i`, third
/// entries from Hessian entries. Differencing the values three times
/// would lose every significant digit to cancellation at `h = 1e-4`.
/// Gaps are measured as `|jet - fd| / max(|jet|, |fd|, 1)`.
pub fn fd_validate(field: &dyn JetField, point: &[f64], h: f64) -> Result<f64> {
    let n = field.dim();
    if point.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: point.len() });
    }
    let center = field.jet_at(point)?;
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let mut p = point.to_vec();
        p[i] += h;
        plus.push(field.jet_at(&p)?);
        p[i] -= 2.0 * h;
        minus.push(field.jet_at(&p)?);
    }
    let d = |i: usize, f: &dyn Fn(&Jet3) -> f64| (f(&plus[i]) - f(&minus[i])) / (2.0 * h);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        worst = worst.max(rel_gap(center.grad(i), d(i, &|j| j.value())));
    }
    for (i, j) in pairs(n) {
        worst = worst.max(rel_gap(center.hess(i, j), d(i, &|jet| jet.grad(j))));
    }
    for (i, j, k) in triples(n) {
        worst = worst.max(rel_gap(center.third(i, j, k), d(i, &|jet| jet.hess(j, k))));
    }
    Ok(worst)
}
