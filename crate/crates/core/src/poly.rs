//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`Poly`] has a fixed variable count; monomials are exponent vectors.
//! Variable names are supplied only when rendering or parsing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Exponents = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

/// Integer or ratio of integers as an exact rational.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn monomial(coeff: BigRational, exps: Exponents) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, coeff);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> BigRational {
        self.terms.get(exps).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Constant term if the polynomial is constant.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).cloned(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|e| e[var] > 0)
    }

    fn add_term(&mut self, exps: Exponents, c: BigRational) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn diff(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c * int(i64::from(e[var])));
        }
        out
    }

    /// Embed into a larger variable set; variable `i` becomes `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars);
        let mut out = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, k) in e.iter().enumerate() {
                e2[map[i]] += k;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    pub fn eval_exact(&self, point: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (x, k) in point.iter().zip(e) {
                for _ in 0..*k {
                    m *= x;
                }
            }
            s += m;
        }
        s
    }

    pub fn to_f64(&self) -> FloatPoly {
        FloatPoly {
            terms: self.terms.iter().map(|(e, c)| (c.to_f64().unwrap_or(f64::NAN), e.clone())).collect(),
        }
    }

    /// Rational `q` with `self == q * other`, if one exists.
    pub fn ratio_to(&self, other: &Self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        let (e, c) = other.terms.iter().next()?;
        let q = self.coeff(e) / c;
        (other.scale(&q) == *self).then_some(q)
    }

    /// Canonical text: graded order, highest degree first, then reverse
    /// lexicographic on exponents (earlier variables first).
    pub fn render(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&Exponents> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut s = String::new();
        for (idx, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = c.is_negative();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| if *k == 1 { names[i].to_string() } else { format!("{}^{}", names[i], k) })
                .collect();
            if mono.is_empty() {
                let _ = write!(s, "{a}");
            } else {
                if !a.is_one() {
                    let _ = write!(s, "{a}*");
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-BigRational::one())
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Floating copy of a polynomial for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct FloatPoly {
    terms: Vec<(f64, Exponents)>,
}

impl FloatPoly {
    fn monomials<'a>(&'a self, point: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
        self.terms.iter().map(move |(c, e)| {
            let mut m = *c;
            for (x, k) in point.iter().zip(e) {
                if *k > 0 {
                    m *= x.powi(*k as i32);
                }
            }
            m
        })
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.monomials(point).sum()
    }

    /// Value together with the sum of absolute monomial values.
    pub fn eval_with_scale(&self, point: &[f64]) -> (f64, f64) {
        self.monomials(point).fold((0.0, 0.0), |(v, s), m| (v + m, s + m.abs()))
    }
}

/// Parse `text` as a polynomial in the named variables.
///
/// Grammar: sums and differences of products; factors are rational or
/// decimal numbers, variable names, parenthesized expressions, optionally
/// raised to a nonnegative integer power with `^`. Division is allowed by
/// nonzero constants only.
pub fn parse(text: &str, names: &[&str]) -> Result<Poly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, names };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    names: &'a [&'a str],
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' { acc + t } else { acc - t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let f = self.unary()?;
            if c == b'*' {
                acc = acc * f;
            } else {
                let d = f.as_constant().ok_or_else(|| self.err("division by a non-constant"))?;
                if d.is_zero() {
                    return Err(self.err("division by zero"));
                }
                acc = acc.scale(&d.recip());
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let k: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.err("expected a nonnegative integer exponent"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        let n = self.names.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let v = parse_decimal(s).ok_or_else(|| Error::Parse { pos: start, msg: format!("bad number '{s}'") })?;
                Ok(Poly::constant(n, v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let i = self
                    .names
                    .iter()
                    .position(|v| *v == s)
                    .ok_or_else(|| Error::Parse { pos: start, msg: format!("unknown variable '{s}'") })?;
                Ok(Poly::var(n, i))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (whole, frac) = match s.split_once('.') {
        Some((w, f)) => (w, f),
        None => (s, ""),
    };
    if (whole.is_empty() && frac.is_empty()) || frac.contains('.') {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    const XYU: [&str; 3] = ["x", "y", "u"];

    #[test]
    fn arithmetic_and_render() {
        let x = Poly::var(3, 0);
        let y = Poly::var(3, 1);
        let p = (&x + &y).pow(2);
        assert_eq!(p.render(&XYU), "x^2 + 2*x*y + y^2");
        assert_eq!((&p - &p).render(&XYU), "0");
        assert_eq!(p.diff(0).render(&XYU), "2*x + 2*y");
    }

    #[test]
    fn parse_round_trip() {
        let p = parse("3/4*x^2 - (y - u)*2 + 1", &XYU).unwrap();
        assert_eq!(p.render(&XYU), "3/4*x^2 - 2*y + 2*u + 1");
        assert_eq!(parse(&p.render(&XYU), &XYU).unwrap(), p);
        assert_eq!(parse("0.25*x", &XYU).unwrap(), Poly::var(3, 0).scale(&rat(1, 4)));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse("x/y", &XYU), Err(Error::Parse { .. })));
        assert!(matches!(parse("z", &XYU), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse("x +", &XYU), Err(Error::Parse { .. })));
        assert!(matches!(parse("(x", &XYU), Err(Error::Parse { .. })));
        assert!(matches!(parse("x/0", &XYU), Err(Error::Parse { .. })));
    }

    #[test]
    fn ratio_detection() {
        let x = Poly::var(3, 0);
        let p = &x * &Poly::var(3, 2);
        assert_eq!(p.scale(&rat(-5, 3)).ratio_to(&p), Some(rat(-5, 3)));
        assert_eq!((&p + &x).ratio_to(&p), None);
    }

    #[test]
    fn embed_and_eval() {
        let p = parse("x*y + u^2", &XYU).unwrap();
        let q = p.embed(5, &[0, 2, 4]);
        assert_eq!(q.eval_exact(&[int(2), int(9), int(3), int(9), int(5)]), int(31));
        assert_eq!(q.to_f64().eval_with_scale(&[2.0, 0.0, -3.0, 0.0, 1.0]), (-5.0, 7.0));
    }
}
