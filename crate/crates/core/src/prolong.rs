//! Jet-space polynomial algebra: total derivatives, prolongation of point
//! vector fields, determining equations and invariance checks on the
//! solution manifold.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::FromPrimitive;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::OperatorId;
use crate::jets::{Jet3, JetField};
use crate::liealg::VectorField;
use crate::poly::{int, Poly};

/// Polynomial over the coordinates of a [`JetSpace`].
pub type JetPoly = Poly;

/// Unordered derivative multi-index, stored sorted.
pub type MultiIndex = Vec<usize>;

const AXES: [&str; 4] = ["x", "y", "z", "w"];

/// Coordinates `x_1..x_n, u, u_J (1 <= |J| <= order)`; derivative variables
/// are listed by order, then lexicographically by sorted multi-index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetSpace {
    n: usize,
    order: usize,
    derivs: Vec<MultiIndex>,
    names: Vec<String>,
}

fn multisets(n: usize, len: usize) -> Vec<MultiIndex> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for m in multisets(n, len - 1) {
        let start = m.last().copied().unwrap_or(0);
        for i in start..n {
            let mut m2 = m.clone();
            m2.push(i);
            out.push(m2);
        }
    }
    out
}

impl JetSpace {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if !(1..=AXES.len()).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let derivs: Vec<MultiIndex> = (1..=order).flat_map(|k| multisets(n, k)).collect();
        let mut names: Vec<String> = AXES[..n].iter().map(|s| s.to_string()).collect();
        names.push("u".into());
        for j in &derivs {
            names.push(format!("u_{}", j.iter().map(|&i| AXES[i]).collect::<String>()));
        }
        Ok(Self { n, order, derivs, names })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.n + 1 + self.derivs.len()
    }

    pub fn names(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    pub fn u_index(&self) -> usize {
        self.n
    }

    /// Variable index of `u_J`; the empty index is `u` itself.
    pub fn index_of(&self, j: &[usize]) -> Option<usize> {
        if j.is_empty() {
            return Some(self.n);
        }
        let mut s = j.to_vec();
        s.sort_unstable();
        self.derivs.iter().position(|d| *d == s).map(|p| self.n + 1 + p)
    }

    /// Multi-index of a variable, or `None` for base coordinates.
    pub fn multi_index(&self, var: usize) -> Option<&[usize]> {
        if var == self.n {
            Some(&[])
        } else if var > self.n {
            Some(&self.derivs[var - self.n - 1])
        } else {
            None
        }
    }

    pub fn derivatives(&self) -> &[MultiIndex] {
        &self.derivs
    }

    pub fn var(&self, j: &[usize]) -> JetPoly {
        Poly::var(self.nvars(), self.index_of(j).expect("multi-index within order"))
    }

    /// Lift a polynomial in `(x_1..x_n, u)` into the jet space.
    pub fn lift(&self, p: &Poly) -> JetPoly {
        let map: Vec<usize> = (0..=self.n).collect();
        p.embed(self.nvars(), &map)
    }

    pub fn render(&self, p: &JetPoly) -> String {
        p.render(&self.names())
    }

    pub fn parse(&self, text: &str) -> Result<JetPoly> {
        crate::poly::parse(text, &self.names())
    }

    /// Coordinates of a point and a jet, in variable order.
    pub fn coordinates(&self, point: &[f64], jet: &Jet3) -> Result<Vec<f64>> {
        if jet.dim() != self.n || point.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: jet.dim() });
        }
        if self.order > 3 {
            return Err(Error::OrderOverflow(self.order));
        }
        let mut v = point.to_vec();
        v.push(jet.value());
        for j in &self.derivs {
            v.push(match j.len() {
                1 => jet.grad(j[0]),
                2 => jet.hess(j[0], j[1]),
                _ => jet.third(j[0], j[1], j[2]),
            });
        }
        Ok(v)
    }

    /// Total derivative `D_i p`.
    pub fn total_derivative(&self, p: &JetPoly, i: usize) -> Result<JetPoly> {
        let mut out = p.diff(i);
        for var in self.n..self.nvars() {
            if !p.depends_on(var) {
                continue;
            }
            let j = self.multi_index(var).expect("jet variable");
            if j.len() == self.order {
                return Err(Error::OrderOverflow(self.order + 1));
            }
            let mut next = j.to_vec();
            next.push(i);
            out = out + self.var(&next) * p.diff(var);
        }
        Ok(out)
    }
}

/// A vector field together with its prolongation coefficients `eta^J`.
#[derive(Debug, Clone)]
pub struct ProlongedField {
    pub space: JetSpace,
    pub xi: Vec<JetPoly>,
    pub eta: BTreeMap<MultiIndex, JetPoly>,
}

impl ProlongedField {
    pub fn eta(&self, j: &[usize]) -> Option<&JetPoly> {
        let mut s = j.to_vec();
        s.sort_unstable();
        self.eta.get(&s)
    }
}

fn prolong_step(space: &JetSpace, xi: &[JetPoly], eta_j: &JetPoly, j: &[usize], i: usize) -> Result<JetPoly> {
    let mut next = space.total_derivative(eta_j, i)?;
    for (k, xk) in xi.iter().enumerate() {
        let dxk = space.total_derivative(xk, i)?;
        if dxk.is_zero() {
            continue;
        }
        let mut jk = j.to_vec();
        jk.push(k);
        next = next - dxk * space.var(&jk);
    }
    Ok(next)
}

/// Prolongation to the given order by `eta^{J,i} = D_i eta^J - sum_k (D_i xi_k) u_{J,k}`.
pub fn prolong(vf: &VectorField, order: usize) -> Result<ProlongedField> {
    let space = JetSpace::new(vf.dim(), order)?;
    let xi: Vec<JetPoly> = vf.xi.iter().map(|p| space.lift(p)).collect();
    let mut eta = BTreeMap::new();
    eta.insert(Vec::new(), space.lift(&vf.eta));
    for j in space.derivatives().to_vec() {
        let (i, parent) = j.split_last().expect("nonempty");
        let next = prolong_step(&space, &xi, &eta[parent], parent, *i)?;
        eta.insert(j, next);
    }
    Ok(ProlongedField { space, xi, eta })
}

/// `eta^J` built along an explicit differentiation order, e.g. `[1, 0]` for
/// `D_x` applied after `D_y`.
pub fn eta_along(vf: &VectorField, path: &[usize], order: usize) -> Result<JetPoly> {
    let space = JetSpace::new(vf.dim(), order)?;
    let xi: Vec<JetPoly> = vf.xi.iter().map(|p| space.lift(p)).collect();
    let mut cur = space.lift(&vf.eta);
    for step in 0..path.len() {
        cur = prolong_step(&space, &xi, &cur, &path[..step], path[step])?;
    }
    Ok(cur)
}

/// `X^(k) E`.
pub fn apply_prolonged(pf: &ProlongedField, e: &JetPoly) -> Result<JetPoly> {
    let space = &pf.space;
    if e.nvars() != space.nvars() {
        return Err(Error::DimensionMismatch { expected: space.nvars(), found: e.nvars() });
    }
    let mut out = Poly::zero(space.nvars());
    for (k, xk) in pf.xi.iter().enumerate() {
        if !xk.is_zero() && e.depends_on(k) {
            out = out + xk * &e.diff(k);
        }
    }
    for (j, ej) in &pf.eta {
        let var = space.index_of(j).expect("prolonged index");
        if !ej.is_zero() && e.depends_on(var) {
            out = out + ej * &e.diff(var);
        }
    }
    Ok(out)
}

/// `f = sum_{i,j} u_{ij}^2` (off-diagonal entries counted twice).
pub fn f_poly(space: &JetSpace) -> Result<JetPoly> {
    if space.order() < 2 {
        return Err(Error::OrderOverflow(2));
    }
    let mut f = Poly::zero(space.nvars());
    for i in 0..space.dim() {
        for j in 0..space.dim() {
            let v = space.var(&[i, j]);
            f = f + &v * &v;
        }
    }
    Ok(f)
}

/// Left-hand side minus right-hand side of the operator as a jet polynomial.
pub fn operator_poly(space: &JetSpace, op: OperatorId) -> Result<JetPoly> {
    if space.order() < op.order() {
        return Err(Error::OrderOverflow(op.order()));
    }
    let n = space.dim();
    match op {
        OperatorId::InfPolylap => {
            let f = f_poly(space)?;
            let grad: Vec<JetPoly> = (0..n).map(|i| space.total_derivative(&f, i)).collect::<Result<_>>()?;
            let mut e = Poly::zero(space.nvars());
            for i in 0..n {
                for j in 0..n {
                    e = e + &grad[i] * &grad[j] * space.var(&[i, j]);
                }
            }
            Ok(e)
        }
        OperatorId::ReducedInfPolylap(c) | OperatorId::EikonalF(c) => {
            let c = BigRational::from_f64(c).ok_or_else(|| Error::InvalidArgument(format!("non-finite constant {c}")))?;
            Ok(f_poly(space)? - Poly::constant(space.nvars(), c))
        }
        OperatorId::InfLap => {
            let mut e = Poly::zero(space.nvars());
            for i in 0..n {
                for j in 0..n {
                    e = e + space.var(&[i]) * space.var(&[j]) * space.var(&[i, j]);
                }
            }
            Ok(e)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeterminingSystem {
    Full16,
    Reduced12,
}

impl std::str::FromStr for DeterminingSystem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full16" => Ok(Self::Full16),
            "reduced12" => Ok(Self::Reduced12),
            _ => Err(Error::UnknownId { kind: "system", id: s.into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterminingCheck {
    pub label: String,
    pub holds: bool,
    pub value: String,
}

/// Evaluates each determining equation on a two-dimensional candidate and
/// reports which vanish identically.
pub fn check_determining(vf: &VectorField, system: DeterminingSystem) -> Result<Vec<DeterminingCheck>> {
    if vf.dim() != 2 {
        return Err(Error::UnsupportedDimension(vf.dim()));
    }
    const X: usize = 0;
    const Y: usize = 1;
    const U: usize = 2;
    let (xi1, xi2, eta) = (&vf.xi[0], &vf.xi[1], &vf.eta);
    let d = |p: &Poly, vars: &[usize]| vars.iter().fold(p.clone(), |acc, v| acc.diff(*v));
    let mut eqs: Vec<(String, Poly)> = Vec::new();
    match system {
        DeterminingSystem::Full16 => {
            for (name, xi) in [("xi1", xi1), ("xi2", xi2)] {
                for (suffix, vars) in [("u", &[U][..]), ("xx", &[X, X]), ("xy", &[X, Y]), ("yy", &[Y, Y])] {
                    eqs.push((format!("{name}_{suffix}"), d(xi, vars)));
                }
            }
            for (suffix, vars) in
                [("xx", &[X, X][..]), ("xy", &[X, Y]), ("yy", &[Y, Y]), ("xu", &[X, U]), ("yu", &[Y, U]), ("uu", &[U, U])]
            {
                eqs.push((format!("eta_{suffix}"), d(eta, vars)));
            }
            eqs.push(("xi1_y + xi2_x".into(), d(xi1, &[Y]) + d(xi2, &[X])));
            eqs.push(("xi1_x - xi2_y".into(), d(xi1, &[X]) - d(xi2, &[Y])));
        }
        DeterminingSystem::Reduced12 => {
            eqs.push(("xi2_xx".into(), d(xi2, &[X, X])));
            eqs.push(("xi2_u".into(), d(xi2, &[U])));
            eqs.push(("xi1_y + xi2_x".into(), d(xi1, &[Y]) + d(xi2, &[X])));
            eqs.push(("xi1_x - xi2_y".into(), d(xi1, &[X]) - d(xi2, &[Y])));
            for (suffix, vars) in [("xx", &[X, X][..]), ("xy", &[X, Y]), ("yy", &[Y, Y])] {
                eqs.push((format!("eta_{suffix}"), d(eta, vars)));
            }
            eqs.push(("eta_u - 2*xi1_x".into(), d(eta, &[U]) - d(xi1, &[X]).scale(&int(2))));
            for (suffix, vars) in [("xx", &[X, X][..]), ("xy", &[X, Y]), ("xu", &[X, U]), ("u", &[U])] {
                eqs.push((format!("xi1_{suffix}"), d(xi1, vars)));
            }
        }
    }
    let names = VectorField::names(2);
    Ok(eqs.into_iter().map(|(label, p)| DeterminingCheck { label, holds: p.is_zero(), value: p.render(&names) }).collect())
}

/// `xi1 = c1 x + c2 y + c3, xi2 = -c2 x + c1 y + c4, eta = c5 x + c6 y + c7 u + c8`.
pub fn general_solution_full(c: &[BigRational; 8]) -> VectorField {
    let x = Poly::var(3, 0);
    let y = Poly::var(3, 1);
    let u = Poly::var(3, 2);
    let k = |v: &BigRational| Poly::constant(3, v.clone());
    VectorField::new(
        vec![x.scale(&c[0]) + y.scale(&c[1]) + k(&c[2]), x.scale(&-c[1].clone()) + y.scale(&c[0]) + k(&c[3])],
        x.scale(&c[4]) + y.scale(&c[5]) + u.scale(&c[6]) + k(&c[7]),
    )
}

/// `xi1 = c1 x - c2 y + c3, xi2 = c2 x + c1 y + c4, eta = c5 x + c6 y + 2 c1 u + c7`.
pub fn general_solution_reduced(c: &[BigRational; 7]) -> VectorField {
    let x = Poly::var(3, 0);
    let y = Poly::var(3, 1);
    let u = Poly::var(3, 2);
    let k = |v: &BigRational| Poly::constant(3, v.clone());
    VectorField::new(
        vec![x.scale(&c[0]) - y.scale(&c[1]) + k(&c[2]), x.scale(&c[1]) + y.scale(&c[0]) + k(&c[3])],
        x.scale(&c[4]) + y.scale(&c[5]) + u.scale(&(&c[0] * int(2))) + k(&c[6]),
    )
}

/// `(1 + x) d/dx`, which is not a symmetry of either equation.
pub fn negative_control() -> VectorField {
    let x = Poly::var(3, 0);
    VectorField::new(vec![Poly::one(3) + x, Poly::zero(3)], Poly::zero(3))
}

/// Parse a candidate file with lines `xi1 = ...`, `xi2 = ...`, `eta = ...`
/// (polynomials in x, y, u). Blank lines and `#` comments are ignored.
pub fn parse_candidate(text: &str) -> Result<VectorField> {
    let names = VectorField::names(2);
    let mut parts: [Option<Poly>; 3] = [None, None, None];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { pos: lineno + 1, msg: "expected 'name = expression'".into() })?;
        let slot = match lhs.trim() {
            "xi1" => 0,
            "xi2" => 1,
            "eta" => 2,
            other => return Err(Error::Parse { pos: lineno + 1, msg: format!("unknown component '{other}'") }),
        };
        parts[slot] = Some(crate::poly::parse(rhs, &names).map_err(|e| match e {
            Error::Parse { pos, msg } => Error::Parse { pos, msg: format!("line {}: {msg}", lineno + 1) },
            other => other,
        })?);
    }
    let [a, b, c] = parts;
    let missing = |n: &str| Error::Parse { pos: 0, msg: format!("missing component '{n}'") };
    Ok(VectorField::new(vec![a.ok_or_else(|| missing("xi1"))?, b.ok_or_else(|| missing("xi2"))?], c.ok_or_else(|| missing("eta"))?))
}

/// Jet-coordinate samples from a solution field at the given base points.
pub fn solution_samples(space: &JetSpace, field: &dyn JetField, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    points.iter().map(|p| space.coordinates(p, &field.jet_at(p)?)).collect()
}

/// Generic points of `{Pi = 0}` in the two-dimensional order-3 jet space:
/// all coordinates but `u_yyy` uniform in [-2, 2], then `u_yyy` from the
/// quadratic the equation becomes in it (smaller root).
pub fn sample_polylap_manifold<R: Rng>(rng: &mut R, count: usize) -> Vec<Vec<f64>> {
    let space = JetSpace::new(2, 3).expect("n = 2");
    let ix = |j: &[usize]| space.index_of(j).expect("order 3");
    let t_idx = ix(&[1, 1, 1]);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..space.nvars()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = |j: &[usize]| v[ix(j)];
        let (uxx, uxy, uyy) = (g(&[0, 0]), g(&[0, 1]), g(&[1, 1]));
        let fx = 2.0 * uxx * g(&[0, 0, 0]) + 4.0 * uxy * g(&[0, 0, 1]) + 2.0 * uyy * g(&[0, 1, 1]);
        let a = 2.0 * uxx * g(&[0, 0, 1]) + 4.0 * uxy * g(&[0, 1, 1]);
        let b = 2.0 * uyy;
        if b.abs() < 1e-8 {
            continue;
        }
        let qa = uyy * b * b;
        let qb = 2.0 * fx * uxy * b + 2.0 * uyy * a * b;
        let qc = fx * fx * uxx + 2.0 * fx * uxy * a + uyy * a * a;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            continue;
        }
        let q = -0.5 * (qb + qb.signum() * disc.sqrt());
        let roots = [q / qa, if q != 0.0 { qc / q } else { q / qa }];
        let t = if roots[0].abs() <= roots[1].abs() { roots[0] } else { roots[1] };
        if !t.is_finite() {
            continue;
        }
        let mut v = v;
        v[t_idx] = t;
        out.push(v);
    }
    out
}

/// Generic points of `{f = c}` in the order-2 jet space of dimension `n`:
/// a random symmetric Hessian rescaled to Frobenius norm `sqrt(c)`.
pub fn sample_reduced_manifold<R: Rng>(rng: &mut R, n: usize, c: f64, count: usize) -> Result<Vec<Vec<f64>>> {
    if c <= 0.0 {
        return Err(Error::EmptyDomain(format!("f = {c} has no real points")));
    }
    let space = JetSpace::new(n, 2)?;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v: Vec<f64> = (0..space.nvars()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let hess: Vec<usize> = space.derivatives().iter().filter(|j| j.len() == 2).map(|j| space.index_of(j).unwrap()).collect();
        let frob: f64 = space
            .derivatives()
            .iter()
            .filter(|j| j.len() == 2)
            .map(|j| {
                let w = if j[0] == j[1] { 1.0 } else { 2.0 };
                w * v[space.index_of(j).unwrap()].powi(2)
            })
            .sum();
        if frob < 1e-6 {
            continue;
        }
        let s = (c / frob).sqrt();
        for k in hess {
            v[k] *= s;
        }
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub field: String,
    pub operator: OperatorId,
    pub n_samples: usize,
    pub max_normalized: f64,
    pub mean_normalized: f64,
    /// `X^(k) E = q E` for this rational `q`, when the identity holds exactly.
    pub exact_multiple: Option<String>,
}

/// Evaluates `X^(k) E` on samples of `{E = 0}`; the value at each sample is
/// normalized by one plus the sum of absolute monomial values.
pub fn invariance_on_manifold(vf: &VectorField, op: OperatorId, samples: &[Vec<f64>]) -> Result<InvarianceReport> {
    let pf = prolong(vf, op.order())?;
    let e = operator_poly(&pf.space, op)?;
    let q = apply_prolonged(&pf, &e)?;
    let ef = e.to_f64();
    let qf = q.to_f64();
    let nv = pf.space.nvars();
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    for (index, s) in samples.iter().enumerate() {
        if s.len() != nv {
            return Err(Error::DimensionMismatch { expected: nv, found: s.len() });
        }
        let (ev, escale) = ef.eval_with_scale(s);
        let bound = 1e-10 * (1.0 + escale);
        if !(ev.abs() <= bound) {
            return Err(Error::OffManifold { index, residual: ev, bound });
        }
        let (qv, qscale) = qf.eval_with_scale(s);
        let r = qv.abs() / (1.0 + qscale);
        max = max.max(r);
        sum += r;
    }
    let exact_multiple = q.ratio_to(&e).map(|r| r.to_string());
    Ok(InvarianceReport {
        field: vf.render(),
        operator: op,
        n_samples: samples.len(),
        max_normalized: max,
        mean_normalized: if samples.is_empty() { 0.0 } else { sum / samples.len() as f64 },
        exact_multiple,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::AlgebraBasis;

    #[test]
    fn variable_layout() {
        let s = JetSpace::new(2, 3).unwrap();
        assert_eq!(
            s.names(),
            ["x", "y", "u", "u_x", "u_y", "u_xx", "u_xy", "u_yy", "u_xxx", "u_xxy", "u_xyy", "u_yyy"]
        );
        assert_eq!(s.index_of(&[1, 0]), s.index_of(&[0, 1]));
        assert_eq!(JetSpace::new(3, 3).unwrap().nvars(), 23);
    }

    #[test]
    fn total_derivative_examples() {
        let s = JetSpace::new(2, 3).unwrap();
        let u = s.var(&[]);
        assert_eq!(s.total_derivative(&u, 0).unwrap(), s.var(&[0]));
        let uxx = s.var(&[0, 0]);
        assert_eq!(s.render(&s.total_derivative(&(&uxx * &uxx), 0).unwrap()), "2*u_xx*u_xxx");
        let f = f_poly(&s).unwrap();
        assert_eq!(s.render(&s.total_derivative(&f, 1).unwrap()), "2*u_xx*u_xxy + 4*u_xy*u_xyy + 2*u_yy*u_yyy");
        assert!(matches!(s.total_derivative(&s.var(&[0, 1, 1]), 0), Err(Error::OrderOverflow(4))));
    }

    #[test]
    fn prolongation_examples() {
        let g = AlgebraBasis::g();
        let s = JetSpace::new(2, 3).unwrap();
        let p8 = prolong(&g.elements[7], 3).unwrap();
        assert!(p8.eta.iter().filter(|(j, _)| !j.is_empty()).all(|(_, p)| p.is_zero()));
        let p5 = prolong(&g.elements[4], 3).unwrap();
        assert_eq!(p5.eta(&[0, 0]).unwrap(), &s.var(&[0, 0]));
        let p4 = prolong(&g.elements[3], 3).unwrap();
        assert_eq!(p4.eta(&[0, 0]).unwrap(), &s.var(&[0, 0]).scale(&int(-2)));
    }

    #[test]
    fn candidate_file_parses() {
        let vf = parse_candidate("# rotation\nxi1 = -y\nxi2 = x\neta = 0\n").unwrap();
        assert_eq!(vf, AlgebraBasis::g().elements[2]);
        assert!(matches!(parse_candidate("xi1 = 1\nxi2 = 0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_candidate("zeta = 1"), Err(Error::Parse { pos: 1, .. })));
    }
}
