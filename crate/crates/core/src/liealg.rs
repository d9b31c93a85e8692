//! Vector fields on (x_1..x_n, u) space and the finite-dimensional Lie
//! algebras they span.
//!
//! Brackets and structure constants are exact. Adjoint group actions are
//! computed in floating point by exponentiating `ad` matrices.

use std::fmt;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{int, Poly};

/// Largest coefficient degree accepted by [`bracket`].
pub const MAX_FIELD_DEGREE: u32 = 2;

/// `xi_1 d/dx_1 + ... + xi_n d/dx_n + eta d/du`, coefficients polynomial in
/// `(x_1, ..., x_n, u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    pub xi: Vec<Poly>,
    pub eta: Poly,
}

impl VectorField {
    pub fn new(xi: Vec<Poly>, eta: Poly) -> Self {
        let nv = xi.len() + 1;
        assert!(xi.iter().all(|p| p.nvars() == nv) && eta.nvars() == nv, "coefficients must be over n+1 variables");
        Self { xi, eta }
    }

    pub fn zero(n: usize) -> Self {
        Self { xi: vec![Poly::zero(n + 1); n], eta: Poly::zero(n + 1) }
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn components(&self) -> impl Iterator<Item = &Poly> {
        self.xi.iter().chain(std::iter::once(&self.eta))
    }

    pub fn degree(&self) -> u32 {
        self.components().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components().all(Poly::is_zero)
    }

    /// Derivative of `p` along the field.
    pub fn apply(&self, p: &Poly) -> Poly {
        let mut out = Poly::zero(p.nvars());
        for (k, c) in self.components().enumerate() {
            if !c.is_zero() {
                out = out + c * &p.diff(k);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self { xi: self.xi.iter().map(|p| p.scale(c)).collect(), eta: self.eta.scale(c) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| a + b).collect(),
            eta: &self.eta + &other.eta,
        }
    }

    /// Rational linear combination of fields.
    pub fn combination(fields: &[VectorField], coeffs: &[BigRational]) -> Self {
        let mut out = Self::zero(fields[0].dim());
        for (f, c) in fields.iter().zip(coeffs) {
            out = out.add(&f.scale(c));
        }
        out
    }

    /// Variable names `x, y, u` for n = 2, `x, y, z, u` for n = 3, ...
    pub fn names(n: usize) -> Vec<&'static str> {
        let mut v: Vec<&'static str> = ["x", "y", "z", "w"][..n].to_vec();
        v.push("u");
        v
    }

    pub fn render(&self) -> String {
        let names = Self::names(self.dim());
        let mut parts = Vec::new();
        for (k, c) in self.components().enumerate() {
            if !c.is_zero() {
                parts.push(format!("({})*d/d{}", c.render(&names), names[k]));
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Commutator `[a, b]` with components `a(b_k) - b(a_k)`.
pub fn bracket(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    for f in [a, b] {
        if f.degree() > MAX_FIELD_DEGREE {
            return Err(Error::DegreeOverflow { degree: f.degree(), max: MAX_FIELD_DEGREE });
        }
    }
    let comp = |pa: &Poly, pb: &Poly| a.apply(pb) - b.apply(pa);
    Ok(VectorField {
        xi: a.xi.iter().zip(&b.xi).map(|(pa, pb)| comp(pa, pb)).collect(),
        eta: comp(&a.eta, &b.eta),
    })
}

fn field2(xi1: Poly, xi2: Poly, eta: Poly) -> VectorField {
    VectorField::new(vec![xi1, xi2], eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgebraName {
    G,
    H,
}

impl AlgebraName {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::G => "X",
            Self::H => "Y",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::G => 8,
            Self::H => 7,
        }
    }
}

impl fmt::Display for AlgebraName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::G => "g",
            Self::H => "h",
        })
    }
}

impl std::str::FromStr for AlgebraName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" => Ok(Self::G),
            "h" => Ok(Self::H),
            _ => Err(Error::UnknownId { kind: "algebra", id: s.into() }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    pub name: AlgebraName,
    pub elements: Vec<VectorField>,
}

impl AlgebraBasis {
    /// Symmetry algebra of the full equation: translations, rotation,
    /// spatial scaling, u-scaling, and affine shifts of u.
    pub fn g() -> Self {
        let x = Poly::var(3, 0);
        let y = Poly::var(3, 1);
        let u = Poly::var(3, 2);
        let one = Poly::one(3);
        let z = Poly::zero(3);
        Self {
            name: AlgebraName::G,
            elements: vec![
                field2(one.clone(), z.clone(), z.clone()),
                field2(z.clone(), one.clone(), z.clone()),
                field2(-&y, x.clone(), z.clone()),
                field2(x.clone(), y.clone(), z.clone()),
                field2(z.clone(), z.clone(), u),
                field2(z.clone(), z.clone(), x),
                field2(z.clone(), z.clone(), y),
                field2(z.clone(), z, one),
            ],
        }
    }

    /// Symmetry algebra of `f[u] = c`: as `g` with the two scalings merged.
    pub fn h() -> Self {
        let x = Poly::var(3, 0);
        let y = Poly::var(3, 1);
        let u = Poly::var(3, 2);
        let one = Poly::one(3);
        let z = Poly::zero(3);
        Self {
            name: AlgebraName::H,
            elements: vec![
                field2(one.clone(), z.clone(), z.clone()),
                field2(z.clone(), one.clone(), z.clone()),
                field2(-&y, x.clone(), z.clone()),
                field2(x.clone(), y.clone(), u.scale(&int(2))),
                field2(z.clone(), z.clone(), x),
                field2(z.clone(), z.clone(), y),
                field2(z.clone(), z, one),
            ],
        }
    }

    pub fn by_name(name: AlgebraName) -> Self {
        match name {
            AlgebraName::G => Self::g(),
            AlgebraName::H => Self::h(),
        }
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn label(&self, i: usize) -> String {
        format!("{}{}", self.name.symbol(), i + 1)
    }

    /// Coordinates of `v` in the basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &VectorField) -> Option<Vec<BigRational>> {
        let cols: Vec<Vec<BigRational>> = self.elements.iter().map(|e| flatten(e, &self.elements, v)).collect();
        let rhs = flatten(v, &self.elements, v);
        solve_exact(&cols, &rhs)
    }

    pub fn field(&self, coeffs: &[BigRational]) -> VectorField {
        VectorField::combination(&self.elements, coeffs)
    }
}

/// Coefficients of `f` over the union of monomials occurring in `basis` and
/// `extra`, component by component.
fn flatten(f: &VectorField, basis: &[VectorField], extra: &VectorField) -> Vec<BigRational> {
    let mut keys: Vec<(usize, Vec<u32>)> = Vec::new();
    for g in basis.iter().chain(std::iter::once(extra)) {
        for (k, c) in g.components().enumerate() {
            for (e, _) in c.terms() {
                keys.push((k, e.clone()));
            }
        }
    }
    keys.sort();
    keys.dedup();
    let comps: Vec<&Poly> = f.components().collect();
    keys.iter().map(|(k, e)| comps[*k].coeff(e)).collect()
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Solve `sum_j x_j cols[j] = rhs` exactly; `None` if inconsistent.
fn solve_exact(cols: &[Vec<BigRational>], rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    let nrows = rhs.len();
    let ncols = cols.len();
    let mut m: Vec<Vec<BigRational>> = (0..nrows)
        .map(|i| cols.iter().map(|c| c[i].clone()).chain(std::iter::once(rhs[i].clone())).collect())
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = m[row][ncols].clone();
    }
    Some(x)
}

/// Rank of a set of row vectors.
pub fn rank(vectors: &[Vec<BigRational>]) -> usize {
    let mut m = vectors.to_vec();
    rref(&mut m).len()
}

/// Row-reduced basis of the span of `vectors`.
fn span_basis(vectors: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let mut m = vectors.to_vec();
    let r = rref(&mut m).len();
    m.truncate(r);
    m
}

/// Structure constants: `table[i][j]` holds the coordinates of `[e_i, e_j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureTable {
    pub name: AlgebraName,
    pub entries: Vec<Vec<Vec<BigRational>>>,
}

impl StructureTable {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    fn from_sparse(name: AlgebraName, dim: usize, upper: &[(usize, usize, i64, usize)]) -> Self {
        let mut entries = vec![vec![vec![BigRational::zero(); dim]; dim]; dim];
        for &(i, j, c, k) in upper {
            entries[i - 1][j - 1][k - 1] = int(c);
            entries[j - 1][i - 1][k - 1] = int(-c);
        }
        Self { name, entries }
    }

    /// Bracket of two elements given by coordinates.
    pub fn bracket(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = self.dim();
        let mut out = vec![BigRational::zero(); n];
        for i in 0..n {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[j].is_zero() {
                    continue;
                }
                let ab = &a[i] * &b[j];
                for k in 0..n {
                    if !self.entries[i][j][k].is_zero() {
                        out[k] += &ab * &self.entries[i][j][k];
                    }
                }
            }
        }
        out
    }

    pub fn unit(&self, i: usize) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.dim()];
        v[i] = BigRational::one();
        v
    }

    /// Render an entry like `-2Y7` or `0`.
    pub fn render_entry(&self, v: &[BigRational]) -> String {
        render_combination(self.name, v.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>().as_slice(), |c| {
            exact_coeff(&v[c.0])
        })
    }
}

fn exact_coeff(c: &BigRational) -> String {
    c.abs().to_string()
}

fn render_combination(
    name: AlgebraName,
    v: &[f64],
    coeff: impl Fn((usize, f64)) -> String,
) -> String {
    let mut s = String::new();
    for (k, &c) in v.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        if s.is_empty() {
            if c < 0.0 {
                s.push('-');
            }
        } else {
            s.push_str(&format!(" {sign} "));
        }
        let mag = coeff((k, c));
        if mag != "1" {
            s.push_str(&mag);
            s.push('*');
        }
        s.push_str(&format!("{}{}", name.symbol(), k + 1));
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

/// Structure constants derived from the basis fields.
pub fn structure_constants(basis: &AlgebraBasis) -> Result<StructureTable> {
    let n = basis.dim();
    let mut entries = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let b = bracket(&basis.elements[i], &basis.elements[j])?;
            entries[i][j] = basis.coordinates(&b).ok_or(Error::ClosureFailure { i: i + 1, j: j + 1 })?;
        }
    }
    Ok(StructureTable { name: basis.name, entries })
}

/// Transcribed commutator table of `g` (upper triangle, 1-based:
/// `[X_i, X_j] = c X_k`).
pub fn table_g() -> StructureTable {
    StructureTable::from_sparse(
        AlgebraName::G,
        8,
        &[
            (1, 3, 1, 2),
            (1, 4, 1, 1),
            (1, 6, 1, 8),
            (2, 3, -1, 1),
            (2, 4, 1, 2),
            (2, 7, 1, 8),
            (3, 6, -1, 7),
            (3, 7, 1, 6),
            (4, 6, 1, 6),
            (4, 7, 1, 7),
            (5, 6, -1, 6),
            (5, 7, -1, 7),
            (5, 8, -1, 8),
        ],
    )
}

/// Transcribed commutator table of `h`.
pub fn table_h() -> StructureTable {
    StructureTable::from_sparse(
        AlgebraName::H,
        7,
        &[
            (1, 3, 1, 2),
            (1, 4, 1, 1),
            (1, 5, 1, 7),
            (2, 3, -1, 1),
            (2, 4, 1, 2),
            (2, 6, 1, 7),
            (3, 5, -1, 6),
            (3, 6, 1, 5),
            (4, 5, -1, 5),
            (4, 6, -1, 6),
            (4, 7, -2, 7),
        ],
    )
}

pub fn reference_table(name: AlgebraName) -> StructureTable {
    match name {
        AlgebraName::G => table_g(),
        AlgebraName::H => table_h(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableMismatch {
    pub row: usize,
    pub col: usize,
    pub computed: String,
    pub expected: String,
}

/// Entry-by-entry comparison; returns the number of matching entries and
/// the mismatches.
pub fn compare_tables(computed: &StructureTable, expected: &StructureTable) -> (usize, Vec<TableMismatch>) {
    let n = computed.dim();
    let mut ok = 0;
    let mut bad = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if computed.entries[i][j] == expected.entries[i][j] {
                ok += 1;
            } else {
                bad.push(TableMismatch {
                    row: i + 1,
                    col: j + 1,
                    computed: computed.render_entry(&computed.entries[i][j]),
                    expected: expected.render_entry(&expected.entries[i][j]),
                });
            }
        }
    }
    (ok, bad)
}

/// Whether `[e_i, [e_j, e_k]]` and cyclic permutations sum to zero for all
/// basis triples.
pub fn jacobi_holds(t: &StructureTable) -> bool {
    let n = t.dim();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (a, b, c) = (t.unit(i), t.unit(j), t.unit(k));
                let s1 = t.bracket(&a, &t.bracket(&b, &c));
                let s2 = t.bracket(&b, &t.bracket(&c, &a));
                let s3 = t.bracket(&c, &t.bracket(&a, &b));
                if s1.iter().zip(&s2).zip(&s3).any(|((x, y), z)| !(x + y + z).is_zero()) {
                    return false;
                }
            }
        }
    }
    true
}

/// Dimensions of the derived series starting from the span of `generators`
/// (coordinate vectors); stops at 0 or when the series stabilizes.
pub fn derived_series(t: &StructureTable, generators: &[Vec<BigRational>]) -> Vec<usize> {
    let mut current = span_basis(generators);
    let mut dims = vec![current.len()];
    while !current.is_empty() {
        let mut brackets = Vec::new();
        for i in 0..current.len() {
            for j in (i + 1)..current.len() {
                brackets.push(t.bracket(&current[i], &current[j]));
            }
        }
        let next = span_basis(&brackets);
        if next.len() == current.len() {
            break;
        }
        dims.push(next.len());
        current = next;
    }
    dims
}

/// Derived series of the whole algebra.
pub fn derived_series_full(t: &StructureTable) -> Vec<usize> {
    let gens: Vec<_> = (0..t.dim()).map(|i| t.unit(i)).collect();
    derived_series(t, &gens)
}

fn in_span(basis_idx: &[usize], v: &[BigRational]) -> bool {
    v.iter().enumerate().all(|(k, c)| c.is_zero() || basis_idx.contains(&k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SemidirectFlags {
    pub p1_closed: bool,
    pub p2_abelian: bool,
    pub p1_ideal_under_p2: bool,
}

impl SemidirectFlags {
    pub fn all(&self) -> bool {
        self.p1_closed && self.p2_abelian && self.p1_ideal_under_p2
    }
}

/// Checks `[p1,p1] in p1`, `[p2,p2] = 0` and `[p1,p2] in p1` for
/// coordinate-subspaces given by 0-based basis indices.
pub fn check_semidirect(t: &StructureTable, p1: &[usize], p2: &[usize]) -> SemidirectFlags {
    let br = |i: usize, j: usize| &t.entries[i][j];
    SemidirectFlags {
        p1_closed: p1.iter().all(|&i| p1.iter().all(|&j| in_span(p1, br(i, j)))),
        p2_abelian: p2.iter().all(|&i| p2.iter().all(|&j| br(i, j).iter().all(Zero::is_zero))),
        p1_ideal_under_p2: p1.iter().all(|&i| p2.iter().all(|&j| in_span(p1, br(i, j)))),
    }
}

/// Matrix of `Y -> [e, Y]`; column `j` is the image of the j-th basis vector.
pub fn ad_matrix(t: &StructureTable, e: &[BigRational]) -> Vec<Vec<BigRational>> {
    let n = t.dim();
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for j in 0..n {
        let col = t.bracket(e, &t.unit(j));
        for k in 0..n {
            m[k][j] = col[k].clone();
        }
    }
    m
}

fn to_float_matrix(m: &[Vec<BigRational>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j].to_f64().unwrap_or(f64::NAN))
}

/// Matrix exponential by scaling and squaring with a Taylor series cut off
/// once the next term drops below `1e-16` in max norm.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) * n as f64;
    let mut s = 0;
    while norm / f64::from(1u32 << s.min(31)) > 0.5 && s < 60 {
        s += 1;
    }
    let scaled = a / 2f64.powi(s);
    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..64 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-16 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `Ad_{exp(eps e_i)}` applied to the element with coordinates `e`.
pub fn adjoint_action(t: &StructureTable, i: usize, eps: f64, e: &[f64]) -> Vec<f64> {
    let m = to_float_matrix(&ad_matrix(t, &t.unit(i))) * eps;
    let v = expm(&m) * nalgebra::DVector::from_column_slice(e);
    v.iter().copied().collect()
}

/// Coordinates of `Ad_{exp(eps e_i)} e_j`.
pub fn adjoint_entry(t: &StructureTable, i: usize, j: usize, eps: f64) -> Vec<f64> {
    let mut e = vec![0.0; t.dim()];
    e[j] = 1.0;
    adjoint_action(t, i, eps, &e)
}

/// Published closed-form adjoint table at `eps`: `[i][j]` holds the
/// coordinates of `Ad_{exp(eps e_i)} e_j`. Entries not listed are `e_j`.
pub fn reference_adjoint(name: AlgebraName, eps: f64) -> Vec<Vec<Vec<f64>>> {
    let (c, s, ex, em) = (eps.cos(), eps.sin(), eps.exp(), (-eps).exp());
    let e = eps;
    // (row, column, [(component, coefficient)]), all 1-based
    type Edit = (usize, usize, Vec<(usize, f64)>);
    let edits: Vec<Edit> = match name {
        AlgebraName::G => vec![
            (1, 3, vec![(3, 1.0), (2, e)]),
            (1, 4, vec![(4, 1.0), (1, e)]),
            (1, 6, vec![(6, 1.0), (8, e)]),
            (2, 3, vec![(3, 1.0), (1, -e)]),
            (2, 4, vec![(4, 1.0), (2, e)]),
            (2, 7, vec![(7, 1.0), (8, e)]),
            (3, 1, vec![(1, c), (2, -s)]),
            (3, 2, vec![(1, s), (2, c)]),
            (3, 6, vec![(6, c), (7, -s)]),
            (3, 7, vec![(6, s), (7, c)]),
            (4, 1, vec![(1, em)]),
            (4, 2, vec![(2, em)]),
            (4, 6, vec![(6, ex)]),
            (4, 7, vec![(7, ex)]),
            (5, 6, vec![(6, em)]),
            (5, 7, vec![(7, em)]),
            (5, 8, vec![(8, em)]),
            (6, 1, vec![(1, 1.0), (8, -e)]),
            (6, 3, vec![(3, 1.0), (7, e)]),
            (6, 4, vec![(4, 1.0), (6, -e)]),
            (6, 5, vec![(5, 1.0), (6, e)]),
            (7, 2, vec![(2, 1.0), (8, -e)]),
            (7, 3, vec![(3, 1.0), (6, -e)]),
            (7, 4, vec![(4, 1.0), (7, -e)]),
            (7, 5, vec![(5, 1.0), (7, e)]),
            (8, 5, vec![(5, 1.0), (8, e)]),
        ],
        AlgebraName::H => vec![
            (1, 3, vec![(3, 1.0), (2, e)]),
            (1, 4, vec![(4, 1.0), (1, e)]),
            (1, 5, vec![(5, 1.0), (7, e)]),
            (2, 3, vec![(3, 1.0), (1, -e)]),
            (2, 4, vec![(4, 1.0), (2, e)]),
            (2, 6, vec![(6, 1.0), (7, e)]),
            (3, 1, vec![(1, c), (2, -s)]),
            (3, 2, vec![(1, s), (2, c)]),
            (3, 5, vec![(5, c), (6, -s)]),
            (3, 6, vec![(5, s), (6, c)]),
            (4, 1, vec![(1, em)]),
            (4, 2, vec![(2, em)]),
            (4, 5, vec![(5, em)]),
            (4, 6, vec![(6, em)]),
            (4, 7, vec![(7, em * em)]),
            (5, 1, vec![(1, 1.0), (7, -e)]),
            (5, 3, vec![(3, 1.0), (6, e)]),
            (5, 4, vec![(4, 1.0), (5, e)]),
            (6, 2, vec![(2, 1.0), (7, -e)]),
            (6, 3, vec![(3, 1.0), (5, -e)]),
            (6, 4, vec![(4, 1.0), (6, e)]),
            (7, 4, vec![(4, 1.0), (7, 2.0 * e)]),
        ],
    };
    let n = name.dim();
    let mut out: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|j| {
                    let mut v = vec![0.0; n];
                    v[j] = 1.0;
                    v
                })
                .collect()
        })
        .collect();
    for (i, j, terms) in edits {
        let v = &mut out[i - 1][j - 1];
        v.iter_mut().for_each(|x| *x = 0.0);
        for (k, coef) in terms {
            v[k - 1] += coef;
        }
    }
    out
}

/// Render a real coordinate vector as a combination of basis labels.
pub fn render_real(name: AlgebraName, v: &[f64]) -> String {
    let cleaned: Vec<f64> = v.iter().map(|c| if c.abs() < 1e-15 { 0.0 } else { *c }).collect();
    render_combination(name, &cleaned, |(_, c)| {
        let a = c.abs();
        if (a - 1.0).abs() < 1e-15 {
            "1".into()
        } else {
            format!("{a:.12}")
        }
    })
}

/// Subalgebras on which the classification of one-dimensional subalgebras
/// is carried out: spans of the first five (resp. four) basis elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subalgebra {
    GTilde,
    HTilde,
}

impl Subalgebra {
    pub fn algebra(self) -> AlgebraName {
        match self {
            Self::GTilde => AlgebraName::G,
            Self::HTilde => AlgebraName::H,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::GTilde => 5,
            Self::HTilde => 4,
        }
    }

    /// 0-based coordinates left unchanged by the induced adjoint action.
    pub fn invariant_indices(self) -> &'static [usize] {
        match self {
            Self::GTilde => &[2, 3, 4],
            Self::HTilde => &[2, 3],
        }
    }

    pub fn table(self) -> StructureTable {
        reference_table(self.algebra())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub subalgebra: Subalgebra,
    pub trials: usize,
    pub max_invariant_drift: f64,
    pub max_leak: f64,
    pub passed: bool,
}

/// Random elements of the subalgebra pushed through random sequences of
/// adjoint actions by generators of the subalgebra itself; the invariant
/// coordinates must not move and no mass may leave the subalgebra.
pub fn check_classification_invariants<R: Rng>(sub: Subalgebra, trials: usize, rng: &mut R) -> InvariantReport {
    let t = sub.table();
    let d = sub.dim();
    let mut drift: f64 = 0.0;
    let mut leak: f64 = 0.0;
    for _ in 0..trials {
        let mut e = vec![0.0; t.dim()];
        for c in e.iter_mut().take(d) {
            *c = rng.random_range(-5.0..5.0);
        }
        let start = e.clone();
        let steps = rng.random_range(1..=6);
        for _ in 0..steps {
            let g = rng.random_range(0..d);
            let eps = rng.random_range(-2.0..2.0);
            e = adjoint_action(&t, g, eps, &e);
        }
        for &k in sub.invariant_indices() {
            drift = drift.max((e[k] - start[k]).abs());
        }
        for c in &e[d..] {
            leak = leak.max(c.abs());
        }
    }
    InvariantReport { subalgebra: sub, trials, max_invariant_drift: drift, max_leak: leak, passed: drift <= 1e-12 && leak <= 1e-12 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Representative {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    B1,
    B2,
    B3,
    B4,
}

impl fmt::Display for Representative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionDemo {
    pub representative: Representative,
    pub gamma: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Adjoint steps `(0-based generator, eps)` applied in order.
    pub steps: Vec<(usize, f64)>,
    pub rescale: f64,
    /// Coordinates after the steps and the rescale.
    pub result: Vec<f64>,
    /// Coordinates of the listed representative.
    pub target: Vec<f64>,
    pub distance: f64,
}

/// Maps `e` to its listed representative by explicit adjoint steps followed
/// by a rescale, dispatching on which invariant coordinates vanish.
pub fn representative_reduction_demo(sub: Subalgebra, e: &[f64]) -> Result<ReductionDemo> {
    let t = sub.table();
    let d = sub.dim();
    if e.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: e.len() });
    }
    if e.iter().all(|c| *c == 0.0) {
        return Err(Error::Degenerate("zero element".into()));
    }
    let mut v = vec![0.0; t.dim()];
    v[..d].copy_from_slice(e);
    let mut steps = Vec::new();
    let act = |v: &mut Vec<f64>, g: usize, eps: f64, steps: &mut Vec<(usize, f64)>| {
        if eps != 0.0 {
            *v = adjoint_action(&t, g, eps, v);
            steps.push((g, eps));
        }
    };

    // The two translations shift (a1, a2) by [[a4, -a3], [a3, a4]] (eps1, eps2);
    // this is invertible whenever a3 or a4 is nonzero.
    let (a3, a4) = (v[2], v[3]);
    let det = a3 * a3 + a4 * a4;
    if det > 0.0 {
        let (a1, a2) = (v[0], v[1]);
        let eps1 = -(a4 * a1 + a3 * a2) / det;
        let eps2 = (a3 * a1 - a4 * a2) / det;
        act(&mut v, 0, eps1, &mut steps);
        act(&mut v, 1, eps2, &mut steps);
    }

    let nz = |x: f64| x != 0.0;
    let mut target = vec![0.0; t.dim()];
    let (rep, rescale, gamma, alpha, beta);
    match sub {
        Subalgebra::GTilde => {
            let (a3, a4, a5) = (v[2], v[3], v[4]);
            match (nz(a3), nz(a4), nz(a5)) {
                (false, false, false) => {
                    let (a1, a2) = (v[0], v[1]);
                    let eps = if a1 != 0.0 { (a2 / a1).atan() } else { std::f64::consts::FRAC_PI_2 };
                    act(&mut v, 2, eps, &mut steps);
                    rep = Representative::A1;
                    rescale = 1.0 / v[0];
                    target[0] = 1.0;
                    (gamma, alpha, beta) = (0.0, None, None);
                }
                (true, false, false) => {
                    rep = Representative::A2;
                    rescale = 1.0 / a3;
                    target[2] = 1.0;
                    (gamma, alpha, beta) = (0.0, None, None);
                }
                (false, true, false) => {
                    rep = Representative::A3;
                    rescale = 1.0 / a4;
                    target[3] = 1.0;
                    (gamma, alpha, beta) = (0.0, None, None);
                }
                (false, false, true) => {
                    let (a1, a2) = (v[0], v[1]);
                    let r = a1.hypot(a2);
                    rep = Representative::A4;
                    if r > 0.0 {
                        // Rotate onto r*sign(a5) X1, then scale that coefficient to |a5|.
                        let mut eps = a2.atan2(a1);
                        if a5 < 0.0 {
                            eps += std::f64::consts::PI;
                        }
                        act(&mut v, 2, eps, &mut steps);
                        act(&mut v, 3, (r / a5.abs()).ln(), &mut steps);
                        gamma = 1.0;
                    } else {
                        gamma = 0.0;
                    }
                    rescale = 1.0 / a5;
                    target[0] = gamma;
                    target[4] = 1.0;
                    (alpha, beta) = (None, None);
                }
                (true, false, true) => {
                    rep = Representative::A5;
                    rescale = 1.0 / a5;
                    target[2] = a3 / a5;
                    target[4] = 1.0;
                    (gamma, alpha, beta) = (0.0, Some(a3 / a5), None);
                }
                (false, true, true) => {
                    rep = Representative::A6;
                    rescale = 1.0 / a5;
                    target[3] = a4 / a5;
                    target[4] = 1.0;
                    (gamma, alpha, beta) = (0.0, Some(a4 / a5), None);
                }
                (true, true, false) => {
                    rep = Representative::A7;
                    rescale = 1.0 / a4;
                    target[2] = a3 / a4;
                    target[3] = 1.0;
                    (gamma, alpha, beta) = (0.0, Some(a3 / a4), None);
                }
                (true, true, true) => {
                    rep = Representative::A8;
                    rescale = 1.0 / a5;
                    target[2] = a3 / a5;
                    target[3] = a4 / a5;
                    target[4] = 1.0;
                    (gamma, alpha, beta) = (0.0, Some(a3 / a5), Some(a4 / a5));
                }
            }
        }
        Subalgebra::HTilde => {
            let (b3, b4) = (v[2], v[3]);
            match (nz(b3), nz(b4)) {
                (false, false) => {
                    let (b1, b2) = (v[0], v[1]);
                    let eps = if b1 != 0.0 { (b2 / b1).atan() } else { std::f64::consts::FRAC_PI_2 };
                    act(&mut v, 2, eps, &mut steps);
                    rep = Representative::B1;
                    rescale = 1.0 / v[0];
                    target[0] = 1.0;
                    (gamma, alpha) = (0.0, None);
                }
                (true, false) => {
                    rep = Representative::B2;
                    rescale = 1.0 / b3;
                    target[2] = 1.0;
                    (gamma, alpha) = (0.0, None);
                }
                (false, true) => {
                    rep = Representative::B3;
                    rescale = 1.0 / b4;
                    target[3] = 1.0;
                    (gamma, alpha) = (0.0, None);
                }
                (true, true) => {
                    rep = Representative::B4;
                    rescale = 1.0 / b4;
                    target[2] = b3 / b4;
                    target[3] = 1.0;
                    (gamma, alpha) = (0.0, Some(b3 / b4));
                }
            }
            beta = None;
        }
    }
    let result: Vec<f64> = v.iter().map(|c| c * rescale).collect();
    let distance = result.iter().zip(&target).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(ReductionDemo { representative: rep, gamma, alpha, beta, steps, rescale, result, target, distance })
}

/// Table as aligned plain text, rows and columns in basis order.
pub fn render_table(name: AlgebraName, cells: &[Vec<String>], corner: &str) -> String {
    let n = cells.len();
    let sym = name.symbol();
    let header: Vec<String> =
        std::iter::once(corner.to_string()).chain((1..=n).map(|j| format!("{sym}{j}"))).collect();
    let mut rows = vec![header];
    for (i, row) in cells.iter().enumerate() {
        rows.push(std::iter::once(format!("{sym}{}", i + 1)).chain(row.iter().cloned()).collect());
    }
    let widths: Vec<usize> = (0..=n).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Cells of a structure table rendered as basis combinations.
pub fn commutator_cells(t: &StructureTable) -> Vec<Vec<String>> {
    t.entries.iter().map(|row| row.iter().map(|v| t.render_entry(v)).collect()).collect()
}

/// Cells of the adjoint table at `eps`: entry (i, j) is `Ad_{exp(eps e_i)} e_j`.
pub fn adjoint_cells(t: &StructureTable, eps: f64) -> Vec<Vec<String>> {
    (0..t.dim()).map(|i| (0..t.dim()).map(|j| render_real(t.name, &adjoint_entry(t, i, j, eps))).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_examples() {
        let g = AlgebraBasis::g();
        let b = bracket(&g.elements[0], &g.elements[2]).unwrap();
        assert_eq!(b, g.elements[1]);
        let b = bracket(&g.elements[5], &g.elements[0]).unwrap();
        assert_eq!(b, g.elements[7].scale(&int(-1)));
        for e in &g.elements {
            assert!(bracket(e, e).unwrap().is_zero());
        }
    }

    #[test]
    fn degree_overflow() {
        let x = Poly::var(3, 0);
        let cubic = field2(x.pow(3), Poly::zero(3), Poly::zero(3));
        let g = AlgebraBasis::g();
        assert!(matches!(bracket(&cubic, &g.elements[0]), Err(Error::DegreeOverflow { degree: 3, max: 2 })));
    }

    #[test]
    fn closure_failure_is_reported() {
        let mut g = AlgebraBasis::g();
        g.elements[0] = field2(Poly::var(3, 0).pow(2), Poly::zero(3), Poly::zero(3));
        assert!(matches!(structure_constants(&g), Err(Error::ClosureFailure { .. })));
    }

    #[test]
    fn expm_of_rotation_generator() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]) * 1.3;
        let e = expm(&a);
        assert!((e[(0, 0)] - 1.3f64.cos()).abs() < 1e-15);
        assert!((e[(1, 0)] - 1.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn rref_rank() {
        let v = vec![vec![int(1), int(2)], vec![int(2), int(4)], vec![int(0), int(1)]];
        assert_eq!(rank(&v), 2);
        assert_eq!(solve_exact(&[vec![int(1), int(0)], vec![int(1), int(1)]], &[int(3), int(2)]), Some(vec![int(1), int(2)]));
        assert_eq!(solve_exact(&[vec![int(1), int(1)]], &[int(1), int(2)]), None);
    }

    #[test]
    fn render_entries() {
        let t = table_h();
        assert_eq!(t.render_entry(&t.entries[3][6]), "-2*Y7");
        assert_eq!(t.render_entry(&t.entries[0][0]), "0");
        assert_eq!(render_real(AlgebraName::G, &[0.5, -1.0, 0.0]), "0.500000000000*X1 - X2");
    }
}
