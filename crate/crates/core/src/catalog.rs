//! Closed-form solutions and their transport under the symmetry group.
//!
//! Every entry is an evaluator on coordinate jets together with a sampling
//! domain. Group elements act by pulling the domain back through an affine
//! map of the independent variables and post-composing with an affine map
//! of the dependent one:
//! `u~(p) = s * u(A p + b) + w . p + k`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{relative_residual, rng, sample_box, OperatorId, PointResidual};
use crate::jets::{Jet3, JetField};

pub type Params = BTreeMap<String, Vec<f64>>;
pub type Evaluator = Arc<dyn Fn(&[Jet3]) -> Result<Jet3> + Send + Sync>;
type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

pub const IDS: [&str; 10] = [
    "quadratic",
    "cone",
    "arctan",
    "rot-sqrt2",
    "power125",
    "variety-n",
    "spiral-a",
    "spiral-b",
    "eikonal-quad",
    "aronsson-arctan-combo",
];

/// Sampling box plus an acceptance predicate. A point belongs to the domain
/// when it lies in the closed box and the predicate holds.
#[derive(Clone)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
    pub description: String,
    pred: Predicate,
}

impl Domain {
    pub fn new(
        bounds: Vec<(f64, f64)>,
        description: impl Into<String>,
        pred: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self { bounds, description: description.into(), pred: Arc::new(pred) }
    }

    pub fn boxed(bounds: Vec<(f64, f64)>, description: impl Into<String>) -> Self {
        Self::new(bounds, description, |_| true)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.bounds.len()
            && p.iter().zip(&self.bounds).all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
            && (self.pred)(p)
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("bounds", &self.bounds)
            .field("description", &self.description)
            .finish()
    }
}

#[derive(Clone)]
pub struct SolutionSpec {
    pub id: String,
    pub params: Params,
    pub target: OperatorId,
    pub formula: String,
    pub domain: Domain,
    pub tolerance: f64,
    /// Group elements applied so far, oldest first.
    pub history: Vec<String>,
    n: usize,
    eval: Evaluator,
}

impl fmt::Debug for SolutionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolutionSpec")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("target", &self.target)
            .field("formula", &self.formula)
            .field("domain", &self.domain)
            .field("history", &self.history)
            .finish()
    }
}

impl SolutionSpec {
    /// A spec outside the fixed catalog, e.g. a lifted reduction.
    pub fn from_evaluator(
        id: impl Into<String>,
        params: Params,
        target: OperatorId,
        formula: impl Into<String>,
        domain: Domain,
        tolerance: f64,
        eval: Evaluator,
    ) -> Self {
        let n = domain.bounds.len();
        Self {
            id: id.into(),
            params,
            target,
            formula: formula.into(),
            domain,
            tolerance,
            history: Vec::new(),
            n,
            eval,
        }
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        Ok(self.jet_at(p)?.value())
    }

    /// The evaluator with the domain check skipped.
    pub fn evaluator(&self) -> Evaluator {
        self.eval.clone()
    }

    pub fn sample(&self, n_points: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let d = self.domain.clone();
        sample_box(&d.bounds, n_points, &mut rng(seed), |p| d.contains(p))
            .map_err(|_| Error::EmptyDomain(d.description.clone()))
    }
}

impl JetField for SolutionSpec {
    fn dim(&self) -> usize {
        self.n
    }

    fn jet_at(&self, point: &[f64]) -> Result<Jet3> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: point.len() });
        }
        (self.eval)(&Jet3::coordinates(point)?)
    }

    fn contains(&self, point: &[f64]) -> bool {
        self.domain.contains(point)
    }

    fn domain_label(&self) -> String {
        self.domain.description.clone()
    }
}

/// Parses `key=v1,v2,...` strings into a parameter map.
pub fn parse_params(items: &[String]) -> Result<Params> {
    let mut out = Params::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("parameter `{item}` is not key=value")))?;
        let vals = v
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::InvalidArgument(format!("bad number `{s}` in `{item}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(k.trim().to_string(), vals);
    }
    Ok(out)
}

pub(crate) struct ParamReader<'a> {
    id: &'a str,
    given: &'a Params,
    used: Params,
}

impl<'a> ParamReader<'a> {
    pub(crate) fn new(id: &'a str, given: &'a Params) -> Self {
        Self { id, given, used: Params::new() }
    }

    pub(crate) fn vector(&mut self, key: &str, default: &[f64], len: Option<usize>) -> Result<Vec<f64>> {
        let v = self.given.get(key).cloned().unwrap_or_else(|| default.to_vec());
        if let Some(len) = len {
            if v.len() != len {
                return Err(Error::InvalidArgument(format!(
                    "{}: parameter `{key}` needs {len} value(s), got {}",
                    self.id,
                    v.len()
                )));
            }
        }
        self.used.insert(key.to_string(), v.clone());
        Ok(v)
    }

    pub(crate) fn scalar(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.vector(key, &[default], Some(1))?[0])
    }

    pub(crate) fn finish(self) -> Result<Params> {
        if let Some(k) = self.given.keys().find(|k| !self.used.contains_key(*k)) {
            return Err(Error::InvalidArgument(format!("{} takes no parameter `{k}`", self.id)));
        }
        Ok(self.used)
    }
}

fn r2(c: &[Jet3]) -> Jet3 {
    &c[0] * &c[0] + &c[1] * &c[1]
}

fn atan_ratio(num: &Jet3, den: &Jet3) -> Result<Jet3> {
    Ok(num.div(den)?.atan())
}

fn power_125(x: &Jet3) -> Result<Jet3> {
    x.pow_rational(num_rational::Rational64::new(12, 5))
}

fn half_plane_y() -> Domain {
    Domain::boxed(vec![(-10.0, 10.0), (0.5, 10.0)], "x in [-10,10], y in [0.5,10]")
}

fn open_orthant(n: usize) -> Domain {
    Domain::new(vec![(0.0, 10.0); n], format!("open orthant (0,10)^{n}"), |p| p.iter().all(|x| *x > 0.0))
}

/// Builds a catalog entry, checking parameter admissibility.
pub fn get_solution(id: &str, params: &Params) -> Result<SolutionSpec> {
    let mut rd = ParamReader::new(id, params);
    let mut n = 2;
    let mut tolerance = 1e-9;
    let mut target = OperatorId::InfPolylap;
    let (formula, domain, eval): (String, Domain, Evaluator) = match id {
        "quadratic" => {
            let c = rd.vector("c", &[0.5, -1.0, 2.0, 1.5, -0.7, 0.3], Some(6))?;
            let cc = c.clone();
            (
                "u = c00 + c10*x + c01*y + c20*x^2 + c11*x*y + c02*y^2".into(),
                Domain::boxed(vec![(-10.0, 10.0); 2], "[-10,10]^2"),
                Arc::new(move |v: &[Jet3]| {
                    let (x, y) = (&v[0], &v[1]);
                    Ok(x * cc[1] + y * cc[2] + x * x * cc[3] + x * y * cc[4] + y * y * cc[5] + cc[0])
                }),
            )
        }
        "cone" => (
            "u = sqrt(x^2 + y^2)".into(),
            Domain::new(vec![(-10.0, 10.0); 2], "[-10,10]^2 with x^2 + y^2 >= 0.25", |p| {
                p[0] * p[0] + p[1] * p[1] >= 0.25
            }),
            Arc::new(|v: &[Jet3]| r2(v).sqrt()),
        ),
        "arctan" => (
            "u = arctan(x/y)".into(),
            half_plane_y(),
            Arc::new(|v: &[Jet3]| atan_ratio(&v[0], &v[1])),
        ),
        "rot-sqrt2" => {
            let c = rd.vector("c", &[1.0, 2.0], Some(2))?;
            let s2 = 2f64.sqrt();
            (
                "u = (x^2 + y^2) * (c1*cos(sqrt(2)*arctan(x/y)) + c2*sin(sqrt(2)*arctan(x/y)))".into(),
                half_plane_y(),
                Arc::new(move |v: &[Jet3]| {
                    let t = atan_ratio(&v[0], &v[1])? * s2;
                    Ok(r2(v) * (t.cos() * c[0] + t.sin() * c[1]))
                }),
            )
        }
        "power125" => (
            "u = x^(12/5) - y^(12/5)".into(),
            open_orthant(2),
            Arc::new(|v: &[Jet3]| Ok(power_125(&v[0])? - power_125(&v[1])?)),
        ),
        "variety-n" => {
            let c_given = params.get("c").cloned();
            let n_default = c_given.as_ref().map_or(3.0, |c| c.len() as f64);
            let nf = rd.scalar("n", n_default)?;
            if nf.fract() != 0.0 || !(2.0..=4.0).contains(&nf) {
                return Err(Error::InvalidArgument(format!("variety-n: n must be 2, 3 or 4, got {nf}")));
            }
            n = nf as usize;
            let mut default = vec![0.0; n];
            default[0] = 1.0;
            default[1] = -1.0;
            let c = rd.vector("c", &default, Some(n))?;
            let s: f64 = c.iter().map(|ci| ci.powi(5)).sum();
            if s.abs() > 1e-12 {
                let lhs: Vec<String> = (1..=n).map(|i| format!("c{i}^5")).collect();
                return Err(Error::Inadmissible(format!("{} = {s} != 0", lhs.join(" + "))));
            }
            let terms: Vec<String> = (1..=n).map(|i| format!("c{i}*x{i}^(12/5)")).collect();
            (
                format!("u = {}", terms.join(" + ")),
                open_orthant(n),
                Arc::new(move |v: &[Jet3]| {
                    let mut u = Jet3::constant(v.len(), 0.0);
                    for (ci, xi) in c.iter().zip(v) {
                        if *ci != 0.0 {
                            u = u + power_125(xi)? * *ci;
                        }
                    }
                    Ok(u)
                }),
            )
        }
        "spiral-a" => {
            let a = rd.scalar("alpha", 1.0)?;
            let p = a * a / (2.0 * (1.0 + a * a));
            let k = a / (1.0 + a * a);
            (
                "u = (x^2 + y^2)^(alpha^2/(2(1+alpha^2))) * exp(-alpha/(1+alpha^2) * arctan(x/y))".into(),
                half_plane_y(),
                Arc::new(move |v: &[Jet3]| Ok((r2(v).ln()? * p - atan_ratio(&v[0], &v[1])? * k).exp())),
            )
        }
        "spiral-b" => {
            let a = rd.scalar("alpha", 1.5)?;
            if a == 0.0 {
                return Err(Error::Inadmissible("spiral-b needs alpha != 0".into()));
            }
            tolerance = 1e-8;
            let a2 = a * a;
            let p = a2 / (2.0 * (1.0 + a2));
            let k = a / (1.0 + a2);
            let norm = (1.0 + a2).sqrt();
            (
                "u = B^(alpha^2/(2(1+alpha^2))) * exp(-alpha/(1+alpha^2) * arctan((alpha*x + y)/(1 + x - alpha*y))), \
                 B = alpha^2 + 2 alpha^2 x - 2 alpha^3 y + alpha^2 (1+alpha^2)(x^2 + y^2)"
                    .into(),
                Domain::new(
                    vec![(-10.0, 10.0); 2],
                    format!("[-10,10]^2 at distance >= 0.1 from the line 1 + x - {a}*y = 0"),
                    move |q| (1.0 + q[0] - a * q[1]).abs() / norm >= 0.1,
                ),
                Arc::new(move |v: &[Jet3]| {
                    let (x, y) = (&v[0], &v[1]);
                    let b = (x * (2.0 * a2) - y * (2.0 * a2 * a) + r2(v) * (a2 * (1.0 + a2))) + a2;
                    let num = x * a + y;
                    let den = x - y * a + 1.0;
                    Ok((b.ln()? * p - atan_ratio(&num, &den)? * k).exp())
                }),
            )
        }
        "eikonal-quad" => {
            target = OperatorId::REDUCED;
            let k = 1.0 / (2.0 * 2f64.sqrt());
            (
                "u = (x^2 + y^2)/(2*sqrt(2))".into(),
                Domain::boxed(vec![(-10.0, 10.0); 2], "[-10,10]^2"),
                Arc::new(move |v: &[Jet3]| Ok(r2(v) * k)),
            )
        }
        "aronsson-arctan-combo" => {
            let c = rd.vector("c", &[1.0, 0.5], Some(2))?;
            (
                "u = c1*arctan(x/y) + c2*arctan(y/x)".into(),
                Domain::boxed(vec![(0.5, 10.0); 2], "[0.5,10]^2"),
                Arc::new(move |v: &[Jet3]| {
                    Ok(atan_ratio(&v[0], &v[1])? * c[0] + atan_ratio(&v[1], &v[0])? * c[1])
                }),
            )
        }
        _ => return Err(Error::UnknownId { kind: "solution", id: id.to_string() }),
    };
    let params = rd.finish()?;
    Ok(SolutionSpec { id: id.to_string(), params, target, formula, domain, tolerance, history: Vec::new(), n, eval })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    G1,
    G2,
    G3,
    G4,
    G5,
    G6,
    G7,
    G8,
    H,
    #[serde(rename = "sigma")]
    Sigma,
    #[serde(rename = "rho_x")]
    RhoX,
    #[serde(rename = "rho_u")]
    RhoU,
}

impl GroupKind {
    pub const CONTINUOUS: [GroupKind; 9] = [
        GroupKind::G1,
        GroupKind::G2,
        GroupKind::G3,
        GroupKind::G4,
        GroupKind::G5,
        GroupKind::G6,
        GroupKind::G7,
        GroupKind::G8,
        GroupKind::H,
    ];
    pub const DISCRETE: [GroupKind; 3] = [GroupKind::Sigma, GroupKind::RhoX, GroupKind::RhoU];

    pub fn is_discrete(self) -> bool {
        Self::DISCRETE.contains(&self)
    }

    /// Whether the element maps solutions of `target` to solutions.
    pub fn preserves(self, target: OperatorId) -> bool {
        use GroupKind::*;
        match target {
            OperatorId::InfPolylap => true,
            OperatorId::ReducedInfPolylap(_) | OperatorId::EikonalF(_) => !matches!(self, G4 | G5),
            OperatorId::InfLap => !matches!(self, G6 | G7),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GroupKind::Sigma => "sigma",
            GroupKind::RhoX => "rho_x",
            GroupKind::RhoU => "rho_u",
            other => return write!(f, "{other:?}"),
        };
        f.write_str(s)
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use GroupKind::*;
        Ok(match s.to_ascii_lowercase().as_str() {
            "g1" => G1,
            "g2" => G2,
            "g3" => G3,
            "g4" => G4,
            "g5" => G5,
            "g6" => G6,
            "g7" => G7,
            "g8" => G8,
            "h" => H,
            "sigma" => Sigma,
            "rho_x" => RhoX,
            "rho_u" => RhoU,
            _ => return Err(Error::UnknownId { kind: "group element", id: s.to_string() }),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub kind: GroupKind,
    pub eps: f64,
}

impl GroupElement {
    pub fn new(kind: GroupKind, eps: f64) -> Self {
        Self { kind, eps }
    }

    pub fn discrete(kind: GroupKind) -> Self {
        Self { kind, eps: 0.0 }
    }

    /// `(A, b, s, w, k)` with `u~(p) = s u(A p + b) + w . p + k`.
    fn affine(&self) -> ([[f64; 2]; 2], [f64; 2], f64, [f64; 2], f64) {
        use GroupKind::*;
        let e = self.eps;
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let (c, s) = (e.cos(), e.sin());
        let d = (-e).exp();
        match self.kind {
            G1 => (id, [-e, 0.0], 1.0, [0.0; 2], 0.0),
            G2 => (id, [0.0, -e], 1.0, [0.0; 2], 0.0),
            G3 => ([[c, s], [-s, c]], [0.0; 2], 1.0, [0.0; 2], 0.0),
            G4 => ([[d, 0.0], [0.0, d]], [0.0; 2], 1.0, [0.0; 2], 0.0),
            G5 => (id, [0.0; 2], e.exp(), [0.0; 2], 0.0),
            G6 => (id, [0.0; 2], 1.0, [e, 0.0], 0.0),
            G7 => (id, [0.0; 2], 1.0, [0.0, e], 0.0),
            G8 => (id, [0.0; 2], 1.0, [0.0; 2], e),
            H => ([[d, 0.0], [0.0, d]], [0.0; 2], (2.0 * e).exp(), [0.0; 2], 0.0),
            Sigma => ([[0.0, 1.0], [1.0, 0.0]], [0.0; 2], 1.0, [0.0; 2], 0.0),
            RhoX => ([[-1.0, 0.0], [0.0, 1.0]], [0.0; 2], 1.0, [0.0; 2], 0.0),
            RhoU => (id, [0.0; 2], -1.0, [0.0; 2], 0.0),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.is_discrete() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}({})", self.kind, self.eps)
        }
    }
}

/// Transports a two-variable solution along a group element.
pub fn apply_group(g: GroupElement, s: &SolutionSpec) -> Result<SolutionSpec> {
    if s.n != 2 {
        return Err(Error::UnsupportedDimension(s.n));
    }
    if !g.eps.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite group parameter {}", g.eps)));
    }
    if !g.kind.preserves(s.target) {
        return Err(Error::SymmetryBreaking { group: g.kind.to_string(), target: s.target.to_string() });
    }
    let (a, b, scale, w, k) = g.affine();
    let pre = move |p: &[f64]| -> [f64; 2] {
        [a[0][0] * p[0] + a[0][1] * p[1] + b[0], a[1][0] * p[0] + a[1][1] * p[1] + b[1]]
    };

    // Image of the old box corners under p -> A^{-1}(q - b).
    let m = DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]]);
    let inv = m.try_inverse().ok_or_else(|| Error::Degenerate(format!("{g} is not invertible")))?;
    let old = &s.domain.bounds;
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); 2];
    for mask in 0..4 {
        let q = DVector::from_vec(vec![
            if mask & 1 == 0 { old[0].0 } else { old[0].1 } - b[0],
            if mask & 2 == 0 { old[1].0 } else { old[1].1 } - b[1],
        ]);
        let p = &inv * q;
        for i in 0..2 {
            bounds[i].0 = bounds[i].0.min(p[i]);
            bounds[i].1 = bounds[i].1.max(p[i]);
        }
    }
    let old_domain = s.domain.clone();
    let domain = Domain::new(bounds, format!("{g} image of {}", old_domain.description), move |p| {
        old_domain.contains(&pre(p))
    });

    let inner = s.eval.clone();
    let eval: Evaluator = Arc::new(move |v: &[Jet3]| {
        let q0 = &v[0] * a[0][0] + &v[1] * a[0][1] + b[0];
        let q1 = &v[0] * a[1][0] + &v[1] * a[1][1] + b[1];
        let u = inner(&[q0, q1])?;
        Ok(u * scale + &v[0] * w[0] + &v[1] * w[1] + k)
    });

    let mut history = s.history.clone();
    history.push(g.to_string());
    Ok(SolutionSpec {
        id: s.id.clone(),
        params: s.params.clone(),
        target: s.target,
        formula: s.formula.clone(),
        domain,
        tolerance: s.tolerance,
        history,
        n: 2,
        eval,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub id: String,
    pub params: Params,
    pub formula: String,
    pub domain: String,
    pub target: OperatorId,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub transforms: Vec<String>,
    pub tolerance: f64,
    pub n_points: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub points: Vec<PointResidual>,
}

/// Normalized residual of `s` against its target on seeded domain samples.
/// The per-point array is kept only when `keep_points` is set.
pub fn verify_with(s: &SolutionSpec, n_points: usize, seed: u64, keep_points: bool) -> Result<VerifyReport> {
    let pts = s.sample(n_points, seed)?;
    let r = relative_residual(s.target, s, &pts)?;
    Ok(VerifyReport {
        id: s.id.clone(),
        params: s.params.clone(),
        formula: s.formula.clone(),
        domain: s.domain.description.clone(),
        target: s.target,
        transforms: s.history.clone(),
        tolerance: s.tolerance,
        n_points: r.n_points,
        seed,
        max_residual: r.max_relative,
        mean_residual: r.mean_relative,
        passed: r.max_relative <= s.tolerance,
        points: if keep_points { r.points } else { Vec::new() },
    })
}

pub fn verify(s: &SolutionSpec, n_points: usize, seed: u64) -> Result<VerifyReport> {
    verify_with(s, n_points, seed, false)
}

pub const ORBIT_EPS: [f64; 4] = [0.3, -0.3, 1.0, -1.0];
pub const ORBIT_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCheck {
    pub element: String,
    pub max_residual: Option<f64>,
    pub bound: f64,
    pub passed: bool,
    /// Set when the element is rejected as a non-symmetry.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rejected: Option<String>,
}

/// Transports `s` along every continuous generator at each `eps` and along
/// the discrete symmetries, re-verifying each image. Elements that are not
/// symmetries of the target count as passed when they are rejected.
pub fn orbit_closure(s: &SolutionSpec, eps: &[f64], n_points: usize, seed: u64) -> Result<Vec<OrbitCheck>> {
    let bound = ORBIT_FACTOR * s.tolerance;
    let mut elements: Vec<GroupElement> = GroupKind::CONTINUOUS
        .iter()
        .flat_map(|k| eps.iter().map(|e| GroupElement::new(*k, *e)))
        .collect();
    elements.extend(GroupKind::DISCRETE.iter().map(|k| GroupElement::discrete(*k)));
    let mut out = Vec::with_capacity(elements.len());
    for g in elements {
        match apply_group(g, s) {
            Ok(t) => {
                let r = verify(&t, n_points, seed)?;
                out.push(OrbitCheck {
                    element: g.to_string(),
                    max_residual: Some(r.max_residual),
                    bound,
                    passed: r.max_residual <= bound,
                    rejected: None,
                });
            }
            Err(e @ Error::SymmetryBreaking { .. }) => out.push(OrbitCheck {
                element: g.to_string(),
                max_residual: None,
                bound,
                passed: !g.kind.preserves(s.target),
                rejected: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub formula: String,
    pub target: OperatorId,
    pub domain: String,
    pub params: Params,
    pub tolerance: f64,
}

/// Every entry with its default parameters.
pub fn list() -> Vec<CatalogEntry> {
    IDS.iter()
        .map(|id| {
            let s = get_solution(id, &Params::new()).expect("defaults are admissible");
            CatalogEntry {
                id: s.id,
                formula: s.formula,
                target: s.target,
                domain: s.domain.description,
                params: s.params,
                tolerance: s.tolerance,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_parse() {
        let p = parse_params(&["n=2".into(), "c=1, -1".into()]).unwrap();
        assert_eq!(p["n"], vec![2.0]);
        assert_eq!(p["c"], vec![1.0, -1.0]);
        assert!(parse_params(&["c".into()]).is_err());
        assert!(parse_params(&["c=1,x".into()]).is_err());
    }

    #[test]
    fn unknown_ids_and_keys() {
        assert!(matches!(get_solution("nope", &Params::new()), Err(Error::UnknownId { .. })));
        let p = parse_params(&["alpha=2".into()]).unwrap();
        assert!(matches!(get_solution("cone", &p), Err(Error::InvalidArgument(_))));
        let p = parse_params(&["c=1,2,3".into()]).unwrap();
        assert!(get_solution("rot-sqrt2", &p).is_err());
    }

    #[test]
    fn group_kinds_round_trip() {
        for k in GroupKind::CONTINUOUS.iter().chain(&GroupKind::DISCRETE) {
            assert_eq!(k.to_string().parse::<GroupKind>().unwrap(), *k);
        }
        assert_eq!(GroupElement::new(GroupKind::G3, 0.5).to_string(), "G3(0.5)");
        assert_eq!(GroupElement::discrete(GroupKind::Sigma).to_string(), "sigma");
    }

    #[test]
    fn transported_domain_pulls_back() {
        let s = get_solution("power125", &Params::new()).unwrap();
        let t = apply_group(GroupElement::new(GroupKind::G1, 2.0), &s).unwrap();
        assert!(t.contains(&[2.5, 1.0]));
        assert!(!t.contains(&[1.5, 1.0]));
        assert_eq!(t.domain.bounds[0], (2.0, 12.0));
        let r = apply_group(GroupElement::discrete(GroupKind::RhoX), &s).unwrap();
        assert!(r.contains(&[-1.0, 1.0]) && !r.contains(&[1.0, 1.0]));
    }

    #[test]
    fn defaults_list() {
        let l = list();
        assert_eq!(l.len(), 10);
        assert_eq!(l[5].params["c"], vec![1.0, -1.0, 0.0]);
    }
}
