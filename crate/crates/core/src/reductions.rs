//! Reduced ODEs of invariant ansaetze and the lift back to the plane.
//!
//! Residuals are evaluated on one-variable jets `(g, g', g'', g''')`. The
//! builtin profile functions are written against [`Jet3`] of any dimension,
//! so the same closure evaluates `g(s)` on a line and `g(s(x, y))` in the
//! plane through the chain rule.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::{Domain, Evaluator, ParamReader, Params, SolutionSpec};
use crate::error::{Error, Result};
use crate::fields::{normalized_residual, OperatorId};
use crate::jets::{Jet3, JetField};

pub const ODE_TOLERANCE: f64 = 1e-12;
pub const S_RANGE: (f64, f64) = (0.5, 5.0);
pub const S_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OdeKind {
    #[serde(rename = "fullrot")]
    FullRot,
    #[serde(rename = "rot-linear")]
    RotLinear,
    #[serde(rename = "a3-linear")]
    A3Linear,
    #[serde(rename = "a4-ode")]
    A4,
    #[serde(rename = "a6-E1")]
    A6E1,
    #[serde(rename = "a6-E2")]
    A6E2,
    /// Third-order factor with the `s g'''` coefficient as first printed.
    #[serde(rename = "a6-E2-printed")]
    A6E2Printed,
    #[serde(rename = "a7-E1")]
    A7E1,
    #[serde(rename = "a7-E2")]
    A7E2,
    #[serde(rename = "b2-ode")]
    B2,
    #[serde(rename = "b3-ode")]
    B3,
    #[serde(rename = "x1-ode")]
    X1,
}

impl OdeKind {
    pub const ALL: [OdeKind; 12] = [
        OdeKind::FullRot,
        OdeKind::RotLinear,
        OdeKind::A3Linear,
        OdeKind::A4,
        OdeKind::A6E1,
        OdeKind::A6E2,
        OdeKind::A6E2Printed,
        OdeKind::A7E1,
        OdeKind::A7E2,
        OdeKind::B2,
        OdeKind::B3,
        OdeKind::X1,
    ];

    pub fn id(self) -> &'static str {
        match self {
            OdeKind::FullRot => "fullrot",
            OdeKind::RotLinear => "rot-linear",
            OdeKind::A3Linear => "a3-linear",
            OdeKind::A4 => "a4-ode",
            OdeKind::A6E1 => "a6-E1",
            OdeKind::A6E2 => "a6-E2",
            OdeKind::A6E2Printed => "a6-E2-printed",
            OdeKind::A7E1 => "a7-E1",
            OdeKind::A7E2 => "a7-E2",
            OdeKind::B2 => "b2-ode",
            OdeKind::B3 => "b3-ode",
            OdeKind::X1 => "x1-ode",
        }
    }

    pub fn order(self) -> usize {
        match self {
            OdeKind::FullRot | OdeKind::A6E2 | OdeKind::A6E2Printed | OdeKind::X1 => 3,
            _ => 2,
        }
    }

    fn has_alpha(self) -> bool {
        matches!(self, OdeKind::A7E1 | OdeKind::A7E2)
    }

    pub fn ansatz(self) -> Ansatz {
        match self {
            OdeKind::FullRot | OdeKind::RotLinear | OdeKind::B2 => Ansatz::Radial,
            OdeKind::A3Linear => Ansatz::Ratio,
            OdeKind::A4 => Ansatz::ExpX,
            OdeKind::A6E1 | OdeKind::A6E2 | OdeKind::A6E2Printed | OdeKind::B3 => Ansatz::XSquaredRatio,
            OdeKind::A7E1 => Ansatz::LogSpiral,
            OdeKind::A7E2 => Ansatz::ShiftedSpiral,
            OdeKind::X1 => Ansatz::Y,
        }
    }

    /// Equation the lifted field is meant to solve.
    pub fn target(self) -> OperatorId {
        match self {
            OdeKind::B2 | OdeKind::B3 => OperatorId::REDUCED,
            _ => OperatorId::InfPolylap,
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            OdeKind::FullRot => "(2s g'' + g') [s (2s g'' + g') g''' + (3s g'' + 2g') g'']^2 = 0",
            OdeKind::RotLinear => "2s g'' + g' = 0",
            OdeKind::A3Linear => "(1 + s^2) g'' + 2s g' = 0",
            OdeKind::A4 => "4h G^2 + 4h' G G' + h'' G'^2 = 0, G = h^2 + 2h'^2 + h''^2",
            OdeKind::A6E1 => "s^2 (1+s^2)^2 g'' + 2s (1+s^2)(2+s^2) g' + 2g = 0",
            OdeKind::A6E2 => "s^2 g''' + 6s g'' + 6g' = 0",
            OdeKind::A6E2Printed => "s g''' + 6s g'' + 6g' = 0",
            OdeKind::A7E1 => "(1 + alpha^2) g'' + alpha g' = 0",
            OdeKind::A7E2 => "4(1 + alpha^2) h'' - alpha h' = 0",
            OdeKind::B2 => "16 s^2 g''^2 + 16 s g' g'' + 8 g'^2 - 1 = 0",
            OdeKind::B3 => {
                "s^4 (1+s^2)^2 g''^2 + 4s^2 (g + s(2+3s^2+s^4) g') g'' + 2s^2 (8+9s^2+2s^4) g'^2 \
                 + 16 s g g' + 4g^2 - 1 = 0"
            }
            OdeKind::X1 => "g''^3 g'''^2 = 0",
        }
    }

    /// Open interval of admissible values of the reduced variable.
    pub fn s_domain(self) -> (f64, f64) {
        match self.ansatz() {
            Ansatz::Radial => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

impl fmt::Display for OdeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for OdeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OdeKind::ALL
            .into_iter()
            .find(|k| k.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownId { kind: "ODE", id: s.to_string() })
    }
}

/// Invariant form of the two-variable solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ansatz {
    /// `u = g(x^2 + y^2)`
    Radial,
    /// `u = g(x/y)`
    Ratio,
    /// `u = e^x h(y)`
    ExpX,
    /// `u = x^2 g(x/y)`
    XSquaredRatio,
    /// `u = g(arctan(x/y) - alpha/2 ln(x^2 + y^2))`
    LogSpiral,
    /// `u = h(z)`, `z = -4 arctan((alpha x + y)/(1 + x - alpha y)) + 2 alpha ln B`
    ShiftedSpiral,
    /// `u = g(y)`
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedOde {
    pub kind: OdeKind,
    pub alpha: Option<f64>,
}

impl ReducedOde {
    pub fn new(kind: OdeKind, alpha: Option<f64>) -> Result<Self> {
        match (kind.has_alpha(), alpha) {
            (true, None) => Ok(Self { kind, alpha: Some(1.0) }),
            (true, Some(a)) if a == 0.0 || !a.is_finite() => {
                Err(Error::Inadmissible(format!("{kind} needs a finite alpha != 0, got {a}")))
            }
            (false, Some(_)) => Err(Error::InvalidArgument(format!("{kind} takes no alpha"))),
            _ => Ok(Self { kind, alpha }),
        }
    }

    pub fn parse(id: &str, params: &Params) -> Result<Self> {
        let kind: OdeKind = id.parse()?;
        let mut rd = ParamReader::new(id, params);
        let alpha = if kind.has_alpha() { Some(rd.scalar("alpha", 1.0)?) } else { None };
        rd.finish()?;
        Self::new(kind, alpha)
    }

    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.0)
    }

    /// ODE left-hand side at `s` for the one-variable jet `g`.
    pub fn residual(&self, s: f64, g: &Jet3) -> Result<f64> {
        if g.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: g.dim() });
        }
        let (lo, hi) = self.kind.s_domain();
        if !(s > lo && s < hi) {
            return Err(Error::OutsideDomain { point: vec![s], domain: format!("({lo}, {hi})") });
        }
        let (g0, g1, g2, g3) = (g.value(), g.grad(0), g.hess(0, 0), g.third(0, 0, 0));
        let a = self.alpha();
        let s2 = s * s;
        Ok(match self.kind {
            OdeKind::FullRot => {
                let lin = 2.0 * s * g2 + g1;
                let second = s * lin * g3 + (3.0 * s * g2 + 2.0 * g1) * g2;
                lin * second * second
            }
            OdeKind::RotLinear => 2.0 * s * g2 + g1,
            OdeKind::A3Linear => (1.0 + s2) * g2 + 2.0 * s * g1,
            OdeKind::A4 => {
                let big = g0 * g0 + 2.0 * g1 * g1 + g2 * g2;
                let big1 = 2.0 * g0 * g1 + 4.0 * g1 * g2 + 2.0 * g2 * g3;
                4.0 * g0 * big * big + 4.0 * g1 * big * big1 + g2 * big1 * big1
            }
            OdeKind::A6E1 => {
                let p = 1.0 + s2;
                s2 * p * p * g2 + 2.0 * s * p * (2.0 + s2) * g1 + 2.0 * g0
            }
            OdeKind::A6E2 => s2 * g3 + 6.0 * s * g2 + 6.0 * g1,
            OdeKind::A6E2Printed => s * g3 + 6.0 * s * g2 + 6.0 * g1,
            OdeKind::A7E1 => (1.0 + a * a) * g2 + a * g1,
            OdeKind::A7E2 => 4.0 * (1.0 + a * a) * g2 - a * g1,
            OdeKind::B2 => 16.0 * s2 * g2 * g2 + 16.0 * s * g1 * g2 + 8.0 * g1 * g1 - 1.0,
            OdeKind::B3 => {
                let s4 = s2 * s2;
                s4 * (1.0 + s2).powi(2) * g2 * g2
                    + 4.0 * s2 * (g0 + s * (2.0 + 3.0 * s2 + s4) * g1) * g2
                    + 2.0 * s2 * (8.0 + 9.0 * s2 + 2.0 * s4) * g1 * g1
                    + 16.0 * s * g0 * g1
                    + 4.0 * g0 * g0
                    - 1.0
            }
            OdeKind::X1 => g2.powi(3) * g3 * g3,
        })
    }
}

impl fmt::Display for ReducedOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.alpha {
            Some(a) => write!(f, "{}(alpha={a})", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

pub type Profile = Arc<dyn Fn(&Jet3) -> Result<Jet3> + Send + Sync>;

/// A named profile function `g`.
#[derive(Clone)]
pub struct BuiltinG {
    pub id: String,
    pub params: Params,
    pub formula: String,
    eval: Profile,
}

impl fmt::Debug for BuiltinG {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BuiltinG").field("id", &self.id).field("params", &self.params).finish()
    }
}

pub const BUILTIN_IDS: [&str; 13] = [
    "sqrt",
    "atan",
    "eikonal-linear",
    "inv-sqrt2",
    "inv-2s2",
    "e1-cos",
    "e1-sin",
    "laurent",
    "spiral-a",
    "spiral-b",
    "quadratic",
    "zero",
    "generic",
];

impl BuiltinG {
    pub fn get(id: &str, params: &Params) -> Result<Self> {
        let mut rd = ParamReader::new(id, params);
        let s2 = 2f64.sqrt();
        let (formula, eval): (String, Profile) = match id {
            "sqrt" => ("g = sqrt(s)".into(), Arc::new(|s: &Jet3| s.sqrt())),
            "atan" => ("g = arctan(s)".into(), Arc::new(|s: &Jet3| Ok(s.atan()))),
            "eikonal-linear" => ("g = s/(2 sqrt 2)".into(), Arc::new(move |s: &Jet3| Ok(s * (1.0 / (2.0 * s2))))),
            "inv-sqrt2" => ("g = 1/(sqrt(2) s)".into(), Arc::new(move |s: &Jet3| Ok(s.recip()? * (1.0 / s2)))),
            "inv-2s2" => ("g = 1/(2 s^2)".into(), Arc::new(|s: &Jet3| Ok(s.powi(-2)? * 0.5))),
            "e1-cos" | "e1-sin" => {
                let cos = id == "e1-cos";
                (
                    format!("g = (1 + s^2)/s^2 * {}(sqrt(2) arctan s)", if cos { "cos" } else { "sin" }),
                    Arc::new(move |s: &Jet3| {
                        let t = s.atan() * s2;
                        let trig = if cos { t.cos() } else { t.sin() };
                        Ok((s.powi(-2)? + 1.0) * trig)
                    }),
                )
            }
            "laurent" => {
                let c = rd.vector("c", &[1.0, -2.0, 0.5], Some(3))?;
                (
                    "g = c0 + c1/s + c2/s^2".into(),
                    Arc::new(move |s: &Jet3| Ok(s.recip()? * c[1] + s.powi(-2)? * c[2] + c[0])),
                )
            }
            "spiral-a" => {
                let a = rd.scalar("alpha", 1.0)?;
                ("g = exp(-alpha s/(1 + alpha^2))".into(), Arc::new(move |s: &Jet3| Ok((s * (-a / (1.0 + a * a))).exp())))
            }
            "spiral-b" => {
                let a = rd.scalar("alpha", 1.0)?;
                (
                    "h = exp(alpha z/(4(1 + alpha^2)))".into(),
                    Arc::new(move |s: &Jet3| Ok((s * (a / (4.0 * (1.0 + a * a)))).exp())),
                )
            }
            "quadratic" => {
                let c = rd.vector("c", &[1.0, -2.0, 0.5], Some(3))?;
                ("g = c0 + c1 s + c2 s^2".into(), Arc::new(move |s: &Jet3| Ok(s * c[1] + s * s * c[2] + c[0])))
            }
            "zero" => ("g = 0".into(), Arc::new(|s: &Jet3| Ok(Jet3::constant(s.dim(), 0.0)))),
            "generic" => (
                "g = exp(3s/10) + sin(s) + s^3/7".into(),
                Arc::new(|s: &Jet3| Ok((s * 0.3).exp() + s.sin() + s.powi(3)? * (1.0 / 7.0))),
            ),
            _ => return Err(Error::UnknownId { kind: "profile", id: id.to_string() }),
        };
        let params = rd.finish()?;
        Ok(Self { id: id.to_string(), params, formula, eval })
    }

    /// `g` composed with `arg`, for jets of any dimension.
    pub fn apply(&self, arg: &Jet3) -> Result<Jet3> {
        (self.eval)(arg)
    }

    pub fn jet(&self, s: f64) -> Result<Jet3> {
        self.apply(&Jet3::seed(&[s], 0)?)
    }
}

/// Evenly spaced points from `lo` to `hi` inclusive.
pub fn s_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeReport {
    pub ode: String,
    pub formula: String,
    pub g: String,
    pub g_formula: String,
    pub g_params: Params,
    pub n_points: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub max_abs_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn ode_residual(ode: &ReducedOde, g: &BuiltinG, s_points: &[f64]) -> Result<OdeReport> {
    let mut worst: f64 = 0.0;
    for &s in s_points {
        let r = ode.residual(s, &g.jet(s)?)?;
        worst = worst.max(r.abs());
    }
    let fold = |f: fn(f64, f64) -> f64, init| s_points.iter().copied().fold(init, f);
    Ok(OdeReport {
        ode: ode.to_string(),
        formula: ode.kind.formula().to_string(),
        g: g.id.clone(),
        g_formula: g.formula.clone(),
        g_params: g.params.clone(),
        n_points: s_points.len(),
        s_min: fold(f64::min, f64::INFINITY),
        s_max: fold(f64::max, f64::NEG_INFINITY),
        max_abs_residual: worst,
        tolerance: ODE_TOLERANCE,
        passed: worst.is_finite() && worst <= ODE_TOLERANCE,
    })
}

/// The invariant variable of `ansatz` as a jet in the plane.
fn invariant(ansatz: Ansatz, alpha: f64, v: &[Jet3]) -> Result<Jet3> {
    let (x, y) = (&v[0], &v[1]);
    let r2 = x * x + y * y;
    Ok(match ansatz {
        Ansatz::Radial => r2,
        Ansatz::Ratio | Ansatz::XSquaredRatio => x.div(y)?,
        Ansatz::ExpX | Ansatz::Y => y.clone(),
        Ansatz::LogSpiral => x.div(y)?.atan() - r2.ln()? * (alpha / 2.0),
        Ansatz::ShiftedSpiral => {
            let a = alpha;
            let b = x * (2.0 * a * a) - y * (2.0 * a * a * a) + r2 * (a * a * (1.0 + a * a)) + a * a;
            let ang = (x * a + y).div(&(x - y * a + 1.0))?.atan();
            b.ln()? * (2.0 * a) - ang * 4.0
        }
    })
}

fn lift_domain(ansatz: Ansatz, alpha: f64) -> Domain {
    match ansatz {
        Ansatz::Radial => Domain::new(vec![(-10.0, 10.0); 2], "[-10,10]^2 with x^2 + y^2 >= 0.25", |p| {
            p[0] * p[0] + p[1] * p[1] >= 0.25
        }),
        Ansatz::Ratio | Ansatz::LogSpiral => {
            Domain::boxed(vec![(-10.0, 10.0), (0.5, 10.0)], "x in [-10,10], y in [0.5,10]")
        }
        Ansatz::XSquaredRatio => {
            Domain::new(vec![(-10.0, 10.0), (0.5, 10.0)], "|x| in [0.5,10], y in [0.5,10]", |p| p[0].abs() >= 0.5)
        }
        Ansatz::ExpX => Domain::boxed(vec![(-3.0, 3.0), (-3.0, 3.0)], "[-3,3]^2"),
        Ansatz::Y => Domain::boxed(vec![(-10.0, 10.0); 2], "[-10,10]^2"),
        Ansatz::ShiftedSpiral => {
            let norm = (1.0 + alpha * alpha).sqrt();
            Domain::new(
                vec![(-10.0, 10.0); 2],
                format!("[-10,10]^2 at distance >= 0.1 from the line 1 + x - {alpha}*y = 0"),
                move |q| (1.0 + q[0] - alpha * q[1]).abs() / norm >= 0.1,
            )
        }
    }
}

/// Composes `g` with the invariant ansatz of `ode`.
pub fn lift_ansatz(ode: &ReducedOde, g: &BuiltinG) -> Result<SolutionSpec> {
    let ansatz = ode.kind.ansatz();
    let alpha = ode.alpha();
    let prof = g.clone();
    let eval: Evaluator = Arc::new(move |v: &[Jet3]| {
        let s = invariant(ansatz, alpha, v)?;
        let gs = prof.apply(&s)?;
        Ok(match ansatz {
            Ansatz::ExpX => v[0].exp() * gs,
            Ansatz::XSquaredRatio => &v[0] * &v[0] * gs,
            _ => gs,
        })
    });
    let tolerance = if ode.kind == OdeKind::A7E2 { 1e-8 } else { 1e-9 };
    let mut params = g.params.clone();
    if let Some(a) = ode.alpha {
        params.insert("alpha".into(), vec![a]);
    }
    Ok(SolutionSpec::from_evaluator(
        format!("lift:{}:{}", ode.kind, g.id),
        params,
        ode.kind.target(),
        format!("{:?} ansatz with {}", ansatz, g.formula),
        lift_domain(ansatz, alpha),
        tolerance,
        eval,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub expected: f64,
    /// Fitted exponent of each additive term.
    pub term_exponents: Vec<f64>,
    pub exponent: f64,
}

/// Fits the weight `w` in `term -> e^{w eps} term` for every additive term
/// of the infinity-Polylaplacian under `(x, y, u) -> (e^{alpha eps} x,
/// e^{alpha eps} y, e^{eps} u)`.
pub fn scaling_weight_check(alpha: f64) -> Result<ScalingFit> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha = {alpha}")));
    }
    let base = |c: &[Jet3]| -> Result<Jet3> {
        let (x, y) = (&c[0], &c[1]);
        Ok((x * 0.3).exp() * y.sin() + x * x * y + x.powi(3)? * 0.1)
    };
    let p = [0.7, 1.3];
    let terms_at = |eps: f64| -> Result<Vec<f64>> {
        let c = Jet3::coordinates(&[p[0] * (alpha * eps).exp(), p[1] * (alpha * eps).exp()])?;
        let d = (-alpha * eps).exp();
        let u = base(&[&c[0] * d, &c[1] * d])? * eps.exp();
        Ok(crate::fields::operator_terms(OperatorId::InfPolylap, &u))
    };
    let t0 = terms_at(0.0)?;
    if t0.iter().all(|t| *t == 0.0) {
        return Err(Error::Degenerate("every term of the test field vanishes".into()));
    }
    let eps = [-0.5, -0.25, 0.25, 0.5];
    let samples: Vec<Vec<f64>> = eps.iter().map(|e| terms_at(*e)).collect::<Result<_>>()?;
    let denom: f64 = eps.iter().map(|e| e * e).sum();
    let mut term_exponents = Vec::new();
    for (k, base) in t0.iter().enumerate() {
        if *base == 0.0 {
            continue;
        }
        let num: f64 = eps.iter().zip(&samples).map(|(e, t)| e * (t[k] / base).ln()).sum();
        term_exponents.push(num / denom);
    }
    let exponent = term_exponents.iter().sum::<f64>() / term_exponents.len() as f64;
    Ok(ScalingFit { alpha, expected: 5.0 - 12.0 * alpha, term_exponents, exponent })
}

/// Normalized PDE residual of a lifted field at one point.
pub fn lifted_residual(spec: &SolutionSpec, p: &[f64]) -> Result<f64> {
    let (r, scale) = normalized_residual(spec.target, &spec.jet_at(p)?)?;
    Ok(r.abs() / scale)
}
