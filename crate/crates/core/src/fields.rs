//! Differential operators evaluated on jets.
//!
//! `f[u] = sum_ij u_{x_i x_j}^2`, the infinity-Polylaplacian
//! `sum_ij f_i f_j u_ij`, its reduced form `f[u] = c` and Aronsson's
//! operator `sum_ij u_i u_j u_ij`. Every operator is also exposed as its
//! list of additive terms so residuals can be normalized per point.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet3, JetField};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "c")]
pub enum OperatorId {
    InfPolylap,
    ReducedInfPolylap(f64),
    InfLap,
    EikonalF(f64),
}

impl OperatorId {
    pub const REDUCED: OperatorId = OperatorId::ReducedInfPolylap(1.0);

    /// Highest derivative order the operator reads.
    pub fn order(self) -> usize {
        match self {
            OperatorId::InfPolylap => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorId::InfPolylap => write!(f, "infpolylap"),
            OperatorId::ReducedInfPolylap(c) => write!(f, "reduced:{c}"),
            OperatorId::InfLap => write!(f, "inflap"),
            OperatorId::EikonalF(c) => write!(f, "eikonal:{c}"),
        }
    }
}

impl FromStr for OperatorId {
    type Err = Error;

    /// Accepts `infpolylap`, `inflap`, `reduced[:c]`, `eikonal[:c]`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, c) = match s.split_once(':') {
            Some((h, c)) => {
                let c: f64 = c
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad constant in operator `{s}`")))?;
                if !c.is_finite() {
                    return Err(Error::InvalidArgument(format!("non-finite constant in `{s}`")));
                }
                (h, Some(c))
            }
            None => (s, None),
        };
        match (head.to_ascii_lowercase().as_str(), c) {
            ("infpolylap", None) => Ok(OperatorId::InfPolylap),
            ("inflap", None) => Ok(OperatorId::InfLap),
            ("reduced", c) => Ok(OperatorId::ReducedInfPolylap(c.unwrap_or(1.0))),
            ("eikonal", c) => Ok(OperatorId::EikonalF(c.unwrap_or(1.0))),
            _ => Err(Error::UnknownId { kind: "operator", id: s.to_string() }),
        }
    }
}

/// `f[u]`, off-diagonal second derivatives counted twice.
pub fn eval_f(u: &Jet3) -> f64 {
    let n = u.dim();
    let mut s = 0.0;
    for i in 0..n {
        s += u.hess(i, i).powi(2);
        for j in i + 1..n {
            s += 2.0 * u.hess(i, j).powi(2);
        }
    }
    s
}

/// Gradient of `f[u]`: `f_k = 2 sum_ij u_ij u_ijk`.
pub fn eval_grad_f(u: &Jet3) -> Vec<f64> {
    let n = u.dim();
    (0..n)
        .map(|k| {
            let mut s = 0.0;
            for i in 0..n {
                s += u.hess(i, i) * u.third(i, i, k);
                for j in i + 1..n {
                    s += 2.0 * u.hess(i, j) * u.third(i, j, k);
                }
            }
            2.0 * s
        })
        .collect()
}

/// Additive terms of the operator's left-hand side minus right-hand side.
///
/// Symmetric pairs are merged (`2 f_x f_y u_xy` is one term), so in two
/// dimensions the infinity-Polylaplacian has exactly three terms.
pub fn operator_terms(op: OperatorId, u: &Jet3) -> Vec<f64> {
    let n = u.dim();
    let quadratic_form = |w: &[f64]| {
        let mut t = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            t.push(w[i] * w[i] * u.hess(i, i));
            for j in i + 1..n {
                t.push(2.0 * w[i] * w[j] * u.hess(i, j));
            }
        }
        t
    };
    match op {
        OperatorId::InfPolylap => quadratic_form(&eval_grad_f(u)),
        OperatorId::InfLap => quadratic_form(u.grad_slice()),
        OperatorId::ReducedInfPolylap(c) | OperatorId::EikonalF(c) => {
            let mut t = Vec::with_capacity(n * (n + 1) / 2 + 1);
            for i in 0..n {
                t.push(u.hess(i, i).powi(2));
                for j in i + 1..n {
                    t.push(2.0 * u.hess(i, j).powi(2));
                }
            }
            t.push(-c);
            t
        }
    }
}

/// Residual of `op` at the jet `u`.
pub fn eval_operator(op: OperatorId, u: &Jet3) -> Result<f64> {
    if u.dim() < 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: u.dim() });
    }
    Ok(operator_terms(op, u).iter().sum())
}

/// The two-variable infinity-Polylaplacian written out term by term.
pub fn infpolylap_2d(u: &Jet3) -> Result<f64> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: u.dim() });
    }
    let (uxx, uxy, uyy) = (u.hess(0, 0), u.hess(0, 1), u.hess(1, 1));
    let fx = 2.0 * uxx * u.third(0, 0, 0) + 4.0 * uxy * u.third(0, 0, 1) + 2.0 * uyy * u.third(0, 1, 1);
    let fy = 2.0 * uxx * u.third(0, 0, 1) + 4.0 * uxy * u.third(0, 1, 1) + 2.0 * uyy * u.third(1, 1, 1);
    Ok(fx * fx * uxx + 2.0 * fx * fy * uxy + fy * fy * uyy)
}

/// `F_k = 2 sum_ij |u_ij u_ijk|`, the magnitude `f_k` is computed from.
fn grad_f_magnitude(u: &Jet3) -> Vec<f64> {
    let n = u.dim();
    (0..n)
        .map(|k| {
            let mut s = 0.0;
            for i in 0..n {
                s += (u.hess(i, i) * u.third(i, i, k)).abs();
                for j in i + 1..n {
                    s += 2.0 * (u.hess(i, j) * u.third(i, j, k)).abs();
                }
            }
            2.0 * s
        })
        .collect()
}

/// Residual and normalizing scale at a single jet.
///
/// The scale is the sum of absolute term values, with each `f_k` inside an
/// infinity-Polylaplacian term replaced by `F_k` (see [`grad_f_magnitude`]).
/// Where `f` is locally constant the `f_k` are rounding noise and the bare
/// term sum would report noise over noise. The scale is replaced by 1 when
/// every term vanishes.
pub fn normalized_residual(op: OperatorId, u: &Jet3) -> Result<(f64, f64)> {
    let residual = eval_operator(op, u)?;
    let scale: f64 = match op {
        OperatorId::InfPolylap => {
            let mut terms: Vec<f64> = operator_terms(op, u).iter().map(|t| t.abs()).collect();
            let big = grad_f_magnitude(u);
            let n = u.dim();
            let mut t = 0;
            for i in 0..n {
                terms[t] = terms[t].max(big[i] * big[i] * u.hess(i, i).abs());
                t += 1;
                for j in i + 1..n {
                    terms[t] = terms[t].max(2.0 * big[i] * big[j] * u.hess(i, j).abs());
                    t += 1;
                }
            }
            terms.iter().sum()
        }
        _ => operator_terms(op, u).iter().map(|t| t.abs()).sum(),
    };
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok((residual, scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    pub point: Vec<f64>,
    pub residual: f64,
    pub scale: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub operator: OperatorId,
    pub max_relative: f64,
    pub mean_relative: f64,
    pub n_points: usize,
    pub points: Vec<PointResidual>,
}

pub fn relative_residual(op: OperatorId, field: &dyn JetField, points: &[Vec<f64>]) -> Result<ResidualReport> {
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        if !field.contains(p) {
            return Err(Error::OutsideDomain { point: p.clone(), domain: field.domain_label() });
        }
        let jet = field.jet_at(p)?;
        let (residual, scale) = normalized_residual(op, &jet)?;
        out.push(PointResidual { point: p.clone(), residual, scale, relative: residual.abs() / scale });
    }
    let max_relative = out.iter().map(|p| p.relative).fold(0.0, f64::max);
    let mean_relative = if out.is_empty() {
        0.0
    } else {
        out.iter().map(|p| p.relative).sum::<f64>() / out.len() as f64
    };
    Ok(ResidualReport { operator: op, max_relative, mean_relative, n_points: out.len(), points: out })
}

/// Seeded generator shared by every sampler in the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rejection-samples `count` points uniformly from `bounds` that satisfy
/// `accept`. Gives up with [`Error::EmptyDomain`] after `200 * count`
/// rejections.
pub fn sample_box(
    bounds: &[(f64, f64)],
    count: usize,
    rng: &mut ChaCha8Rng,
    accept: impl Fn(&[f64]) -> bool,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0usize;
    while out.len() < count {
        let p: Vec<f64> = bounds.iter().map(|(lo, hi)| rng.random_range(*lo..*hi)).collect();
        if accept(&p) {
            out.push(p);
        } else {
            rejected += 1;
            if rejected > 200 * count.max(1) {
                return Err(Error::EmptyDomain(format!("{bounds:?}")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::FnField;

    fn quad(a: f64, b: f64, c: f64, p: [f64; 2]) -> Jet3 {
        let x = Jet3::seed(&p, 0).unwrap();
        let y = Jet3::seed(&p, 1).unwrap();
        &x * &x * a + &x * &y * b + &y * &y * c
    }

    #[test]
    fn f_of_quadratics() {
        let p = [0.3, -1.2];
        let x = Jet3::seed(&p, 0).unwrap();
        let y = Jet3::seed(&p, 1).unwrap();
        assert_eq!(eval_f(&(&x * &x + &y * &y)), 8.0);
        assert_eq!(eval_f(&quad(1.0, 1.0, 1.0, p)), 10.0);
        let (a, b, c) = (0.7, -1.3, 2.1);
        let want = 4.0 * a * a + 2.0 * b * b + 4.0 * c * c;
        assert!((eval_f(&quad(a, b, c, p)) - want).abs() < 1e-14);
        assert_eq!(eval_f(&(&x * 3.0 - &y + 2.0)), 0.0);
    }

    #[test]
    fn grad_f_of_cubic() {
        let x = Jet3::seed(&[1.0, 0.5], 0).unwrap();
        let u = x.powi(3).unwrap();
        assert_eq!(eval_f(&u), 36.0);
        assert_eq!(eval_grad_f(&u), vec![72.0, 0.0]);
        assert_eq!(eval_grad_f(&quad(1.0, 2.0, 3.0, [1.0, 1.0])), vec![0.0, 0.0]);
    }

    #[test]
    fn quadratic_is_exact_zero_of_polylaplacian() {
        let u = quad(0.4, -2.0, 1.5, [2.0, -3.0]);
        assert_eq!(eval_operator(OperatorId::InfPolylap, &u).unwrap(), 0.0);
        let (_, scale) = normalized_residual(OperatorId::InfPolylap, &u).unwrap();
        assert_eq!(scale, 1.0);
    }

    #[test]
    fn eikonal_quadratic_solves_reduced_equation() {
        let k = 1.0 / (2.0 * 2f64.sqrt());
        let u = quad(k, 0.0, k, [0.7, 1.9]);
        assert!(eval_operator(OperatorId::REDUCED, &u).unwrap().abs() < 1e-14);
    }

    #[test]
    fn cone_solves_aronsson() {
        let field = FnField::new(2, |c: &[Jet3]| (&c[0] * &c[0] + &c[1] * &c[1]).sqrt());
        let u = field.jet_at(&[3.0, 4.0]).unwrap();
        let (r, scale) = normalized_residual(OperatorId::InfLap, &u).unwrap();
        assert!(r.abs() < 1e-12 * scale);
    }

    #[test]
    fn term_counts_and_dimension_errors() {
        let u = quad(1.0, 0.0, 1.0, [1.0, 1.0]);
        assert_eq!(operator_terms(OperatorId::InfPolylap, &u).len(), 3);
        assert_eq!(operator_terms(OperatorId::REDUCED, &u).len(), 4);
        let one = Jet3::seed(&[1.0], 0).unwrap();
        assert!(matches!(
            eval_operator(OperatorId::InfPolylap, &one),
            Err(Error::DimensionMismatch { .. })
        ));
        let three = Jet3::seed(&[1.0, 2.0, 3.0], 0).unwrap();
        assert!(infpolylap_2d(&three).is_err());
    }

    #[test]
    fn operator_ids_parse() {
        assert_eq!("infpolylap".parse::<OperatorId>().unwrap(), OperatorId::InfPolylap);
        assert_eq!("reduced".parse::<OperatorId>().unwrap(), OperatorId::REDUCED);
        assert_eq!("eikonal:2.5".parse::<OperatorId>().unwrap(), OperatorId::EikonalF(2.5));
        assert!("reduced:nan".parse::<OperatorId>().is_err());
        assert!("laplace".parse::<OperatorId>().is_err());
        for op in [OperatorId::InfPolylap, OperatorId::InfLap, OperatorId::EikonalF(-3.0)] {
            assert_eq!(op.to_string().parse::<OperatorId>().unwrap(), op);
        }
    }

    #[test]
    fn sampler_is_reproducible_and_respects_predicate() {
        let b = [(0.0, 1.0), (0.5, 2.0)];
        let a = sample_box(&b, 50, &mut rng(7), |p| p[0] > 0.2).unwrap();
        let c = sample_box(&b, 50, &mut rng(7), |p| p[0] > 0.2).unwrap();
        assert_eq!(a, c);
        assert!(a.iter().all(|p| p[0] > 0.2 && p[1] >= 0.5));
        assert!(matches!(sample_box(&b, 5, &mut rng(1), |_| false), Err(Error::EmptyDomain(_))));
    }
}
