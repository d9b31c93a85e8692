//! Conjectured symmetry generators in `n` independent variables.
//!
//! The full equation is expected to admit translations, `d/du`, `u d/du`,
//! the uniform scaling `sum x_j d/dx_j`, the shears `x_i d/du` and the
//! rotations of the `(x_i, x_j)` planes, `3 + n(n+3)/2` fields in all. The
//! reduced equation trades the two scalings for `sum x_j d/dx_j + 2u d/du`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{get_solution, Params};
use crate::error::{Error, Result};
use crate::fields::{rng, OperatorId};
use crate::jets::Jet3;
use crate::liealg::VectorField;
use crate::poly::Poly;
use crate::prolong::{invariance_on_manifold, sample_reduced_manifold, InvarianceReport, JetSpace};

pub const CONJECTURE_TOLERANCE: f64 = 1e-8;
pub const CONTROL_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index")]
pub enum NdGenerator {
    Translate(usize),
    UTranslate,
    UScale,
    XScaleAll,
    Shear(usize),
    Rotate(usize, usize),
    ReducedScale,
}

impl fmt::Display for NdGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NdGenerator::Translate(i) => write!(f, "d/dx{}", i + 1),
            NdGenerator::UTranslate => write!(f, "d/du"),
            NdGenerator::UScale => write!(f, "u d/du"),
            NdGenerator::XScaleAll => write!(f, "sum x_j d/dx_j"),
            NdGenerator::Shear(i) => write!(f, "x{} d/du", i + 1),
            NdGenerator::Rotate(i, j) => write!(f, "-x{} d/dx{} + x{} d/dx{}", i + 1, j + 1, j + 1, i + 1),
            NdGenerator::ReducedScale => write!(f, "sum x_j d/dx_j + 2u d/du"),
        }
    }
}

impl NdGenerator {
    /// The generator as a vector field on `(x_1..x_n, u)`.
    pub fn field(&self, n: usize) -> Result<VectorField> {
        let nv = n + 1;
        let check = |i: usize| if i < n { Ok(()) } else { Err(Error::IndexOutOfRange { index: i, n }) };
        let mut xi = vec![Poly::zero(nv); n];
        let mut eta = Poly::zero(nv);
        match *self {
            NdGenerator::Translate(i) => {
                check(i)?;
                xi[i] = Poly::one(nv);
            }
            NdGenerator::UTranslate => eta = Poly::one(nv),
            NdGenerator::UScale => eta = Poly::var(nv, n),
            NdGenerator::XScaleAll | NdGenerator::ReducedScale => {
                for (j, x) in xi.iter_mut().enumerate() {
                    *x = Poly::var(nv, j);
                }
                if *self == NdGenerator::ReducedScale {
                    eta = Poly::var(nv, n).scale(&crate::poly::int(2));
                }
            }
            NdGenerator::Shear(i) => {
                check(i)?;
                eta = Poly::var(nv, i);
            }
            NdGenerator::Rotate(i, j) => {
                check(j)?;
                if i >= j {
                    return Err(Error::InvalidArgument(format!("rotation needs i < j, got ({i}, {j})")));
                }
                xi[j] = -Poly::var(nv, i);
                xi[i] = Poly::var(nv, j);
            }
        }
        Ok(VectorField::new(xi, eta))
    }
}

fn common(n: usize) -> Vec<NdGenerator> {
    let mut g: Vec<NdGenerator> = (0..n).map(NdGenerator::Translate).collect();
    g.push(NdGenerator::UTranslate);
    g.extend((0..n).map(NdGenerator::Shear));
    for i in 0..n {
        for j in i + 1..n {
            g.push(NdGenerator::Rotate(i, j));
        }
    }
    g
}

pub fn conjectured_full(n: usize) -> Vec<NdGenerator> {
    let mut g = common(n);
    g.push(NdGenerator::UScale);
    g.push(NdGenerator::XScaleAll);
    g
}

pub fn conjectured_reduced(n: usize) -> Vec<NdGenerator> {
    let mut g = common(n);
    g.push(NdGenerator::ReducedScale);
    g
}

/// Enumerated generator counts for the full and reduced equations.
pub fn conjecture_generator_count(n: usize) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok((conjectured_full(n).len(), conjectured_reduced(n).len()))
}

pub fn expected_counts(n: usize) -> (usize, usize) {
    (3 + n * (n + 3) / 2, 2 + n * (n + 3) / 2)
}

/// The field `x_1^2 d/dx_1`, outside the conjectured algebra.
pub fn negative_control(n: usize) -> VectorField {
    let nv = n + 1;
    let mut xi = vec![Poly::zero(nv); n];
    xi[0] = Poly::var(nv, 0).pow(2);
    VectorField::new(xi, Poly::zero(nv))
}

/// Product of Givens rotations, one per coordinate plane.
pub fn plane_rotation(n: usize, angles: &[f64]) -> DMatrix<f64> {
    let mut r = DMatrix::identity(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let t = angles.get(k).copied().unwrap_or(0.0);
            k += 1;
            let mut g = DMatrix::identity(n, n);
            g[(i, i)] = t.cos();
            g[(j, j)] = t.cos();
            g[(i, j)] = -t.sin();
            g[(j, i)] = t.sin();
            r = g * r;
        }
    }
    r
}

type JetFn = Arc<dyn Fn(&[Jet3]) -> Result<Jet3> + Send + Sync>;

/// Order-3 jet-space samples of `u(R^T x)`, `u = sum c_i x_i^{12/5}`, at
/// points `x = R q` with `q` uniform in `(0.2, 5)^n`.
pub fn variety_samples(c: &[f64], rotation: &DMatrix<f64>, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let n = c.len();
    if rotation.nrows() != n || rotation.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rotation.nrows() });
    }
    let params = Params::from([("c".to_string(), c.to_vec())]);
    let base = get_solution("variety-n", &params)?;
    let inner = base.evaluator();
    let rt = rotation.transpose();
    let eval: JetFn = Arc::new(move |v: &[Jet3]| {
        let pulled: Vec<Jet3> = (0..v.len())
            .map(|i| (0..v.len()).fold(Jet3::constant(v.len(), 0.0), |acc, j| acc + &v[j] * rt[(i, j)]))
            .collect();
        inner(&pulled)
    });
    let space = JetSpace::new(n, 3)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
        let p: Vec<f64> = (0..n).map(|i| (0..n).map(|j| rotation[(i, j)] * q[j]).sum()).collect();
        let jet = eval(&Jet3::coordinates(&p)?)?;
        out.push(space.coordinates(&p, &jet)?);
    }
    Ok(out)
}

/// `a` with `f[a |x|^2] = 12 a^2 = 1` in three variables; generally
/// `4 n a^2 = 1`.
pub fn isotropic_coefficient(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64).sqrt())
}

/// Order-2 samples of `f = 1`: jets of `a |x|^2` at random points plus
/// random normalized Hessians.
pub fn reduced_samples(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let space = JetSpace::new(n, 2)?;
    let a = isotropic_coefficient(n);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count / 2 {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let c = Jet3::coordinates(&p)?;
        let u = c.iter().fold(Jet3::constant(n, 0.0), |acc, x| acc + x * x) * a;
        let v = space.coordinates(&p, &u)?;
        out.push(v);
    }
    out.extend(sample_reduced_manifold(rng, n, 1.0, count - count / 2)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorResult {
    pub generator: String,
    pub operator: OperatorId,
    pub n_samples: usize,
    pub max_normalized: f64,
    pub passed: bool,
}

pub fn conjecture_invariance_check(n: usize, gen: NdGenerator, op: OperatorId, samples: &[Vec<f64>]) -> Result<InvarianceReport> {
    invariance_on_manifold(&gen.field(n)?, op, samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub seed: u64,
    pub count_full: usize,
    pub count_reduced: usize,
    pub expected_full: usize,
    pub expected_reduced: usize,
    pub tolerance: f64,
    pub full: Vec<GeneratorResult>,
    pub reduced: Vec<GeneratorResult>,
    pub negative_control: GeneratorResult,
    pub passed: bool,
}

/// Full-equation samples: several points of the variety, each also seen
/// through a generic rotation so the Hessians are not diagonal.
pub fn full_samples(n: usize, per_family: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let mut families: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut c = vec![0.0; n];
                c[i] = 1.0;
                c[j] = -1.0;
                families.push(c);
            }
        }
    }
    if n >= 3 {
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        c[1] = 1.0;
        c[2] = -(2f64.powf(0.2));
        families.push(c);
    }
    let angles: Vec<f64> = (0..n * (n - 1) / 2).map(|k| 0.4 + 0.3 * k as f64).collect();
    let rotations = [DMatrix::identity(n, n), plane_rotation(n, &angles)];
    let mut out = Vec::new();
    for c in &families {
        for r in &rotations {
            out.extend(variety_samples(c, r, per_family, rng)?);
        }
    }
    Ok(out)
}

/// Counts plus the on-manifold invariance check of every conjectured
/// generator, and a negative control that must fail.
pub fn run_conjecture(n: usize, per_family: usize, seed: u64) -> Result<ConjectureReport> {
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let (count_full, count_reduced) = conjecture_generator_count(n)?;
    let (expected_full, expected_reduced) = expected_counts(n);
    let mut r = rng(seed);
    let full_pts = full_samples(n, per_family, &mut r)?;
    let red_pts = reduced_samples(n, full_pts.len().max(2), &mut r)?;
    let run = |g: NdGenerator, op: OperatorId, pts: &[Vec<f64>]| -> Result<GeneratorResult> {
        let rep = conjecture_invariance_check(n, g, op, pts)?;
        Ok(GeneratorResult {
            generator: g.to_string(),
            operator: op,
            n_samples: rep.n_samples,
            max_normalized: rep.max_normalized,
            passed: rep.max_normalized <= CONJECTURE_TOLERANCE,
        })
    };
    let full = conjectured_full(n)
        .into_iter()
        .map(|g| run(g, OperatorId::InfPolylap, &full_pts))
        .collect::<Result<Vec<_>>>()?;
    let reduced = conjectured_reduced(n)
        .into_iter()
        .map(|g| run(g, OperatorId::REDUCED, &red_pts))
        .collect::<Result<Vec<_>>>()?;
    let ctrl = invariance_on_manifold(&negative_control(n), OperatorId::InfPolylap, &full_pts)?;
    let negative_control = GeneratorResult {
        generator: "x1^2 d/dx1".to_string(),
        operator: OperatorId::InfPolylap,
        n_samples: ctrl.n_samples,
        max_normalized: ctrl.max_normalized,
        passed: ctrl.max_normalized > CONTROL_FLOOR,
    };
    let passed = count_full == expected_full
        && count_reduced == expected_reduced
        && full.iter().all(|g| g.passed)
        && reduced.iter().all(|g| g.passed)
        && negative_control.passed;
    Ok(ConjectureReport {
        n,
        seed,
        count_full,
        count_reduced,
        expected_full,
        expected_reduced,
        tolerance: CONJECTURE_TOLERANCE,
        full,
        reduced,
        negative_control,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(NdGenerator::Rotate(0, 2).to_string(), "-x1 d/dx3 + x3 d/dx1");
        assert_eq!(NdGenerator::Shear(1).to_string(), "x2 d/du");
    }

    #[test]
    fn bad_indices() {
        assert!(NdGenerator::Translate(3).field(3).is_err());
        assert!(NdGenerator::Rotate(1, 1).field(3).is_err());
        assert!(conjecture_generator_count(1).is_err());
    }

    #[test]
    fn givens_product_is_orthogonal() {
        let r = plane_rotation(3, &[0.3, -1.1, 2.0]);
        let e = &r * r.transpose() - DMatrix::identity(3, 3);
        assert!(e.norm() < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }
}
