//! Homogenized plate stiffness tensors and their validation.
//!
//! Fourth-order in-plane tensors `t_ijkl`, `i,j,k,l ∈ {1,2}`, are stored with
//! all 16 entries. The 3×3 Voigt view is indexed by the pairs `(11, 22, 12)`
//! and holds the raw entries `V[I][J] = t_{I J}`; paired with engineering
//! strain vectors `(X11, X22, 2 X12)` it reproduces the full double
//! contraction `Σ t_ijkl X_kl Y_ij = yᵀ V x` exactly.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};

pub type Tensor4 = [[[[f64; 2]; 2]; 2]; 2];

const VOIGT_PAIRS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

fn voigt_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        _ => 2,
    }
}

/// Tensor with minor symmetries from a Voigt matrix.
pub fn tensor_from_voigt(v: &Matrix3<f64>) -> Tensor4 {
    let mut t = [[[[0.0; 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    t[i][j][k][l] = v[(voigt_index(i, j), voigt_index(k, l))];
                }
            }
        }
    }
    t
}

/// Voigt view `(11, 22, 12)` of a tensor (reads `t_{1212}`-type entries).
pub fn voigt_from_tensor(t: &Tensor4) -> Matrix3<f64> {
    let mut v = Matrix3::zeros();
    for (a, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
        for (b, &(k, l)) in VOIGT_PAIRS.iter().enumerate() {
            v[(a, b)] = t[i][j][k][l];
        }
    }
    v
}

/// Engineering strain vector `(X11, X22, 2 X12)` of a symmetric 2×2 matrix.
pub fn engineering(x: &[[f64; 2]; 2]) -> Vector3<f64> {
    Vector3::new(x[0][0], x[1][1], x[0][1] + x[1][0])
}

/// Full index contraction `Σ t_ijkl X_kl Y_ij`.
pub fn contract(t: &Tensor4, x: &[[f64; 2]; 2], y: &[[f64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    s += t[i][j][k][l] * x[k][l] * y[i][j];
                }
            }
        }
    }
    s
}

/// Extensional (`A`), coupling (`B`) and bending (`C`) stiffness of the
/// homogenized plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessTriple {
    pub a: Tensor4,
    pub b: Tensor4,
    pub c: Tensor4,
}

impl StiffnessTriple {
    pub fn from_voigt(a: Matrix3<f64>, b: Matrix3<f64>, c: Matrix3<f64>) -> Self {
        Self { a: tensor_from_voigt(&a), b: tensor_from_voigt(&b), c: tensor_from_voigt(&c) }
    }

    pub fn a_voigt(&self) -> Matrix3<f64> {
        voigt_from_tensor(&self.a)
    }

    pub fn b_voigt(&self) -> Matrix3<f64> {
        voigt_from_tensor(&self.b)
    }

    pub fn c_voigt(&self) -> Matrix3<f64> {
        voigt_from_tensor(&self.c)
    }

    pub fn scaled(&self, fa: f64, fb: f64, fc: f64) -> Self {
        let scale = |t: &Tensor4, f: f64| {
            let mut o = *t;
            o.iter_mut().flatten().flatten().flatten().for_each(|x| *x *= f);
            o
        };
        Self { a: scale(&self.a, fa), b: scale(&self.b, fb), c: scale(&self.c, fc) }
    }

    /// `B` has the major symmetry `b_ijkl = b_klij`, i.e. the coupling blocks
    /// of the plate operator are transposes of each other.
    pub fn b_is_major_symmetric(&self, tol: f64) -> bool {
        let v = self.b_voigt();
        (v - v.transpose()).abs().max() <= tol * v.abs().max().max(f64::MIN_POSITIVE)
    }
}

/// Orthotropic plate tensors of constant thickness `delta`, in the closed
/// form of the classical orthotropic-plate result; `B` vanishes.
pub fn orthotropic_plate_tensors(e1: f64, e2: f64, nu12: f64, nu21: f64, g: f64, delta: f64) -> Result<StiffnessTriple> {
    let det = 1.0 - nu12 * nu21;
    if !(det > 0.0) {
        return Err(Error::ConstraintViolation(format!("1 - ν12 ν21 = {det} must be positive")));
    }
    if !(e1 > 0.0 && e2 > 0.0 && g > 0.0 && delta > 0.0) {
        return Err(Error::ConstraintViolation("moduli and thickness must be positive".into()));
    }
    if nu12 != 0.0 || nu21 != 0.0 {
        // E2/E1 = ν21/ν12, compared in product form to admit ν = 0
        let mismatch = (e2 * nu12 - e1 * nu21).abs();
        if mismatch > 1e-8 * (e2 * nu12.abs()).max(e1 * nu21.abs()) {
            return Err(Error::ConstraintViolation(format!(
                "E2/E1 = {} differs from ν21/ν12 = {}",
                e2 / e1,
                nu21 / nu12
            )));
        }
    }
    let pa = delta / (12.0 * det);
    let a = Matrix3::new(e1, nu21 * e1, 0.0, nu21 * e1, e2, 0.0, 0.0, 0.0, 12.0 * det * g) * pa;
    let pc = delta.powi(3) / (12.0 * det);
    let c = Matrix3::new(e1, nu21 * e1, 0.0, nu21 * e1, e2, 0.0, 0.0, 0.0, det * g) * pc;
    Ok(StiffnessTriple::from_voigt(a, Matrix3::zeros(), c))
}

/// Outcome of [`validate_tensors`]: every failed check is listed.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorReport {
    pub failures: Vec<String>,
    /// Smallest eigenvalue of the Voigt form of `A` (coercivity constant).
    pub a_min_eig: f64,
    pub c_min_eig: f64,
    pub a_max_eig: f64,
    pub c_max_eig: f64,
    /// Frobenius norm of `B`.
    pub b_norm: f64,
    /// `‖B - Bᵀ‖` of the Voigt view (0 when the coupling is major-symmetric).
    pub b_asymmetry: f64,
}

impl TensorReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn symmetry_defect(t: &Tensor4) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let x = t[i][j][k][l];
                    d = d.max((x - t[j][i][k][l]).abs());
                    d = d.max((x - t[i][j][l][k]).abs());
                    d = d.max((x - t[k][l][i][j]).abs());
                }
            }
        }
    }
    d
}

fn scale_of(t: &Tensor4) -> f64 {
    t.iter().flatten().flatten().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Smallest and largest eigenvalue of the symmetric part of a Voigt matrix.
pub fn voigt_eig_range(v: &Matrix3<f64>) -> (f64, f64) {
    let sym = 0.5 * (v + v.transpose());
    let e = SymmetricEigen::new(sym).eigenvalues;
    (e.min(), e.max())
}

/// Checks minor/major symmetry and coercivity of `A` and `C`; reports the
/// size of `B`. Never fails: problems are collected in the report.
pub fn validate_tensors(triple: &StiffnessTriple) -> TensorReport {
    let mut failures = Vec::new();
    for (name, t) in [("A", &triple.a), ("C", &triple.c)] {
        let defect = symmetry_defect(t);
        if defect > 1e-10 * scale_of(t).max(f64::MIN_POSITIVE) {
            failures.push(format!("{name}: symmetry defect {defect:e}"));
        }
    }
    let bv = triple.b_voigt();
    let mut bminor: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let x = triple.b[i][j][k][l];
                    bminor = bminor.max((x - triple.b[j][i][k][l]).abs()).max((x - triple.b[i][j][l][k]).abs());
                }
            }
        }
    }
    if bminor > 1e-10 * scale_of(&triple.b).max(f64::MIN_POSITIVE) {
        failures.push(format!("B: minor symmetry defect {bminor:e}"));
    }
    let (a_min, a_max) = voigt_eig_range(&triple.a_voigt());
    let (c_min, c_max) = voigt_eig_range(&triple.c_voigt());
    if !(a_min > 0.0) {
        failures.push(format!("A: not coercive on symmetric matrices (min eigenvalue {a_min:e})"));
    }
    if !(c_min > 0.0) {
        failures.push(format!("C: not coercive on symmetric matrices (min eigenvalue {c_min:e})"));
    }
    for (name, v) in [("A", triple.a_voigt()), ("C", triple.c_voigt())] {
        for d in 0..3 {
            if !(v[(d, d)] > 0.0) {
                failures.push(format!("{name}: non-positive diagonal entry {d}"));
            }
        }
    }
    TensorReport {
        failures,
        a_min_eig: a_min,
        c_min_eig: c_min,
        a_max_eig: a_max,
        c_max_eig: c_max,
        b_norm: bv.norm(),
        b_asymmetry: (bv - bv.transpose()).norm(),
    }
}
