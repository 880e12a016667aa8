//! Elastic cell problems on voxelized yarn structures and the homogenized
//! plate tensors `A^hom`, `B^hom`, `C^hom`.
//!
//! The solid part `Y^s` of the unit cell is discretized with trilinear
//! vector elements. Every yarn label carries its own copy of the grid nodes
//! it touches, so displacements may jump across contact facets, where the
//! Robin law `R = δ⁻¹ η⊗η + γ (I − η⊗η)` acts.

mod cell_problem;
mod stiffness;
mod symmetry;

use nalgebra::{Matrix3, Matrix6, Vector3};

use crate::error::{Error, Result};

pub use cell_problem::{
    homogenize_cell, homogenized_tensors, homogenized_tensors_by_quadrature, lemma_discrepancy, scale_to_thickness,
    solve_cell_problem, CellSolution, CellSolver, Homogenization, LemmaDiscrepancy,
};
pub use stiffness::{assemble_cell_stiffness, CellDofs, CellStiffness};
pub use symmetry::{predict_vanishing_b, symmetry_report, SymmetryReport};

/// Membrane (`M`) or bending (`B`) family of cell problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationKind {
    Membrane,
    Bending,
}

/// In-plane index pairs in Voigt order `11, 22, 12` (zero based).
pub const VOIGT_PAIRS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// `S_ij^{M,B}(y)` for `i, j ∈ {0, 1}`.
///
/// `D(S^M_ij) = M^ij` and `D(S^B_ij) = −y3 M^ij` with
/// `M^ij = ½(e_i⊗e_j + e_j⊗e_i)`.
pub fn perturbation_s(kind: PerturbationKind, i: usize, j: usize, y: [f64; 3]) -> [f64; 3] {
    assert!(i < 2 && j < 2, "in-plane indices must be 0 or 1");
    let [y1, y2, y3] = y;
    match (kind, i.min(j), i.max(j)) {
        (PerturbationKind::Membrane, 0, 0) => [y1, 0.0, 0.0],
        (PerturbationKind::Membrane, 0, 1) => [0.5 * y2, 0.5 * y1, 0.0],
        (PerturbationKind::Membrane, _, _) => [0.0, y2, 0.0],
        (PerturbationKind::Bending, 0, 0) => [-y1 * y3, 0.0, 0.5 * y1 * y1],
        (PerturbationKind::Bending, 0, 1) => [-0.5 * y2 * y3, -0.5 * y1 * y3, 0.5 * y1 * y2],
        (PerturbationKind::Bending, _, _) => [0.0, -y2 * y3, 0.5 * y2 * y2],
    }
}

/// Symmetric gradient of `S_ij` (analytic).
pub fn perturbation_strain(kind: PerturbationKind, i: usize, j: usize, y: [f64; 3]) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    m[(i, j)] += 0.5;
    m[(j, i)] += 0.5;
    match kind {
        PerturbationKind::Membrane => m,
        PerturbationKind::Bending => m * -y[2],
    }
}

/// Isotropic elasticity in the engineering Voigt order
/// `(ε11, ε22, ε33, 2ε23, 2ε13, 2ε12)`.
pub fn isotropic_stiffness(lambda: f64, mu: f64) -> Matrix6<f64> {
    let mut d = Matrix6::zeros();
    for a in 0..3 {
        for b in 0..3 {
            d[(a, b)] = lambda;
        }
        d[(a, a)] += 2.0 * mu;
        d[(a + 3, a + 3)] = mu;
    }
    d
}

/// Lamé constants `(λ, μ)` from Young's modulus and Poisson's ratio.
pub fn lame_from_young(e: f64, nu: f64) -> (f64, f64) {
    (e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMaterial {
    /// Stiffness per yarn label: entry `k − 1` for label `k`; a single entry
    /// applies to every label.
    pub elasticity: Vec<Matrix6<f64>>,
    /// Normal contact stiffness `δ⁻¹`.
    pub contact_normal: f64,
    /// Tangential contact stiffness `γ_friction`.
    pub contact_friction: f64,
}

impl CellMaterial {
    pub fn isotropic(e: f64, nu: f64) -> Self {
        let (l, m) = lame_from_young(e, nu);
        Self { elasticity: vec![isotropic_stiffness(l, m)], contact_normal: 1e3 * e, contact_friction: 1e3 * e }
    }

    pub fn with_contact(mut self, normal: f64, friction: f64) -> Self {
        self.contact_normal = normal;
        self.contact_friction = friction;
        self
    }

    pub fn stiffness_for(&self, label: u32) -> &Matrix6<f64> {
        if self.elasticity.len() == 1 {
            &self.elasticity[0]
        } else {
            &self.elasticity[(label as usize).saturating_sub(1).min(self.elasticity.len() - 1)]
        }
    }

    /// `R = δ⁻¹ η⊗η + γ (I − η⊗η)` for a facet normal to `e_axis`.
    pub fn robin(&self, axis: usize) -> Matrix3<f64> {
        let eta = Vector3::ith(axis, 1.0);
        let nn = eta * eta.transpose();
        nn * self.contact_normal + (Matrix3::identity() - nn) * self.contact_friction
    }

    /// Symmetry and coercivity of every stiffness, positivity of `R`.
    pub fn validate(&self) -> Result<()> {
        if self.elasticity.is_empty() {
            return Err(Error::ConstraintViolation("no elasticity tensor given".into()));
        }
        for (k, d) in self.elasticity.iter().enumerate() {
            if (d - d.transpose()).abs().max() > 1e-12 * d.abs().max() {
                return Err(Error::ConstraintViolation(format!("stiffness of label {} is not symmetric", k + 1)));
            }
            let min = d.symmetric_eigenvalues().min();
            if !(min > 0.0) {
                return Err(Error::ConstraintViolation(format!(
                    "stiffness of label {} is not coercive on symmetric matrices (min eigenvalue {min:e})",
                    k + 1
                )));
            }
        }
        if !(self.contact_normal > 0.0 && self.contact_friction > 0.0) {
            return Err(Error::ConstraintViolation(format!(
                "Robin matrix must be positive definite: δ⁻¹ = {}, γ = {}",
                self.contact_normal, self.contact_friction
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn numeric_strain(kind: PerturbationKind, i: usize, j: usize, y: [f64; 3]) -> Matrix3<f64> {
        let h = 1e-6;
        let mut g = Matrix3::zeros();
        for d in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[d] += h;
            ym[d] -= h;
            let (sp, sm) = (perturbation_s(kind, i, j, yp), perturbation_s(kind, i, j, ym));
            for c in 0..3 {
                g[(c, d)] = (sp[c] - sm[c]) / (2.0 * h);
            }
        }
        (g + g.transpose()) * 0.5
    }

    #[test]
    fn printed_closed_forms() {
        assert_eq!(perturbation_s(PerturbationKind::Membrane, 0, 0, [0.3, 0.7, 0.1]), [0.3, 0.0, 0.0]);
        assert_eq!(perturbation_s(PerturbationKind::Bending, 0, 0, [0.5, 0.2, 0.25]), [-0.125, 0.0, 0.125]);
        let m12 = perturbation_strain(PerturbationKind::Membrane, 0, 1, [0.9, 0.1, -0.3]);
        assert_eq!(m12, Matrix3::new(0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(perturbation_strain(PerturbationKind::Bending, 1, 1, [0.2, 0.4, 0.0]), Matrix3::zeros());
    }

    proptest! {
        #[test]
        fn strains_match_finite_differences(y1 in 0.0..1.0f64, y2 in 0.0..1.0f64, y3 in -0.5..0.5f64, p in 0usize..3) {
            let (i, j) = VOIGT_PAIRS[p];
            for kind in [PerturbationKind::Membrane, PerturbationKind::Bending] {
                let d = numeric_strain(kind, i, j, [y1, y2, y3]) - perturbation_strain(kind, i, j, [y1, y2, y3]);
                prop_assert!(d.abs().max() < 1e-8);
            }
        }
    }

    #[test]
    fn material_validation() {
        assert!(CellMaterial::isotropic(1.0, 0.3).validate().is_ok());
        assert!(CellMaterial::isotropic(1.0, 0.3).with_contact(1.0, 0.0).validate().is_err());
        let mut m = CellMaterial::isotropic(1.0, 0.3);
        m.elasticity[0] *= -1.0;
        assert!(m.validate().is_err());
        let r = CellMaterial::isotropic(1.0, 0.3).with_contact(5.0, 2.0).robin(2);
        assert_eq!(r, Matrix3::from_diagonal(&Vector3::new(2.0, 2.0, 5.0)));
    }
}
