//! Generalized-periodic cell problems and the homogenized tensors.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, SMatrix};

use crate::error::{Error, Result};
use crate::fe::{gauss_rule, LagrangeBasis};
use crate::homogenize::stiffness::{corner_node, face_corners, q1_strain_matrix};
use crate::homogenize::{assemble_cell_stiffness, perturbation_s, CellMaterial, CellStiffness, PerturbationKind, VOIGT_PAIRS};
use crate::mesh::CellMesh;
use crate::solver::linear::Factorization;
use crate::sparse::{norm2, CsrMatrix, Triplets};
use crate::tensors::{orthotropic_plate_tensors, StiffnessTriple};

/// Solution `m_ij = χ_ij + S_ij` of one cell problem on all node copies.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution {
    pub kind: PerturbationKind,
    pub i: usize,
    pub j: usize,
    /// Three components per node copy.
    pub m: Vec<f64>,
    /// Copy whose three components are fixed to `S_ij`.
    pub pinned: usize,
    /// Relative residual of the reduced system.
    pub residual: f64,
}

/// Periodic reduction of the cell stiffness, factored once for all six
/// problems.
pub struct CellSolver<'a> {
    stiffness: &'a CellStiffness,
    /// Grid coordinates of every node copy.
    coords: Vec<[f64; 3]>,
    /// Representative copy of each copy (itself for masters).
    rep: Vec<usize>,
    /// Reduced index of each representative.
    reduced: Vec<Option<usize>>,
    n_reduced: usize,
    pinned: usize,
    free: Vec<usize>,
    matrix: CsrMatrix,
    factor: Factorization,
}

impl<'a> CellSolver<'a> {
    pub fn new(cell: &CellMesh, stiffness: &'a CellStiffness) -> Result<Self> {
        let dofs = &stiffness.dofs;
        let coords: Vec<[f64; 3]> = dofs.node.iter().map(|&n| cell.node_coord(n)).collect();
        // periodic classes of grid nodes: master followed by its slaves
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(m, s) in &cell.periodic_pairs {
            classes.entry(m).or_insert_with(|| vec![m]).push(s);
        }
        let mut labels = dofs.label.clone();
        labels.sort_unstable();
        labels.dedup();
        let mut rep: Vec<usize> = (0..dofs.n_copies()).collect();
        for members in classes.values() {
            let mut by_label: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for &n in members {
                for &l in &labels {
                    if let Some(c) = dofs.copy(n, l) {
                        by_label.entry(l).or_default().push(c);
                    }
                }
            }
            for copies in by_label.values() {
                for &c in &copies[1..] {
                    rep[c] = copies[0];
                }
            }
        }
        let mut reduced = vec![None; dofs.n_copies()];
        let mut n_reduced = 0;
        for c in 0..dofs.n_copies() {
            if rep[c] == c {
                reduced[c] = Some(n_reduced);
                n_reduced += 1;
            }
        }
        let pinned = pin_copy(cell, stiffness);
        let red = |c: usize| reduced[rep[c]].expect("representative");
        let mut t = Triplets::new(3 * n_reduced, 3 * n_reduced);
        for (i, j, v) in stiffness.matrix.triplet_iter() {
            t.push(3 * red(i / 3) + i % 3, 3 * red(j / 3) + j % 3, v);
        }
        let matrix = t.to_csr();
        let p = red(pinned);
        let free: Vec<usize> = (0..3 * n_reduced).filter(|&d| d / 3 != p).collect();
        let factor = Factorization::cholesky(&matrix.select(&free, &free))
            .or_else(|_| Factorization::lu(&matrix.select(&free, &free)))?;
        Ok(Self { stiffness, coords, rep, reduced, n_reduced, pinned, free, matrix, factor })
    }

    pub fn n_reduced_dofs(&self) -> usize {
        3 * self.n_reduced
    }

    /// `g`: the inhomogeneous master-slave offsets `S(y_slave) − S(y_master)`.
    fn offsets(&self, kind: PerturbationKind, i: usize, j: usize) -> Vec<f64> {
        let mut g = vec![0.0; 3 * self.rep.len()];
        for (c, &r) in self.rep.iter().enumerate() {
            if r != c {
                let (sc, sr) = (perturbation_s(kind, i, j, self.coords[c]), perturbation_s(kind, i, j, self.coords[r]));
                for d in 0..3 {
                    g[3 * c + d] = sc[d] - sr[d];
                }
            }
        }
        g
    }

    fn expand(&self, u: &[f64], g: &[f64]) -> Vec<f64> {
        let mut m = g.to_vec();
        for c in 0..self.rep.len() {
            let r = self.reduced[self.rep[c]].expect("representative");
            for d in 0..3 {
                m[3 * c + d] += u[3 * r + d];
            }
        }
        m
    }

    fn restrict(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 3 * self.n_reduced];
        for c in 0..self.rep.len() {
            let r = self.reduced[self.rep[c]].expect("representative");
            for d in 0..3 {
                out[3 * r + d] += full[3 * c + d];
            }
        }
        out
    }
}

/// Lowest-index interior node copy; the lowest copy overall when the cell has
/// no interior solid node.
fn pin_copy(cell: &CellMesh, stiffness: &CellStiffness) -> usize {
    let [m1, m2, m3] = cell.resolution;
    let dofs = &stiffness.dofs;
    let interior = |n: usize| {
        let [i, j, k] = cell.node_ijk(n);
        i > 0 && i < m1 && j > 0 && j < m2 && k > 0 && k < m3
    };
    (0..dofs.n_copies())
        .filter(|&c| interior(dofs.node[c]))
        .min_by_key(|&c| (dofs.node[c], dofs.label[c]))
        .or_else(|| (0..dofs.n_copies()).min_by_key(|&c| (dofs.node[c], dofs.label[c])))
        .expect("non-empty solid")
}

/// Solve `(A D(m), D(X)) + (R⟦m⟧, ⟦X⟧) = 0` with `m − S_ij` periodic.
pub fn solve_cell_problem(solver: &CellSolver, kind: PerturbationKind, i: usize, j: usize) -> Result<CellSolution> {
    let g = solver.offsets(kind, i, j);
    let pin = solver.reduced[solver.pinned].expect("pinned copy is a representative");
    let mut up = vec![0.0; solver.n_reduced_dofs()];
    let sp = perturbation_s(kind, i, j, solver.coords[solver.pinned]);
    up[3 * pin..3 * pin + 3].copy_from_slice(&sp);
    let z = solver.expand(&up, &g);
    let sz = solver.restrict(&solver.stiffness.matrix.mul_vec(&z));
    let rhs: Vec<f64> = solver.free.iter().map(|&d| -sz[d]).collect();
    let uf = solver.factor.solve(&rhs);
    let reduced_free = solver.matrix.select(&solver.free, &solver.free);
    let r: Vec<f64> = reduced_free.mul_vec(&uf).iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let scale = norm2(&rhs);
    let residual = if scale > 0.0 { norm2(&r) / scale } else { norm2(&r) };
    if !residual.is_finite() || residual > 1e-8 {
        return Err(Error::SolverFailure(format!("cell problem {kind:?} ({i},{j}) left relative residual {residual:e}")));
    }
    let mut u = up;
    for (k, &d) in solver.free.iter().enumerate() {
        u[d] = uf[k];
    }
    Ok(CellSolution { kind, i, j, m: solver.expand(&u, &g), pinned: solver.pinned, residual })
}

/// Tensors of the unit cell from the six solutions (Voigt order 11, 22, 12),
/// `t_ijkl = m_klᵀ S m_ij / |Y^s|`.
///
/// `B` is stored with the bending pair first: `B[I][J] = m^M_Jᵀ S m^B_I / |Y^s|`.
pub fn homogenized_tensors(solutions: &[CellSolution], stiffness: &CellStiffness) -> StiffnessTriple {
    let s = &stiffness.matrix;
    let find = |kind: PerturbationKind, p: usize| {
        let (i, j) = VOIGT_PAIRS[p];
        solutions
            .iter()
            .find(|x| x.kind == kind && x.i.min(x.j) == i && x.i.max(x.j) == j)
            .expect("all six cell solutions are required")
    };
    let sm: Vec<Vec<f64>> = (0..3).map(|p| s.mul_vec(&find(PerturbationKind::Membrane, p).m)).collect();
    let sb: Vec<Vec<f64>> = (0..3).map(|p| s.mul_vec(&find(PerturbationKind::Bending, p).m)).collect();
    let inv = 1.0 / stiffness.solid_volume;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (mut a, mut b, mut c) = (Matrix3::zeros(), Matrix3::zeros(), Matrix3::zeros());
    for p in 0..3 {
        for q in 0..3 {
            a[(p, q)] = dot(&find(PerturbationKind::Membrane, q).m, &sm[p]) * inv;
            b[(p, q)] = dot(&find(PerturbationKind::Membrane, q).m, &sb[p]) * inv;
            c[(p, q)] = dot(&find(PerturbationKind::Bending, q).m, &sb[p]) * inv;
        }
    }
    StiffnessTriple::from_voigt(a, b, c)
}

/// The same tensors from Gauss quadrature of the continuous bilinear forms
/// evaluated on the discrete fields.
pub fn homogenized_tensors_by_quadrature(
    cell: &CellMesh,
    mat: &CellMaterial,
    stiffness: &CellStiffness,
    solutions: &[CellSolution],
) -> StiffnessTriple {
    let dofs = &stiffness.dofs;
    let h = cell.voxel_size();
    let det = h[0] * h[1] * h[2];
    let rule = gauss_rule(2, 3);
    let bmats: Vec<SMatrix<f64, 6, 24>> = rule.points.iter().map(|xi| q1_strain_matrix(*xi, h)).collect();
    let field = |kind: PerturbationKind, p: usize| -> &[f64] {
        let (i, j) = VOIGT_PAIRS[p];
        &solutions.iter().find(|x| x.kind == kind && x.i.min(x.j) == i && x.i.max(x.j) == j).expect("six solutions").m
    };
    let form = |u: &[f64], w: &[f64]| -> f64 {
        let mut e = 0.0;
        for v in 0..cell.n_voxels() {
            let Some(copies) = dofs.voxel_copies[v] else { continue };
            let d = mat.stiffness_for(cell.labels[v]);
            let local = |x: &[f64]| SMatrix::<f64, 24, 1>::from_iterator(copies.iter().flat_map(|&c| [x[3 * c], x[3 * c + 1], x[3 * c + 2]]));
            let (lu, lw) = (local(u), local(w));
            for (b, wq) in bmats.iter().zip(&rule.weights) {
                e += ((b * lw).transpose() * d * (b * lu))[(0, 0)] * wq * det;
            }
        }
        let face_rule = gauss_rule(2, 2);
        let q1 = LagrangeBasis::new(1, 2);
        for f in &cell.contact_facets {
            let r = mat.robin(f.axis);
            let area = cell.facet_area(f.axis);
            let corners = face_corners(f.axis, 1);
            let copies = |l: u32| -> Vec<usize> {
                corners.iter().map(|&n| dofs.copy(corner_node(cell, f.lower, n), l).expect("facet copy")).collect()
            };
            let (ca, cb) = (copies(cell.labels[f.lower]), copies(cell.labels[f.upper]));
            for (xi, wq) in face_rule.points.iter().zip(&face_rule.weights) {
                let phi = q1.eval(*xi, [0, 0, 0]);
                let jump = |x: &[f64]| {
                    let mut j = nalgebra::Vector3::zeros();
                    for a in 0..4 {
                        for d in 0..3 {
                            j[d] += phi[a] * (x[3 * cb[a] + d] - x[3 * ca[a] + d]);
                        }
                    }
                    j
                };
                e += jump(w).dot(&(r * jump(u))) * wq * area;
            }
        }
        e / stiffness.solid_volume
    };
    let (mut a, mut b, mut c) = (Matrix3::zeros(), Matrix3::zeros(), Matrix3::zeros());
    for p in 0..3 {
        for q in 0..3 {
            a[(p, q)] = form(field(PerturbationKind::Membrane, p), field(PerturbationKind::Membrane, q));
            b[(p, q)] = form(field(PerturbationKind::Bending, p), field(PerturbationKind::Membrane, q));
            c[(p, q)] = form(field(PerturbationKind::Bending, p), field(PerturbationKind::Bending, q));
        }
    }
    StiffnessTriple::from_voigt(a, b, c)
}

/// Cell tensors of the unit cell `Y` rescaled to a plate of thickness `δ`:
/// `A·δ`, `B·δ²`, `C·δ³`.
pub fn scale_to_thickness(unit: &StiffnessTriple, delta: f64) -> StiffnessTriple {
    unit.scaled(delta, delta * delta, delta * delta * delta)
}

#[derive(Debug, Clone)]
pub struct Homogenization {
    /// Tensors of the unit cell.
    pub unit: StiffnessTriple,
    pub solutions: Vec<CellSolution>,
    pub solid_volume: f64,
    pub reduced_dofs: usize,
    /// Wall time of the shared factorization and of each of the six solves.
    pub factor_time: std::time::Duration,
    pub solve_times: Vec<std::time::Duration>,
}

/// Assemble, factor once and solve all six cell problems.
pub fn homogenize_cell(cell: &CellMesh, mat: &CellMaterial) -> Result<Homogenization> {
    let stiffness = assemble_cell_stiffness(cell, mat)?;
    let start = std::time::Instant::now();
    let solver = CellSolver::new(cell, &stiffness)?;
    let factor_time = start.elapsed();
    let mut solutions = Vec::with_capacity(6);
    let mut solve_times = Vec::with_capacity(6);
    for kind in [PerturbationKind::Membrane, PerturbationKind::Bending] {
        for (i, j) in VOIGT_PAIRS {
            let t = std::time::Instant::now();
            solutions.push(solve_cell_problem(&solver, kind, i, j)?);
            solve_times.push(t.elapsed());
        }
    }
    log::info!("cell problems: {} reduced dofs, factor {:?}", solver.n_reduced_dofs(), factor_time);
    let unit = homogenized_tensors(&solutions, &stiffness);
    Ok(Homogenization { unit, solutions, solid_volume: stiffness.solid_volume, reduced_dofs: solver.n_reduced_dofs(), factor_time, solve_times })
}

/// Comparison of cell-computed tensors with the isotropic closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaDiscrepancy {
    /// Classical membrane stiffness `δE/(1−ν²)`.
    pub classical_a1111: f64,
    /// Classical bending stiffness `δ³E/(12(1−ν²))`.
    pub classical_c1111: f64,
    /// `A_1111` of the closed-form isotropic plate tensors.
    pub lemma_a1111: f64,
    pub lemma_c1111: f64,
    pub cell_a1111: f64,
    pub cell_c1111: f64,
}

impl LemmaDiscrepancy {
    /// `cell / closed form` for `A_1111`; 12 when the closed form carries the
    /// bending prefactor on the membrane tensor.
    pub fn a_ratio(&self) -> f64 {
        self.cell_a1111 / self.lemma_a1111
    }

    pub fn c_ratio(&self) -> f64 {
        self.cell_c1111 / self.lemma_c1111
    }

    pub fn c_relative_error(&self) -> f64 {
        (self.cell_c1111 - self.classical_c1111).abs() / self.classical_c1111
    }

    pub fn a_relative_error(&self) -> f64 {
        (self.cell_a1111 - self.classical_a1111).abs() / self.classical_a1111
    }
}

pub fn lemma_discrepancy(scaled: &StiffnessTriple, e: f64, nu: f64, delta: f64) -> Result<LemmaDiscrepancy> {
    let lemma = orthotropic_plate_tensors(e, e, nu, nu, e / (2.0 * (1.0 + nu)), delta)?;
    Ok(LemmaDiscrepancy {
        classical_a1111: delta * e / (1.0 - nu * nu),
        classical_c1111: delta.powi(3) * e / (12.0 * (1.0 - nu * nu)),
        lemma_a1111: lemma.a_voigt()[(0, 0)],
        lemma_c1111: lemma.c_voigt()[(0, 0)],
        cell_a1111: scaled.a_voigt()[(0, 0)],
        cell_c1111: scaled.c_voigt()[(0, 0)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_cell_mesh;

    fn solid(n: usize, m3: usize) -> CellMesh {
        build_cell_mesh([n, n, m3], vec![1; n * n * m3]).unwrap()
    }

    #[test]
    fn full_solid_membrane_is_plane_stress() {
        let (e, nu) = (3.0, 0.3);
        let h = homogenize_cell(&solid(2, 4), &CellMaterial::isotropic(e, nu)).unwrap();
        let a = h.unit.a_voigt();
        let ps = e / (1.0 - nu * nu);
        assert!((a[(0, 0)] - ps).abs() < 1e-10 * ps, "{a}");
        assert!((a[(0, 1)] - nu * ps).abs() < 1e-10 * ps);
        assert!((a[(2, 2)] - e / (2.0 * (1.0 + nu))).abs() < 1e-10 * ps);
        assert!(h.unit.b_voigt().abs().max() < 1e-10 * ps);
        for s in &h.solutions {
            assert!(s.residual < 1e-10);
        }
    }

    #[test]
    fn membrane_corrector_field_is_linear() {
        let cell = solid(2, 2);
        let mat = CellMaterial::isotropic(1.0, 0.25);
        let st = assemble_cell_stiffness(&cell, &mat).unwrap();
        let solver = CellSolver::new(&cell, &st).unwrap();
        let sol = solve_cell_problem(&solver, PerturbationKind::Membrane, 0, 0).unwrap();
        // m_11 = (y1, 0, −ν/(1−ν) y3) up to the pin
        let nu = 0.25;
        let pin = cell.node_coord(st.dofs.node[sol.pinned]);
        for (c, &n) in st.dofs.node.iter().enumerate() {
            let y = cell.node_coord(n);
            let expect = [y[0], 0.0, -nu / (1.0 - nu) * (y[2] - pin[2])];
            for d in 0..3 {
                assert!((sol.m[3 * c + d] - expect[d]).abs() < 1e-10, "copy {c} comp {d}");
            }
        }
    }

    #[test]
    fn discrete_and_quadrature_forms_agree() {
        let mut labels = vec![1u32; 4 * 4 * 2];
        for v in 16..32 {
            labels[v] = 2;
        }
        labels[3] = 2;
        let cell = build_cell_mesh([4, 4, 2], labels).unwrap();
        let mat = CellMaterial::isotropic(1.0, 0.3).with_contact(5.0, 0.7);
        let st = assemble_cell_stiffness(&cell, &mat).unwrap();
        let solver = CellSolver::new(&cell, &st).unwrap();
        let mut sols = Vec::new();
        for kind in [PerturbationKind::Membrane, PerturbationKind::Bending] {
            for (i, j) in VOIGT_PAIRS {
                sols.push(solve_cell_problem(&solver, kind, i, j).unwrap());
            }
        }
        let d = homogenized_tensors(&sols, &st);
        let q = homogenized_tensors_by_quadrature(&cell, &mat, &st, &sols);
        let scale = d.a_voigt().abs().max();
        for (x, y) in [(d.a_voigt(), q.a_voigt()), (d.b_voigt(), q.b_voigt()), (d.c_voigt(), q.c_voigt())] {
            assert!((x - y).abs().max() <= 1e-10 * scale, "{x} vs {y}");
        }
        assert!((d.a_voigt() - d.a_voigt().transpose()).abs().max() < 1e-10 * scale);
        assert!((d.c_voigt() - d.c_voigt().transpose()).abs().max() < 1e-10 * scale);
    }

    #[test]
    fn stiffness_scaling_is_linear() {
        let cell = solid(2, 2);
        let m1 = CellMaterial::isotropic(1.0, 0.2).with_contact(3.0, 1.0);
        let m2 = CellMaterial::isotropic(2.0, 0.2).with_contact(6.0, 2.0);
        let (h1, h2) = (homogenize_cell(&cell, &m1).unwrap(), homogenize_cell(&cell, &m2).unwrap());
        assert!((h1.unit.a_voigt() * 2.0 - h2.unit.a_voigt()).abs().max() < 1e-12);
        assert!((h1.unit.c_voigt() * 2.0 - h2.unit.c_voigt()).abs().max() < 1e-12);
    }

    #[test]
    fn thickness_scaling() {
        let t = StiffnessTriple::from_voigt(Matrix3::identity(), Matrix3::identity(), Matrix3::identity());
        let s = scale_to_thickness(&t, 0.1);
        assert!((s.a_voigt()[(0, 0)] - 0.1).abs() < 1e-15);
        assert!((s.b_voigt()[(0, 0)] - 0.01).abs() < 1e-15);
        assert!((s.c_voigt()[(0, 0)] - 0.001).abs() < 1e-15);
    }
}
