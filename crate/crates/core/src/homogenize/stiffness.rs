//! Assembly of the cell stiffness `S` on per-label node copies.

use std::collections::HashMap;

use nalgebra::{DMatrix, Matrix6, SMatrix};

use crate::error::{Error, Result};
use crate::fe::{gauss_rule, LagrangeBasis};
use crate::homogenize::CellMaterial;
use crate::mesh::CellMesh;
use crate::sparse::{CsrMatrix, Triplets};

/// Node copies of the solid phase: one per `(grid node, yarn label)`.
#[derive(Debug, Clone)]
pub struct CellDofs {
    /// Grid node of each copy.
    pub node: Vec<usize>,
    /// Label of each copy.
    pub label: Vec<u32>,
    /// Copies of the 8 corners of each solid voxel (`None` for fluid voxels).
    pub voxel_copies: Vec<Option<[usize; 8]>>,
    lookup: HashMap<(usize, u32), usize>,
}

impl CellDofs {
    pub fn n_copies(&self) -> usize {
        self.node.len()
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.node.len()
    }

    pub fn copy(&self, node: usize, label: u32) -> Option<usize> {
        self.lookup.get(&(node, label)).copied()
    }

    fn get_or_insert(&mut self, node: usize, label: u32) -> usize {
        let next = self.node.len();
        let id = *self.lookup.entry((node, label)).or_insert(next);
        if id == next {
            self.node.push(node);
            self.label.push(label);
        }
        id
    }
}

/// Grid node of local corner `n` (`n = a + 2b + 4c`) of voxel `v`.
pub(crate) fn corner_node(cell: &CellMesh, v: usize, n: usize) -> usize {
    let [i, j, k] = cell.voxel_ijk(v);
    cell.node_index(i + (n & 1), j + ((n >> 1) & 1), k + (n >> 2))
}

/// Local corners of a voxel on its face `x_axis = side`.
pub(crate) fn face_corners(axis: usize, side: usize) -> [usize; 4] {
    let mut out = [0; 4];
    let mut m = 0;
    for n in 0..8 {
        if (n >> axis) & 1 == side {
            out[m] = n;
            m += 1;
        }
    }
    out
}

pub fn build_cell_dofs(cell: &CellMesh) -> CellDofs {
    let mut dofs = CellDofs { node: Vec::new(), label: Vec::new(), voxel_copies: vec![None; cell.n_voxels()], lookup: HashMap::new() };
    for v in 0..cell.n_voxels() {
        let label = cell.labels[v];
        if label == 0 {
            continue;
        }
        let mut c = [0; 8];
        for (n, slot) in c.iter_mut().enumerate() {
            *slot = dofs.get_or_insert(corner_node(cell, v, n), label);
        }
        dofs.voxel_copies[v] = Some(c);
    }
    // a contact facet across the periodic boundary needs the upper yarn's
    // copies on the lower voxel's face; they are tied back by periodicity
    for f in &cell.contact_facets {
        for n in face_corners(f.axis, 1) {
            dofs.get_or_insert(corner_node(cell, f.lower, n), cell.labels[f.upper]);
        }
    }
    dofs
}

/// Strain-displacement rows in engineering Voigt order for the 8 corners.
pub(crate) fn q1_strain_matrix(xi: [f64; 3], h: [f64; 3]) -> SMatrix<f64, 6, 24> {
    let (_, grad) = LagrangeBasis::new(1, 3).values_and_gradients(xi);
    let mut b = SMatrix::<f64, 6, 24>::zeros();
    for n in 0..8 {
        let g = [grad[n][0] / h[0], grad[n][1] / h[1], grad[n][2] / h[2]];
        let c = 3 * n;
        b[(0, c)] = g[0];
        b[(1, c + 1)] = g[1];
        b[(2, c + 2)] = g[2];
        b[(3, c + 1)] = g[2];
        b[(3, c + 2)] = g[1];
        b[(4, c)] = g[2];
        b[(4, c + 2)] = g[0];
        b[(5, c)] = g[1];
        b[(5, c + 1)] = g[0];
    }
    b
}

pub(crate) fn voxel_stiffness(d: &Matrix6<f64>, h: [f64; 3]) -> DMatrix<f64> {
    let rule = gauss_rule(2, 3);
    let det = h[0] * h[1] * h[2];
    let mut k = SMatrix::<f64, 24, 24>::zeros();
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let b = q1_strain_matrix(*xi, h);
        k += b.transpose() * d * b * (w * det);
    }
    DMatrix::from_iterator(24, 24, k.iter().copied())
}

/// Bilinear face mass on a facet of area `area`, corners in face-local
/// lexicographic order.
pub(crate) fn face_mass(area: f64) -> [[f64; 4]; 4] {
    let rule = gauss_rule(2, 2);
    let q1 = LagrangeBasis::new(1, 2);
    let mut m = [[0.0; 4]; 4];
    for (xi, w) in rule.points.iter().zip(&rule.weights) {
        let phi = q1.eval(*xi, [0, 0, 0]);
        for a in 0..4 {
            for b in 0..4 {
                m[a][b] += phi[a] * phi[b] * w * area;
            }
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct CellStiffness {
    pub matrix: CsrMatrix,
    pub dofs: CellDofs,
    /// `|Y^s|`
    pub solid_volume: f64,
}

/// `a(χ, X) = (A D(χ), D(X))_{Y^s} + (R⟦χ⟧, ⟦X⟧)_{S^c}` on all node copies.
pub fn assemble_cell_stiffness(cell: &CellMesh, mat: &CellMaterial) -> Result<CellStiffness> {
    mat.validate()?;
    if cell.solid_count() == 0 {
        return Err(Error::EmptyPhase("solid"));
    }
    let (n_comp, _) = cell.components(|v| cell.is_solid(v));
    if n_comp > 1 {
        return Err(Error::DisconnectedSolid { components: n_comp });
    }
    let dofs = build_cell_dofs(cell);
    let h = cell.voxel_size();
    let mut elements: HashMap<u32, DMatrix<f64>> = HashMap::new();
    let mut t = Triplets::new(dofs.n_dofs(), dofs.n_dofs());
    for v in 0..cell.n_voxels() {
        let Some(copies) = dofs.voxel_copies[v] else { continue };
        let label = cell.labels[v];
        let ke = elements.entry(label).or_insert_with(|| voxel_stiffness(mat.stiffness_for(label), h));
        let idx: Vec<usize> = copies.iter().flat_map(|&c| [3 * c, 3 * c + 1, 3 * c + 2]).collect();
        t.add_local(&idx, &idx, ke);
    }
    for f in &cell.contact_facets {
        let r = mat.robin(f.axis);
        let m = face_mass(cell.facet_area(f.axis));
        let corners = face_corners(f.axis, 1);
        let la = cell.labels[f.lower];
        let lb = cell.labels[f.upper];
        let side = |l: u32| -> Vec<usize> {
            corners.iter().map(|&n| dofs.copy(corner_node(cell, f.lower, n), l).expect("facet copy")).collect()
        };
        let (ca, cb) = (side(la), side(lb));
        // jump ⟦m⟧ = m_b − m_a
        let mut ke = DMatrix::<f64>::zeros(24, 24);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..3 {
                    for d in 0..3 {
                        let val = m[a][b] * r[(c, d)];
                        ke[(3 * a + c, 3 * b + d)] += val;
                        ke[(12 + 3 * a + c, 12 + 3 * b + d)] += val;
                        ke[(3 * a + c, 12 + 3 * b + d)] -= val;
                        ke[(12 + 3 * a + c, 3 * b + d)] -= val;
                    }
                }
            }
        }
        let idx: Vec<usize> = ca.iter().chain(&cb).flat_map(|&c| [3 * c, 3 * c + 1, 3 * c + 2]).collect();
        t.add_local(&idx, &idx, &ke);
    }
    Ok(CellStiffness { matrix: t.to_csr(), dofs, solid_volume: cell.solid_volume() })
}
