//! Degree-of-freedom maps for the four discrete spaces of the coupled problem:
//! `Q2` velocity (3 components, continuous across Σ), `Q1` pressure broken
//! across Σ, `Q1` in-plane plate displacement and the BFS deflection.

use crate::error::{Error, Result};
use crate::mesh::{ChannelMesh, FacetTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Q2Vec3,
    Q1ScalarBrokenSigma,
    Q1Vec2Sigma,
    BfsSigma,
}

impl SpaceKind {
    /// Local DOFs per cell (per hex for 3D spaces, per Σ quad otherwise).
    pub fn dofs_per_cell(self) -> usize {
        match self {
            SpaceKind::Q2Vec3 => 81,
            SpaceKind::Q1ScalarBrokenSigma => 8,
            SpaceKind::Q1Vec2Sigma => 8,
            SpaceKind::BfsSigma => 16,
        }
    }

    pub fn components(self) -> usize {
        match self {
            SpaceKind::Q2Vec3 => 3,
            SpaceKind::Q1ScalarBrokenSigma => 1,
            SpaceKind::Q1Vec2Sigma => 2,
            SpaceKind::BfsSigma => 4,
        }
    }

    pub fn on_sigma(self) -> bool {
        matches!(self, SpaceKind::Q1Vec2Sigma | SpaceKind::BfsSigma)
    }
}

/// Which DOFs are flagged as constrained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dirichlet {
    None,
    /// Every DOF on a facet carrying one of the tags (3D spaces).
    Tags(Vec<FacetTag>),
    /// All DOFs on interface nodes lying on `∂Σ` (clamped plate).
    Clamped,
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub kind: SpaceKind,
    pub n_dofs: usize,
    /// Global DOF of every local DOF of every cell. Vector spaces use
    /// node-major local numbering `components * local_node + component`.
    pub cell_dofs: Vec<Vec<usize>>,
    pub constrained: Vec<bool>,
    /// Coordinates of the DOF-carrying nodes (z = 0 for interface spaces).
    pub node_coords: Vec<[f64; 3]>,
}

impl DofMap {
    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs).filter(|&d| !self.constrained[d]).collect()
    }

    pub fn n_free(&self) -> usize {
        self.constrained.iter().filter(|c| !**c).count()
    }

    /// Global DOF of `component` at node `node`.
    pub fn dof(&self, node: usize, component: usize) -> usize {
        self.kind.components() * node + component
    }
}

pub fn build_dofmap(mesh: &ChannelMesh, kind: SpaceKind, dirichlet: &Dirichlet) -> Result<DofMap> {
    match (kind.on_sigma(), dirichlet) {
        (true, Dirichlet::Tags(_)) => {
            return Err(Error::UnsupportedSpace(format!("{kind:?} takes `Clamped`, not facet tags")))
        }
        (false, Dirichlet::Clamped) => {
            return Err(Error::UnsupportedSpace(format!("{kind:?} is a volume space; use facet tags")))
        }
        _ => {}
    }
    match kind {
        SpaceKind::Q2Vec3 => Ok(q2_velocity(mesh, dirichlet)),
        SpaceKind::Q1ScalarBrokenSigma => Ok(q1_broken_pressure(mesh, dirichlet)),
        SpaceKind::Q1Vec2Sigma | SpaceKind::BfsSigma => Ok(sigma_space(mesh, kind, dirichlet)),
    }
}

fn q2_velocity(mesh: &ChannelMesh, dirichlet: &Dirichlet) -> DofMap {
    let [n1, n2, n3] = mesh.counts;
    let (q1, q2, q3) = (2 * n1 + 1, 2 * n2 + 1, 2 * n3 + 1);
    let h = mesh.cell_size();
    let mut node_coords = Vec::with_capacity(q1 * q2 * q3);
    for k in 0..q3 {
        for j in 0..q2 {
            for i in 0..q1 {
                // exact zero on the Σ layer
                let z = mesh.dims[2] * ((k as f64) - n3 as f64) / n3 as f64;
                node_coords.push([0.5 * h[0] * i as f64, 0.5 * h[1] * j as f64, z]);
            }
        }
    }
    let nid = |i: usize, j: usize, k: usize| i + q1 * (j + q2 * k);
    let mut cell_dofs = Vec::with_capacity(mesh.hexes.len());
    for hex in 0..mesh.hexes.len() {
        let [i, j, k] = mesh.hex_ijk(hex);
        let mut dofs = Vec::with_capacity(81);
        for c in 0..3 {
            for b in 0..3 {
                for a in 0..3 {
                    let n = nid(2 * i + a, 2 * j + b, 2 * k + c);
                    dofs.extend([3 * n, 3 * n + 1, 3 * n + 2]);
                }
            }
        }
        cell_dofs.push(dofs);
    }
    let n_dofs = 3 * q1 * q2 * q3;
    let mut constrained = vec![false; n_dofs];
    if let Dirichlet::Tags(tags) = dirichlet {
        for f in mesh.facet_tags.iter().filter(|f| tags.contains(&f.tag)) {
            let want = if f.face.upper { 2 } else { 0 };
            for local in 0..27 {
                let m = [local % 3, (local / 3) % 3, local / 9];
                if m[f.face.axis] == want {
                    for c in 0..3 {
                        constrained[cell_dofs[f.hex][3 * local + c]] = true;
                    }
                }
            }
        }
    }
    DofMap { kind: SpaceKind::Q2Vec3, n_dofs, cell_dofs, constrained, node_coords }
}

fn q1_broken_pressure(mesh: &ChannelMesh, dirichlet: &Dirichlet) -> DofMap {
    let [n1, n2, n3] = mesh.counts;
    let n_vertices = mesh.nodes.len();
    let mut node_coords = mesh.nodes.clone();
    let mid = n3 / 2;
    let sigma_layer = |i: usize, j: usize| i + (n1 + 1) * j;
    // duplicated Σ nodes, used by Ω⁺ hexes
    for j in 0..=n2 {
        for i in 0..=n1 {
            node_coords.push(mesh.nodes[i + (n1 + 1) * (j + (n2 + 1) * mid)]);
        }
    }
    let mut cell_dofs = Vec::with_capacity(mesh.hexes.len());
    for hex in 0..mesh.hexes.len() {
        let [i, j, k] = mesh.hex_ijk(hex);
        let upper_half = k >= mid;
        let dofs: Vec<usize> = (0..8)
            .map(|l| {
                let (a, b, c) = (l & 1, (l >> 1) & 1, (l >> 2) & 1);
                if upper_half && k + c == mid {
                    n_vertices + sigma_layer(i + a, j + b)
                } else {
                    mesh.hexes[hex][l]
                }
            })
            .collect();
        cell_dofs.push(dofs);
    }
    let n_dofs = node_coords.len();
    let mut constrained = vec![false; n_dofs];
    if let Dirichlet::Tags(tags) = dirichlet {
        for f in mesh.facet_tags.iter().filter(|f| tags.contains(&f.tag)) {
            let want = usize::from(f.face.upper);
            for l in 0..8 {
                let m = [l & 1, (l >> 1) & 1, (l >> 2) & 1];
                if m[f.face.axis] == want {
                    constrained[cell_dofs[f.hex][l]] = true;
                }
            }
        }
    }
    DofMap { kind: SpaceKind::Q1ScalarBrokenSigma, n_dofs, cell_dofs, constrained, node_coords }
}

fn sigma_space(mesh: &ChannelMesh, kind: SpaceKind, dirichlet: &Dirichlet) -> DofMap {
    let nc = kind.components();
    let node_coords: Vec<[f64; 3]> = mesh.sigma_nodes.iter().map(|p| [p[0], p[1], 0.0]).collect();
    let cell_dofs = mesh
        .sigma_quads
        .iter()
        .map(|q| q.nodes.iter().flat_map(|&n| (0..nc).map(move |c| nc * n + c)).collect())
        .collect();
    let n_dofs = nc * node_coords.len();
    let mut constrained = vec![false; n_dofs];
    if matches!(dirichlet, Dirichlet::Clamped) {
        for n in 0..node_coords.len() {
            if mesh.sigma_node_on_boundary(n) {
                for c in 0..nc {
                    constrained[nc * n + c] = true;
                }
            }
        }
    }
    DofMap { kind, n_dofs, cell_dofs, constrained, node_coords }
}

/// The four DOF maps of the coupled problem with their standard boundary
/// conditions: velocity fixed on inflow and no-slip facets, clamped plate.
#[derive(Debug, Clone)]
pub struct FsiSpaces {
    pub velocity: DofMap,
    pub pressure: DofMap,
    pub inplane: DofMap,
    pub deflection: DofMap,
}

impl FsiSpaces {
    pub fn new(mesh: &ChannelMesh) -> Result<Self> {
        Ok(Self {
            velocity: build_dofmap(mesh, SpaceKind::Q2Vec3, &Dirichlet::Tags(vec![FacetTag::Inflow, FacetTag::NoSlip]))?,
            pressure: build_dofmap(mesh, SpaceKind::Q1ScalarBrokenSigma, &Dirichlet::None)?,
            inplane: build_dofmap(mesh, SpaceKind::Q1Vec2Sigma, &Dirichlet::Clamped)?,
            deflection: build_dofmap(mesh, SpaceKind::BfsSigma, &Dirichlet::Clamped)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::lagrange::LagrangeBasis;

    #[test]
    fn broken_pressure_duplicates_sigma_nodes() {
        let mesh = ChannelMesh::new([1.0; 3], [1, 1, 2]).unwrap();
        let p = build_dofmap(&mesh, SpaceKind::Q1ScalarBrokenSigma, &Dirichlet::None).unwrap();
        assert_eq!(p.n_dofs, 16);
        let below: std::collections::HashSet<_> = p.cell_dofs[0].iter().collect();
        let above: std::collections::HashSet<_> = p.cell_dofs[1].iter().collect();
        assert_eq!(below.intersection(&above).count(), 0);
        for (l, d) in p.cell_dofs[1].iter().enumerate().take(4) {
            assert_eq!(p.node_coords[*d], p.node_coords[p.cell_dofs[0][l + 4]]);
        }
    }

    #[test]
    fn single_clamped_bfs_element_has_no_free_dofs() {
        let mesh = ChannelMesh::new([1.0; 3], [1, 1, 2]).unwrap();
        let b = build_dofmap(&mesh, SpaceKind::BfsSigma, &Dirichlet::Clamped).unwrap();
        assert_eq!(b.n_dofs, 16);
        assert_eq!(b.n_free(), 0);
    }

    #[test]
    fn two_by_two_bfs_has_center_dofs_free() {
        let mesh = ChannelMesh::new([1.0; 3], [2, 2, 2]).unwrap();
        let b = build_dofmap(&mesh, SpaceKind::BfsSigma, &Dirichlet::Clamped).unwrap();
        assert_eq!(b.n_dofs, 36);
        assert_eq!(b.free_dofs(), vec![16, 17, 18, 19]);
        let u = build_dofmap(&mesh, SpaceKind::Q1Vec2Sigma, &Dirichlet::Clamped).unwrap();
        assert_eq!(u.n_free(), 2);
    }

    #[test]
    fn velocity_is_shared_across_sigma() {
        let mesh = ChannelMesh::new([1.0; 3], [1, 1, 2]).unwrap();
        let v = build_dofmap(&mesh, SpaceKind::Q2Vec3, &Dirichlet::None).unwrap();
        assert_eq!(v.n_dofs, 3 * 45);
        // the top nodes (c = 2) of the lower hex are the bottom nodes of the upper hex
        for l in 0..9 {
            for comp in 0..3 {
                assert_eq!(v.cell_dofs[0][3 * (18 + l) + comp], v.cell_dofs[1][3 * l + comp]);
            }
        }
        // and they lie exactly on Σ
        for l in 0..9 {
            assert_eq!(v.node_coords[v.cell_dofs[1][3 * l] / 3][2], 0.0);
        }
    }

    #[test]
    fn q2_trace_agrees_from_both_sides() {
        let mesh = ChannelMesh::new([1.0; 3], [1, 1, 2]).unwrap();
        let v = build_dofmap(&mesh, SpaceKind::Q2Vec3, &Dirichlet::None).unwrap();
        let field: Vec<f64> = (0..v.n_dofs).map(|d| ((d * 7919) % 101) as f64 / 101.0).collect();
        let basis = LagrangeBasis::new(2, 3);
        for &(x, y) in &[(0.1, 0.2), (0.5, 0.9), (0.77, 0.33)] {
            let below = basis.eval([x, y, 1.0], [0; 3]);
            let above = basis.eval([x, y, 0.0], [0; 3]);
            for comp in 0..3 {
                let vb: f64 = (0..27).map(|l| below[l] * field[v.cell_dofs[0][3 * l + comp]]).sum();
                let va: f64 = (0..27).map(|l| above[l] * field[v.cell_dofs[1][3 * l + comp]]).sum();
                assert!((vb - va).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn velocity_dirichlet_covers_inflow_and_walls_only() {
        let mesh = ChannelMesh::new([1.0; 3], [2, 2, 2]).unwrap();
        let spaces = FsiSpaces::new(&mesh).unwrap();
        let v = &spaces.velocity;
        for n in 0..v.n_nodes() {
            let p = v.node_coords[n];
            let wall = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0 || p[2] == -1.0;
            assert_eq!(v.constrained[3 * n], wall, "node {p:?}");
        }
    }

    #[test]
    fn rejects_mismatched_dirichlet() {
        let mesh = ChannelMesh::new([1.0; 3], [1, 1, 2]).unwrap();
        assert!(build_dofmap(&mesh, SpaceKind::BfsSigma, &Dirichlet::Tags(vec![FacetTag::NoSlip])).is_err());
        assert!(build_dofmap(&mesh, SpaceKind::Q2Vec3, &Dirichlet::Clamped).is_err());
    }
}
