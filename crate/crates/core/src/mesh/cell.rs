//! Voxelized periodic unit cell `Y = (0,1)^2 x (-1/2,1/2)` (optionally scaled).

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Interior facet shared by two solid voxels of different yarn labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContactFacet {
    /// Voxel on the lower side along `axis`.
    pub lower: usize,
    /// Voxel on the upper side along `axis`.
    pub upper: usize,
    /// Normal direction `e_axis`.
    pub axis: usize,
    /// Facet lies on the periodic boundary (`lower` touches the face `y_axis = 1`,
    /// `upper` the face `y_axis = 0`).
    pub wraps: bool,
}

#[derive(Debug, Clone)]
pub struct CellMesh {
    pub resolution: [usize; 3],
    /// Physical edge lengths of the cell; `y3` is centred on zero.
    pub extent: [f64; 3],
    /// Per-voxel label: 0 = fluid, k >= 1 = yarn k. Voxel `(i,j,k)` has index
    /// `i + m1 (j + m2 k)`.
    pub labels: Vec<u32>,
    pub contact_facets: Vec<ContactFacet>,
    /// `(master, slave)` grid-node pairs on the lateral faces. Edge and corner
    /// nodes are chained to a single master.
    pub periodic_pairs: Vec<(usize, usize)>,
}

impl CellMesh {
    pub fn voxel_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution[0] * (j + self.resolution[1] * k)
    }

    pub fn voxel_ijk(&self, v: usize) -> [usize; 3] {
        let [m1, m2, _] = self.resolution;
        [v % m1, (v / m1) % m2, v / (m1 * m2)]
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + (self.resolution[0] + 1) * (j + (self.resolution[1] + 1) * k)
    }

    pub fn node_ijk(&self, n: usize) -> [usize; 3] {
        let [m1, m2, _] = self.resolution;
        [n % (m1 + 1), (n / (m1 + 1)) % (m2 + 1), n / ((m1 + 1) * (m2 + 1))]
    }

    pub fn n_nodes(&self) -> usize {
        let [m1, m2, m3] = self.resolution;
        (m1 + 1) * (m2 + 1) * (m3 + 1)
    }

    pub fn n_voxels(&self) -> usize {
        self.labels.len()
    }

    pub fn voxel_size(&self) -> [f64; 3] {
        [
            self.extent[0] / self.resolution[0] as f64,
            self.extent[1] / self.resolution[1] as f64,
            self.extent[2] / self.resolution[2] as f64,
        ]
    }

    pub fn voxel_volume(&self) -> f64 {
        let h = self.voxel_size();
        h[0] * h[1] * h[2]
    }

    pub fn node_coord(&self, n: usize) -> [f64; 3] {
        let [i, j, k] = self.node_ijk(n);
        self.grid_point(i, j, k)
    }

    /// Coordinates of grid point `(i, j, k)`, indices may exceed the resolution.
    pub fn grid_point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let h = self.voxel_size();
        [i as f64 * h[0], j as f64 * h[1], -0.5 * self.extent[2] + k as f64 * h[2]]
    }

    pub fn is_solid(&self, v: usize) -> bool {
        self.labels[v] != 0
    }

    pub fn solid_mask(&self) -> Vec<bool> {
        self.labels.iter().map(|&l| l != 0).collect()
    }

    pub fn solid_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    pub fn solid_volume(&self) -> f64 {
        self.solid_count() as f64 * self.voxel_volume()
    }

    pub fn fluid_volume(&self) -> f64 {
        (self.n_voxels() - self.solid_count()) as f64 * self.voxel_volume()
    }

    pub fn facet_area(&self, axis: usize) -> f64 {
        let h = self.voxel_size();
        match axis {
            0 => h[1] * h[2],
            1 => h[0] * h[2],
            _ => h[0] * h[1],
        }
    }

    /// Neighbour of voxel `v` in direction `+axis` (wrapping laterally).
    /// Returns `(neighbour, wrapped)`.
    pub fn upper_neighbour(&self, v: usize, axis: usize) -> Option<(usize, bool)> {
        let mut ijk = self.voxel_ijk(v);
        let m = self.resolution[axis];
        if ijk[axis] + 1 < m {
            ijk[axis] += 1;
            Some((self.voxel_index(ijk[0], ijk[1], ijk[2]), false))
        } else if axis < 2 {
            ijk[axis] = 0;
            Some((self.voxel_index(ijk[0], ijk[1], ijk[2]), true))
        } else {
            None
        }
    }

    /// Face-adjacent neighbours, lateral directions periodic.
    fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let ijk = self.voxel_ijk(v);
        (0..3).flat_map(move |axis| {
            let m = self.resolution[axis];
            let mut out = [None, None];
            for (s, slot) in out.iter_mut().enumerate() {
                let mut c = ijk;
                if s == 0 {
                    if c[axis] + 1 < m {
                        c[axis] += 1;
                    } else if axis < 2 {
                        c[axis] = 0;
                    } else {
                        continue;
                    }
                } else if c[axis] > 0 {
                    c[axis] -= 1;
                } else if axis < 2 {
                    c[axis] = m - 1;
                } else {
                    continue;
                }
                *slot = Some(self.voxel_index(c[0], c[1], c[2]));
            }
            out.into_iter().flatten()
        })
    }

    /// Number of face-connected components of the voxels satisfying `pred`.
    pub fn components(&self, pred: impl Fn(usize) -> bool) -> (usize, Vec<Option<usize>>) {
        let mut comp = vec![None; self.n_voxels()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n_voxels() {
            if !pred(start) || comp[start].is_some() {
                continue;
            }
            comp[start] = Some(count);
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for w in self.neighbours(v) {
                    if pred(w) && comp[w].is_none() {
                        comp[w] = Some(count);
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    /// Whether a face-connected fluid path joins the face `y_axis = min` to the
    /// face `y_axis = max` without using the periodic wrap along `axis`.
    pub fn fluid_connects(&self, axis: usize) -> bool {
        let m = self.resolution[axis];
        let mut seen = vec![false; self.n_voxels()];
        let mut queue = VecDeque::new();
        for v in 0..self.n_voxels() {
            if !self.is_solid(v) && self.voxel_ijk(v)[axis] == 0 {
                seen[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            let pos = self.voxel_ijk(v)[axis];
            if pos + 1 == m {
                return true;
            }
            for w in self.neighbours(v) {
                if seen[w] || self.is_solid(w) {
                    continue;
                }
                let wpos = self.voxel_ijk(w)[axis];
                // forbid the wrap along `axis`
                if (pos == 0 && wpos + 1 == m && m > 1) || (pos + 1 == m && wpos == 0 && m > 1) {
                    continue;
                }
                seen[w] = true;
                queue.push_back(w);
            }
        }
        false
    }
}

fn build_periodic_pairs(res: [usize; 3]) -> Vec<(usize, usize)> {
    let [m1, m2, m3] = res;
    let nid = |i: usize, j: usize, k: usize| i + (m1 + 1) * (j + (m2 + 1) * k);
    let mut pairs = Vec::new();
    for k in 0..=m3 {
        for j in 0..=m2 {
            for i in 0..=m1 {
                if i == m1 || j == m2 {
                    pairs.push((nid(i % m1, j % m2, k), nid(i, j, k)));
                }
            }
        }
    }
    pairs
}

fn assemble(resolution: [usize; 3], labels: Vec<u32>, extent: [f64; 3]) -> Result<CellMesh> {
    let [m1, m2, m3] = resolution;
    if m1 == 0 || m2 == 0 || m3 == 0 {
        return Err(Error::NonPositiveDimension(format!("cell resolution {resolution:?}")));
    }
    if labels.len() != m1 * m2 * m3 {
        return Err(Error::DofMismatch(format!(
            "label array has {} entries, resolution {:?} needs {}",
            labels.len(),
            resolution,
            m1 * m2 * m3
        )));
    }
    if extent.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::NonPositiveDimension(format!("cell extent {extent:?}")));
    }
    let mut mesh = CellMesh {
        resolution,
        extent,
        labels,
        contact_facets: Vec::new(),
        periodic_pairs: build_periodic_pairs(resolution),
    };
    let mut contacts = Vec::new();
    for v in 0..mesh.n_voxels() {
        let a = mesh.labels[v];
        if a == 0 {
            continue;
        }
        for axis in 0..3 {
            if let Some((w, wraps)) = mesh.upper_neighbour(v, axis) {
                let b = mesh.labels[w];
                // a cell one voxel wide is adjacent to itself through the wrap
                if b != 0 && b != a && w != v {
                    contacts.push(ContactFacet { lower: v, upper: w, axis, wraps });
                }
            }
        }
    }
    mesh.contact_facets = contacts;
    Ok(mesh)
}

/// Builds a solid cell for the elasticity cell problems. The solid must be
/// non-empty and face-connected (lateral directions periodic).
pub fn build_cell_mesh(resolution: [usize; 3], labels: Vec<u32>) -> Result<CellMesh> {
    build_cell_mesh_scaled(resolution, labels, [1.0; 3])
}

pub fn build_cell_mesh_scaled(
    resolution: [usize; 3],
    labels: Vec<u32>,
    extent: [f64; 3],
) -> Result<CellMesh> {
    let mesh = assemble(resolution, labels, extent)?;
    if mesh.solid_count() == 0 {
        return Err(Error::EmptyPhase("solid"));
    }
    let (n, _) = mesh.components(|v| mesh.is_solid(v));
    if n > 1 {
        return Err(Error::DisconnectedSolid { components: n });
    }
    Ok(mesh)
}

/// Builds a cell for the fluid (permeability) problems: only requires a
/// non-empty fluid phase; the solid may be empty or disconnected.
pub fn build_fluid_cell_mesh(
    resolution: [usize; 3],
    labels: Vec<u32>,
    extent: [f64; 3],
) -> Result<CellMesh> {
    let mesh = assemble(resolution, labels, extent)?;
    if mesh.solid_count() == mesh.n_voxels() {
        return Err(Error::NoFluidPhase);
    }
    Ok(mesh)
}
