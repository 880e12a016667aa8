//! Structured hexahedral mesh of the channel `(0,L1) x (0,L2) x (-L3,L3)`.
//!
//! The node layer `k = n3/2` sits exactly on the interface plane `x3 = 0`, so
//! the restriction of the hex mesh to that plane is a conforming quadrilateral
//! mesh (`sigma_quads`).

use crate::error::{Error, Result};

/// Boundary/interface classification of a hexahedral facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FacetTag {
    Inflow,
    Outflow,
    NoSlip,
    Sigma,
}

/// Local face of an axis-aligned hexahedron, `axis` in 0..3 and `upper`
/// selecting the face at the larger coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face { axis: 0, upper: false },
        Face { axis: 0, upper: true },
        Face { axis: 1, upper: false },
        Face { axis: 1, upper: true },
        Face { axis: 2, upper: false },
        Face { axis: 2, upper: true },
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedFacet {
    pub hex: usize,
    pub face: Face,
    pub tag: FacetTag,
}

/// Quadrilateral of the interface mesh with its two neighbouring hexes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaQuad {
    /// Interface node indices, counter-clockwise from the lower-left corner:
    /// `(i,j), (i+1,j), (i,j+1), (i+1,j+1)` in lexicographic order.
    pub nodes: [usize; 4],
    /// Hex in `x3 < 0`.
    pub below: usize,
    /// Hex in `x3 > 0`.
    pub above: usize,
    /// Element index pair `(i, j)` on the interface grid.
    pub ij: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct ChannelMesh {
    pub dims: [f64; 3],
    pub counts: [usize; 3],
    /// Vertex coordinates, lexicographic with `x1` fastest.
    pub nodes: Vec<[f64; 3]>,
    /// Vertex connectivity; local vertex `a + 2b + 4c` is the corner at
    /// offsets `(a, b, c)`.
    pub hexes: Vec<[usize; 8]>,
    pub facet_tags: Vec<TaggedFacet>,
    pub sigma_nodes: Vec<[f64; 2]>,
    pub sigma_quads: Vec<SigmaQuad>,
}

/// Grid coordinate of node `k` on an axis of `n` cells spanning `[lo, lo + len]`.
fn grid_coord(lo: f64, len: f64, k: usize, n: usize) -> f64 {
    lo + len * (k as f64) / (n as f64)
}

/// x3 coordinate of node layer `k`: `L3 (2k - n3) / n3`, exactly zero at `k = n3/2`.
fn x3_coord(l3: f64, k: usize, n3: usize) -> f64 {
    l3 * ((2 * k) as f64 - n3 as f64) / n3 as f64
}

/// Builds the untagged Σ-conforming channel mesh.
pub fn build_channel_mesh(dims: [f64; 3], counts: [usize; 3]) -> Result<ChannelMesh> {
    for (i, d) in dims.iter().enumerate() {
        if !(*d > 0.0) || !d.is_finite() {
            return Err(Error::NonPositiveDimension(format!("L{} = {}", i + 1, d)));
        }
    }
    for (i, n) in counts.iter().enumerate() {
        if *n == 0 {
            return Err(Error::NonPositiveDimension(format!("n{} = 0", i + 1)));
        }
    }
    if counts[2] % 2 != 0 {
        return Err(Error::OddLayerCount(counts[2]));
    }
    let [n1, n2, n3] = counts;
    let mut nodes = Vec::with_capacity((n1 + 1) * (n2 + 1) * (n3 + 1));
    for k in 0..=n3 {
        for j in 0..=n2 {
            for i in 0..=n1 {
                nodes.push([
                    grid_coord(0.0, dims[0], i, n1),
                    grid_coord(0.0, dims[1], j, n2),
                    x3_coord(dims[2], k, n3),
                ]);
            }
        }
    }
    let vid = |i: usize, j: usize, k: usize| i + (n1 + 1) * (j + (n2 + 1) * k);
    let mut hexes = Vec::with_capacity(n1 * n2 * n3);
    for k in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                let mut h = [0; 8];
                for (l, v) in h.iter_mut().enumerate() {
                    *v = vid(i + (l & 1), j + ((l >> 1) & 1), k + ((l >> 2) & 1));
                }
                hexes.push(h);
            }
        }
    }
    let mut sigma_nodes = Vec::with_capacity((n1 + 1) * (n2 + 1));
    for j in 0..=n2 {
        for i in 0..=n1 {
            sigma_nodes.push([grid_coord(0.0, dims[0], i, n1), grid_coord(0.0, dims[1], j, n2)]);
        }
    }
    let hid = |i: usize, j: usize, k: usize| i + n1 * (j + n2 * k);
    let sid = |i: usize, j: usize| i + (n1 + 1) * j;
    let mut sigma_quads = Vec::with_capacity(n1 * n2);
    for j in 0..n2 {
        for i in 0..n1 {
            sigma_quads.push(SigmaQuad {
                nodes: [sid(i, j), sid(i + 1, j), sid(i, j + 1), sid(i + 1, j + 1)],
                below: hid(i, j, n3 / 2 - 1),
                above: hid(i, j, n3 / 2),
                ij: (i, j),
            });
        }
    }
    Ok(ChannelMesh { dims, counts, nodes, hexes, facet_tags: Vec::new(), sigma_nodes, sigma_quads })
}

/// Classifies every boundary facet as inflow / outflow / no-slip and every
/// interior facet on `x3 = 0` as sigma.
pub fn tag_boundaries(mut mesh: ChannelMesh) -> ChannelMesh {
    let [n1, n2, n3] = mesh.counts;
    let mut tags = Vec::new();
    for k in 0..n3 {
        for j in 0..n2 {
            for i in 0..n1 {
                let hex = mesh.hex_index(i, j, k);
                let idx = [i, j, k];
                for face in Face::ALL {
                    let n = mesh.counts[face.axis];
                    let pos = idx[face.axis];
                    let on_boundary = if face.upper { pos + 1 == n } else { pos == 0 };
                    let tag = if on_boundary {
                        match (face.axis, face.upper) {
                            (2, false) => FacetTag::Inflow,
                            (2, true) => FacetTag::Outflow,
                            _ => FacetTag::NoSlip,
                        }
                    } else if face.axis == 2 && face.upper && k + 1 == n3 / 2 {
                        // Σ facets are recorded once, from the Ω⁻ side.
                        FacetTag::Sigma
                    } else {
                        continue;
                    };
                    tags.push(TaggedFacet { hex, face, tag });
                }
            }
        }
    }
    mesh.facet_tags = tags;
    mesh
}

impl ChannelMesh {
    /// Builds and tags the mesh in one go.
    pub fn new(dims: [f64; 3], counts: [usize; 3]) -> Result<Self> {
        Ok(tag_boundaries(build_channel_mesh(dims, counts)?))
    }

    pub fn hex_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.counts[0] * (j + self.counts[1] * k)
    }

    /// Inverse of [`hex_index`](Self::hex_index).
    pub fn hex_ijk(&self, hex: usize) -> [usize; 3] {
        let [n1, n2, _] = self.counts;
        [hex % n1, (hex / n1) % n2, hex / (n1 * n2)]
    }

    /// Edge lengths of every (identical) hexahedron.
    pub fn cell_size(&self) -> [f64; 3] {
        [
            self.dims[0] / self.counts[0] as f64,
            self.dims[1] / self.counts[1] as f64,
            2.0 * self.dims[2] / self.counts[2] as f64,
        ]
    }

    /// Lower corner of a hex.
    pub fn hex_origin(&self, hex: usize) -> [f64; 3] {
        self.nodes[self.hexes[hex][0]]
    }

    pub fn is_below_sigma(&self, hex: usize) -> bool {
        self.hex_ijk(hex)[2] < self.counts[2] / 2
    }

    pub fn hex_volume(&self, _hex: usize) -> f64 {
        let h = self.cell_size();
        h[0] * h[1] * h[2]
    }

    pub fn facet_area(&self, face: Face) -> f64 {
        let h = self.cell_size();
        match face.axis {
            0 => h[1] * h[2],
            1 => h[0] * h[2],
            _ => h[0] * h[1],
        }
    }

    pub fn facets_with(&self, tag: FacetTag) -> impl Iterator<Item = &TaggedFacet> {
        self.facet_tags.iter().filter(move |f| f.tag == tag)
    }

    /// Interface element size `(h1, h2)`.
    pub fn sigma_cell_size(&self) -> [f64; 2] {
        let h = self.cell_size();
        [h[0], h[1]]
    }

    /// Lower-left corner of an interface quad.
    pub fn sigma_origin(&self, quad: usize) -> [f64; 2] {
        self.sigma_nodes[self.sigma_quads[quad].nodes[0]]
    }

    /// True when the interface node lies on `∂Σ`.
    pub fn sigma_node_on_boundary(&self, node: usize) -> bool {
        let n1 = self.counts[0];
        let n2 = self.counts[1];
        let i = node % (n1 + 1);
        let j = node / (n1 + 1);
        i == 0 || j == 0 || i == n1 || j == n2
    }

    pub fn sigma_area(&self) -> f64 {
        self.dims[0] * self.dims[1]
    }
}
