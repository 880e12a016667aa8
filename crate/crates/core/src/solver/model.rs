//! The assembled coupled problem on one channel mesh.

use crate::assembly::{assemble_all, Assembled, Field, InterfaceData};
use crate::error::Result;
use crate::fe::FsiSpaces;
use crate::mesh::ChannelMesh;

/// Inflow profile `v_in(x̄, t)` on `x3 = −L3`.
pub type InflowField<'a> = &'a (dyn Fn([f64; 2], f64) -> [f64; 3] + Sync);

/// Loads of the coupled problem.
#[derive(Clone, Copy)]
pub struct Forcing<'a> {
    pub f: crate::assembly::VectorField<'a>,
    pub g3: crate::assembly::SurfaceField<'a>,
    pub inflow: InflowField<'a>,
}

pub fn zero_vector(_: [f64; 3], _: f64) -> [f64; 3] {
    [0.0; 3]
}

pub fn zero_surface(_: [f64; 2], _: f64) -> f64 {
    0.0
}

pub fn zero_inflow(_: [f64; 2], _: f64) -> [f64; 3] {
    [0.0; 3]
}

impl Forcing<'static> {
    pub fn zero() -> Self {
        Self { f: &zero_vector, g3: &zero_surface, inflow: &zero_inflow }
    }
}

pub struct FsiModel {
    pub mesh: ChannelMesh,
    pub spaces: FsiSpaces,
    pub interface: InterfaceData,
    pub rho_f: f64,
    pub mu: f64,
    pub blocks: Assembled,
    /// Constrained entries of the composite vector `(v, p, ū, u3, w3)`.
    pub fixed: Vec<bool>,
}

impl FsiModel {
    pub fn new(mesh: ChannelMesh, rho_f: f64, mu: f64, interface: InterfaceData) -> Result<Self> {
        let spaces = FsiSpaces::new(&mesh)?;
        let blocks = assemble_all(&mesh, &spaces, rho_f, mu, &interface)?;
        let mut fixed = Vec::with_capacity(blocks.system.len());
        fixed.extend_from_slice(&spaces.velocity.constrained);
        fixed.extend_from_slice(&spaces.pressure.constrained);
        fixed.extend_from_slice(&spaces.inplane.constrained);
        fixed.extend_from_slice(&spaces.deflection.constrained);
        fixed.extend_from_slice(&spaces.deflection.constrained);
        Ok(Self { mesh, spaces, interface, rho_f, mu, blocks, fixed })
    }

    pub fn n_dofs(&self) -> usize {
        self.blocks.system.len()
    }

    pub fn range(&self, f: Field) -> std::ops::Range<usize> {
        self.blocks.system.range(f)
    }

    /// Values of the constrained velocity DOFs from a boundary function;
    /// unconstrained entries are zero.
    pub fn velocity_bc_from(&self, g: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<f64> {
        let vel = &self.spaces.velocity;
        let mut out = vec![0.0; vel.n_dofs];
        for (n, x) in vel.node_coords.iter().enumerate() {
            if vel.constrained[3 * n] {
                let val = g(*x);
                out[3 * n..3 * n + 3].copy_from_slice(&val);
            }
        }
        out
    }

    /// Inflow data on the open inflow face, zero on every no-slip node.
    pub fn velocity_bc(&self, inflow: InflowField, t: f64) -> Vec<f64> {
        let [l1, l2, l3] = self.mesh.dims;
        self.velocity_bc_from(|x| {
            let interior = x[0] > 0.0 && x[0] < l1 && x[1] > 0.0 && x[1] < l2;
            if x[2] == -l3 && interior {
                inflow([x[0], x[1]], t)
            } else {
                [0.0; 3]
            }
        })
    }
}
