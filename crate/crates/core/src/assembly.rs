//! Block matrices and load vectors of the fully discrete coupled system
//!
//! ```text
//! (S1/Δt + S2) y^{n+1} = S1 y^n / Δt + L(t^{n+1}),   y = (v, p, ū, u3, w3)
//! ```
//!
//! All matrices use the convention "rows = test functions, columns = trial
//! functions". Constrained DOFs are kept in every block; elimination happens
//! in the solver.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fe::{gauss_rule, BfsElement, DofMap, FsiSpaces, LagrangeBasis};
use crate::mesh::ChannelMesh;
use crate::sparse::{CsrMatrix, Triplets};
use crate::tensors::{validate_tensors, StiffnessTriple};

/// Fluid body force `f(x, t)`.
pub type VectorField<'a> = &'a (dyn Fn([f64; 3], f64) -> [f64; 3] + Sync);
/// Surface force density `g3(x̄, t)` on Σ.
pub type SurfaceField<'a> = &'a (dyn Fn([f64; 2], f64) -> f64 + Sync);

/// Piecewise-constant plate and interface data, one entry per Σ quad.
#[derive(Debug, Clone)]
pub struct InterfaceData {
    /// Resistivity `K̂⁻¹ = μ δ K⁻¹`; an exact zero tensor switches the
    /// interface off on that facet.
    pub khat_inv: Vec<Matrix3<f64>>,
    pub stiffness: Vec<StiffnessTriple>,
    pub rho_s_hat: f64,
}

impl InterfaceData {
    pub fn uniform(mesh: &ChannelMesh, khat_inv: Matrix3<f64>, stiffness: StiffnessTriple, rho_s_hat: f64) -> Self {
        let n = mesh.sigma_quads.len();
        Self { khat_inv: vec![khat_inv; n], stiffness: vec![stiffness; n], rho_s_hat }
    }

    /// Resistivity from a permeability `K̂` (inverted per facet).
    pub fn from_khat(mesh: &ChannelMesh, khat: Matrix3<f64>, stiffness: StiffnessTriple, rho_s_hat: f64) -> Result<Self> {
        let inv = khat.try_inverse().ok_or(Error::SingularPermeability { facet: 0 })?;
        Ok(Self::uniform(mesh, 0.5 * (inv + inv.transpose()), stiffness, rho_s_hat))
    }

    pub fn check(&self, n_quads: usize) -> Result<()> {
        if self.khat_inv.len() != n_quads || self.stiffness.len() != n_quads {
            return Err(Error::DofMismatch(format!(
                "interface data has {} / {} facet entries for {n_quads} Σ quads",
                self.khat_inv.len(),
                self.stiffness.len()
            )));
        }
        if !(self.rho_s_hat > 0.0) {
            return Err(Error::NonPositiveDimension(format!("ρ̂s = {}", self.rho_s_hat)));
        }
        Ok(())
    }
}

fn check_resistivity(k: &Matrix3<f64>, facet: usize) -> Result<()> {
    let scale = k.abs().max();
    if scale == 0.0 {
        return Ok(());
    }
    if (k - k.transpose()).abs().max() > 1e-12 * scale {
        return Err(Error::SingularPermeability { facet });
    }
    let eig = SymmetricEigen::new(*k).eigenvalues;
    if !(eig.min() > 1e-14 * scale) {
        return Err(Error::SingularPermeability { facet });
    }
    Ok(())
}

/// `M_VV`, `A` and `B` of the Stokes part.
#[derive(Debug, Clone)]
pub struct FluidBlocks {
    /// `ρ_f (V_k, V_l)`
    pub mass: CsrMatrix,
    /// `2μ (D(V_l), D(V_k))`
    pub viscous: CsrMatrix,
    /// `(div V_l, Q_k)`, pressure rows
    pub divergence: CsrMatrix,
}

/// `R_VV`, `R_VU`, `R_UU` of the Darcy interface condition.
#[derive(Debug, Clone)]
pub struct InterfaceBlocks {
    pub r_vv: CsrMatrix,
    /// velocity rows, deflection columns
    pub r_vu: CsrMatrix,
    pub r_uu: CsrMatrix,
}

/// Plate operator blocks.
#[derive(Debug, Clone)]
pub struct PlateBlocks {
    pub p_a: CsrMatrix,
    /// `(B ∇²U3_l, D(Ū_k))`, in-plane rows
    pub p_b1: CsrMatrix,
    /// `(B D(Ū_l), ∇²U3_k)`, deflection rows
    pub p_b2: CsrMatrix,
    pub p_c: CsrMatrix,
    pub m_uw: CsrMatrix,
    pub m_ww: CsrMatrix,
}

impl PlateBlocks {
    /// The plate stiffness `[[P_A, P_B1], [P_B2, P_C]]` on `(ū, u3)`.
    pub fn stiffness(&self) -> CsrMatrix {
        let nu = self.p_a.nrows;
        let n3 = self.p_c.nrows;
        let mut t = Triplets::new(nu + n3, nu + n3);
        t.add_csr(&self.p_a, 0, 0, 1.0);
        t.add_csr(&self.p_b1, 0, nu, 1.0);
        t.add_csr(&self.p_b2, nu, 0, 1.0);
        t.add_csr(&self.p_c, nu, nu, 1.0);
        t.to_csr()
    }
}

fn gauss_points_3d(n: usize) -> Vec<([f64; 3], f64)> {
    let q = gauss_rule(n, 3);
    q.points.into_iter().zip(q.weights).collect()
}

fn gauss_points_2d(n: usize) -> Vec<([f64; 2], f64)> {
    let q = gauss_rule(n, 2);
    q.points.into_iter().map(|p| [p[0], p[1]]).zip(q.weights).collect()
}

/// Element matrices shared by every hex (the mesh is uniform).
struct FluidElement {
    mass: DMatrix<f64>,
    viscous: DMatrix<f64>,
    divergence: DMatrix<f64>,
}

fn fluid_element(h: [f64; 3], rho_f: f64, mu: f64) -> FluidElement {
    let q2 = LagrangeBasis::new(2, 3);
    let q1 = LagrangeBasis::new(1, 3);
    let det = h[0] * h[1] * h[2];
    let mut mass = DMatrix::<f64>::zeros(81, 81);
    let mut viscous = DMatrix::<f64>::zeros(81, 81);
    let mut divergence = DMatrix::<f64>::zeros(8, 81);
    for (xi, w) in gauss_points_3d(3) {
        let (phi, grad_ref) = q2.values_and_gradients(xi);
        let grad: Vec<[f64; 3]> =
            grad_ref.iter().map(|g| [g[0] / h[0], g[1] / h[1], g[2] / h[2]]).collect();
        let psi = q1.eval(xi, [0, 0, 0]);
        let dw = w * det;
        for a in 0..27 {
            for b in 0..27 {
                let m = rho_f * phi[a] * phi[b] * dw;
                let gg = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1] + grad[a][2] * grad[b][2];
                for c in 0..3 {
                    mass[(3 * a + c, 3 * b + c)] += m;
                    for d in 0..3 {
                        // 2μ D(φ_b e_d):D(φ_a e_c) = μ(δ_cd ∇φ_a·∇φ_b + ∂_d φ_a ∂_c φ_b)
                        let mut v = grad[a][d] * grad[b][c];
                        if c == d {
                            v += gg;
                        }
                        viscous[(3 * a + c, 3 * b + d)] += mu * v * dw;
                    }
                }
            }
            for (qn, &p) in psi.iter().enumerate() {
                for c in 0..3 {
                    divergence[(qn, 3 * a + c)] += p * grad[a][c] * dw;
                }
            }
        }
    }
    FluidElement { mass, viscous, divergence }
}

pub fn assemble_fluid_blocks(mesh: &ChannelMesh, spaces: &FsiSpaces, rho_f: f64, mu: f64) -> Result<FluidBlocks> {
    let (vel, pre) = (&spaces.velocity, &spaces.pressure);
    if vel.cell_dofs.len() != mesh.hexes.len() || pre.cell_dofs.len() != mesh.hexes.len() {
        return Err(Error::DofMismatch("fluid dof maps do not match the mesh".into()));
    }
    if vel.kind.dofs_per_cell() != 81 || pre.kind.dofs_per_cell() != 8 {
        return Err(Error::DofMismatch("fluid blocks need Q2 velocity and Q1 pressure".into()));
    }
    let el = fluid_element(mesh.cell_size(), rho_f, mu);
    let (nv, np) = (vel.n_dofs, pre.n_dofs);
    let mut tm = Triplets::new(nv, nv);
    let mut ta = Triplets::new(nv, nv);
    let mut tb = Triplets::new(np, nv);
    for hex in 0..mesh.hexes.len() {
        let vd = &vel.cell_dofs[hex];
        let pd = &pre.cell_dofs[hex];
        tm.add_local(vd, vd, &el.mass);
        ta.add_local(vd, vd, &el.viscous);
        tb.add_local(pd, vd, &el.divergence);
    }
    Ok(FluidBlocks { mass: tm.to_csr(), viscous: ta.to_csr(), divergence: tb.to_csr() })
}

/// Global velocity DOFs of the Q2 trace on a Σ quad, node-major over the
/// 3×3 face nodes (index `3 (a + 3 b) + c`).
pub fn sigma_velocity_dofs(mesh: &ChannelMesh, velocity: &DofMap, quad: usize) -> Vec<usize> {
    let hex = mesh.sigma_quads[quad].below;
    let cd = &velocity.cell_dofs[hex];
    let mut out = Vec::with_capacity(27);
    for b in 0..3 {
        for a in 0..3 {
            let local = a + 3 * b + 18;
            out.extend_from_slice(&cd[3 * local..3 * local + 3]);
        }
    }
    out
}

pub fn assemble_interface_blocks(mesh: &ChannelMesh, spaces: &FsiSpaces, iface: &InterfaceData) -> Result<InterfaceBlocks> {
    let nq = mesh.sigma_quads.len();
    iface.check(nq)?;
    for (f, k) in iface.khat_inv.iter().enumerate() {
        check_resistivity(k, f)?;
    }
    let (vel, defl) = (&spaces.velocity, &spaces.deflection);
    let (nv, nu) = (vel.n_dofs, defl.n_dofs);
    let h = mesh.sigma_cell_size();
    let bfs = BfsElement::new(h);
    let q2 = LagrangeBasis::new(2, 2);
    let area = h[0] * h[1];
    // reference products, contracted with K̂⁻¹ per facet
    let pts = gauss_points_2d(4);
    let mut vv = DMatrix::<f64>::zeros(9, 9);
    let mut vu = DMatrix::<f64>::zeros(9, 16);
    let mut uu = DMatrix::<f64>::zeros(16, 16);
    for (xi, w) in &pts {
        let phi = q2.eval([xi[0], xi[1], 0.0], [0, 0, 0]);
        let b = bfs.eval(*xi, [0, 0]);
        let dw = w * area;
        for a in 0..9 {
            for c in 0..9 {
                vv[(a, c)] += phi[a] * phi[c] * dw;
            }
            for k in 0..16 {
                vu[(a, k)] += phi[a] * b[k] * dw;
            }
        }
        for k in 0..16 {
            for l in 0..16 {
                uu[(k, l)] += b[k] * b[l] * dw;
            }
        }
    }
    let mut tvv = Triplets::new(nv, nv);
    let mut tvu = Triplets::new(nv, nu);
    let mut tuu = Triplets::new(nu, nu);
    for q in 0..nq {
        let k = &iface.khat_inv[q];
        if k.abs().max() == 0.0 {
            continue;
        }
        let vd = sigma_velocity_dofs(mesh, vel, q);
        let ud = &defl.cell_dofs[q];
        let mut lvv = DMatrix::<f64>::zeros(27, 27);
        let mut lvu = DMatrix::<f64>::zeros(27, 16);
        for a in 0..9 {
            for c in 0..3 {
                for b in 0..9 {
                    for d in 0..3 {
                        lvv[(3 * a + c, 3 * b + d)] = k[(c, d)] * vv[(a, b)];
                    }
                }
                for l in 0..16 {
                    lvu[(3 * a + c, l)] = k[(c, 2)] * vu[(a, l)];
                }
            }
        }
        tvv.add_local(&vd, &vd, &lvv);
        tvu.add_local(&vd, ud, &lvu);
        tuu.add_local(ud, ud, &(&uu * k[(2, 2)]));
    }
    Ok(InterfaceBlocks { r_vv: tvv.to_csr(), r_vu: tvu.to_csr(), r_uu: tuu.to_csr() })
}

/// BFS mass matrix of one quad (no density).
fn bfs_mass(h: [f64; 2]) -> DMatrix<f64> {
    let bfs = BfsElement::new(h);
    let mut m = DMatrix::<f64>::zeros(16, 16);
    for (xi, w) in gauss_points_2d(4) {
        let b = bfs.eval(xi, [0, 0]);
        for k in 0..16 {
            for l in 0..16 {
                m[(k, l)] += b[k] * b[l] * w * h[0] * h[1];
            }
        }
    }
    m
}

/// Engineering strain vectors `(∂1u1, ∂2u2, ∂2u1 + ∂1u2)` of the 8 local
/// in-plane functions and `(∂11, ∂22, 2∂12)` of the 16 BFS functions at a
/// reference point.
fn plate_strains(h: [f64; 2], xi: [f64; 2]) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    let q1 = LagrangeBasis::new(1, 2);
    let (_, g) = q1.values_and_gradients([xi[0], xi[1], 0.0]);
    let mut membrane = Vec::with_capacity(8);
    for gn in g.iter().take(4) {
        let (d1, d2) = (gn[0] / h[0], gn[1] / h[1]);
        membrane.push([d1, 0.0, d2]);
        membrane.push([0.0, d2, d1]);
    }
    let hess = BfsElement::new(h).hessians(xi);
    let bending = hess.iter().map(|x| [x[0], x[1], 2.0 * x[2]]).collect();
    (membrane, bending)
}

fn quad_form(x: &[f64; 3], v: &Matrix3<f64>, y: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += x[i] * v[(i, j)] * y[j];
        }
    }
    s
}

pub fn assemble_plate_blocks(mesh: &ChannelMesh, spaces: &FsiSpaces, iface: &InterfaceData) -> Result<PlateBlocks> {
    let nq = mesh.sigma_quads.len();
    iface.check(nq)?;
    for (f, t) in iface.stiffness.iter().enumerate() {
        let r = validate_tensors(t);
        if !(r.a_min_eig > 0.0) {
            return Err(Error::NonCoerciveTensor { facet: f, tensor: "Ahom" });
        }
        if !(r.c_min_eig > 0.0) {
            return Err(Error::NonCoerciveTensor { facet: f, tensor: "Chom" });
        }
    }
    let (inp, defl) = (&spaces.inplane, &spaces.deflection);
    let (nm, nb) = (inp.n_dofs, defl.n_dofs);
    let h = mesh.sigma_cell_size();
    let area = h[0] * h[1];
    let pts: Vec<_> = gauss_points_2d(4).into_iter().map(|(xi, w)| (plate_strains(h, xi), w * area)).collect();
    let mass = bfs_mass(h) * iface.rho_s_hat;
    let mut ta = Triplets::new(nm, nm);
    let mut tb1 = Triplets::new(nm, nb);
    let mut tb2 = Triplets::new(nb, nm);
    let mut tc = Triplets::new(nb, nb);
    let mut tm = Triplets::new(nb, nb);
    for q in 0..nq {
        let t = &iface.stiffness[q];
        let (va, vb, vc) = (t.a_voigt(), t.b_voigt(), t.c_voigt());
        let has_b = vb.abs().max() > 0.0;
        let mut la = DMatrix::<f64>::zeros(8, 8);
        let mut lb1 = DMatrix::<f64>::zeros(8, 16);
        let mut lb2 = DMatrix::<f64>::zeros(16, 8);
        let mut lc = DMatrix::<f64>::zeros(16, 16);
        for ((mem, ben), dw) in &pts {
            for k in 0..8 {
                for l in 0..8 {
                    la[(k, l)] += quad_form(&mem[k], &va, &mem[l]) * dw;
                }
                if has_b {
                    for l in 0..16 {
                        lb1[(k, l)] += quad_form(&mem[k], &vb, &ben[l]) * dw;
                        lb2[(l, k)] += quad_form(&ben[l], &vb, &mem[k]) * dw;
                    }
                }
            }
            for k in 0..16 {
                for l in 0..16 {
                    lc[(k, l)] += quad_form(&ben[k], &vc, &ben[l]) * dw;
                }
            }
        }
        let md = &inp.cell_dofs[q];
        let bd = &defl.cell_dofs[q];
        ta.add_local(md, md, &la);
        if has_b {
            tb1.add_local(md, bd, &lb1);
            tb2.add_local(bd, md, &lb2);
        }
        tc.add_local(bd, bd, &lc);
        tm.add_local(bd, bd, &mass);
    }
    let m_ww = tm.to_csr();
    Ok(PlateBlocks {
        p_a: ta.to_csr(),
        p_b1: tb1.to_csr(),
        p_b2: tb2.to_csr(),
        p_c: tc.to_csr(),
        m_uw: m_ww.clone(),
        m_ww,
    })
}

/// Unknown blocks of the composite vector `y = (v, p, ū, u3, w3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Velocity = 0,
    Pressure = 1,
    InPlane = 2,
    Deflection = 3,
    PlateVelocity = 4,
}

#[derive(Debug, Clone)]
pub struct BlockSystem {
    /// Start of each field in `y`, plus the total length.
    pub offsets: [usize; 6],
    pub s1: CsrMatrix,
    pub s2: CsrMatrix,
}

impl BlockSystem {
    pub fn len(&self) -> usize {
        self.offsets[5]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, f: Field) -> std::ops::Range<usize> {
        self.offsets[f as usize]..self.offsets[f as usize + 1]
    }

    /// `S1/Δt + S2`.
    pub fn composed(&self, dt: f64) -> CsrMatrix {
        self.s2.add_scaled(&self.s1, 1.0 / dt)
    }
}

/// Field sizes of the spaces, in composite order.
pub fn field_sizes(spaces: &FsiSpaces) -> [usize; 5] {
    [
        spaces.velocity.n_dofs,
        spaces.pressure.n_dofs,
        spaces.inplane.n_dofs,
        spaces.deflection.n_dofs,
        spaces.deflection.n_dofs,
    ]
}

pub fn assemble_system(
    sizes: [usize; 5],
    fluid: &FluidBlocks,
    iface: &InterfaceBlocks,
    plate: &PlateBlocks,
) -> Result<BlockSystem> {
    let mut offsets = [0usize; 6];
    for i in 0..5 {
        offsets[i + 1] = offsets[i] + sizes[i];
    }
    let [nv, np, nm, nu, nw] = sizes;
    let shapes: [(&str, &CsrMatrix, usize, usize); 12] = [
        ("M_VV", &fluid.mass, nv, nv),
        ("A", &fluid.viscous, nv, nv),
        ("B", &fluid.divergence, np, nv),
        ("R_VV", &iface.r_vv, nv, nv),
        ("R_VU", &iface.r_vu, nv, nu),
        ("R_UU", &iface.r_uu, nu, nu),
        ("P_A", &plate.p_a, nm, nm),
        ("P_B1", &plate.p_b1, nm, nu),
        ("P_B2", &plate.p_b2, nu, nm),
        ("P_C", &plate.p_c, nu, nu),
        ("M_UW", &plate.m_uw, nu, nw),
        ("M_WW", &plate.m_ww, nw, nw),
    ];
    for (name, m, r, c) in shapes {
        if (m.nrows, m.ncols) != (r, c) {
            return Err(Error::InconsistentOffsets(format!(
                "{name} is {}×{}, expected {r}×{c}",
                m.nrows, m.ncols
            )));
        }
    }
    let [ov, op, om, ou, ow, n] = offsets;
    let mut s1 = Triplets::new(n, n);
    s1.add_csr(&fluid.mass, ov, ov, 1.0);
    s1.add_csr(&iface.r_vu, ov, ou, -1.0);
    s1.add_csr(&iface.r_uu, ou, ou, 1.0);
    s1.add_csr(&plate.m_uw, ou, ow, 1.0);
    s1.add_csr_transposed(&plate.m_uw, ow, ou, -1.0);
    let mut s2 = Triplets::new(n, n);
    s2.add_csr(&fluid.viscous, ov, ov, 1.0);
    s2.add_csr(&iface.r_vv, ov, ov, 1.0);
    s2.add_csr_transposed(&fluid.divergence, ov, op, -1.0);
    s2.add_csr(&fluid.divergence, op, ov, -1.0);
    s2.add_csr(&plate.p_a, om, om, 1.0);
    s2.add_csr(&plate.p_b1, om, ou, 1.0);
    s2.add_csr_transposed(&iface.r_vu, ou, ov, -1.0);
    s2.add_csr(&plate.p_b2, ou, om, 1.0);
    s2.add_csr(&plate.p_c, ou, ou, 1.0);
    s2.add_csr(&plate.m_ww, ow, ow, 1.0);
    Ok(BlockSystem { offsets, s1: s1.to_csr(), s2: s2.to_csr() })
}

/// Every block of the coupled problem on one mesh.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub fluid: FluidBlocks,
    pub interface: InterfaceBlocks,
    pub plate: PlateBlocks,
    pub system: BlockSystem,
}

pub fn assemble_all(mesh: &ChannelMesh, spaces: &FsiSpaces, rho_f: f64, mu: f64, iface: &InterfaceData) -> Result<Assembled> {
    let fluid = assemble_fluid_blocks(mesh, spaces, rho_f, mu)?;
    let interface = assemble_interface_blocks(mesh, spaces, iface)?;
    let plate = assemble_plate_blocks(mesh, spaces, iface)?;
    let system = assemble_system(field_sizes(spaces), &fluid, &interface, &plate)?;
    Ok(Assembled { fluid, interface, plate, system })
}

/// `F = ((f, V_k))` on the velocity space.
pub fn assemble_fluid_load(mesh: &ChannelMesh, velocity: &DofMap, f: VectorField, t: f64) -> Vec<f64> {
    let q2 = LagrangeBasis::new(2, 3);
    let h = mesh.cell_size();
    let det = h[0] * h[1] * h[2];
    let pts: Vec<_> = gauss_points_3d(3).into_iter().map(|(xi, w)| (xi, q2.eval(xi, [0, 0, 0]), w * det)).collect();
    let mut out = vec![0.0; velocity.n_dofs];
    for hex in 0..mesh.hexes.len() {
        let o = mesh.hex_origin(hex);
        let dofs = &velocity.cell_dofs[hex];
        for (xi, phi, dw) in &pts {
            let x = [o[0] + xi[0] * h[0], o[1] + xi[1] * h[1], o[2] + xi[2] * h[2]];
            let fx = f(x, t);
            if fx == [0.0; 3] {
                continue;
            }
            for a in 0..27 {
                for c in 0..3 {
                    out[dofs[3 * a + c]] += fx[c] * phi[a] * dw;
                }
            }
        }
    }
    out
}

/// `((h, V_k))` over the boundary or interface facets carrying `tag`; Σ
/// facets are integrated once, on the upper face of the hex below.
pub fn assemble_facet_load(
    mesh: &ChannelMesh,
    velocity: &DofMap,
    tag: crate::mesh::FacetTag,
    h: impl Fn([f64; 3]) -> [f64; 3],
) -> Vec<f64> {
    let q2 = LagrangeBasis::new(2, 3);
    let size = mesh.cell_size();
    let rule = gauss_points_2d(4);
    let mut out = vec![0.0; velocity.n_dofs];
    for f in mesh.facets_with(tag) {
        let o = mesh.hex_origin(f.hex);
        let axis = f.face.axis;
        let (ta, tb) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let area = mesh.facet_area(f.face);
        let dofs = &velocity.cell_dofs[f.hex];
        for (p, w) in &rule {
            let mut xi = [0.0; 3];
            xi[axis] = if f.face.upper { 1.0 } else { 0.0 };
            xi[ta] = p[0];
            xi[tb] = p[1];
            let x = [o[0] + xi[0] * size[0], o[1] + xi[1] * size[1], o[2] + xi[2] * size[2]];
            let hx = h(x);
            let phi = q2.eval(xi, [0, 0, 0]);
            for a in 0..27 {
                if phi[a] == 0.0 {
                    continue;
                }
                for c in 0..3 {
                    out[dofs[3 * a + c]] += hx[c] * phi[a] * w * area;
                }
            }
        }
    }
    out
}

/// `G3 = +((g3, U3_k))_Σ` on the deflection space.
pub fn assemble_plate_load(mesh: &ChannelMesh, deflection: &DofMap, g3: SurfaceField, t: f64) -> Vec<f64> {
    let h = mesh.sigma_cell_size();
    let bfs = BfsElement::new(h);
    let pts: Vec<_> = gauss_points_2d(4).into_iter().map(|(xi, w)| (xi, bfs.eval(xi, [0, 0]), w * h[0] * h[1])).collect();
    let mut out = vec![0.0; deflection.n_dofs];
    for q in 0..mesh.sigma_quads.len() {
        let o = mesh.sigma_origin(q);
        let dofs = &deflection.cell_dofs[q];
        for (xi, b, dw) in &pts {
            let g = g3([o[0] + xi[0] * h[0], o[1] + xi[1] * h[1]], t);
            for k in 0..16 {
                out[dofs[k]] += g * b[k] * dw;
            }
        }
    }
    out
}

/// `L(t) = (F, 0, 0, G3, 0)` in composite ordering.
pub fn assemble_load(
    mesh: &ChannelMesh,
    spaces: &FsiSpaces,
    system: &BlockSystem,
    f: VectorField,
    g3: SurfaceField,
    t: f64,
) -> Vec<f64> {
    let mut l = vec![0.0; system.len()];
    let fl = assemble_fluid_load(mesh, &spaces.velocity, f, t);
    l[system.range(Field::Velocity)].copy_from_slice(&fl);
    let gl = assemble_plate_load(mesh, &spaces.deflection, g3, t);
    l[system.range(Field::Deflection)].copy_from_slice(&gl);
    l
}

/// Nodal interpolation of a vector function into a Lagrange space.
pub fn interpolate_lagrange(space: &DofMap, f: impl Fn([f64; 3]) -> Vec<f64>) -> Vec<f64> {
    let nc = space.kind.components();
    let mut out = vec![0.0; space.n_dofs];
    for (n, x) in space.node_coords.iter().enumerate() {
        let v = f(*x);
        for c in 0..nc {
            out[nc * n + c] = v[c];
        }
    }
    out
}

/// BFS interpolation from nodal data `[w, ∂1 w, ∂2 w, ∂1∂2 w]`.
pub fn interpolate_bfs(space: &DofMap, f: impl Fn([f64; 2]) -> [f64; 4]) -> Vec<f64> {
    let mut out = vec![0.0; space.n_dofs];
    for (n, x) in space.node_coords.iter().enumerate() {
        out[4 * n..4 * n + 4].copy_from_slice(&f([x[0], x[1]]));
    }
    out
}
