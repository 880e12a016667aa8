//! Evaluation of discrete fields and error norms by Gauss quadrature.

use nalgebra::Vector3;

use crate::fe::{gauss_rule, BfsElement, DofMap, LagrangeBasis};
use crate::mesh::ChannelMesh;
use crate::solver::model::FsiModel;

/// Value and gradient `g[c][d] = ∂_d v_c` of a Q2 velocity field in `hex`.
pub fn velocity_at(mesh: &ChannelMesh, space: &DofMap, v: &[f64], hex: usize, xi: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let h = mesh.cell_size();
    let (phi, grad) = LagrangeBasis::new(2, 3).values_and_gradients(xi);
    let dofs = &space.cell_dofs[hex];
    let mut val = [0.0; 3];
    let mut g = [[0.0; 3]; 3];
    for a in 0..27 {
        for c in 0..3 {
            let coef = v[dofs[3 * a + c]];
            val[c] += coef * phi[a];
            for d in 0..3 {
                g[c][d] += coef * grad[a][d] / h[d];
            }
        }
    }
    (val, g)
}

/// Value of a Q1 (broken) pressure field in `hex`.
pub fn pressure_at(space: &DofMap, p: &[f64], hex: usize, xi: [f64; 3]) -> f64 {
    let psi = LagrangeBasis::new(1, 3).eval(xi, [0, 0, 0]);
    space.cell_dofs[hex].iter().zip(&psi).map(|(d, s)| p[*d] * s).sum()
}

/// Value and gradient of the Q1 in-plane displacement on Σ quad `q`.
pub fn inplane_at(mesh: &ChannelMesh, space: &DofMap, u: &[f64], q: usize, xi: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let h = mesh.sigma_cell_size();
    let (phi, grad) = LagrangeBasis::new(1, 2).values_and_gradients([xi[0], xi[1], 0.0]);
    let dofs = &space.cell_dofs[q];
    let mut val = [0.0; 2];
    let mut g = [[0.0; 2]; 2];
    for a in 0..4 {
        for c in 0..2 {
            let coef = u[dofs[2 * a + c]];
            val[c] += coef * phi[a];
            for d in 0..2 {
                g[c][d] += coef * grad[a][d] / h[d];
            }
        }
    }
    (val, g)
}

/// `[w, ∂1 w, ∂2 w, ∂11 w, ∂22 w, ∂12 w]` of a BFS field on Σ quad `q`.
pub fn deflection_at(mesh: &ChannelMesh, space: &DofMap, u: &[f64], q: usize, xi: [f64; 2]) -> [f64; 6] {
    let el = BfsElement::new(mesh.sigma_cell_size());
    let dofs = &space.cell_dofs[q];
    let mut out = [0.0; 6];
    for (slot, d) in [[0, 0], [1, 0], [0, 1], [2, 0], [0, 2], [1, 1]].iter().enumerate() {
        let phi = el.eval(xi, *d);
        out[slot] = dofs.iter().zip(&phi).map(|(k, p)| u[*k] * p).sum();
    }
    out
}

/// `(‖v − v*‖_L², |v − v*|_H¹)` over the channel.
pub fn velocity_error(
    mesh: &ChannelMesh,
    space: &DofMap,
    v: &[f64],
    exact: impl Fn([f64; 3]) -> ([f64; 3], [[f64; 3]; 3]),
) -> (f64, f64) {
    let h = mesh.cell_size();
    let det = h[0] * h[1] * h[2];
    let rule = gauss_rule(4, 3);
    let (mut l2, mut h1) = (0.0, 0.0);
    for hex in 0..mesh.hexes.len() {
        let o = mesh.hex_origin(hex);
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let x = [o[0] + xi[0] * h[0], o[1] + xi[1] * h[1], o[2] + xi[2] * h[2]];
            let (val, g) = velocity_at(mesh, space, v, hex, *xi);
            let (ev, eg) = exact(x);
            for c in 0..3 {
                l2 += (val[c] - ev[c]).powi(2) * w * det;
                for d in 0..3 {
                    h1 += (g[c][d] - eg[c][d]).powi(2) * w * det;
                }
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}

/// `‖p − p*‖_L²` with the exact pressure evaluated per half-channel.
pub fn pressure_error(mesh: &ChannelMesh, space: &DofMap, p: &[f64], exact: impl Fn([f64; 3]) -> f64) -> f64 {
    let h = mesh.cell_size();
    let det = h[0] * h[1] * h[2];
    let rule = gauss_rule(3, 3);
    let mut l2 = 0.0;
    for hex in 0..mesh.hexes.len() {
        let o = mesh.hex_origin(hex);
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let x = [o[0] + xi[0] * h[0], o[1] + xi[1] * h[1], o[2] + xi[2] * h[2]];
            l2 += (pressure_at(space, p, hex, *xi) - exact(x)).powi(2) * w * det;
        }
    }
    l2.sqrt()
}

/// `(‖ū − ū*‖_L², |ū − ū*|_H¹)` over Σ.
pub fn inplane_error(
    mesh: &ChannelMesh,
    space: &DofMap,
    u: &[f64],
    exact: impl Fn([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]),
) -> (f64, f64) {
    let h = mesh.sigma_cell_size();
    let rule = gauss_rule(4, 2);
    let (mut l2, mut h1) = (0.0, 0.0);
    for q in 0..mesh.sigma_quads.len() {
        let o = mesh.sigma_origin(q);
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let xi2 = [xi[0], xi[1]];
            let dw = w * h[0] * h[1];
            let (val, g) = inplane_at(mesh, space, u, q, xi2);
            let (ev, eg) = exact([o[0] + xi[0] * h[0], o[1] + xi[1] * h[1]]);
            for c in 0..2 {
                l2 += (val[c] - ev[c]).powi(2) * dw;
                for d in 0..2 {
                    h1 += (g[c][d] - eg[c][d]).powi(2) * dw;
                }
            }
        }
    }
    (l2.sqrt(), h1.sqrt())
}

/// `(‖e‖_L², |e|_H¹, |e|_H²)` of `e = u3 − u3*`; `exact` returns
/// `[w, ∂1, ∂2, ∂11, ∂22, ∂12]`.
pub fn deflection_error(mesh: &ChannelMesh, space: &DofMap, u: &[f64], exact: impl Fn([f64; 2]) -> [f64; 6]) -> (f64, f64, f64) {
    let h = mesh.sigma_cell_size();
    let rule = gauss_rule(5, 2);
    let (mut l2, mut h1, mut h2) = (0.0, 0.0, 0.0);
    for q in 0..mesh.sigma_quads.len() {
        let o = mesh.sigma_origin(q);
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let dw = w * h[0] * h[1];
            let a = deflection_at(mesh, space, u, q, [xi[0], xi[1]]);
            let e = exact([o[0] + xi[0] * h[0], o[1] + xi[1] * h[1]]);
            let d: Vec<f64> = a.iter().zip(&e).map(|(x, y)| x - y).collect();
            l2 += d[0] * d[0] * dw;
            h1 += (d[1] * d[1] + d[2] * d[2]) * dw;
            h2 += (d[3] * d[3] + d[4] * d[4] + 2.0 * d[5] * d[5]) * dw;
        }
    }
    (l2.sqrt(), h1.sqrt(), h2.sqrt())
}

/// Largest `|u3|` sampled on a 5×5 grid per Σ quad.
pub fn deflection_sup(mesh: &ChannelMesh, space: &DofMap, u: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for q in 0..mesh.sigma_quads.len() {
        for i in 0..=4 {
            for j in 0..=4 {
                let xi = [i as f64 / 4.0, j as f64 / 4.0];
                m = m.max(deflection_at(mesh, space, u, q, xi)[0].abs());
            }
        }
    }
    m
}

/// Interface quantities used by the limiting-case checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceDiagnostics {
    /// `‖v·e3 − w3‖_{L²(Σ)}` (`w3 = 0` for stationary states).
    pub normal_slip: f64,
    /// `‖v − (v·e3) e3‖_{L²(Σ)}`
    pub tangential: f64,
    /// `‖K̂⁻¹(v − w3 e3)‖_{L²(Σ)}`, the size of the traction jump.
    pub stress_jump: f64,
    /// `∫_Σ v·e3`, the volume flux through the plate.
    pub flux: f64,
}

pub fn interface_diagnostics(model: &FsiModel, v: &[f64], w3: Option<&[f64]>) -> InterfaceDiagnostics {
    let mesh = &model.mesh;
    let h = mesh.sigma_cell_size();
    let rule = gauss_rule(4, 2);
    let mut out = InterfaceDiagnostics { normal_slip: 0.0, tangential: 0.0, stress_jump: 0.0, flux: 0.0 };
    for (q, sq) in mesh.sigma_quads.iter().enumerate() {
        let k = model.interface.khat_inv[q];
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let dw = w * h[0] * h[1];
            let (val, _) = velocity_at(mesh, &model.spaces.velocity, v, sq.below, [xi[0], xi[1], 1.0]);
            let w3v = w3.map_or(0.0, |w3| deflection_at(mesh, &model.spaces.deflection, w3, q, [xi[0], xi[1]])[0]);
            let rel = Vector3::new(val[0], val[1], val[2] - w3v);
            out.normal_slip += rel[2] * rel[2] * dw;
            out.tangential += (val[0] * val[0] + val[1] * val[1]) * dw;
            out.stress_jump += (k * rel).norm_squared() * dw;
            out.flux += val[2] * dw;
        }
    }
    out.normal_slip = out.normal_slip.sqrt();
    out.tangential = out.tangential.sqrt();
    out.stress_jump = out.stress_jump.sqrt();
    out
}

/// `‖v1 − v2‖_{L²(Ω)}`.
pub fn velocity_l2_difference(model: &FsiModel, v1: &[f64], v2: &[f64]) -> f64 {
    let d: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| a - b).collect();
    (model.blocks.fluid.mass.bilinear(&d, &d) / model.rho_f).max(0.0).sqrt()
}
