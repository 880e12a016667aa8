//! Parameter sweeps towards the impermeable, fully permeable and rigid
//! plate limits.

use crate::assembly::InterfaceData;
use crate::error::Result;
use crate::mesh::ChannelMesh;
use crate::solver::linear::SolveOptions;
use crate::solver::model::{Forcing, FsiModel};
use crate::solver::norms::{deflection_sup, interface_diagnostics, velocity_l2_difference, InterfaceDiagnostics};
use crate::solver::stationary::{solve_stationary, StationarySolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// `K̂ → 0`: the plate becomes impermeable.
    KToZero,
    /// `K̂ → ∞`: the interface stops resisting the flow.
    KToInfinity,
    /// `Ĉ → ∞`: the plate becomes rigid in bending.
    CToInfinity,
}

/// Monitored quantities of one stationary solve in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSample {
    pub exponent: i32,
    pub interface: InterfaceDiagnostics,
    /// `‖v − v_ref‖_L²` against the `K̂⁻¹ = 0` solution (`KToInfinity` only).
    pub distance_to_reference: Option<f64>,
    pub deflection_max: f64,
}

impl LimitSample {
    /// The quantity that must decrease along the sweep.
    pub fn monitored(&self, mode: LimitMode) -> f64 {
        match mode {
            LimitMode::KToZero => self.interface.flux.abs().max(self.interface.normal_slip),
            LimitMode::KToInfinity => self.distance_to_reference.unwrap_or(f64::NAN),
            LimitMode::CToInfinity => self.deflection_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitDiagnostics {
    pub mode: LimitMode,
    pub samples: Vec<LimitSample>,
}

impl LimitDiagnostics {
    /// Strict decrease of [`LimitSample::monitored`] along the sweep.
    pub fn monotone(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].monitored(self.mode) < w[0].monitored(self.mode))
    }

    /// Ratio of the last to the first monitored value.
    pub fn reduction(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.monitored(self.mode) / a.monitored(self.mode),
            _ => f64::NAN,
        }
    }
}

/// Scale the interface data of `base` by `10^exponent` in the direction of
/// the limit.
pub fn scaled_interface(base: &InterfaceData, mode: LimitMode, exponent: i32) -> InterfaceData {
    let s = 10f64.powi(exponent);
    let mut out = base.clone();
    match mode {
        // K̂ × 10^−k  ⇔  K̂⁻¹ × 10^k
        LimitMode::KToZero => out.khat_inv.iter_mut().for_each(|k| *k *= s),
        LimitMode::KToInfinity => out.khat_inv.iter_mut().for_each(|k| *k /= s),
        LimitMode::CToInfinity => out.stiffness.iter_mut().for_each(|t| *t = t.scaled(1.0, 1.0, s)),
    }
    out
}

/// Solve the stationary problem for `exponents` and collect the monitors.
pub fn limit_sweep(
    mesh: &ChannelMesh,
    rho_f: f64,
    mu: f64,
    base: &InterfaceData,
    mode: LimitMode,
    exponents: &[i32],
    forcing: &Forcing,
    opts: &SolveOptions,
) -> Result<LimitDiagnostics> {
    let reference = match mode {
        LimitMode::KToInfinity => {
            let mut iface = base.clone();
            iface.khat_inv.iter_mut().for_each(|k| k.fill(0.0));
            let model = FsiModel::new(mesh.clone(), rho_f, mu, iface)?;
            Some(solve_stationary(&model, forcing, opts)?.v)
        }
        _ => None,
    };
    let mut samples = Vec::with_capacity(exponents.len());
    for &k in exponents {
        let model = FsiModel::new(mesh.clone(), rho_f, mu, scaled_interface(base, mode, k))?;
        let sol = solve_stationary(&model, forcing, opts)?;
        let sample = limiting_case_check(&model, &sol, k, reference.as_deref());
        log::info!("{mode:?} 10^{k}: monitored {:.4e}", sample.monitored(mode));
        samples.push(sample);
    }
    Ok(LimitDiagnostics { mode, samples })
}

pub fn limiting_case_check(model: &FsiModel, sol: &StationarySolution, exponent: i32, reference: Option<&[f64]>) -> LimitSample {
    LimitSample {
        exponent,
        interface: interface_diagnostics(model, &sol.v, None),
        distance_to_reference: reference.map(|r| velocity_l2_difference(model, &sol.v, r)),
        deflection_max: deflection_sup(&model.mesh, &model.spaces.deflection, &sol.u3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::StiffnessTriple;
    use nalgebra::Matrix3;

    fn base(mesh: &ChannelMesh) -> InterfaceData {
        let t = StiffnessTriple::from_voigt(Matrix3::identity(), Matrix3::zeros(), Matrix3::identity() * 0.1);
        InterfaceData::uniform(mesh, Matrix3::identity(), t, 1.0)
    }

    #[test]
    fn scaling_directions() {
        let mesh = ChannelMesh::new([1.0, 1.0, 1.0], [2, 2, 2]).unwrap();
        let b = base(&mesh);
        assert_eq!(scaled_interface(&b, LimitMode::KToZero, 2).khat_inv[0][(0, 0)], 100.0);
        assert_eq!(scaled_interface(&b, LimitMode::KToInfinity, 2).khat_inv[0][(0, 0)], 0.01);
        let c = scaled_interface(&b, LimitMode::CToInfinity, 3);
        assert!((c.stiffness[0].c_voigt()[(0, 0)] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn stiffer_plate_deflects_less() {
        let mesh = ChannelMesh::new([1.0, 1.0, 1.0], [2, 2, 2]).unwrap();
        let f = |x: [f64; 3], _t: f64| [0.0, 0.0, (std::f64::consts::PI * x[0]).cos()];
        let g = |_x: [f64; 2], _t: f64| 1.0;
        let forcing = Forcing { f: &f, g3: &g, ..Forcing::zero() };
        let d = limit_sweep(&mesh, 1.0, 1.0, &base(&mesh), LimitMode::CToInfinity, &[0, 1, 2], &forcing, &SolveOptions::default())
            .unwrap();
        assert!(d.monotone(), "{d:?}");
    }
}
