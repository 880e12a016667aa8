//! Backward-Euler (Rothe) time stepping of the coupled system.

use crate::assembly::{assemble_load, Field};
use crate::error::{Error, Result};
use crate::solver::linear::{expand, reduce, sparse_solve, Factorization, LinearSolveReport, Method, SolveOptions};
use crate::solver::model::{Forcing, FsiModel};
use crate::sparse::{norm2, CsrMatrix, Triplets};

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub t: f64,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub u3: Vec<f64>,
    pub w3: Vec<f64>,
}

impl SolutionState {
    /// The initial state `v = 0, u3 = ∂t u3 = 0` at `t = 0`.
    pub fn zero(model: &FsiModel) -> Self {
        Self::from_vec(model, &vec![0.0; model.n_dofs()], 0.0)
    }

    pub fn from_vec(model: &FsiModel, y: &[f64], t: f64) -> Self {
        let part = |f: Field| y[model.range(f)].to_vec();
        Self {
            t,
            v: part(Field::Velocity),
            p: part(Field::Pressure),
            u_bar: part(Field::InPlane),
            u3: part(Field::Deflection),
            w3: part(Field::PlateVelocity),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [&self.v, &self.p, &self.u_bar, &self.u3, &self.w3].iter().flat_map(|x| x.iter().copied()).collect()
    }
}

/// Energy monitors of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub t: f64,
    /// `½ ρ_f ‖v‖²`
    pub kinetic_fluid: f64,
    /// `½ a_hom((ū, u3), (ū, u3))`
    pub elastic_plate: f64,
    /// `½ ρ̂s ‖w3‖²`
    pub kinetic_plate: f64,
    /// `∫_Σ (v − w3 e3)ᵀ K̂⁻¹ (v − w3 e3)`
    pub interface_dissipation: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.kinetic_fluid + self.elastic_plate + self.kinetic_plate
    }
}

pub fn energies(model: &FsiModel, s: &SolutionState) -> Energy {
    let b = &model.blocks;
    let mut uu = s.u_bar.clone();
    uu.extend_from_slice(&s.u3);
    let iface = &b.interface;
    Energy {
        t: s.t,
        kinetic_fluid: 0.5 * b.fluid.mass.bilinear(&s.v, &s.v),
        elastic_plate: 0.5 * b.plate.stiffness().bilinear(&uu, &uu),
        kinetic_plate: 0.5 * b.plate.m_ww.bilinear(&s.w3, &s.w3),
        interface_dissipation: iface.r_vv.bilinear(&s.v, &s.v) - 2.0 * iface.r_vu.bilinear(&s.v, &s.w3)
            + iface.r_uu.bilinear(&s.w3, &s.w3),
    }
}

/// Per-step identities of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// `‖w3ⁿ⁺¹ − (u3ⁿ⁺¹ − u3ⁿ)/Δt‖ / ‖w3ⁿ⁺¹‖` (absolute when `w3ⁿ⁺¹ = 0`).
    pub kinematic_defect: f64,
    /// `‖B v‖ / ‖v‖` (absolute when `v = 0`).
    pub divergence_defect: f64,
    pub solve: LinearSolveReport,
}

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub fn step_diagnostics(model: &FsiModel, old: &SolutionState, new: &SolutionState, dt: f64, solve: LinearSolveReport) -> StepDiagnostics {
    let kin: Vec<f64> = new.w3.iter().zip(new.u3.iter().zip(&old.u3)).map(|(w, (a, b))| w - (a - b) / dt).collect();
    let bv = model.blocks.fluid.divergence.mul_vec(&new.v);
    StepDiagnostics {
        kinematic_defect: relative(norm2(&kin), norm2(&new.w3)),
        divergence_defect: relative(norm2(&bv), norm2(&new.v)),
        solve,
    }
}

/// Composed operator `S1/Δt + S2` with constrained DOFs eliminated and,
/// for the direct path, factored once.
///
/// The plate-velocity row reads `M (w3ⁿ⁺¹ − (u3ⁿ⁺¹ − u3ⁿ)/Δt) = 0`, so `w3`
/// is condensed out: the deflection row gains `M/Δt²` and `w3ⁿ⁺¹` is
/// recovered from the deflection increment after the solve.
pub struct TransientStepper<'m> {
    model: &'m FsiModel,
    dt: f64,
    composed: CsrMatrix,
    reduced: CsrMatrix,
    fixed: Vec<bool>,
    free: Vec<usize>,
    factor: Option<Factorization>,
    opts: SolveOptions,
}

impl<'m> TransientStepper<'m> {
    pub fn new(model: &'m FsiModel, dt: f64, opts: &SolveOptions) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveDimension(format!("time step Δt = {dt}")));
        }
        let o = model.blocks.system.offsets;
        let n = o[4];
        let all: Vec<usize> = (0..n).collect();
        let mut t = Triplets::new(n, n);
        t.add_csr(&model.blocks.system.composed(dt).select(&all, &all), 0, 0, 1.0);
        t.add_csr(&model.blocks.plate.m_ww, o[3], o[3], 1.0 / (dt * dt));
        let composed = t.to_csr();
        let fixed = model.fixed[..n].to_vec();
        let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
        let reduced = composed.select(&free, &free);
        let factor = match opts.method {
            Method::DirectLu | Method::DirectCholesky => Some(Factorization::lu(&reduced)?),
            Method::Gmres => None,
        };
        let mut new_index = vec![0usize; n + 1];
        for i in 0..n {
            new_index[i + 1] = new_index[i] + usize::from(!fixed[i]);
        }
        // fluid saddle block / plate block
        let blocks = [o[0]..o[2], o[2]..o[4]]
            .into_iter()
            .map(|r| new_index[r.start]..new_index[r.end])
            .filter(|r| !r.is_empty())
            .collect();
        Ok(Self { model, dt, composed, reduced, fixed, free, factor, opts: SolveOptions { blocks, ..opts.clone() } })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &SolutionState, forcing: &Forcing) -> Result<(SolutionState, StepDiagnostics)> {
        let m = self.model;
        let o = m.blocks.system.offsets;
        let n = o[4];
        let dt = self.dt;
        let t = state.t + dt;
        let y = state.to_vec();
        let load = assemble_load(&m.mesh, &m.spaces, &m.blocks.system, forcing.f, forcing.g3, t);
        let history = m.blocks.system.s1.mul_vec(&y);
        let mut rhs: Vec<f64> = history[..n].iter().zip(&load[..n]).map(|(h, l)| h / dt + l).collect();
        let inertia = m.blocks.plate.m_ww.mul_vec(&state.u3);
        rhs[o[3]..n].iter_mut().zip(&inertia).for_each(|(r, i)| *r += i / (dt * dt));
        let mut values = vec![0.0; n];
        values[m.range(Field::Velocity)].copy_from_slice(&m.velocity_bc(forcing.inflow, t));
        let (_, rrhs) = reduce(&self.composed, &rhs, &self.fixed, &values, &self.free);
        let start = std::time::Instant::now();
        let (xf, solve) = match &self.factor {
            Some(f) => {
                let x = f.solve(&rrhs);
                let r = self.reduced.mul_vec(&x);
                let res: Vec<f64> = r.iter().zip(&rrhs).map(|(a, b)| a - b).collect();
                let residual = relative(norm2(&res), norm2(&rrhs));
                if !residual.is_finite() || residual > 1e-8 {
                    return Err(Error::SingularMatrix(format!("time step left relative residual {residual:e}")));
                }
                (x, LinearSolveReport { method: self.opts.method, iterations: 1, residual, elapsed: start.elapsed() })
            }
            None => sparse_solve(&self.reduced, &rrhs, &self.opts)?,
        };
        let mut ynew = expand(&xf, &self.free, &self.fixed, &values);
        let w3: Vec<f64> = ynew[o[3]..n].iter().zip(&state.u3).map(|(a, b)| (a - b) / dt).collect();
        ynew.extend(w3);
        let new = SolutionState::from_vec(m, &ynew, t);
        let diag = step_diagnostics(m, state, &new, dt, solve);
        Ok((new, diag))
    }
}

/// One backward-Euler step (factors the operator on every call; use
/// [`TransientStepper`] for repeated steps).
pub fn step_transient(model: &FsiModel, state: &SolutionState, dt: f64, forcing: &Forcing, opts: &SolveOptions) -> Result<SolutionState> {
    Ok(TransientStepper::new(model, dt, opts)?.step(state, forcing)?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientRun {
    /// States at `t = 0, Δt, …, N Δt`.
    pub states: Vec<SolutionState>,
    pub energies: Vec<Energy>,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// `steps` backward-Euler steps from the zero initial state.
pub fn run_transient(model: &FsiModel, dt: f64, steps: usize, forcing: &Forcing, opts: &SolveOptions) -> Result<TransientRun> {
    run_transient_from(model, SolutionState::zero(model), dt, steps, forcing, opts)
}

pub fn run_transient_from(
    model: &FsiModel,
    initial: SolutionState,
    dt: f64,
    steps: usize,
    forcing: &Forcing,
    opts: &SolveOptions,
) -> Result<TransientRun> {
    if forcing_has_inflow(model, forcing, dt, steps) {
        log::warn!("nonzero inflow data: the energy estimate of the scheme assumes homogeneous inflow");
    }
    let stepper = TransientStepper::new(model, dt, opts)?;
    let mut states = vec![initial];
    let mut energies_log = vec![energies(model, &states[0])];
    let mut diagnostics = Vec::with_capacity(steps);
    for n in 0..steps {
        let (next, diag) = stepper.step(&states[n], forcing)?;
        log::info!("step {}/{} t = {:.6e} residual {:.2e}", n + 1, steps, next.t, diag.solve.residual);
        energies_log.push(energies(model, &next));
        diagnostics.push(diag);
        states.push(next);
    }
    Ok(TransientRun { states, energies: energies_log, diagnostics })
}

fn forcing_has_inflow(model: &FsiModel, forcing: &Forcing, dt: f64, steps: usize) -> bool {
    [dt, 0.5 * dt * steps as f64, dt * steps as f64]
        .iter()
        .any(|&t| model.velocity_bc(forcing.inflow, t).iter().any(|x| *x != 0.0))
}
