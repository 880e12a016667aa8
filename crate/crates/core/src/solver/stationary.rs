//! Sequential stationary solve: Stokes with the Darcy interface first, then
//! the plate loaded by the resulting interface traction.

use crate::assembly::{assemble_fluid_load, assemble_plate_load};
use crate::error::Result;
use crate::solver::linear::{solve_constrained, LinearSolveReport, SolveOptions};
use crate::solver::model::{Forcing, FsiModel};
use crate::sparse::{CsrMatrix, Triplets};

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub u3: Vec<f64>,
    pub fluid_report: LinearSolveReport,
    pub plate_report: LinearSolveReport,
}

/// Right-hand sides of the two stationary systems.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryLoads {
    /// `F` on the velocity space.
    pub fluid: Vec<f64>,
    /// Values of the constrained velocity DOFs.
    pub velocity_bc: Vec<f64>,
    /// In-plane load (zero in the physical model).
    pub inplane: Vec<f64>,
    /// `G3` on the deflection space.
    pub deflection: Vec<f64>,
    /// Values of the clamped `(ū, u3)` DOFs (zero in the physical model).
    pub plate_bc: Vec<f64>,
}

impl StationaryLoads {
    pub fn from_forcing(model: &FsiModel, forcing: &Forcing) -> Self {
        Self {
            fluid: assemble_fluid_load(&model.mesh, &model.spaces.velocity, forcing.f, 0.0),
            velocity_bc: model.velocity_bc(forcing.inflow, 0.0),
            inplane: vec![0.0; model.spaces.inplane.n_dofs],
            deflection: assemble_plate_load(&model.mesh, &model.spaces.deflection, forcing.g3, 0.0),
            plate_bc: vec![0.0; model.spaces.inplane.n_dofs + model.spaces.deflection.n_dofs],
        }
    }
}

/// `[[A + R_VV, −Bᵀ], [−B, 0]]`.
pub fn stationary_fluid_matrix(model: &FsiModel) -> CsrMatrix {
    let b = &model.blocks;
    let (nv, np) = (b.fluid.viscous.nrows, b.fluid.divergence.nrows);
    let mut t = Triplets::new(nv + np, nv + np);
    t.add_csr(&b.fluid.viscous, 0, 0, 1.0);
    t.add_csr(&b.interface.r_vv, 0, 0, 1.0);
    t.add_csr_transposed(&b.fluid.divergence, 0, nv, -1.0);
    t.add_csr(&b.fluid.divergence, nv, 0, -1.0);
    t.to_csr()
}

pub fn solve_stationary(model: &FsiModel, forcing: &Forcing, opts: &SolveOptions) -> Result<StationarySolution> {
    solve_stationary_with(model, &StationaryLoads::from_forcing(model, forcing), opts)
}

pub fn solve_stationary_with(model: &FsiModel, loads: &StationaryLoads, opts: &SolveOptions) -> Result<StationarySolution> {
    let sp = &model.spaces;
    let (nv, np) = (sp.velocity.n_dofs, sp.pressure.n_dofs);
    let fluid = stationary_fluid_matrix(model);
    let mut rhs = loads.fluid.clone();
    rhs.resize(nv + np, 0.0);
    let mut fixed = sp.velocity.constrained.clone();
    fixed.resize(nv + np, false);
    let mut values = loads.velocity_bc.clone();
    values.resize(nv + np, 0.0);
    let fopts = SolveOptions { blocks: vec![0..nv, nv..nv + np], ..opts.clone() };
    let (vp, fluid_report) = solve_constrained(&fluid, &rhs, &fixed, &values, &fopts)?;
    let v = vp[..nv].to_vec();
    let p = vp[nv..].to_vec();

    let plate = model.blocks.plate.stiffness();
    let nm = sp.inplane.n_dofs;
    let coupling = model.blocks.interface.r_vu.transpose().mul_vec(&v);
    let mut prhs = loads.inplane.clone();
    prhs.extend(loads.deflection.iter().zip(&coupling).map(|(g, c)| g + c));
    let mut pfixed = sp.inplane.constrained.clone();
    pfixed.extend_from_slice(&sp.deflection.constrained);
    let popts = SolveOptions { blocks: vec![0..nm, nm..pfixed.len()], ..opts.clone() };
    let (uu, plate_report) = solve_constrained(&plate, &prhs, &pfixed, &loads.plate_bc, &popts)?;
    Ok(StationarySolution { v, p, u_bar: uu[..nm].to_vec(), u3: uu[nm..].to_vec(), fluid_report, plate_report })
}
