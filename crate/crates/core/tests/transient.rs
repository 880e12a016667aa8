use std::f64::consts::PI;

use filterfsi::assembly::{assemble_load, Field, InterfaceData};
use filterfsi::mesh::ChannelMesh;
use filterfsi::solver::linear::solve_constrained;
use filterfsi::solver::{
    energies, solve_stationary_with, Forcing, FsiModel, SolutionState, SolveOptions, StationaryLoads, TransientStepper,
};
use filterfsi::tensors::StiffnessTriple;
use nalgebra::Matrix3;
use proptest::prelude::*;

fn model(counts: [usize; 3]) -> FsiModel {
    let mesh = ChannelMesh::new([1.0, 1.0, 0.5], counts).unwrap();
    let t = StiffnessTriple::from_voigt(Matrix3::identity(), Matrix3::zeros(), Matrix3::identity() * 0.1);
    let iface = InterfaceData::uniform(&mesh, Matrix3::identity(), t, 1.0);
    FsiModel::new(mesh, 1.0, 1.0, iface).unwrap()
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    d / b.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE)
}

#[test]
fn condensed_step_matches_full_system() {
    let m = model([2, 2, 4]);
    let dt = 0.05;
    let f = |x: [f64; 3], _t: f64| [0.0, 0.0, (PI * x[0]).cos()];
    let g = |x: [f64; 2], _t: f64| (PI * x[1]).sin();
    let forcing = Forcing { f: &f, g3: &g, ..Forcing::zero() };
    let stepper = TransientStepper::new(&m, dt, &SolveOptions::default()).unwrap();
    let mut state = SolutionState::zero(&m);
    for _ in 0..3 {
        let (next, _) = stepper.step(&state, &forcing).unwrap();
        let sys = &m.blocks.system;
        let load = assemble_load(&m.mesh, &m.spaces, sys, forcing.f, forcing.g3, next.t);
        let rhs: Vec<f64> = sys.s1.mul_vec(&state.to_vec()).iter().zip(&load).map(|(h, l)| h / dt + l).collect();
        let mut values = vec![0.0; m.n_dofs()];
        values[m.range(Field::Velocity)].copy_from_slice(&m.velocity_bc(forcing.inflow, next.t));
        let (full, _) = solve_constrained(&sys.composed(dt), &rhs, &m.fixed, &values, &SolveOptions::default()).unwrap();
        let full = SolutionState::from_vec(&m, &full, next.t);
        assert!(rel(&next.u3, &full.u3) < 1e-9, "{}", rel(&next.u3, &full.u3));
        assert!(rel(&next.w3, &full.w3) < 1e-8, "{}", rel(&next.w3, &full.w3));
        assert!(rel(&next.v, &full.v) < 1e-9);
        state = next;
    }
}

#[test]
fn free_decay_dissipates_energy() {
    let m = model([2, 2, 2]);
    let f = |x: [f64; 3], t: f64| if t < 0.1 + 1e-12 { [0.0, 0.0, (PI * x[1]).cos()] } else { [0.0; 3] };
    let forcing = Forcing { f: &f, ..Forcing::zero() };
    let stepper = TransientStepper::new(&m, 0.02, &SolveOptions::default()).unwrap();
    let mut state = SolutionState::zero(&m);
    let mut last = f64::INFINITY;
    for n in 1..=30 {
        let (next, d) = stepper.step(&state, &forcing).unwrap();
        assert!(d.kinematic_defect <= 1e-10 && d.divergence_defect <= 1e-9, "{d:?}");
        let e = energies(&m, &next).total();
        if n > 5 {
            assert!(e <= last * (1.0 + 1e-12), "step {n}: {e} > {last}");
        }
        last = e;
        state = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn stationary_solve_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        use rand::{Rng, SeedableRng};
        let m = model([2, 2, 2]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sp = &m.spaces;
        let mut v = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let loads = StationaryLoads {
            fluid: v(sp.velocity.n_dofs),
            velocity_bc: vec![0.0; sp.velocity.n_dofs],
            inplane: v(sp.inplane.n_dofs),
            deflection: v(sp.deflection.n_dofs),
            plate_bc: vec![0.0; sp.inplane.n_dofs + sp.deflection.n_dofs],
        };
        let scale = |x: &[f64]| -> Vec<f64> { x.iter().map(|y| alpha * y).collect() };
        let scaled = StationaryLoads {
            fluid: scale(&loads.fluid),
            velocity_bc: scale(&loads.velocity_bc),
            inplane: scale(&loads.inplane),
            deflection: scale(&loads.deflection),
            plate_bc: scale(&loads.plate_bc),
        };
        let opts = SolveOptions::default();
        let a = solve_stationary_with(&m, &loads, &opts).unwrap();
        let b = solve_stationary_with(&m, &scaled, &opts).unwrap();
        prop_assert!(rel(&b.v, &scale(&a.v)) < 1e-10);
        prop_assert!(rel(&b.u3, &scale(&a.u3)) < 1e-10);
    }
}
