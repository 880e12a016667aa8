use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use filterfsi::assembly::assemble_all;
use filterfsi::fe::FsiSpaces;
use filterfsi::homogenize::{homogenize_cell, CellMaterial};
use filterfsi::permeability::cell_permeability;
use filterfsi::solver::{solve_stationary, Forcing, SolveOptions, TransientStepper};
use filterfsi_bench::{channel_model, inclusion_cell, solid_cell};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_all");
    for n in [2, 4] {
        let model = channel_model(n);
        let spaces = FsiSpaces::new(&model.mesh).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| assemble_all(&model.mesh, &spaces, 1.0, 1.0, &model.interface).unwrap())
        });
    }
    g.finish();
}

fn stationary(c: &mut Criterion) {
    let model = channel_model(4);
    let f = |_x: [f64; 3], _t: f64| [0.0, 0.0, 1.0];
    let forcing = Forcing { f: &f, ..Forcing::zero() };
    let opts = SolveOptions::default();
    c.bench_function("solve_stationary/4", |b| b.iter(|| solve_stationary(&model, &forcing, &opts).unwrap()));
}

fn transient_step(c: &mut Criterion) {
    let model = channel_model(4);
    let stepper = TransientStepper::new(&model, 0.01, &SolveOptions::default()).unwrap();
    let f = |_x: [f64; 3], _t: f64| [0.0, 0.0, 1.0];
    let forcing = Forcing { f: &f, ..Forcing::zero() };
    let state = filterfsi::solver::SolutionState::zero(&model);
    c.bench_function("transient_step/4", |b| b.iter(|| stepper.step(&state, &forcing).unwrap()));
}

fn cells(c: &mut Criterion) {
    let mut g = c.benchmark_group("cell_problems");
    g.sample_size(10);
    let mat = CellMaterial::isotropic(1.0, 0.3);
    for m in [4, 8] {
        let cell = solid_cell(m);
        g.bench_with_input(BenchmarkId::new("homogenize", m), &m, |b, _| b.iter(|| homogenize_cell(&cell, &mat).unwrap()));
    }
    let cell = inclusion_cell(4, 2);
    g.bench_function("permeability/4", |b| b.iter(|| cell_permeability(&cell).unwrap()));
    g.finish();
}

criterion_group!(benches, assembly, stationary, transient_step, cells);
criterion_main!(benches);
