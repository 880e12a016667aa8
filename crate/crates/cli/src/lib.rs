//! Subcommands of the `filterfsi` binary.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use filterfsi::homogenize::{homogenize_cell, predict_vanishing_b, scale_to_thickness, symmetry_report};
use filterfsi::io::{self, ScenarioConfig};
use filterfsi::mesh::{build_cell_mesh, build_fluid_cell_mesh, parse_voxel_mask, VoxelMask};
use filterfsi::permeability::{cell_permeability, permeability_darcy_fit, PermeabilityTensor};
use filterfsi::solver::{
    convergence_study, default_levels, energies, interface_diagnostics, solve_stationary, ConvergenceCase, SolutionState, TransientStepper,
};
use filterfsi::Error;
use nalgebra::Matrix3;

/// Environment variable overriding the output directory of every scenario.
pub const OUTPUT_DIR_ENV: &str = "FILTERFSI_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "filterfsi", version, about = "Homogenized permeable-plate fluid-structure interaction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PermeabilityMethod {
    Cells,
    Fit,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Homogenized plate tensors A, B, C of a voxel cell.
    Homogenize {
        #[arg(long)]
        cell: PathBuf,
        #[arg(long)]
        material: PathBuf,
        /// Tensor file; an existing KHAT section is kept.
        #[arg(long)]
        out: PathBuf,
    },
    /// Permeability of the fluid phase of a voxel cell, written as KHAT = K/(μ δ).
    Permeability {
        #[arg(long)]
        cell: PathBuf,
        #[arg(long, value_enum, default_value = "cells")]
        method: PermeabilityMethod,
        #[arg(long)]
        out: PathBuf,
        /// Fluid viscosity μ.
        #[arg(long)]
        mu: f64,
        /// Plate thickness δ.
        #[arg(long)]
        delta: f64,
        /// Physical cell size `l1,l2,l3`.
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
        extent: Vec<f64>,
        /// Pressure difference (outlet minus inlet) of the fit.
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        drop: f64,
    },
    /// Stationary coupled solve; writes one volume and one Σ file.
    SolveStationary {
        #[arg(long)]
        config: PathBuf,
        /// Time at which the samplers are evaluated.
        #[arg(long, default_value_t = 0.0)]
        time: f64,
    },
    /// Backward-Euler run over the `[time]` section of the scenario.
    SolveTransient {
        #[arg(long)]
        config: PathBuf,
    },
    /// Errors and observed rates on nested meshes for a manufactured case.
    ConvergenceStudy {
        /// stokes, plate, plate-coupled or plate-bicubic.
        #[arg(long)]
        case: String,
        /// Comma-separated refinement levels (defaults depend on the case).
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a scenario without solving.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Exit codes: 0 success, 2 usage, 3 invalid input, 4 I/O, 5 numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Validation(_) | Error::ConstraintViolation(_) => 3,
        Error::Io(_) => 4,
        Error::OddLayerCount(_)
        | Error::NonPositiveDimension(_)
        | Error::DisconnectedSolid { .. }
        | Error::EmptyPhase(_)
        | Error::NoFluidPhase
        | Error::NonCoerciveTensor { .. }
        | Error::SingularPermeability { .. } => 3,
        _ => 5,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Validation(_) => "validation",
        Error::Io(_) => "io",
        Error::SingularFit(_) => "singular_fit",
        Error::SingularMatrix(_) | Error::SolverFailure(_) | Error::MaxIterations { .. } => "solver",
        _ => "invalid_input",
    }
}

/// One-line JSON description of an error, for scripts.
pub fn error_json(e: &Error) -> String {
    let messages: Vec<String> = match e {
        Error::Validation(v) => v.clone(),
        other => vec![other.to_string()],
    };
    let mut obj = serde_json::json!({ "error": kind(e), "messages": messages });
    if let Error::Parse { line, .. } = e {
        obj["line"] = serde_json::json!(line);
    }
    obj.to_string()
}

fn read_mask(path: &Path) -> filterfsi::Result<VoxelMask> {
    parse_voxel_mask(&std::fs::read_to_string(path)?)
}

fn output_dir(cfg: &ScenarioConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| cfg.output.dir.clone())
}

fn fmt_matrix(m: &Matrix3<f64>) -> String {
    (0..3).map(|r| format!("  {:>13.6e} {:>13.6e} {:>13.6e}", m[(r, 0)], m[(r, 1)], m[(r, 2)])).collect::<Vec<_>>().join("\n")
}

fn homogenize(cell: &Path, material: &Path, out: &Path) -> filterfsi::Result<()> {
    let mask = read_mask(cell)?;
    let spec = io::read_material(material)?;
    let mesh = build_cell_mesh(mask.resolution, mask.labels)?;
    let sym = symmetry_report(&mesh);
    let h = homogenize_cell(&mesh, &spec.material)?;
    let scaled = scale_to_thickness(&h.unit, spec.thickness);
    let mut file = if out.exists() { io::read_tensor_file(out)? } else { io::TensorFile::default() };
    file.global.set_triple(&scaled);
    if let Some(r) = spec.areal_density(h.solid_volume) {
        file.global.rho_s = Some(r);
    }
    io::save_tensor_file(out, &file)?;
    let (a, b) = (scaled.a_voigt(), scaled.b_voigt());
    println!("cell {:?}, solid fraction {:.4}, {} reduced dofs", mesh.resolution, h.solid_volume, h.reduced_dofs);
    println!("symmetries T1..T4 {:?}, B predicted to vanish: {}", [sym.t1, sym.t2, sym.t3, sym.t4], predict_vanishing_b(&mesh));
    println!("|B|/|A| = {:.3e}", b.norm() / a.norm());
    println!("AHOM\n{}\nBHOM\n{}\nCHOM\n{}", fmt_matrix(&a), fmt_matrix(&b), fmt_matrix(&scaled.c_voigt()));
    println!("wrote {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn permeability(cell: &Path, method: PermeabilityMethod, out: &Path, mu: f64, delta: f64, extent: &[f64], drop: f64) -> filterfsi::Result<()> {
    if !(mu > 0.0 && delta > 0.0) {
        return Err(Error::NonPositiveDimension(format!("μ = {mu}, δ = {delta}")));
    }
    let mask = read_mask(cell)?;
    let mesh = build_fluid_cell_mesh(mask.resolution, mask.labels, [extent[0], extent[1], extent[2]])?;
    let k: PermeabilityTensor = match method {
        PermeabilityMethod::Cells => cell_permeability(&mesh)?,
        PermeabilityMethod::Fit => permeability_darcy_fit(&mesh, mu, [drop; 3])?,
    };
    let khat = k.khat(mu, delta);
    io::merge_khat(out, &khat)?;
    println!("K ({}), blocked axes {:?}\n{}", k.provenance, k.blocked, fmt_matrix(&k.k));
    println!("KHAT = K/(mu delta)\n{}", fmt_matrix(&khat));
    println!("wrote {}", out.display());
    Ok(())
}

fn solve_stationary_cmd(config: &Path, time: f64) -> filterfsi::Result<()> {
    let cfg = io::parse_config(config)?;
    let model = cfg.model()?;
    let sol = cfg.with_forcing(|forcing| {
        let shifted_f = |x: [f64; 3], _t: f64| (forcing.f)(x, time);
        let shifted_g = |x: [f64; 2], _t: f64| (forcing.g3)(x, time);
        let shifted_i = |x: [f64; 2], _t: f64| (forcing.inflow)(x, time);
        let at = filterfsi::solver::Forcing { f: &shifted_f, g3: &shifted_g, inflow: &shifted_i };
        solve_stationary(&model, &at, &cfg.solver)
    })?;
    let state = SolutionState { t: time, v: sol.v, p: sol.p, u_bar: sol.u_bar, u3: sol.u3, w3: vec![0.0; model.spaces.deflection.n_dofs] };
    let dir = output_dir(&cfg);
    io::write_fields(&model, &state, &dir, "stationary", 0)?;
    let d = interface_diagnostics(&model, &state.v, None);
    println!("fluid solve: residual {:.2e}; plate solve: residual {:.2e}", sol.fluid_report.residual, sol.plate_report.residual);
    println!("interface: normal slip {:.4e}, tangential {:.4e}, flux {:.4e}", d.normal_slip, d.tangential, d.flux);
    println!("max |v| {:.6e}, max |u3 dof| {:.6e}", state.v.iter().fold(0.0f64, |m, x| m.max(x.abs())), state.u3.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    println!("wrote fields to {}", dir.display());
    Ok(())
}

fn solve_transient_cmd(config: &Path) -> filterfsi::Result<()> {
    let cfg = io::parse_config(config)?;
    let time = cfg.time.clone().ok_or_else(|| Error::Validation(vec!["[time] section required for solve-transient".into()]))?;
    let model = cfg.model()?;
    let dir = output_dir(&cfg);
    let stepper = TransientStepper::new(&model, time.dt, &cfg.solver)?;
    let mut state = SolutionState::zero(&model);
    let mut log = vec![energies(&model, &state)];
    let every = cfg.output.vtk_every;
    if every > 0 {
        io::write_fields(&model, &state, &dir, "transient", 0)?;
    }
    let (mut worst_kin, mut worst_div) = (0.0f64, 0.0f64);
    cfg.with_forcing(|forcing| -> filterfsi::Result<()> {
        for n in 1..=time.steps {
            let (next, diag) = stepper.step(&state, forcing)?;
            state = next;
            worst_kin = worst_kin.max(diag.kinematic_defect);
            worst_div = worst_div.max(diag.divergence_defect);
            let e = energies(&model, &state);
            log::info!("step {n}/{} t = {:.4e} E = {:.6e}", time.steps, state.t, e.total());
            log.push(e);
            if every > 0 && n % every == 0 {
                io::write_fields(&model, &state, &dir, "transient", n)?;
            }
        }
        Ok(())
    })?;
    std::fs::create_dir_all(&dir)?;
    if let Some(name) = &cfg.output.energy {
        std::fs::write(dir.join(name), io::write_energy_csv(&log))?;
    }
    let last = log.last().unwrap();
    println!("{} steps of dt = {:.4e}, final t = {:.4e}", time.steps, time.dt, state.t);
    println!("final energy {:.6e}; max kinematic defect {:.2e}; max divergence defect {:.2e}", last.total(), worst_kin, worst_div);
    println!("wrote output to {}", dir.display());
    Ok(())
}

fn convergence_cmd(case: &str, levels: Option<Vec<usize>>, out: Option<PathBuf>) -> filterfsi::Result<()> {
    let case: ConvergenceCase = case.parse().map_err(|e: String| Error::Validation(vec![e]))?;
    let levels = levels.unwrap_or_else(|| default_levels(case));
    if levels.len() < 2 {
        return Err(Error::Validation(vec!["at least two levels are needed for a rate".into()]));
    }
    let table = convergence_study(case, &levels, &Default::default())?;
    let text = table.render();
    print!("{text}");
    if let Some(p) = out {
        std::fs::write(&p, &text)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn validate_cmd(config: &Path) -> filterfsi::Result<()> {
    let cfg = io::parse_config(config)?;
    let mesh = cfg.mesh()?;
    cfg.interface_data(&mesh)?;
    println!("ok: {} ({} hexes, {} Σ quads)", config.display(), mesh.hexes.len(), mesh.sigma_quads.len());
    println!("fingerprint {:016x}", cfg.fingerprint());
    Ok(())
}

pub fn run(cli: Cli) -> filterfsi::Result<()> {
    match cli.command {
        Command::Homogenize { cell, material, out } => homogenize(&cell, &material, &out),
        Command::Permeability { cell, method, out, mu, delta, extent, drop } => permeability(&cell, method, &out, mu, delta, &extent, drop),
        Command::SolveStationary { config, time } => solve_stationary_cmd(&config, time),
        Command::SolveTransient { config } => solve_transient_cmd(&config),
        Command::ConvergenceStudy { case, levels, out } => convergence_cmd(&case, levels, out),
        Command::Validate { config } => validate_cmd(&config),
    }
}

/// Parse `argv`, run the subcommand and return the process exit code.
/// Failures are reported on stderr as one JSON line.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
