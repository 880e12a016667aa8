//! Legacy VTK output of solution states and the energy log.
//!
//! The volume file is an ASCII `STRUCTURED_GRID` on the lattice of `Q2`
//! nodes, `(2 n1 + 1) × (2 n2 + 1) × (2 n3 + 1)` points, with point data
//! `v` (vectors) and `p` (scalars, taken from the hex below on Σ). The Σ
//! file is a `STRUCTURED_GRID` of `(n1 + 1) × (n2 + 1) × 1` points, hence
//! `n1 n2` cells, with point data `u3`, `w3` and `ubar`.
//!
//! Both files end with a `FIELD dofs` block holding the raw coefficient
//! vectors, which is what [`read_fields`] restores; values are written in
//! the shortest form that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::norms::pressure_at;
use crate::solver::{Energy, FsiModel, SolutionState};

pub const VOLUME_HEADER: &str = "# vtk DataFile Version 3.0";

fn lattice_index(x: f64, origin: f64, step: f64) -> usize {
    ((x - origin) / step).round() as usize
}

fn write_dof_block(out: &mut String, arrays: &[(&str, &[f64])]) {
    let _ = writeln!(out, "FIELD dofs {}", arrays.len());
    for (name, a) in arrays {
        let _ = writeln!(out, "{name} 1 {} double", a.len());
        for chunk in a.chunks(6) {
            let line: Vec<String> = chunk.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
}

fn write_points(out: &mut String, dims: [usize; 3], point: impl Fn(usize, usize, usize) -> [f64; 3]) {
    let _ = writeln!(out, "DATASET STRUCTURED_GRID\nDIMENSIONS {} {} {}", dims[0], dims[1], dims[2]);
    let _ = writeln!(out, "POINTS {} double", dims[0] * dims[1] * dims[2]);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let p = point(i, j, k);
                let _ = writeln!(out, "{:e} {:e} {:e}", p[0], p[1], p[2]);
            }
        }
    }
}

/// Volume file of `state`.
pub fn write_volume_vtk(model: &FsiModel, state: &SolutionState) -> String {
    let mesh = &model.mesh;
    let [n1, n2, n3] = mesh.counts;
    let h = mesh.cell_size();
    let origin = [0.0, 0.0, -mesh.dims[2]];
    let dims = [2 * n1 + 1, 2 * n2 + 1, 2 * n3 + 1];
    let step = [0.5 * h[0], 0.5 * h[1], 0.5 * h[2]];
    let vel = &model.spaces.velocity;
    let mut lattice_node = vec![usize::MAX; dims[0] * dims[1] * dims[2]];
    for (n, x) in vel.node_coords.iter().enumerate() {
        let l: [usize; 3] = std::array::from_fn(|a| lattice_index(x[a], origin[a], step[a]));
        lattice_node[l[0] + dims[0] * (l[1] + dims[1] * l[2])] = n;
    }
    let mut out = format!("{VOLUME_HEADER}\nfluid t={:e}\nASCII\n", state.t);
    write_points(&mut out, dims, |i, j, k| {
        [origin[0] + i as f64 * step[0], origin[1] + j as f64 * step[1], origin[2] + k as f64 * step[2]]
    });
    let _ = writeln!(out, "POINT_DATA {}\nVECTORS v double", lattice_node.len());
    for n in &lattice_node {
        let d = |c| state.v[vel.dof(*n, c)];
        let _ = writeln!(out, "{:e} {:e} {:e}", d(0), d(1), d(2));
    }
    let _ = writeln!(out, "SCALARS p double 1\nLOOKUP_TABLE default");
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let cell = |l: usize, n: usize| (l.saturating_sub(1) / 2).min(n - 1);
                let (ci, cj, ck) = (cell(i, n1), cell(j, n2), cell(k, n3));
                let local = |l: usize, c: usize| (l as f64 - 2.0 * c as f64) / 2.0;
                let xi = [local(i, ci), local(j, cj), local(k, ck)];
                let p = pressure_at(&model.spaces.pressure, &state.p, mesh.hex_index(ci, cj, ck), xi);
                let _ = writeln!(out, "{p:e}");
            }
        }
    }
    write_dof_block(&mut out, &[("v", &state.v), ("p", &state.p)]);
    out
}

/// Σ file of `state`.
pub fn write_sigma_vtk(model: &FsiModel, state: &SolutionState) -> String {
    let mesh = &model.mesh;
    let [n1, n2, _] = mesh.counts;
    let h = mesh.sigma_cell_size();
    let dims = [n1 + 1, n2 + 1, 1];
    let index = |x: &[f64; 3]| lattice_index(x[0], 0.0, h[0]) + dims[0] * lattice_index(x[1], 0.0, h[1]);
    let (defl, inpl) = (&model.spaces.deflection, &model.spaces.inplane);
    let mut dnode = vec![0; dims[0] * dims[1]];
    let mut inode = vec![0; dims[0] * dims[1]];
    for (n, x) in defl.node_coords.iter().enumerate() {
        dnode[index(x)] = n;
    }
    for (n, x) in inpl.node_coords.iter().enumerate() {
        inode[index(x)] = n;
    }
    let mut out = format!("{VOLUME_HEADER}\nsigma t={:e}\nASCII\n", state.t);
    write_points(&mut out, dims, |i, j, _| [i as f64 * h[0], j as f64 * h[1], 0.0]);
    let _ = writeln!(out, "CELL_DATA {}", n1 * n2);
    let _ = writeln!(out, "POINT_DATA {}", dnode.len());
    for (name, field) in [("u3", &state.u3), ("w3", &state.w3)] {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for n in &dnode {
            let _ = writeln!(out, "{:e}", field[defl.dof(*n, 0)]);
        }
    }
    let _ = writeln!(out, "VECTORS ubar double");
    for n in &inode {
        let _ = writeln!(out, "{:e} {:e} 0e0", state.u_bar[inpl.dof(*n, 0)], state.u_bar[inpl.dof(*n, 1)]);
    }
    write_dof_block(&mut out, &[("u_bar", &state.u_bar), ("u3", &state.u3), ("w3", &state.w3)]);
    out
}

fn parse_time(text: &str) -> Result<f64> {
    let title = text.lines().nth(1).ok_or(Error::Parse { line: 2, msg: "missing title line".into() })?;
    title
        .split_once("t=")
        .and_then(|(_, t)| t.trim().parse().ok())
        .ok_or(Error::Parse { line: 2, msg: format!("no time stamp in `{title}`") })
}

/// Arrays of the `FIELD dofs` block, in file order.
pub fn read_dof_block(text: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut lines = text.lines().enumerate().skip_while(|(_, l)| !l.starts_with("FIELD dofs"));
    let (n0, head) = lines.next().ok_or(Error::Parse { line: text.lines().count(), msg: "no FIELD dofs block".into() })?;
    let count: usize = head
        .split_whitespace()
        .nth(2)
        .and_then(|c| c.parse().ok())
        .ok_or(Error::Parse { line: n0 + 1, msg: "bad FIELD header".into() })?;
    let mut out = Vec::with_capacity(count);
    let mut tokens = lines.flat_map(|(n, l)| l.split_whitespace().map(move |t| (n + 1, t)));
    for _ in 0..count {
        let mut next = || tokens.next().ok_or(Error::Parse { line: 0, msg: "truncated FIELD block".into() });
        let (_, name) = next()?;
        let (_, _) = next()?;
        let (line, len) = next()?;
        let len: usize = len.parse().map_err(|_| Error::Parse { line, msg: "bad array length".into() })?;
        next()?;
        let mut a = Vec::with_capacity(len);
        for _ in 0..len {
            let (line, t) = next()?;
            a.push(t.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("bad value: {e}") })?);
        }
        out.push((name.to_string(), a));
    }
    Ok(out)
}

/// Restore a solution state from a volume and a Σ file.
pub fn read_fields(model: &FsiModel, volume: &str, sigma: &str) -> Result<SolutionState> {
    if !volume.starts_with(VOLUME_HEADER) || !sigma.starts_with(VOLUME_HEADER) {
        return Err(Error::Parse { line: 1, msg: "not a legacy VTK file".into() });
    }
    let t = parse_time(volume)?;
    let mut arrays = read_dof_block(volume)?;
    arrays.extend(read_dof_block(sigma)?);
    let mut take = |name: &str, len: usize| -> Result<Vec<f64>> {
        let i = arrays.iter().position(|(n, _)| n == name).ok_or(Error::Parse { line: 0, msg: format!("missing array {name}") })?;
        let a = arrays.swap_remove(i).1;
        if a.len() != len {
            return Err(Error::DofMismatch(format!("{name}: {} values for {len} dofs", a.len())));
        }
        Ok(a)
    };
    let sp = &model.spaces;
    Ok(SolutionState {
        t,
        v: take("v", sp.velocity.n_dofs)?,
        p: take("p", sp.pressure.n_dofs)?,
        u_bar: take("u_bar", sp.inplane.n_dofs)?,
        u3: take("u3", sp.deflection.n_dofs)?,
        w3: take("w3", sp.deflection.n_dofs)?,
    })
}

/// Write `<stem>_volume_<step>.vtk` and `<stem>_sigma_<step>.vtk` into `dir`.
pub fn write_fields(model: &FsiModel, state: &SolutionState, dir: &Path, stem: &str, step: usize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}_volume_{step:05}.vtk")), write_volume_vtk(model, state))?;
    std::fs::write(dir.join(format!("{stem}_sigma_{step:05}.vtk")), write_sigma_vtk(model, state))?;
    Ok(())
}

pub const ENERGY_HEADER: &str = "t,E_kin_f,E_el_p,E_kin_p,D_interface";

pub fn write_energy_csv(energies: &[Energy]) -> String {
    let mut out = format!("{ENERGY_HEADER}\n");
    for e in energies {
        let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e}", e.t, e.kinetic_fluid, e.elastic_plate, e.kinetic_plate, e.interface_dissipation);
    }
    out
}

pub fn read_energy_csv(text: &str) -> Result<Vec<Energy>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(ENERGY_HEADER) {
        return Err(Error::Parse { line: 1, msg: format!("expected header `{ENERGY_HEADER}`") });
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let v: Vec<f64> = l
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: n + 2, msg: format!("bad number: {e}") })?;
            if v.len() != 5 {
                return Err(Error::Parse { line: n + 2, msg: format!("expected 5 columns, found {}", v.len()) });
            }
            Ok(Energy { t: v[0], kinetic_fluid: v[1], elastic_plate: v[2], kinetic_plate: v[3], interface_dissipation: v[4] })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::InterfaceData;
    use crate::mesh::ChannelMesh;
    use crate::tensors::StiffnessTriple;
    use nalgebra::Matrix3;
    use rand::{Rng, SeedableRng};

    fn model() -> FsiModel {
        let mesh = ChannelMesh::new([1.0, 2.0, 0.5], [2, 3, 2]).unwrap();
        let t = StiffnessTriple::from_voigt(Matrix3::identity(), Matrix3::zeros(), Matrix3::identity());
        let iface = InterfaceData::uniform(&mesh, Matrix3::identity(), t, 1.0);
        FsiModel::new(mesh, 1.0, 1.0, iface).unwrap()
    }

    fn random_state(model: &FsiModel, seed: u64) -> SolutionState {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = (0..model.n_dofs()).map(|_| rng.random_range(-1e3..1e3) * 10f64.powi(rng.random_range(-20..20))).collect();
        SolutionState::from_vec(model, &y, 0.1 * seed as f64)
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = model();
        for seed in 0..3 {
            let s = random_state(&m, seed);
            let back = read_fields(&m, &write_volume_vtk(&m, &s), &write_sigma_vtk(&m, &s)).unwrap();
            assert_eq!(back, s);
            assert_eq!(write_volume_vtk(&m, &back), write_volume_vtk(&m, &s));
        }
    }

    #[test]
    fn sigma_file_has_one_cell_per_quad() {
        let m = model();
        let text = write_sigma_vtk(&m, &SolutionState::zero(&m));
        assert!(text.contains("DIMENSIONS 3 4 1"));
        assert!(text.contains("CELL_DATA 6\n"));
        let vol = write_volume_vtk(&m, &SolutionState::zero(&m));
        assert!(vol.contains("DIMENSIONS 5 7 5"));
    }

    #[test]
    fn nodal_values_are_written_in_place() {
        let m = model();
        let mut s = SolutionState::zero(&m);
        let vel = &m.spaces.velocity;
        let n = vel.node_coords.iter().position(|x| x[0] == 0.5 && x[1] == 1.0 && x[2] == 0.0).unwrap();
        s.v[vel.dof(n, 2)] = 7.5;
        let text = write_volume_vtk(&m, &s);
        // lattice point (2, 3, 2) of a 5 × 7 × 5 grid
        let vectors: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("VECTORS")).skip(1).take(175).collect();
        assert_eq!(vectors[2 + 5 * (3 + 7 * 2)], "0e0 0e0 7.5e0");
    }

    #[test]
    fn energy_csv_round_trip() {
        let e = vec![
            Energy { t: 0.0, kinetic_fluid: 1.0 / 3.0, elastic_plate: 2e-17, kinetic_plate: 0.0, interface_dissipation: 5.5 },
            Energy { t: 0.1, kinetic_fluid: 1e300, elastic_plate: 0.1 + 0.2, kinetic_plate: 3.0, interface_dissipation: 0.0 },
        ];
        let text = write_energy_csv(&e);
        assert!(text.starts_with("t,E_kin_f,E_el_p,E_kin_p,D_interface\n"));
        assert_eq!(read_energy_csv(&text).unwrap(), e);
    }
}
