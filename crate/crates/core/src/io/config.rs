//! Scenario files for the coupled channel problem.
//!
//! ```text
//! [geometry]
//! L = 1.0 1.0 0.5          # L1 L2 L3, the channel is (0,L1)×(0,L2)×(−L3,L3)
//! n = 4 4 4                # hex counts, n3 even
//! [fluid]
//! rho = 1.0
//! mu = 1.0
//! force = constant 0 0 0   # vector sampler
//! inflow = poiseuille 1.0  # inflow sampler
//! [plate]
//! tensors = plate.txt      # tensor file (relative to this file), or inline:
//! A = a11 a12 a16 a21 a22 a26 a61 a62 a66
//! B = ...                  # optional, zero by default
//! C = ...
//! rho_s = 1.0              # overrides RHOS of the tensor file
//! g3 = constant 0          # scalar sampler
//! [interface]
//! khat = 1.0               # one number (multiple of I) or nine
//! # or: k = ... and delta = ..., giving K̂ = K/(μ δ)
//! # or nothing, when the tensor file carries KHAT
//! [time]
//! T = 1.0
//! dt = 0.1                 # or: steps = 10
//! [solver]
//! method = direct          # direct | gmres
//! tol = 1e-10
//! restart = 200
//! max_iterations = 5000
//! [output]
//! dir = out
//! vtk_every = 1            # 0 disables field output
//! energy = energy.csv
//! ```

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, SymmetricEigen};

use crate::assembly::InterfaceData;
use crate::error::{Error, Result};
use crate::io::kv::{Document, Reader};
use crate::io::samplers::{InflowSampler, ScalarSampler, VectorSampler};
use crate::io::tensor_file::{read_tensor_file, TensorBlock, TensorFile};
use crate::mesh::ChannelMesh;
use crate::solver::{Forcing, FsiModel, Method, SolveOptions};
use crate::tensors::validate_tensors;

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub dims: [f64; 3],
    pub counts: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidConfig {
    pub rho: f64,
    pub mu: f64,
    pub force: VectorSampler,
    pub inflow: InflowSampler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateConfig {
    /// Resolved tensors, file data with inline sections on top.
    pub tensors: TensorFile,
    pub tensor_path: Option<PathBuf>,
    pub rho_s: f64,
    pub g3: ScalarSampler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub vtk_every: usize,
    pub energy: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: Geometry,
    pub fluid: FluidConfig,
    pub plate: PlateConfig,
    /// Global `K̂`; facets may override it through the tensor file.
    pub khat: Matrix3<f64>,
    pub time: Option<TimeConfig>,
    pub solver: SolveOptions,
    pub output: OutputConfig,
}

fn matrix(r: &mut Reader, section: &str, key: &str) -> Option<Matrix3<f64>> {
    let e = r.raw(section, key);
    let v = r.numbers(section, key)?;
    match v.len() {
        1 => Some(Matrix3::identity() * v[0]),
        9 => Some(Matrix3::from_row_slice(&v)),
        n => {
            r.error(e, section, key, format!("expected 1 or 9 numbers, found {n}"));
            None
        }
    }
}

fn triple3<T: Copy + Default>(r: &mut Reader, section: &str, key: &str, v: Option<Vec<T>>) -> Option<[T; 3]> {
    let v = v?;
    if v.len() != 3 {
        let e = r.raw(section, key);
        r.error(e, section, key, format!("expected 3 values, found {}", v.len()));
        return None;
    }
    Some([v[0], v[1], v[2]])
}

fn sampler<T>(r: &mut Reader, section: &str, key: &str, parse: fn(&str) -> std::result::Result<T, String>, default: T) -> T {
    match r.raw(section, key) {
        None => default,
        Some(e) => parse(&e.value).unwrap_or_else(|msg| {
            r.error(Some(e), section, key, msg);
            default
        }),
    }
}

fn check_spd(m: &Matrix3<f64>) -> std::result::Result<(), String> {
    if (m - m.transpose()).abs().max() > 1e-12 * m.abs().max() {
        return Err("K̂ is not symmetric".into());
    }
    let min = SymmetricEigen::new(*m).eigenvalues.min();
    if !(min > 0.0) {
        return Err(format!("K̂ is not positive definite (min eigenvalue {min:e})"));
    }
    Ok(())
}

fn check_block(errors: &mut Vec<String>, b: &TensorBlock, what: &str) {
    match b.triple() {
        None => errors.push(format!("{what}: AHOM and CHOM are required")),
        Some(t) => {
            for f in validate_tensors(&t).failures {
                errors.push(format!("{what}: {f}"));
            }
        }
    }
    if let Some(k) = &b.khat {
        if let Err(msg) = check_spd(k) {
            errors.push(format!("{what}: KHAT: {msg}"));
        }
    }
}

/// Parse and validate a scenario; relative paths are resolved against
/// `base`. Every violation is reported.
pub fn parse_config_str(text: &str, base: &Path) -> Result<ScenarioConfig> {
    let doc = Document::parse(text)?;
    let mut r = Reader::new(&doc);

    let dims_v = r.numbers("geometry", "L");
    let dims = triple3(&mut r, "geometry", "L", dims_v);
    let counts_v = r.raw("geometry", "n").map(|e| e.value.split_whitespace().map(|t| t.parse::<usize>()).collect::<std::result::Result<Vec<_>, _>>());
    let counts_v = match counts_v {
        Some(Ok(v)) => Some(v),
        Some(Err(e)) => {
            let entry = r.raw("geometry", "n");
            r.error(entry, "geometry", "n", format!("expected integers: {e}"));
            None
        }
        None => None,
    };
    let counts = triple3(&mut r, "geometry", "n", counts_v);
    let dims = r.require(dims, "geometry", "L");
    let counts = r.require(counts, "geometry", "n");
    if let Some(d) = dims {
        if d.iter().any(|x| !(*x > 0.0)) {
            let e = r.raw("geometry", "L");
            r.error(e, "geometry", "L", "all lengths must be positive");
        }
    }
    if let Some(c) = counts {
        let e = r.raw("geometry", "n");
        if c.iter().any(|x| *x == 0) {
            r.error(e, "geometry", "n", "all counts must be positive");
        } else if c[2] % 2 != 0 {
            r.error(e, "geometry", "n", format!("n3 must be even so that Σ is a node layer, got {}", c[2]));
        }
    }

    let rho = r.positive("fluid", "rho").unwrap_or(1.0);
    let mu = r.req_positive("fluid", "mu");
    let force = sampler(&mut r, "fluid", "force", VectorSampler::parse, VectorSampler::Constant([0.0; 3]));
    let inflow = sampler(&mut r, "fluid", "inflow", InflowSampler::parse, InflowSampler::Constant([0.0; 3]));

    let tensor_path = r.string("plate", "tensors").map(|p| base.join(p));
    let mut tensors = TensorFile::default();
    if let Some(p) = &tensor_path {
        match read_tensor_file(p) {
            Ok(f) => tensors = f,
            Err(e) => {
                let entry = r.raw("plate", "tensors");
                r.error(entry, "plate", "tensors", format!("{}: {e}", p.display()));
            }
        }
    }
    for (key, slot) in [("A", 0), ("B", 1), ("C", 2)] {
        if let Some(m) = matrix(&mut r, "plate", key) {
            match slot {
                0 => tensors.global.a = Some(m),
                1 => tensors.global.b = Some(m),
                _ => tensors.global.c = Some(m),
            }
        }
    }
    let rho_s = r.positive("plate", "rho_s").or(tensors.global.rho_s);
    if rho_s.is_none() {
        r.error(None, "plate", "rho_s", "missing (give rho_s or RHOS in the tensor file)");
    } else if let Some(x) = tensors.global.rho_s.filter(|x| !(*x > 0.0)) {
        r.error(None, "plate", "rho_s", format!("RHOS must be positive, got {x}"));
    }
    let g3 = sampler(&mut r, "plate", "g3", ScalarSampler::parse, ScalarSampler::Constant(0.0));

    let khat = if r.raw("interface", "khat").is_some() {
        matrix(&mut r, "interface", "khat")
    } else if r.raw("interface", "k").is_some() {
        let k = matrix(&mut r, "interface", "k");
        let delta = r.req_positive("interface", "delta");
        match (k, delta, mu) {
            (Some(k), Some(d), Some(m)) => Some(k / (m * d)),
            _ => None,
        }
    } else if let Some(k) = tensors.global.khat {
        Some(k)
    } else {
        r.error(None, "interface", "khat", "missing (give khat, k with delta, or KHAT in the tensor file)");
        None
    };
    if let Some(k) = &khat {
        if let Err(msg) = check_spd(k) {
            let e = r.raw("interface", "khat");
            r.error(e, "interface", "khat", msg);
        }
    }
    let mut global = tensors.global.clone();
    global.khat = None;
    let mut tensor_errors = Vec::new();
    check_block(&mut tensor_errors, &global, "plate tensors");
    for (q, b) in &tensors.facets {
        if let Some(n) = counts.map(|c| c[0] * c[1]) {
            if *q >= n {
                tensor_errors.push(format!("plate tensors: facet {q} does not exist ({n} Σ quads)"));
            }
        }
        check_block(&mut tensor_errors, &b.merged(&global), &format!("plate tensors, facet {q}"));
    }
    r.errors.extend(tensor_errors);

    let time = if doc.section("time").is_some() {
        let t_end = r.req_positive("time", "T");
        let dt = r.positive("time", "dt");
        let steps = r.usize("time", "steps");
        match (t_end, dt, steps) {
            (Some(t), Some(dt), None) => Some(TimeConfig { t_end: t, dt, steps: (t / dt).round().max(1.0) as usize }),
            (Some(t), None, Some(n)) if n > 0 => Some(TimeConfig { t_end: t, dt: t / n as f64, steps: n }),
            (Some(_), Some(_), Some(_)) => {
                r.error(None, "time", "dt", "give either dt or steps");
                None
            }
            (Some(_), None, _) => {
                r.error(None, "time", "dt", "missing (give dt or a positive steps)");
                None
            }
            _ => None,
        }
    } else {
        None
    };

    let mut solver = SolveOptions::default();
    if let Some(m) = r.raw("solver", "method") {
        match m.value.as_str() {
            "direct" => solver.method = Method::DirectLu,
            "gmres" => solver.method = Method::Gmres,
            other => r.error(Some(m), "solver", "method", format!("unknown method `{other}` (direct, gmres)")),
        }
    }
    if let Some(t) = r.positive("solver", "tol") {
        solver.tol = t;
    }
    if let Some(n) = r.usize("solver", "restart") {
        solver.restart = n;
    }
    if let Some(n) = r.usize("solver", "max_iterations") {
        solver.max_iterations = n;
    }

    let output = OutputConfig {
        dir: base.join(r.string("output", "dir").unwrap_or_else(|| "out".into())),
        vtk_every: r.usize("output", "vtk_every").unwrap_or(1),
        energy: Some(r.string("output", "energy").unwrap_or_else(|| "energy.csv".into())).filter(|s| s != "none"),
    };

    r.finish_unknown(&["geometry", "fluid", "plate", "interface", "time", "solver", "output"]);
    if !r.errors.is_empty() {
        return Err(Error::Validation(r.errors));
    }
    Ok(ScenarioConfig {
        geometry: Geometry { dims: dims.unwrap(), counts: counts.unwrap() },
        fluid: FluidConfig { rho, mu: mu.unwrap(), force, inflow },
        plate: PlateConfig { tensors, tensor_path, rho_s: rho_s.unwrap(), g3 },
        khat: khat.unwrap(),
        time,
        solver,
        output,
    })
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}

impl TensorBlock {
    fn merged(&self, base: &TensorBlock) -> TensorBlock {
        TensorBlock {
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            c: self.c.or(base.c),
            khat: self.khat.or(base.khat),
            rho_s: self.rho_s.or(base.rho_s),
        }
    }
}

impl ScenarioConfig {
    /// Stable fingerprint of the parsed configuration.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        format!("{self:?}").hash(&mut h);
        h.finish()
    }

    pub fn mesh(&self) -> Result<ChannelMesh> {
        ChannelMesh::new(self.geometry.dims, self.geometry.counts)
    }

    /// Per-facet plate tensors and resistivity.
    pub fn interface_data(&self, mesh: &ChannelMesh) -> Result<InterfaceData> {
        let n = mesh.sigma_quads.len();
        let mut khat_inv = Vec::with_capacity(n);
        let mut stiffness = Vec::with_capacity(n);
        for q in 0..n {
            let b = self.plate.tensors.on_facet(q);
            let k = if self.plate.tensors.facets.iter().any(|(p, f)| *p == q && f.khat.is_some()) { b.khat.unwrap() } else { self.khat };
            let inv = k.try_inverse().ok_or(Error::SingularPermeability { facet: q })?;
            khat_inv.push(0.5 * (inv + inv.transpose()));
            stiffness.push(b.triple().ok_or_else(|| Error::Validation(vec![format!("facet {q}: missing plate tensors")]))?);
        }
        Ok(InterfaceData { khat_inv, stiffness, rho_s_hat: self.plate.rho_s })
    }

    pub fn model(&self) -> Result<FsiModel> {
        let mesh = self.mesh()?;
        let iface = self.interface_data(&mesh)?;
        FsiModel::new(mesh, self.fluid.rho, self.fluid.mu, iface)
    }

    /// Run `f` with the loads of the scenario.
    pub fn with_forcing<R>(&self, f: impl FnOnce(&Forcing) -> R) -> R {
        let force = self.fluid.force;
        let inflow = self.fluid.inflow;
        let g3 = self.plate.g3;
        let l = [self.geometry.dims[0], self.geometry.dims[1]];
        let fv = move |_x: [f64; 3], t: f64| force.eval(t);
        let gv = move |_x: [f64; 2], t: f64| g3.eval(t);
        let iv = move |x: [f64; 2], t: f64| inflow.eval(x, t, l);
        f(&Forcing { f: &fv, g3: &gv, inflow: &iv })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\nL = 1 1 0.5\nn = 2 2 2\n[fluid]\nmu = 1\n[plate]\nA = 1\nC = 0.1\nrho_s = 1\n[interface]\nkhat = 1\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse_config_str(MINIMAL, Path::new("/tmp")).unwrap();
        assert_eq!(c.fluid.rho, 1.0);
        assert_eq!(c.fluid.inflow, InflowSampler::Constant([0.0; 3]));
        assert_eq!(c.plate.g3, ScalarSampler::Constant(0.0));
        assert_eq!(c.plate.tensors.global.b, None);
        assert_eq!(c.output.dir, Path::new("/tmp/out"));
        assert_eq!(c.output.energy.as_deref(), Some("energy.csv"));
        assert_eq!(c.solver, SolveOptions::default());
        assert!(c.time.is_none());
        assert_eq!(c.fingerprint(), parse_config_str(MINIMAL, Path::new("/tmp")).unwrap().fingerprint());
        c.model().unwrap();
    }

    #[test]
    fn negative_viscosity_names_the_key() {
        let text = MINIMAL.replace("mu = 1", "mu = -2");
        match parse_config_str(&text, Path::new(".")) {
            Err(Error::Validation(v)) => assert!(v.iter().any(|e| e.contains("line 5") && e.contains("mu")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_coercive_bending_is_reported() {
        let text = MINIMAL.replace("C = 0.1", "C = 1 2 0 2 1 0 0 0 1");
        match parse_config_str(&text, Path::new(".")) {
            Err(Error::Validation(v)) => assert!(v.iter().any(|e| e.contains("C: not coercive")), "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_violation_is_collected() {
        let text = "[geometry]\nL = 1 -1 0.5\nn = 2 2 3\n[fluid]\nmu = 0\ninflow = parabola\n[plate]\nA = 1\n[interface]\nkhat = 1 2 3\n[time]\nT = 1\n[bogus]\n";
        match parse_config_str(text, Path::new(".")) {
            Err(Error::Validation(v)) => assert!(v.len() >= 8, "{v:#?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn permeability_from_k_mu_delta() {
        let text = MINIMAL.replace("mu = 1", "mu = 2").replace("khat = 1", "k = 1e-10\ndelta = 1e-3");
        let c = parse_config_str(&text, Path::new(".")).unwrap();
        assert!((c.khat[(0, 0)] - 5e-8).abs() < 1e-22);
    }

    #[test]
    fn time_by_steps() {
        let text = format!("{MINIMAL}[time]\nT = 2\nsteps = 8\n");
        let t = parse_config_str(&text, Path::new(".")).unwrap().time.unwrap();
        assert_eq!((t.dt, t.steps), (0.25, 8));
    }
}
