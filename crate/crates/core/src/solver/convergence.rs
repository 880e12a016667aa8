//! Mesh-convergence studies against manufactured solutions.
//!
//! Stokes: a divergence-free trigonometric velocity with a smooth pressure
//! on `(0,1)² × (−½,½)`; the interface, outflow and wall data are chosen so
//! that it solves the stationary fluid system exactly.
//!
//! Plate: `u3* = (x1(1−x1) x2(1−x2))²` together with an in-plane field and a
//! nonzero coupling tensor, loaded through the strong form of the plate
//! equations.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::assembly::{assemble_facet_load, assemble_fluid_load, assemble_plate_blocks, assemble_plate_load, InterfaceData};
use crate::error::Result;
use crate::fe::{gauss_rule, FsiSpaces, LagrangeBasis};
use crate::mesh::{ChannelMesh, FacetTag};
use crate::solver::linear::{solve_constrained, SolveOptions};
use crate::solver::model::FsiModel;
use crate::solver::norms::{deflection_error, inplane_error, pressure_error, velocity_error};
use crate::solver::stationary::{solve_stationary_with, StationaryLoads};
use crate::tensors::{tensor_from_voigt, StiffnessTriple, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceCase {
    Stokes,
    Plate,
    /// Plate with a nonzero coupling tensor `B`; the `O(h)` in-plane error
    /// feeds into the deflection, so only first order is seen in `u3`.
    PlateCoupled,
    /// Bicubic deflection with matching boundary data: reproduced exactly.
    PlateBicubic,
}

impl std::str::FromStr for ConvergenceCase {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "stokes" | "fluid" => Ok(Self::Stokes),
            "plate" => Ok(Self::Plate),
            "plate-coupled" => Ok(Self::PlateCoupled),
            "plate-bicubic" => Ok(Self::PlateBicubic),
            other => Err(format!("unknown convergence case `{other}` (stokes, plate, plate-coupled, plate-bicubic)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub quantity: &'static str,
    pub expected: f64,
    /// `(h, error)` per mesh.
    pub errors: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log h`.
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub case: ConvergenceCase,
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn row(&self, quantity: &str) -> Option<&RateRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    /// Plain-text table, one line per quantity.
    pub fn render(&self) -> String {
        let mut s = format!("# case {:?}\n# quantity expected observed  h:error ...\n", self.case);
        for r in &self.rows {
            s.push_str(&format!("{:<12} {:>5.2} {:>8.3}", r.quantity, r.expected, r.observed));
            for (h, e) in &r.errors {
                s.push_str(&format!("  {h:.4e}:{e:.6e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn row(quantity: &'static str, expected: f64, errors: Vec<(f64, f64)>) -> RateRow {
    let observed = log_slope(&errors);
    RateRow { quantity, expected, errors, observed }
}

/// Run a study on meshes with `levels[i]` elements per unit length.
pub fn convergence_study(case: ConvergenceCase, levels: &[usize], opts: &SolveOptions) -> Result<RateTable> {
    match case {
        ConvergenceCase::Stokes => stokes_study(levels, opts),
        ConvergenceCase::Plate | ConvergenceCase::PlateCoupled | ConvergenceCase::PlateBicubic => plate_study(case, levels, opts),
    }
}

/// Default mesh sequences, sized for a desk-scale run.
pub fn default_levels(case: ConvergenceCase) -> Vec<usize> {
    match case {
        ConvergenceCase::Stokes => vec![2, 4, 8],
        ConvergenceCase::Plate | ConvergenceCase::PlateCoupled => vec![4, 8, 16, 32],
        ConvergenceCase::PlateBicubic => vec![2, 4],
    }
}

// ---------------------------------------------------------------- Stokes

const MU: f64 = 1.0;

/// `v* = (sin x1 cos x2 cos x3, cos x1 sin x2 cos x3, −2 cos x1 cos x2 sin x3)`
fn stokes_velocity(x: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let (s1, c1) = x[0].sin_cos();
    let (s2, c2) = x[1].sin_cos();
    let (s3, c3) = x[2].sin_cos();
    let v = [s1 * c2 * c3, c1 * s2 * c3, -2.0 * c1 * c2 * s3];
    let g = [
        [c1 * c2 * c3, -s1 * s2 * c3, -s1 * c2 * s3],
        [-s1 * s2 * c3, c1 * c2 * c3, -c1 * s2 * s3],
        [2.0 * s1 * c2 * s3, 2.0 * c1 * s2 * s3, -2.0 * c1 * c2 * c3],
    ];
    (v, g)
}

fn stokes_pressure(x: [f64; 3]) -> (f64, [f64; 3]) {
    let a = x[0] + 2.0 * x[1] - x[2];
    (a.sin(), [a.cos(), 2.0 * a.cos(), -a.cos()])
}

fn stokes_stress(x: [f64; 3]) -> [[f64; 3]; 3] {
    let (_, g) = stokes_velocity(x);
    let (p, _) = stokes_pressure(x);
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = MU * (g[i][j] + g[j][i]) - if i == j { p } else { 0.0 };
        }
    }
    s
}

fn stokes_study(levels: &[usize], opts: &SolveOptions) -> Result<RateTable> {
    let (mut vl2, mut vh1, mut pl2) = (Vec::new(), Vec::new(), Vec::new());
    for &n in levels {
        let mesh = ChannelMesh::new([1.0, 1.0, 0.5], [n, n, n])?;
        let triple = StiffnessTriple::from_voigt(Matrix3::identity(), Matrix3::zeros(), Matrix3::identity());
        let khat_inv = Matrix3::new(2.0, 0.5, 0.0, 0.5, 1.5, 0.25, 0.0, 0.25, 1.0);
        let iface = InterfaceData::uniform(&mesh, khat_inv, triple, 1.0);
        let model = FsiModel::new(mesh, 1.0, MU, iface)?;
        let vel = &model.spaces.velocity;
        // −μΔv* + ∇p* = 3μ v* + ∇p*
        let body = |x: [f64; 3], _t: f64| {
            let (v, _) = stokes_velocity(x);
            let (_, gp) = stokes_pressure(x);
            [3.0 * MU * v[0] + gp[0], 3.0 * MU * v[1] + gp[1], 3.0 * MU * v[2] + gp[2]]
        };
        let mut fluid = assemble_fluid_load(&model.mesh, vel, &body, 0.0);
        let outflow = assemble_facet_load(&model.mesh, vel, FacetTag::Outflow, |x| {
            let s = stokes_stress(x);
            [s[0][2], s[1][2], s[2][2]]
        });
        let interface = assemble_facet_load(&model.mesh, vel, FacetTag::Sigma, |x| {
            let (v, _) = stokes_velocity(x);
            let kv = khat_inv * nalgebra::Vector3::from(v);
            [kv[0], kv[1], kv[2]]
        });
        for i in 0..fluid.len() {
            fluid[i] += outflow[i] + interface[i];
        }
        let loads = StationaryLoads {
            fluid,
            velocity_bc: model.velocity_bc_from(|x| stokes_velocity(x).0),
            inplane: vec![0.0; model.spaces.inplane.n_dofs],
            deflection: vec![0.0; model.spaces.deflection.n_dofs],
            plate_bc: vec![0.0; model.spaces.inplane.n_dofs + model.spaces.deflection.n_dofs],
        };
        let sol = solve_stationary_with(&model, &loads, opts)?;
        let h = 1.0 / n as f64;
        let (l2, h1) = velocity_error(&model.mesh, vel, &sol.v, stokes_velocity);
        vl2.push((h, l2));
        vh1.push((h, h1));
        pl2.push((h, pressure_error(&model.mesh, &model.spaces.pressure, &sol.p, |x| stokes_pressure(x).0)));
        log::info!("stokes n = {n}: |v|_H1 err {h1:.3e}, v L2 err {l2:.3e}");
    }
    Ok(RateTable {
        case: ConvergenceCase::Stokes,
        rows: vec![row("v_H1", 2.0, vh1), row("v_L2", 3.0, vl2), row("p_L2", 2.0, pl2)],
    })
}

// ----------------------------------------------------------------- plate

/// One-dimensional factor of a separable function.
#[derive(Debug, Clone)]
enum Factor {
    /// Polynomial with coefficients in increasing degree.
    Poly(Vec<f64>),
    /// `sin(π x)`
    SinPi,
}

impl Factor {
    fn eval(&self, x: f64, d: usize) -> f64 {
        match self {
            Factor::Poly(c) => {
                let mut s = 0.0;
                for (k, &ck) in c.iter().enumerate().skip(d) {
                    let mut f = 1.0;
                    for m in 0..d {
                        f *= (k - m) as f64;
                    }
                    s += ck * f * x.powi((k - d) as i32);
                }
                s
            }
            Factor::SinPi => {
                let p = PI.powi(d as i32);
                match d % 4 {
                    0 => p * (PI * x).sin(),
                    1 => p * (PI * x).cos(),
                    2 => -p * (PI * x).sin(),
                    _ => -p * (PI * x).cos(),
                }
            }
        }
    }
}

/// `f(x1) g(x2)`.
#[derive(Debug, Clone)]
struct Separable(Factor, Factor);

impl Separable {
    fn d(&self, x: [f64; 2], a: usize, b: usize) -> f64 {
        self.0.eval(x[0], a) * self.1.eval(x[1], b)
    }

    /// Partial derivative along the listed axes.
    fn partial(&self, x: [f64; 2], axes: &[usize]) -> f64 {
        let a = axes.iter().filter(|&&i| i == 0).count();
        self.d(x, a, axes.len() - a)
    }
}

struct PlateCase {
    u3: Separable,
    ubar: [Separable; 2],
    a: Tensor4,
    b: Tensor4,
    c: Tensor4,
    triple: StiffnessTriple,
}

fn plate_case(which: ConvergenceCase) -> PlateCase {
    let bicubic = which == ConvergenceCase::PlateBicubic;
    let va = Matrix3::new(1.0, 0.3, 0.0, 0.3, 1.0, 0.0, 0.0, 0.0, 0.35);
    let vc = Matrix3::new(0.1, 0.03, 0.0, 0.03, 0.1, 0.0, 0.0, 0.0, 0.035);
    let vb = if which != ConvergenceCase::PlateCoupled { Matrix3::zeros() } else { Matrix3::new(0.02, 0.005, 0.0, 0.0, -0.01, 0.004, 0.003, 0.0, 0.01) };
    let triple = StiffnessTriple::from_voigt(va, vb, vc);
    // x²(1−x)² = x² − 2x³ + x⁴
    let bump = Factor::Poly(vec![0.0, 0.0, 1.0, -2.0, 1.0]);
    let u3 = if bicubic {
        Separable(Factor::Poly(vec![0.5, -1.0, 0.0, 2.0]), Factor::Poly(vec![0.0, 1.0, 3.0, -1.0]))
    } else {
        Separable(bump.clone(), bump)
    };
    let zero = Separable(Factor::Poly(vec![0.0]), Factor::Poly(vec![0.0]));
    let ubar = if bicubic {
        [zero.clone(), zero]
    } else {
        [
            Separable(Factor::SinPi, Factor::SinPi),
            // x(1−x)(1+x) = x − x³
            Separable(Factor::Poly(vec![0.0, 1.0, 0.0, -1.0]), Factor::SinPi),
        ]
    };
    PlateCase { u3, ubar, a: tensor_from_voigt(&va), b: tensor_from_voigt(&vb), c: tensor_from_voigt(&vc), triple }
}

impl PlateCase {
    /// `∂_axes ε_kl(ū*)`
    fn strain_deriv(&self, x: [f64; 2], k: usize, l: usize, axes: &[usize]) -> f64 {
        let mut ak = axes.to_vec();
        ak.push(k);
        let mut al = axes.to_vec();
        al.push(l);
        0.5 * (self.ubar[l].partial(x, &ak) + self.ubar[k].partial(x, &al))
    }

    fn hess_deriv(&self, x: [f64; 2], k: usize, l: usize, axes: &[usize]) -> f64 {
        let mut a = axes.to_vec();
        a.extend([k, l]);
        self.u3.partial(x, &a)
    }

    /// In-plane body load `−∂_j N_ij`.
    fn inplane_load(&self, x: [f64; 2]) -> [f64; 2] {
        let mut f = [0.0; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        f[i] -= self.a[i][j][k][l] * self.strain_deriv(x, k, l, &[j])
                            + self.b[i][j][k][l] * self.hess_deriv(x, k, l, &[j]);
                    }
                }
            }
        }
        f
    }

    /// Transverse load `∂_i ∂_j M_ij`.
    fn transverse_load(&self, x: [f64; 2]) -> f64 {
        let mut g = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        g += self.b[i][j][k][l] * self.strain_deriv(x, k, l, &[i, j])
                            + self.c[i][j][k][l] * self.hess_deriv(x, k, l, &[i, j]);
                    }
                }
            }
        }
        g
    }

    fn u3_jet(&self, x: [f64; 2]) -> [f64; 6] {
        let u = &self.u3;
        [u.d(x, 0, 0), u.d(x, 1, 0), u.d(x, 0, 1), u.d(x, 2, 0), u.d(x, 0, 2), u.d(x, 1, 1)]
    }

    fn ubar_jet(&self, x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let v = [self.ubar[0].d(x, 0, 0), self.ubar[1].d(x, 0, 0)];
        let g = [
            [self.ubar[0].d(x, 1, 0), self.ubar[0].d(x, 0, 1)],
            [self.ubar[1].d(x, 1, 0), self.ubar[1].d(x, 0, 1)],
        ];
        (v, g)
    }
}

fn assemble_inplane_load(mesh: &ChannelMesh, spaces: &FsiSpaces, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let h = mesh.sigma_cell_size();
    let q1 = LagrangeBasis::new(1, 2);
    let rule = gauss_rule(4, 2);
    let sp = &spaces.inplane;
    let mut out = vec![0.0; sp.n_dofs];
    for q in 0..mesh.sigma_quads.len() {
        let o = mesh.sigma_origin(q);
        for (xi, w) in rule.points.iter().zip(&rule.weights) {
            let phi = q1.eval(*xi, [0, 0, 0]);
            let fx = f([o[0] + xi[0] * h[0], o[1] + xi[1] * h[1]]);
            for a in 0..4 {
                for c in 0..2 {
                    out[sp.cell_dofs[q][2 * a + c]] += fx[c] * phi[a] * w * h[0] * h[1];
                }
            }
        }
    }
    out
}

fn plate_study(which: ConvergenceCase, levels: &[usize], opts: &SolveOptions) -> Result<RateTable> {
    let bicubic = which == ConvergenceCase::PlateBicubic;
    let case = plate_case(which);
    let (mut ul2, mut uh2, mut ml2, mut mh1) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &n in levels {
        let mesh = ChannelMesh::new([1.0, 1.0, 0.5], [n, n, 2])?;
        let spaces = FsiSpaces::new(&mesh)?;
        let iface = InterfaceData::uniform(&mesh, Matrix3::identity(), case.triple, 1.0);
        let plate = assemble_plate_blocks(&mesh, &spaces, &iface)?;
        let k = plate.stiffness();
        let mut rhs = assemble_inplane_load(&mesh, &spaces, |x| case.inplane_load(x));
        rhs.extend(assemble_plate_load(&mesh, &spaces.deflection, &|x, _| case.transverse_load(x), 0.0));
        let mut fixed = spaces.inplane.constrained.clone();
        fixed.extend_from_slice(&spaces.deflection.constrained);
        // boundary values from the exact fields (zero for the clamped case)
        let mut values = Vec::with_capacity(fixed.len());
        for x in &spaces.inplane.node_coords {
            let (v, _) = case.ubar_jet([x[0], x[1]]);
            values.extend(v);
        }
        for x in &spaces.deflection.node_coords {
            let j = case.u3_jet([x[0], x[1]]);
            values.extend([j[0], j[1], j[2], j[5]]);
        }
        let nm = spaces.inplane.n_dofs;
        let popts = SolveOptions { blocks: vec![0..nm, nm..fixed.len()], ..opts.clone() };
        let (sol, _) = solve_constrained(&k, &rhs, &fixed, &values, &popts)?;
        let h = 1.0 / n as f64;
        let (l2, _, h2) = deflection_error(&mesh, &spaces.deflection, &sol[nm..], |x| case.u3_jet(x));
        let (m2, m1) = inplane_error(&mesh, &spaces.inplane, &sol[..nm], |x| case.ubar_jet(x));
        log::info!("plate n = {n}: u3 H2 {h2:.3e} L2 {l2:.3e}, ū H1 {m1:.3e}");
        ul2.push((h, l2));
        uh2.push((h, h2));
        ml2.push((h, m2));
        mh1.push((h, m1));
    }
    let mut rows = vec![row("u3_H2", 2.0, uh2), row("u3_L2", 4.0, ul2)];
    if !bicubic {
        rows.push(row("ubar_H1", 1.0, mh1));
        rows.push(row("ubar_L2", 2.0, ml2));
    }
    Ok(RateTable { case: which, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125].iter().map(|&h: &f64| (h, 3.0 * h.powi(3))).collect();
        assert!((log_slope(&pts) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn strong_form_loads_vanish_for_zero_fields() {
        let mut c = plate_case(ConvergenceCase::PlateBicubic);
        c.u3 = Separable(Factor::Poly(vec![0.0, 1.0]), Factor::Poly(vec![1.0]));
        // linear u3 has no curvature and ū = 0: no load
        assert_eq!(c.transverse_load([0.3, 0.7]), 0.0);
        assert_eq!(c.inplane_load([0.3, 0.7]), [0.0, 0.0]);
    }

    #[test]
    fn factor_derivatives() {
        let f = Factor::Poly(vec![0.0, 0.0, 1.0, -2.0, 1.0]);
        let x: f64 = 0.3;
        assert!((f.eval(x, 0) - x * x * (1.0 - x) * (1.0 - x)).abs() < 1e-15);
        assert!((f.eval(x, 4) - 24.0).abs() < 1e-12);
        assert!((Factor::SinPi.eval(x, 2) + PI * PI * (PI * x).sin()).abs() < 1e-12);
    }

    #[test]
    fn bicubic_deflection_is_reproduced() {
        let t = convergence_study(ConvergenceCase::PlateBicubic, &[2, 3], &SolveOptions::default()).unwrap();
        for r in &t.rows {
            for (_, e) in &r.errors {
                assert!(*e < 1e-10, "{} error {e}", r.quantity);
            }
        }
    }
}
