//! Permeability of a voxelized cell from the periodic Darcy cell problems
//! and, as a cross-check, from pressure-driven Stokes flow and Darcy's law.
//!
//! Both paths use Taylor-Hood (Q2/Q1) elements on the fluid voxels with
//! no-slip at every velocity node touching a solid voxel.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::fe::{gauss_rule, LagrangeBasis};
use crate::mesh::CellMesh;
use crate::solver::linear::Factorization;
use crate::sparse::{norm2, CsrMatrix, Triplets};

/// Weight of the pressure mass added to the `(p, p)` block. It fixes the
/// pressure constant and spurious local modes of fluid pockets without a
/// visible effect on the velocity.
const PRESSURE_REGULARIZATION: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    CellProblems,
    DarcyFit,
    UserInput,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::CellProblems => "cell_problems",
            Provenance::DarcyFit => "darcy_fit",
            Provenance::UserInput => "user_input",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermeabilityTensor {
    /// `K` in units of length².
    pub k: Matrix3<f64>,
    pub provenance: Provenance,
    /// Axes without a connected fluid path (cell problems) or with a
    /// vanishing mean velocity (fit); near-zero eigenvalues are expected.
    pub blocked: [bool; 3],
    /// Unsymmetrized fit (`None` for the other provenances).
    pub raw: Option<Matrix3<f64>>,
}

impl PermeabilityTensor {
    pub fn user(k: Matrix3<f64>) -> Self {
        Self { k, provenance: Provenance::UserInput, blocked: [false; 3], raw: None }
    }

    /// `K̂ = K / (μ δ)`.
    pub fn khat(&self, mu: f64, delta: f64) -> Matrix3<f64> {
        self.k / (mu * delta)
    }

    pub fn asymmetry(&self) -> f64 {
        (self.k - self.k.transpose()).abs().max() / self.k.abs().max().max(f64::MIN_POSITIVE)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        (0.5 * (self.k + self.k.transpose())).symmetric_eigenvalues().min()
    }

    pub fn is_spd(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }
}

/// Q2 velocity and Q1 pressure numbering on the fluid voxels.
#[derive(Debug, Clone)]
pub struct FluidSpace {
    pub resolution: [usize; 3],
    pub voxel_size: [f64; 3],
    pub periodic: [bool; 3],
    /// Velocity node (on the half-step grid) of each velocity dof triple.
    pub velocity_nodes: Vec<[usize; 3]>,
    /// Per fluid voxel: velocity dof base (`3·node`) of the 27 local nodes,
    /// `None` for no-slip nodes.
    pub voxel_velocity: Vec<Option<[Option<usize>; 27]>>,
    /// Per fluid voxel: pressure dof of the 8 corners.
    pub voxel_pressure: Vec<Option<[usize; 8]>>,
    pub n_velocity: usize,
    pub n_pressure: usize,
    pub fluid_volume: f64,
}

fn touching(q: usize, m: usize, periodic: bool) -> Vec<usize> {
    if q % 2 == 1 {
        return vec![(q - 1) / 2];
    }
    let v = q / 2;
    let mut out = Vec::with_capacity(2);
    if v > 0 {
        out.push(v - 1);
    } else if periodic {
        out.push(m - 1);
    }
    if v < m {
        out.push(v);
    } else if periodic {
        out.push(0);
    }
    out.dedup();
    out
}

impl FluidSpace {
    pub fn new(cell: &CellMesh, periodic: [bool; 3]) -> Result<Self> {
        if cell.solid_count() == cell.n_voxels() {
            return Err(Error::NoFluidPhase);
        }
        let m = cell.resolution;
        let h = cell.voxel_size();
        let nq: [usize; 3] = std::array::from_fn(|a| if periodic[a] { 2 * m[a] } else { 2 * m[a] + 1 });
        let np: [usize; 3] = std::array::from_fn(|a| if periodic[a] { m[a] } else { m[a] + 1 });
        let wrap = |x: usize, n: usize, p: bool| if p { x % n } else { x };
        let vindex = |q: [usize; 3]| q[0] + nq[0] * (q[1] + nq[1] * q[2]);
        let solid_near = |q: [usize; 3]| {
            let t: [Vec<usize>; 3] = std::array::from_fn(|a| touching(q[a], m[a], periodic[a]));
            t[2].iter().any(|&k| t[1].iter().any(|&j| t[0].iter().any(|&i| cell.is_solid(cell.voxel_index(i, j, k)))))
        };
        let mut vid = vec![usize::MAX; nq[0] * nq[1] * nq[2]];
        let mut pid = vec![usize::MAX; np[0] * np[1] * np[2]];
        let mut velocity_nodes = Vec::new();
        let mut n_pressure = 0;
        let mut voxel_velocity = vec![None; cell.n_voxels()];
        let mut voxel_pressure = vec![None; cell.n_voxels()];
        let q2 = LagrangeBasis::new(2, 3);
        for v in 0..cell.n_voxels() {
            if cell.is_solid(v) {
                continue;
            }
            let [i, j, k] = cell.voxel_ijk(v);
            let mut vel = [None; 27];
            for (a, slot) in vel.iter_mut().enumerate() {
                let l = q2.node_multi_index(a);
                let q = [
                    wrap(2 * i + l[0], nq[0], periodic[0]),
                    wrap(2 * j + l[1], nq[1], periodic[1]),
                    wrap(2 * k + l[2], nq[2], periodic[2]),
                ];
                let id = vindex(q);
                if vid[id] == usize::MAX {
                    if solid_near(q) {
                        vid[id] = usize::MAX - 1;
                    } else {
                        vid[id] = velocity_nodes.len();
                        velocity_nodes.push(q);
                    }
                }
                if vid[id] < usize::MAX - 1 {
                    *slot = Some(3 * vid[id]);
                }
            }
            let mut pre = [0; 8];
            for (a, slot) in pre.iter_mut().enumerate() {
                let c = [
                    wrap(i + (a & 1), np[0], periodic[0]),
                    wrap(j + ((a >> 1) & 1), np[1], periodic[1]),
                    wrap(k + (a >> 2), np[2], periodic[2]),
                ];
                let id = c[0] + np[0] * (c[1] + np[1] * c[2]);
                if pid[id] == usize::MAX {
                    pid[id] = n_pressure;
                    n_pressure += 1;
                }
                *slot = pid[id];
            }
            voxel_velocity[v] = Some(vel);
            voxel_pressure[v] = Some(pre);
        }
        Ok(Self {
            resolution: m,
            voxel_size: h,
            periodic,
            n_velocity: 3 * velocity_nodes.len(),
            velocity_nodes,
            voxel_velocity,
            voxel_pressure,
            n_pressure,
            fluid_volume: cell.fluid_volume(),
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.n_velocity + self.n_pressure
    }

    /// `∫_{Y^f} φ_a` for every velocity dof (same value on all three
    /// components).
    pub fn velocity_integrals(&self) -> Vec<f64> {
        let w = reference_integrals(self.voxel_size);
        let mut out = vec![0.0; self.n_velocity];
        for vel in self.voxel_velocity.iter().flatten() {
            for (a, d) in vel.iter().enumerate() {
                if let Some(d) = d {
                    for c in 0..3 {
                        out[d + c] += w[a];
                    }
                }
            }
        }
        out
    }

    /// `(1/|Y^f|) ∫ v` of a velocity vector.
    pub fn mean_velocity(&self, v: &[f64]) -> Vector3<f64> {
        let w = self.velocity_integrals();
        let mut m = Vector3::zeros();
        for (d, wd) in w.iter().enumerate() {
            m[d % 3] += wd * v[d];
        }
        m / self.fluid_volume
    }
}

fn reference_integrals(h: [f64; 3]) -> Vec<f64> {
    let q2 = LagrangeBasis::new(2, 3);
    let rule = gauss_rule(3, 3);
    let det = h[0] * h[1] * h[2];
    let mut w = vec![0.0; 27];
    for (xi, wq) in rule.points.iter().zip(&rule.weights) {
        for (a, p) in q2.eval(*xi, [0, 0, 0]).iter().enumerate() {
            w[a] += p * wq * det;
        }
    }
    w
}

/// Element matrices of one voxel: vector Laplacian (27·3)², divergence
/// `−∫ψ div φ` (8 × 81), pressure mass (8 × 8).
fn voxel_matrices(h: [f64; 3]) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let q2 = LagrangeBasis::new(2, 3);
    let q1 = LagrangeBasis::new(1, 3);
    let rule = gauss_rule(3, 3);
    let det = h[0] * h[1] * h[2];
    let mut a = DMatrix::<f64>::zeros(81, 81);
    let mut b = DMatrix::<f64>::zeros(8, 81);
    let mut mp = DMatrix::<f64>::zeros(8, 8);
    for (xi, wq) in rule.points.iter().zip(&rule.weights) {
        let (_, g) = q2.values_and_gradients(*xi);
        let g: Vec<[f64; 3]> = g.iter().map(|g| [g[0] / h[0], g[1] / h[1], g[2] / h[2]]).collect();
        let psi = q1.eval(*xi, [0, 0, 0]);
        let w = wq * det;
        for r in 0..27 {
            for s in 0..27 {
                let lap = (g[r][0] * g[s][0] + g[r][1] * g[s][1] + g[r][2] * g[s][2]) * w;
                for c in 0..3 {
                    a[(3 * r + c, 3 * s + c)] += lap;
                }
            }
            for p in 0..8 {
                for c in 0..3 {
                    b[(p, 3 * r + c)] -= psi[p] * g[r][c] * w;
                }
            }
        }
        for p in 0..8 {
            for q in 0..8 {
                mp[(p, q)] += psi[p] * psi[q] * w;
            }
        }
    }
    (a, b, mp)
}

/// Stokes saddle matrix `[[μA, Bᵀ], [B, −εM]]` on a fluid space (with
/// `B = −(q, div v)`).
pub fn assemble_stokes_cell(space: &FluidSpace, mu: f64) -> (CsrMatrix, CsrMatrix) {
    let (ae, be, me) = voxel_matrices(space.voxel_size);
    let nv = space.n_velocity;
    let n = space.n_dofs();
    let mut t = Triplets::new(n, n);
    let mut lap = Triplets::new(nv, nv);
    let eps = PRESSURE_REGULARIZATION / mu;
    for (vel, pre) in space.voxel_velocity.iter().zip(&space.voxel_pressure) {
        let (Some(vel), Some(pre)) = (vel, pre) else { continue };
        let vd: Vec<Option<usize>> = (0..81).map(|r| vel[r / 3].map(|d| d + r % 3)).collect();
        for r in 0..81 {
            let Some(i) = vd[r] else { continue };
            for s in 0..81 {
                if let Some(j) = vd[s] {
                    t.push(i, j, mu * ae[(r, s)]);
                    lap.push(i, j, ae[(r, s)]);
                }
            }
            for p in 0..8 {
                t.push(i, nv + pre[p], be[(p, r)]);
                t.push(nv + pre[p], i, be[(p, r)]);
            }
        }
        for p in 0..8 {
            for q in 0..8 {
                t.push(nv + pre[p], nv + pre[q], -eps * me[(p, q)]);
            }
        }
    }
    (t.to_csr(), lap.to_csr())
}

/// The three periodic Darcy cell problems sharing one factorization.
pub struct DarcyCellProblem {
    pub space: FluidSpace,
    pub saddle: CsrMatrix,
    /// `(∇φ, ∇φ)` on the velocity dofs.
    pub laplacian: CsrMatrix,
    factor: Factorization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarcyCellSolution {
    pub axis: usize,
    pub omega: Vec<f64>,
    pub pressure: Vec<f64>,
    pub residual: f64,
}

impl DarcyCellProblem {
    pub fn new(cell: &CellMesh) -> Result<Self> {
        let space = FluidSpace::new(cell, [true; 3])?;
        let (saddle, laplacian) = assemble_stokes_cell(&space, 1.0);
        let factor = Factorization::lu(&saddle)?;
        Ok(Self { space, saddle, laplacian, factor })
    }

    /// `(∇ω_i, ∇W) − (π, div W) = (e_i, W)`, `div ω_i = 0`, `ω_i` periodic.
    pub fn solve(&self, axis: usize) -> Result<DarcyCellSolution> {
        let w = self.space.velocity_integrals();
        let mut rhs = vec![0.0; self.space.n_dofs()];
        for d in (axis..self.space.n_velocity).step_by(3) {
            rhs[d] = w[d];
        }
        let x = self.factor.solve(&rhs);
        let residual = relative_residual(&self.saddle, &x, &rhs);
        if !residual.is_finite() || residual > 1e-9 {
            return Err(Error::SolverFailure(format!("Darcy cell problem {axis}: relative residual {residual:e}")));
        }
        let nv = self.space.n_velocity;
        Ok(DarcyCellSolution { axis, omega: x[..nv].to_vec(), pressure: x[nv..].to_vec(), residual })
    }
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r: Vec<f64> = a.mul_vec(x).iter().zip(b).map(|(p, q)| p - q).collect();
    let s = norm2(b);
    if s > 0.0 {
        norm2(&r) / s
    } else {
        norm2(&r)
    }
}

/// `ω_i` for one axis (factors the cell operator; use [`DarcyCellProblem`]
/// for all three).
pub fn solve_darcy_cell(cell: &CellMesh, axis: usize) -> Result<DarcyCellSolution> {
    DarcyCellProblem::new(cell)?.solve(axis)
}

/// `k_ij = (1/|Y^f|)(∇ω_i, ∇ω_j)`.
pub fn permeability_from_cells(problem: &DarcyCellProblem, omega: &[DarcyCellSolution; 3], cell: &CellMesh) -> PermeabilityTensor {
    let mut k = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let v = problem.laplacian.bilinear(&omega[i].omega, &omega[j].omega) / problem.space.fluid_volume;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let blocked = std::array::from_fn(|a| !cell.fluid_connects(a));
    let t = PermeabilityTensor { k, provenance: Provenance::CellProblems, blocked, raw: None };
    if !t.is_spd() {
        log::warn!("permeability tensor is not positive definite (blocked axes {blocked:?})");
    }
    t
}

/// `k_ij = (1/|Y^f|) ∫ ω_i · e_j`, equal to the Gram form for exact
/// incompressibility.
pub fn permeability_from_means(problem: &DarcyCellProblem, omega: &[DarcyCellSolution; 3]) -> Matrix3<f64> {
    let mut k = Matrix3::zeros();
    for i in 0..3 {
        let m = problem.space.mean_velocity(&omega[i].omega);
        for j in 0..3 {
            k[(i, j)] = m[j];
        }
    }
    k
}

/// Cell-problem permeability of a voxel cell.
pub fn cell_permeability(cell: &CellMesh) -> Result<PermeabilityTensor> {
    let problem = DarcyCellProblem::new(cell)?;
    let omega = [problem.solve(0)?, problem.solve(1)?, problem.solve(2)?];
    Ok(permeability_from_cells(&problem, &omega, cell))
}

/// Pressure-driven Stokes flow along `axis`: periodic across the other two
/// axes, pressure `∓⟦p⟧/2` imposed as normal stress on the two faces normal
/// to `axis`. Returns the fluid-averaged velocity.
pub fn pressure_drop_flow(cell: &CellMesh, axis: usize, mu: f64, drop: f64) -> Result<Vector3<f64>> {
    let mut periodic = [true; 3];
    periodic[axis] = false;
    let space = FluidSpace::new(cell, periodic)?;
    let (saddle, _) = assemble_stokes_cell(&space, mu);
    let h = space.voxel_size;
    let area = match axis {
        0 => h[1] * h[2],
        1 => h[0] * h[2],
        _ => h[0] * h[1],
    };
    // face integrals of the Q2 basis on a voxel face
    let q2 = LagrangeBasis::new(2, 2);
    let rule = gauss_rule(3, 2);
    let mut face_w = vec![0.0; 9];
    for (xi, wq) in rule.points.iter().zip(&rule.weights) {
        for (a, p) in q2.eval(*xi, [0, 0, 0]).iter().enumerate() {
            face_w[a] += p * wq * area;
        }
    }
    let lagr = LagrangeBasis::new(2, 3);
    let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    let (p_in, p_out) = (-0.5 * drop, 0.5 * drop);
    let mut rhs = vec![0.0; space.n_dofs()];
    let m = cell.resolution[axis];
    let mut seen = vec![false; space.n_velocity];
    for v in 0..cell.n_voxels() {
        let Some(vel) = &space.voxel_velocity[v] else { continue };
        let pos = cell.voxel_ijk(v)[axis];
        for (side, p) in [(0usize, p_in), (2usize, -p_out)] {
            if (side == 0 && pos != 0) || (side == 2 && pos + 1 != m) {
                continue;
            }
            for (a, d) in vel.iter().enumerate() {
                let l = lagr.node_multi_index(a);
                if l[axis] != side {
                    continue;
                }
                if let Some(d) = d {
                    let fa = l[others[0]] + 3 * l[others[1]];
                    rhs[d + axis] += p * face_w[fa];
                    seen[d + axis] = true;
                }
            }
        }
    }
    if !seen.iter().any(|&s| s) {
        return Ok(Vector3::zeros());
    }
    let factor = Factorization::lu(&saddle)?;
    let x = factor.solve(&rhs);
    let residual = relative_residual(&saddle, &x, &rhs);
    if !residual.is_finite() || residual > 1e-9 {
        return Err(Error::SolverFailure(format!("pressure-drop flow along {axis}: relative residual {residual:e}")));
    }
    Ok(space.mean_velocity(&x[..space.n_velocity]))
}

/// Darcy-law fit `v̂_i = −(⟦p_i⟧/(L_i μ)) K e_i` from three pressure-drop
/// flows, `L_i` being the cell extent along `i`. The tensor is symmetrized;
/// the raw fit is kept in [`PermeabilityTensor::raw`].
pub fn permeability_darcy_fit(cell: &CellMesh, mu: f64, drops: [f64; 3]) -> Result<PermeabilityTensor> {
    if !(mu > 0.0) {
        return Err(Error::NonPositiveDimension(format!("viscosity μ = {mu}")));
    }
    let mut raw = Matrix3::zeros();
    let mut norms = [0.0; 3];
    for i in 0..3 {
        if drops[i] == 0.0 {
            return Err(Error::SingularFit(format!("zero pressure drop along axis {i}")));
        }
        let vhat = pressure_drop_flow(cell, i, mu, drops[i])?;
        let col = vhat * (-cell.extent[i] * mu / drops[i]);
        norms[i] = col.norm();
        raw.set_column(i, &col);
    }
    let top = norms.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::SingularFit("no flow along any axis".into()));
    }
    let blocked: [bool; 3] = std::array::from_fn(|i| norms[i] <= 1e-10 * top);
    let open: Vec<usize> = (0..3).filter(|&i| !blocked[i]).collect();
    let sub = DMatrix::from_fn(3, open.len(), |r, c| raw[(r, open[c])]);
    let sv = sub.singular_values();
    if sv.min() <= 1e-10 * sv.max() {
        return Err(Error::SingularFit(format!("mean velocities are linearly dependent (singular values {sv:?})")));
    }
    for (i, b) in blocked.iter().enumerate() {
        if *b {
            log::warn!("Darcy fit: no flow along axis {i}, column flagged");
        }
    }
    let k = 0.5 * (raw + raw.transpose());
    Ok(PermeabilityTensor { k, provenance: Provenance::DarcyFit, blocked, raw: Some(raw) })
}

/// `k33` of a square duct of side `a` from the Fourier series of Poiseuille
/// flow: `(64 a²/π⁶) Σ_{m,n odd} 1/(m² n² (m² + n²))`.
pub fn square_duct_permeability(a: f64) -> f64 {
    let mut s = 0.0;
    for m in (1..2000).step_by(2) {
        for n in (1..2000).step_by(2) {
            let (m2, n2) = ((m * m) as f64, (n * n) as f64);
            s += 1.0 / (m2 * n2 * (m2 + n2));
        }
    }
    64.0 * a * a / std::f64::consts::PI.powi(6) * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_fluid_cell_mesh;

    fn cube_inclusion(n: usize, c: usize) -> CellMesh {
        let lo = (n - c) / 2;
        let mut labels = vec![0u32; n * n * n];
        for k in lo..lo + c {
            for j in lo..lo + c {
                for i in lo..lo + c {
                    labels[i + n * (j + n * k)] = 1;
                }
            }
        }
        build_fluid_cell_mesh([n, n, n], labels, [1.0; 3]).unwrap()
    }

    #[test]
    fn duct_series_value() {
        assert!((square_duct_permeability(1.0) - 0.035144).abs() < 1e-6);
    }

    #[test]
    fn cube_inclusion_is_isotropic_spd_and_dual() {
        let cell = cube_inclusion(4, 2);
        let p = DarcyCellProblem::new(&cell).unwrap();
        let om = [p.solve(0).unwrap(), p.solve(1).unwrap(), p.solve(2).unwrap()];
        let k = permeability_from_cells(&p, &om, &cell);
        assert!(k.is_spd());
        assert_eq!(k.asymmetry(), 0.0);
        let d = k.k[(0, 0)];
        assert!((k.k[(1, 1)] - d).abs() < 1e-6 * d && (k.k[(2, 2)] - d).abs() < 1e-6 * d, "{}", k.k);
        assert!(k.k[(0, 1)].abs() < 1e-8 * d);
        let dual = permeability_from_means(&p, &om);
        assert!((dual - k.k).abs().max() < 1e-6 * d, "{dual} vs {}", k.k);
    }

    #[test]
    fn permeability_scales_with_cell_size_squared() {
        let mut labels = vec![0u32; 27];
        labels[13] = 1;
        let a = build_fluid_cell_mesh([3, 3, 3], labels.clone(), [1.0; 3]).unwrap();
        let b = build_fluid_cell_mesh([3, 3, 3], labels, [2.0; 3]).unwrap();
        let (ka, kb) = (cell_permeability(&a).unwrap(), cell_permeability(&b).unwrap());
        assert!((kb.k - ka.k * 4.0).abs().max() < 1e-8 * kb.k.abs().max());
    }

    #[test]
    fn no_fluid_is_rejected() {
        assert!(build_fluid_cell_mesh([2, 2, 2], vec![1; 8], [1.0; 3]).is_err());
    }
}
