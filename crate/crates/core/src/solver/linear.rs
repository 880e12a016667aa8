//! Sparse direct and iterative linear solves.

use std::ops::Range;
use std::time::{Duration, Instant};

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    DirectLu,
    /// Sparse Cholesky; only valid for symmetric positive definite matrices.
    DirectCholesky,
    Gmres,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    /// Relative residual target `‖Ax − b‖ ≤ tol ‖b‖`.
    pub tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
    /// Diagonal blocks used by the GMRES preconditioner. Each block is
    /// factored exactly; indices outside every block get Jacobi scaling.
    pub blocks: Vec<Range<usize>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { method: Method::DirectLu, tol: 1e-10, restart: 200, max_iterations: 5000, blocks: Vec::new() }
    }
}

impl SolveOptions {
    pub fn gmres(blocks: Vec<Range<usize>>) -> Self {
        Self { method: Method::Gmres, blocks, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolveReport {
    pub method: Method,
    pub iterations: usize,
    /// Final relative residual `‖Ax − b‖ / ‖b‖`.
    pub residual: f64,
    pub elapsed: Duration,
}

fn to_faer(a: &CsrMatrix) -> Result<SparseColMat<usize, f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = a.triplet_iter().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(a.nrows, a.ncols, &trip)
        .map_err(|e| Error::SolverFailure(format!("matrix conversion: {e:?}")))
}

enum Inner {
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>),
    Llt(faer::sparse::linalg::solvers::Llt<usize, f64>),
}

/// A reusable sparse factorization.
pub struct Factorization {
    inner: Inner,
    n: usize,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("n", &self.n).finish()
    }
}

impl Factorization {
    pub fn lu(a: &CsrMatrix) -> Result<Self> {
        check_square(a)?;
        let m = to_faer(a)?;
        let lu = m.sp_lu().map_err(|e| Error::SingularMatrix(format!("{e:?}")))?;
        Ok(Self { inner: Inner::Lu(lu), n: a.nrows })
    }

    pub fn cholesky(a: &CsrMatrix) -> Result<Self> {
        check_square(a)?;
        let m = to_faer(a)?;
        let llt = m.sp_cholesky(Side::Lower).map_err(|e| Error::SingularMatrix(format!("{e:?}")))?;
        Ok(Self { inner: Inner::Llt(llt), n: a.nrows })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let rhs = Col::<f64>::from_fn(self.n, |i| b[i]);
        let x = match &self.inner {
            Inner::Lu(lu) => lu.solve(&rhs),
            Inner::Llt(llt) => llt.solve(&rhs),
        };
        (0..self.n).map(|i| x[i]).collect()
    }
}

fn check_square(a: &CsrMatrix) -> Result<()> {
    if a.nrows != a.ncols {
        return Err(Error::DofMismatch(format!("matrix is {}×{}", a.nrows, a.ncols)));
    }
    Ok(())
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// Solve `A x = b`. Direct paths check the residual against `tol` and
/// report non-finite or inaccurate results as a singular matrix.
pub fn sparse_solve(a: &CsrMatrix, b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, LinearSolveReport)> {
    check_square(a)?;
    if b.len() != a.nrows {
        return Err(Error::DofMismatch(format!("rhs has {} entries for {} rows", b.len(), a.nrows)));
    }
    let start = Instant::now();
    if norm2(b) == 0.0 {
        let report = LinearSolveReport { method: opts.method, iterations: 0, residual: 0.0, elapsed: start.elapsed() };
        return Ok((vec![0.0; b.len()], report));
    }
    match opts.method {
        Method::DirectLu | Method::DirectCholesky => {
            let f = if opts.method == Method::DirectLu { Factorization::lu(a)? } else { Factorization::cholesky(a)? };
            let x = f.solve(b);
            let residual = relative_residual(a, &x, b);
            if !residual.is_finite() || !(residual <= opts.tol.max(1e-8)) {
                return Err(Error::SingularMatrix(format!("direct solve left relative residual {residual:e}")));
            }
            Ok((x, LinearSolveReport { method: opts.method, iterations: 1, residual, elapsed: start.elapsed() }))
        }
        Method::Gmres => {
            let pre = BlockPreconditioner::new(a, &opts.blocks)?;
            let (x, iterations, residual) = gmres(a, b, &pre, opts)?;
            Ok((x, LinearSolveReport { method: Method::Gmres, iterations, residual, elapsed: start.elapsed() }))
        }
    }
}

/// Block-diagonal preconditioner with exactly factored diagonal blocks.
pub struct BlockPreconditioner {
    blocks: Vec<(Vec<usize>, Factorization)>,
    jacobi: Vec<(usize, f64)>,
}

impl BlockPreconditioner {
    pub fn new(a: &CsrMatrix, ranges: &[Range<usize>]) -> Result<Self> {
        let mut covered = vec![false; a.nrows];
        let mut blocks = Vec::new();
        for r in ranges {
            let idx: Vec<usize> = r.clone().filter(|&i| !covered[i]).collect();
            if idx.is_empty() {
                continue;
            }
            idx.iter().for_each(|&i| covered[i] = true);
            let sub = a.select(&idx, &idx);
            blocks.push((idx, Factorization::lu(&sub)?));
        }
        let jacobi = (0..a.nrows)
            .filter(|&i| !covered[i])
            .map(|i| {
                let d = a.get(i, i);
                (i, if d != 0.0 { 1.0 / d } else { 1.0 })
            })
            .collect();
        Ok(Self { blocks, jacobi })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; r.len()];
        for (idx, f) in &self.blocks {
            let sub: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
            for (k, v) in f.solve(&sub).into_iter().enumerate() {
                z[idx[k]] = v;
            }
        }
        for &(i, s) in &self.jacobi {
            z[i] = s * r[i];
        }
        z
    }
}

/// Right-preconditioned restarted GMRES; the residual is the true one.
fn gmres(a: &CsrMatrix, b: &[f64], pre: &BlockPreconditioner, opts: &SolveOptions) -> Result<(Vec<f64>, usize, f64)> {
    let n = b.len();
    let nb = norm2(b);
    let mut x = vec![0.0; n];
    let mut total = 0;
    let m = opts.restart.max(1);
    loop {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm2(&r);
        if beta <= opts.tol * nb {
            return Ok((x, total, beta / nb));
        }
        if total >= opts.max_iterations {
            return Err(Error::MaxIterations { iterations: total, residual: beta / nb });
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let zk = pre.apply(&v[k]);
            let mut w = a.mul_vec(&zk);
            z.push(zk);
            for (i, vi) in v.iter().enumerate() {
                let hik = dot(&w, vi);
                h[i][k] = hik;
                w.iter_mut().zip(vi).for_each(|(wj, vj)| *wj -= hik * vj);
            }
            let hn = norm2(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if d == 0.0 {
                return Err(Error::SingularMatrix("GMRES breakdown".into()));
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            if g[k + 1].abs() <= 0.5 * opts.tol * nb || total >= opts.max_iterations || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&z[j]).for_each(|(xi, zi)| *xi += yj * zi);
        }
    }
}

/// Solution of `A x = b` with `x[i] = values[i]` wherever `fixed[i]`, by
/// elimination of the fixed rows and columns (the right-hand side is
/// corrected with the fixed columns).
pub fn solve_constrained(
    a: &CsrMatrix,
    b: &[f64],
    fixed: &[bool],
    values: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, LinearSolveReport)> {
    let free: Vec<usize> = (0..a.nrows).filter(|&i| !fixed[i]).collect();
    let (reduced, rhs) = reduce(a, b, fixed, values, &free);
    let ropts = SolveOptions { blocks: remap_blocks(&opts.blocks, fixed), ..opts.clone() };
    let (xf, report) = if free.is_empty() {
        (Vec::new(), LinearSolveReport { method: opts.method, iterations: 0, residual: 0.0, elapsed: Duration::ZERO })
    } else {
        sparse_solve(&reduced, &rhs, &ropts)?
    };
    Ok((expand(&xf, &free, fixed, values), report))
}

/// Reduced matrix on the free DOFs and the corrected right-hand side.
pub fn reduce(a: &CsrMatrix, b: &[f64], fixed: &[bool], values: &[f64], free: &[usize]) -> (CsrMatrix, Vec<f64>) {
    let reduced = a.select(free, free);
    let rhs = free
        .iter()
        .map(|&i| b[i] - a.row(i).filter(|(j, _)| fixed[*j]).map(|(j, v)| v * values[j]).sum::<f64>())
        .collect();
    (reduced, rhs)
}

pub fn expand(xf: &[f64], free: &[usize], fixed: &[bool], values: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = (0..fixed.len()).map(|i| if fixed[i] { values[i] } else { 0.0 }).collect();
    for (k, &i) in free.iter().enumerate() {
        x[i] = xf[k];
    }
    x
}

fn remap_blocks(blocks: &[Range<usize>], fixed: &[bool]) -> Vec<Range<usize>> {
    let mut new_index = vec![0usize; fixed.len() + 1];
    for i in 0..fixed.len() {
        new_index[i + 1] = new_index[i] + usize::from(!fixed[i]);
    }
    blocks.iter().map(|r| new_index[r.start]..new_index[r.end]).filter(|r| !r.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Triplets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.5, -2.0, 0.25];
        let (x, r) = sparse_solve(&CsrMatrix::identity(3), &b, &SolveOptions::default()).unwrap();
        assert_eq!(x, b);
        assert!(r.residual <= 1e-15);
    }

    #[test]
    fn diagonal_system() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 2.0);
        t.push(1, 1, 4.0);
        let (x, _) = sparse_solve(&t.to_csr(), &[2.0, 8.0], &SolveOptions::default()).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    fn random_spd(n: usize, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = m.transpose() * &m + nalgebra::DMatrix::identity(n, n);
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            for j in 0..n {
                t.push(i, j, a[(i, j)]);
            }
        }
        t.to_csr()
    }

    #[test]
    fn random_spd_all_paths() {
        let a = random_spd(100, 11);
        let b: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        for opts in [
            SolveOptions::default(),
            SolveOptions { method: Method::DirectCholesky, ..SolveOptions::default() },
            SolveOptions::gmres(vec![0..50, 50..100]),
            SolveOptions::gmres(vec![]),
        ] {
            let (x, rep) = sparse_solve(&a, &b, &opts).unwrap();
            assert!(relative_residual(&a, &x, &b) <= 1e-10, "{:?}", rep);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        assert!(sparse_solve(&t.to_csr(), &[1.0, 0.0], &SolveOptions::default()).is_err());
    }

    #[test]
    fn gmres_iteration_cap() {
        let a = random_spd(60, 5);
        let b = vec![1.0; 60];
        let opts = SolveOptions { max_iterations: 2, restart: 1, ..SolveOptions::gmres(vec![]) };
        assert!(matches!(sparse_solve(&a, &b, &opts), Err(Error::MaxIterations { .. })));
    }

    #[test]
    fn constrained_solve_keeps_prescribed_values() {
        let a = random_spd(20, 2);
        let b = vec![0.5; 20];
        let mut fixed = vec![false; 20];
        fixed[3] = true;
        fixed[17] = true;
        let mut values = vec![0.0; 20];
        values[3] = 2.0;
        values[17] = -1.0;
        let (x, _) = solve_constrained(&a, &b, &fixed, &values, &SolveOptions::default()).unwrap();
        assert_eq!((x[3], x[17]), (2.0, -1.0));
        let ax = a.mul_vec(&x);
        for i in (0..20).filter(|i| !fixed[*i]) {
            assert!((ax[i] - b[i]).abs() < 1e-10);
        }
    }
}
