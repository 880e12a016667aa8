//! Tensor-product Lagrange bases `Q1`, `Q2`, `Q3` on equispaced nodes of the
//! reference cell `[0,1]^dim`. Node `(a, b, c)` has index
//! `a + (p+1) b + (p+1)^2 c` and reference coordinates `(a, b, c) / p`.

/// 1D Lagrange polynomial `l_a` of degree `p` (nodes `k/p`) and its
/// derivatives up to second order at `x`.
pub fn lagrange_1d(p: usize, a: usize, x: f64, deriv: usize) -> f64 {
    let nodes: Vec<f64> = (0..=p).map(|k| k as f64 / p as f64).collect();
    let xa = nodes[a];
    let others: Vec<f64> = nodes.iter().enumerate().filter(|(k, _)| *k != a).map(|(_, v)| *v).collect();
    let denom: f64 = others.iter().map(|xk| xa - xk).product();
    let num = match deriv {
        0 => others.iter().map(|xk| x - xk).product(),
        1 => (0..others.len())
            .map(|m| others.iter().enumerate().filter(|(k, _)| *k != m).map(|(_, xk)| x - xk).product::<f64>())
            .sum(),
        2 => {
            let mut s = 0.0;
            for m in 0..others.len() {
                for n in 0..others.len() {
                    if m == n {
                        continue;
                    }
                    s += others
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != m && *k != n)
                        .map(|(_, xk)| x - xk)
                        .product::<f64>();
                }
            }
            s
        }
        _ => panic!("derivative order {deriv} not supported"),
    };
    num / denom
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagrangeBasis {
    pub order: usize,
    pub dim: usize,
}

impl LagrangeBasis {
    pub fn new(order: usize, dim: usize) -> Self {
        assert!((1..=3).contains(&order), "Lagrange order must be 1, 2 or 3");
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        Self { order, dim }
    }

    pub fn n_nodes(&self) -> usize {
        (self.order + 1).pow(self.dim as u32)
    }

    pub fn node_multi_index(&self, n: usize) -> [usize; 3] {
        let q = self.order + 1;
        [n % q, if self.dim >= 2 { (n / q) % q } else { 0 }, if self.dim == 3 { n / (q * q) } else { 0 }]
    }

    pub fn node_coord(&self, n: usize) -> [f64; 3] {
        let m = self.node_multi_index(n);
        let p = self.order as f64;
        [m[0] as f64 / p, m[1] as f64 / p, m[2] as f64 / p]
    }

    /// Values (or partial derivatives of order `deriv` per axis) of all basis
    /// functions at a reference point.
    pub fn eval(&self, x: [f64; 3], deriv: [usize; 3]) -> Vec<f64> {
        let p = self.order;
        let tables: Vec<Vec<f64>> =
            (0..self.dim).map(|d| (0..=p).map(|a| lagrange_1d(p, a, x[d], deriv[d])).collect()).collect();
        (0..self.n_nodes())
            .map(|n| {
                let m = self.node_multi_index(n);
                (0..self.dim).map(|d| tables[d][m[d]]).product()
            })
            .collect()
    }

    /// Values and reference gradients of all basis functions.
    pub fn values_and_gradients(&self, x: [f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>) {
        let p = self.order;
        let mut val = [[0.0; 4]; 3];
        let mut der = [[0.0; 4]; 3];
        for d in 0..self.dim {
            for a in 0..=p {
                val[d][a] = lagrange_1d(p, a, x[d], 0);
                der[d][a] = lagrange_1d(p, a, x[d], 1);
            }
        }
        let n = self.n_nodes();
        let mut v = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        for node in 0..n {
            let m = self.node_multi_index(node);
            let mut value = 1.0;
            let mut grad = [1.0; 3];
            for d in 0..3 {
                if d >= self.dim {
                    grad[d] = 0.0;
                    continue;
                }
                value *= val[d][m[d]];
                for (e, gr) in grad.iter_mut().enumerate().take(self.dim) {
                    *gr *= if e == d { der[d][m[d]] } else { val[d][m[d]] };
                }
            }
            v.push(value);
            g.push(grad);
        }
        (v, g)
    }
}

/// `q_basis(order, point, deriv)` in free-function form.
pub fn q_basis(order: usize, dim: usize, x: [f64; 3], deriv: [usize; 3]) -> Vec<f64> {
    LagrangeBasis::new(order, dim).eval(x, deriv)
}
