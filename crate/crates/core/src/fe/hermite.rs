//! Cubic Hermite splines and the Bogner–Fox–Schmit (BFS) tensor-product
//! element built from them.
//!
//! Local BFS numbering: corner `β = (β1, β2)` has index `β1 + 2 β2` and
//! derivative type `α = (α1, α2)` has index `α1 + 2 α2`, so the 16 local
//! functions are ordered `4 * corner + type` with types
//! `[value, ∂1, ∂2, ∂1∂2]`.

/// `∂^deriv Ĥ_{αβ}(x)` on the unit interval.
pub fn hermite_eval(alpha: usize, beta: usize, x: f64, deriv: usize) -> f64 {
    match (alpha, beta, deriv) {
        (0, 0, 0) => (2.0 * x + 1.0) * (x - 1.0) * (x - 1.0),
        (0, 0, 1) => 6.0 * x * x - 6.0 * x,
        (0, 0, 2) => 12.0 * x - 6.0,
        (0, 0, 3) => 12.0,
        (1, 0, 0) => x * (x - 1.0) * (x - 1.0),
        (1, 0, 1) => 3.0 * x * x - 4.0 * x + 1.0,
        (1, 0, 2) => 6.0 * x - 4.0,
        (1, 0, 3) => 6.0,
        (0, 1, 0) => x * x * (3.0 - 2.0 * x),
        (0, 1, 1) => 6.0 * x - 6.0 * x * x,
        (0, 1, 2) => 6.0 - 12.0 * x,
        (0, 1, 3) => -12.0,
        (1, 1, 0) => x * x * (x - 1.0),
        (1, 1, 1) => 3.0 * x * x - 2.0 * x,
        (1, 1, 2) => 6.0 * x - 2.0,
        (1, 1, 3) => 6.0,
        (_, _, d) if d > 3 && alpha < 2 && beta < 2 => 0.0,
        _ => panic!("invalid Hermite index (α={alpha}, β={beta}, d={deriv})"),
    }
}

/// Derivative `∂^deriv` of the physical spline `H_{αβ}` on an interval of
/// length `len`, evaluated at local coordinate `xi = (x - x0)/len`.
pub fn hermite_physical(alpha: usize, beta: usize, len: f64, xi: f64, deriv: usize) -> f64 {
    len.powi(alpha as i32 - deriv as i32) * hermite_eval(alpha, beta, xi, deriv)
}

/// Reference BFS function `B̂_{α,β}` or its partial derivative at `x`.
pub fn bfs_eval(alpha: [usize; 2], beta: [usize; 2], x: [f64; 2], deriv: [usize; 2]) -> f64 {
    hermite_eval(alpha[0], beta[0], x[0], deriv[0]) * hermite_eval(alpha[1], beta[1], x[1], deriv[1])
}

pub const BFS_TYPES: [[usize; 2]; 4] = [[0, 0], [1, 0], [0, 1], [1, 1]];
pub const BFS_CORNERS: [[usize; 2]; 4] = [[0, 0], [1, 0], [0, 1], [1, 1]];

/// BFS element on an axis-aligned rectangle with edge lengths `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfsElement {
    pub h: [f64; 2],
}

impl BfsElement {
    pub fn new(h: [f64; 2]) -> Self {
        Self { h }
    }

    /// Physical partial derivative `∂^deriv` of all 16 local functions at
    /// reference point `xi ∈ [0,1]^2`.
    pub fn eval(&self, xi: [f64; 2], deriv: [usize; 2]) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (c, beta) in BFS_CORNERS.iter().enumerate() {
            for (t, alpha) in BFS_TYPES.iter().enumerate() {
                out[4 * c + t] = hermite_physical(alpha[0], beta[0], self.h[0], xi[0], deriv[0])
                    * hermite_physical(alpha[1], beta[1], self.h[1], xi[1], deriv[1]);
            }
        }
        out
    }

    /// Physical Hessian entries `(∂11, ∂22, ∂12)` of all local functions.
    pub fn hessians(&self, xi: [f64; 2]) -> [[f64; 3]; 16] {
        let d11 = self.eval(xi, [2, 0]);
        let d22 = self.eval(xi, [0, 2]);
        let d12 = self.eval(xi, [1, 1]);
        let mut out = [[0.0; 3]; 16];
        for k in 0..16 {
            out[k] = [d11[k], d22[k], d12[k]];
        }
        out
    }
}

/// BFS interpolant `Π_BFS[w]` at reference point `xi` from corner data
/// `[w, ∂1 w, ∂2 w, ∂1∂2 w]` (corners in local order).
pub fn bfs_interpolate(corner_data: &[[f64; 4]; 4], h: [f64; 2], xi: [f64; 2]) -> f64 {
    bfs_interpolate_deriv(corner_data, h, xi, [0, 0])
}

/// Partial derivative of the BFS interpolant.
pub fn bfs_interpolate_deriv(corner_data: &[[f64; 4]; 4], h: [f64; 2], xi: [f64; 2], deriv: [usize; 2]) -> f64 {
    let phi = BfsElement::new(h).eval(xi, deriv);
    let mut s = 0.0;
    for c in 0..4 {
        for t in 0..4 {
            s += corner_data[c][t] * phi[4 * c + t];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_table() {
        for alpha in 0..2 {
            for beta in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let v = hermite_eval(alpha, beta, b as f64, a);
                        let e = if a == alpha && b == beta { 1.0 } else { 0.0 };
                        assert_eq!(v, e, "α={alpha} β={beta} a={a} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn point_values() {
        assert_eq!(hermite_eval(0, 0, 0.0, 0), 1.0);
        assert_eq!(hermite_eval(1, 0, 0.0, 1), 1.0);
        assert_eq!(hermite_eval(0, 1, 0.5, 0), 0.5);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let eps = 1e-6;
        for alpha in 0..2 {
            for beta in 0..2 {
                for d in 0..3 {
                    let x = 0.37;
                    let fd = (hermite_eval(alpha, beta, x + eps, d) - hermite_eval(alpha, beta, x - eps, d)) / (2.0 * eps);
                    assert!((fd - hermite_eval(alpha, beta, x, d + 1)).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn bfs_nodal_properties() {
        assert_eq!(bfs_eval([0, 0], [1, 0], [1.0, 0.0], [0, 0]), 1.0);
        assert_eq!(bfs_eval([1, 1], [1, 0], [1.0, 0.0], [1, 1]), 1.0);
        for alpha in BFS_TYPES {
            for beta in BFS_CORNERS {
                for corner in BFS_CORNERS {
                    for deriv in BFS_TYPES {
                        let v = bfs_eval(alpha, beta, [corner[0] as f64, corner[1] as f64], deriv);
                        let e = if corner == beta && deriv == alpha { 1.0 } else { 0.0 };
                        assert_eq!(v, e);
                    }
                }
            }
        }
    }

    #[test]
    fn constant_is_reproduced() {
        let data = [[1.0, 0.0, 0.0, 0.0]; 4];
        for i in 0..5 {
            for j in 0..5 {
                let xi = [i as f64 / 4.0, j as f64 / 4.0];
                assert!((bfs_interpolate(&data, [0.3, 0.7], xi) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn product_x1_x2_is_reproduced() {
        let h = [0.5, 0.25];
        let x0 = [0.25, 1.0];
        let mut data = [[0.0; 4]; 4];
        for (c, b) in BFS_CORNERS.iter().enumerate() {
            let x = [x0[0] + b[0] as f64 * h[0], x0[1] + b[1] as f64 * h[1]];
            data[c] = [x[0] * x[1], x[1], x[0], 1.0];
        }
        for i in 0..5 {
            for j in 0..5 {
                let xi = [i as f64 / 4.0, j as f64 / 4.0];
                let x = [x0[0] + xi[0] * h[0], x0[1] + xi[1] * h[1]];
                assert!((bfs_interpolate(&data, h, xi) - x[0] * x[1]).abs() < 1e-15);
            }
        }
    }

    /// Sampled sup-norm interpolation error of sin(x1) sin(x2) on [1,1+h]^2.
    fn sin_error(h: f64) -> f64 {
        let mut data = [[0.0; 4]; 4];
        for (c, b) in BFS_CORNERS.iter().enumerate() {
            let (x, y) = (1.0 + b[0] as f64 * h, 1.0 + b[1] as f64 * h);
            data[c] = [x.sin() * y.sin(), x.cos() * y.sin(), x.sin() * y.cos(), x.cos() * y.cos()];
        }
        let mut err: f64 = 0.0;
        for i in 0..=20 {
            for j in 0..=20 {
                let xi = [i as f64 / 20.0, j as f64 / 20.0];
                let exact = (1.0 + xi[0] * h).sin() * (1.0 + xi[1] * h).sin();
                err = err.max((bfs_interpolate(&data, [h, h], xi) - exact).abs());
            }
        }
        err
    }

    #[test]
    fn fourth_order_interpolation_error() {
        let e1 = sin_error(0.4);
        let e2 = sin_error(0.2);
        let e3 = sin_error(0.1);
        assert!(e1 < 0.4f64.powi(4));
        let r1 = e1 / e2;
        let r2 = e2 / e3;
        assert!((13.0..19.0).contains(&r1), "ratio {r1}");
        assert!((13.0..19.0).contains(&r2), "ratio {r2}");
    }
}
