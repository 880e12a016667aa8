//! Tensor-product Gauss–Legendre rules on the unit interval/square/cube.

/// 1D Gauss–Legendre points and weights on `[0, 1]`, `n` in `1..=5`.
pub fn gauss_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    // nodes/weights on [-1, 1]
    let (x, w): (&[f64], &[f64]) = match n {
        1 => (&[0.0], &[2.0]),
        2 => {
            const A: f64 = 0.577_350_269_189_625_8;
            (&[-A, A], &[1.0, 1.0])
        }
        3 => {
            const A: f64 = 0.774_596_669_241_483_4;
            (&[-A, 0.0, A], &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            const A: f64 = 0.339_981_043_584_856_3;
            const B: f64 = 0.861_136_311_594_052_6;
            const WA: f64 = 0.652_145_154_862_546_1;
            const WB: f64 = 0.347_854_845_137_453_9;
            (&[-B, -A, A, B], &[WB, WA, WA, WB])
        }
        5 => {
            const A: f64 = 0.538_469_310_105_683_1;
            const B: f64 = 0.906_179_845_938_664;
            const WA: f64 = 0.478_628_670_499_366_5;
            const WB: f64 = 0.236_926_885_056_189_1;
            const W0: f64 = 128.0 / 225.0;
            (&[-B, -A, 0.0, A, B], &[WB, WA, W0, WA, WB])
        }
        _ => panic!("Gauss rule with {n} points per axis is not tabulated (1..=5)"),
    };
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|w| 0.5 * w).collect())
}

/// Quadrature rule on the reference cell `[0,1]^dim`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Tensor-product rule with `n` points per axis; unused coordinates are 0.
pub fn gauss_rule(n: usize, dim: usize) -> QuadratureRule {
    assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
    let (x, w) = gauss_1d(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let nz = if dim == 3 { n } else { 1 };
    let ny = if dim >= 2 { n } else { 1 };
    for c in 0..nz {
        for b in 0..ny {
            for a in 0..n {
                points.push([
                    x[a],
                    if dim >= 2 { x[b] } else { 0.0 },
                    if dim == 3 { x[c] } else { 0.0 },
                ]);
                weights.push(w[a] * if dim >= 2 { w[b] } else { 1.0 } * if dim == 3 { w[c] } else { 1.0 });
            }
        }
    }
    QuadratureRule { points, weights }
}
