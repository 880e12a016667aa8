//! Named load and inflow samplers used by scenario files.
//!
//! | sampler                              | meaning                                      |
//! |--------------------------------------|----------------------------------------------|
//! | `constant a [b c]`                   | constant value                               |
//! | `gaussian-pulse a [b c] t0 width`    | `a · exp(−((t − t0)/width)²)`                |
//! | `poiseuille vmax`                    | `vmax 16 x1(L1−x1) x2(L2−x2)/(L1² L2²) e3`   |
//! | `poiseuille-pulse vmax t0 width`     | Poiseuille profile times the Gaussian pulse  |
//! | `duct vmax`                          | developed rectangular-duct profile, peak `vmax` |
//!
//! The last three are inflow profiles.

use std::f64::consts::PI;

fn pulse(t: f64, t0: f64, width: f64) -> f64 {
    (-((t - t0) / width).powi(2)).exp()
}

fn numbers(args: &[&str]) -> Result<Vec<f64>, String> {
    args.iter().map(|t| t.parse::<f64>().map_err(|e| format!("`{t}` is not a number ({e})"))).collect()
}

fn split(spec: &str) -> (&str, Vec<&str>) {
    let mut w = spec.split_whitespace();
    let name = w.next().unwrap_or("");
    (name, w.collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarSampler {
    Constant(f64),
    GaussianPulse { amplitude: f64, t0: f64, width: f64 },
}

impl ScalarSampler {
    pub fn parse(spec: &str) -> Result<Self, String> {
        let (name, args) = split(spec);
        let v = numbers(&args)?;
        match (name, v.len()) {
            ("constant", 1) => Ok(Self::Constant(v[0])),
            ("gaussian-pulse", 3) if v[2] > 0.0 => Ok(Self::GaussianPulse { amplitude: v[0], t0: v[1], width: v[2] }),
            ("gaussian-pulse", 3) => Err("pulse width must be positive".into()),
            ("constant" | "gaussian-pulse", n) => Err(format!("`{name}` takes {} numbers, got {n}", if name == "constant" { 1 } else { 3 })),
            _ => Err(format!("unknown scalar sampler `{name}` (constant, gaussian-pulse)")),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(a) => a,
            Self::GaussianPulse { amplitude, t0, width } => amplitude * pulse(t, t0, width),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorSampler {
    Constant([f64; 3]),
    GaussianPulse { amplitude: [f64; 3], t0: f64, width: f64 },
}

impl VectorSampler {
    pub fn parse(spec: &str) -> Result<Self, String> {
        let (name, args) = split(spec);
        let v = numbers(&args)?;
        match (name, v.len()) {
            ("constant", 3) => Ok(Self::Constant([v[0], v[1], v[2]])),
            ("gaussian-pulse", 5) if v[4] > 0.0 => Ok(Self::GaussianPulse { amplitude: [v[0], v[1], v[2]], t0: v[3], width: v[4] }),
            ("gaussian-pulse", 5) => Err("pulse width must be positive".into()),
            ("constant" | "gaussian-pulse", n) => Err(format!("`{name}` takes {} numbers, got {n}", if name == "constant" { 3 } else { 5 })),
            _ => Err(format!("unknown vector sampler `{name}` (constant, gaussian-pulse)")),
        }
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        match *self {
            Self::Constant(a) => a,
            Self::GaussianPulse { amplitude, t0, width } => amplitude.map(|a| a * pulse(t, t0, width)),
        }
    }
}

const DUCT_TERMS: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InflowSampler {
    Constant([f64; 3]),
    Poiseuille { vmax: f64 },
    PoiseuillePulse { vmax: f64, t0: f64, width: f64 },
    Duct { vmax: f64 },
}

/// Fourier series of `−Δu = 1` on `(0, l1) × (0, l2)` with `u = 0` on the
/// boundary.
fn duct_series(x: [f64; 2], l: [f64; 2]) -> f64 {
    let mut s = 0.0;
    for m in (1..2 * DUCT_TERMS).step_by(2) {
        let sm = (m as f64 * PI * x[0] / l[0]).sin();
        for n in (1..2 * DUCT_TERMS).step_by(2) {
            let lambda = PI * PI * ((m * m) as f64 / (l[0] * l[0]) + (n * n) as f64 / (l[1] * l[1]));
            s += 16.0 / (PI * PI * (m * n) as f64 * lambda) * sm * (n as f64 * PI * x[1] / l[1]).sin();
        }
    }
    s
}

impl InflowSampler {
    pub fn parse(spec: &str) -> Result<Self, String> {
        let (name, args) = split(spec);
        let v = numbers(&args)?;
        match (name, v.len()) {
            ("constant", 3) => Ok(Self::Constant([v[0], v[1], v[2]])),
            ("poiseuille", 1) => Ok(Self::Poiseuille { vmax: v[0] }),
            ("duct", 1) => Ok(Self::Duct { vmax: v[0] }),
            ("poiseuille-pulse", 3) if v[2] > 0.0 => Ok(Self::PoiseuillePulse { vmax: v[0], t0: v[1], width: v[2] }),
            ("poiseuille-pulse", 3) => Err("pulse width must be positive".into()),
            ("constant" | "poiseuille" | "duct" | "poiseuille-pulse", n) => Err(format!("wrong number of arguments ({n}) for `{name}`")),
            _ => Err(format!("unknown inflow sampler `{name}` (constant, poiseuille, poiseuille-pulse, duct)")),
        }
    }

    /// Inflow velocity at `x̄` of a channel with cross-section `l = (L1, L2)`.
    pub fn eval(&self, x: [f64; 2], t: f64, l: [f64; 2]) -> [f64; 3] {
        let profile = || 16.0 * x[0] * (l[0] - x[0]) * x[1] * (l[1] - x[1]) / (l[0] * l[0] * l[1] * l[1]);
        match *self {
            Self::Constant(a) => a,
            Self::Poiseuille { vmax } => [0.0, 0.0, vmax * profile()],
            Self::PoiseuillePulse { vmax, t0, width } => [0.0, 0.0, vmax * pulse(t, t0, width) * profile()],
            Self::Duct { vmax } => [0.0, 0.0, vmax * duct_series(x, l) / duct_series([0.5 * l[0], 0.5 * l[1]], l)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poiseuille_peak_and_walls() {
        let s = InflowSampler::parse("poiseuille 2.5").unwrap();
        assert_eq!(s.eval([0.5, 1.0], 0.0, [1.0, 2.0]), [0.0, 0.0, 2.5]);
        assert_eq!(s.eval([0.0, 1.0], 0.0, [1.0, 2.0])[2], 0.0);
    }

    #[test]
    fn duct_profile_peaks_at_centre() {
        let s = InflowSampler::parse("duct 1").unwrap();
        let l = [1.0, 1.0];
        assert!((s.eval([0.5, 0.5], 0.0, l)[2] - 1.0).abs() < 1e-14);
        assert!(s.eval([0.0, 0.3], 0.0, l)[2].abs() < 1e-14);
        assert!(s.eval([0.25, 0.5], 0.0, l)[2] < 1.0);
    }

    #[test]
    fn pulse_switches_off() {
        let s = ScalarSampler::parse("gaussian-pulse 2 0.1 0.02").unwrap();
        assert_eq!(s.eval(0.1), 2.0);
        assert!(s.eval(0.5) < 1e-100);
        let v = VectorSampler::parse("gaussian-pulse 0 0 1 0 1").unwrap();
        assert_eq!(v.eval(0.0), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(ScalarSampler::parse("constant").is_err());
        assert!(VectorSampler::parse("constant 1 2").is_err());
        assert!(InflowSampler::parse("parabola 1").is_err());
        assert!(ScalarSampler::parse("gaussian-pulse 1 0 0").is_err());
    }
}
