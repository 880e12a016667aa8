//! Yarn material files for the elastic cell problems.
//!
//! ```text
//! [solid]            # every yarn label
//! E = 1.0e9
//! nu = 0.3           # or: lambda = ..., mu = ...
//! [label 2]          # optional per-label override
//! E = 2.0e9
//! nu = 0.25
//! [contact]
//! normal = 1.0e12    # δ⁻¹
//! friction = 1.0e12  # γ
//! [plate]
//! thickness = 1.0e-3 # δ
//! density = 7800     # optional, solid density
//! ```

use std::path::Path;

use nalgebra::Matrix6;

use crate::error::{Error, Result};
use crate::homogenize::{isotropic_stiffness, lame_from_young, CellMaterial};
use crate::io::kv::{Document, Reader};

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    pub material: CellMaterial,
    pub thickness: f64,
    pub density: Option<f64>,
}

impl MaterialSpec {
    /// Areal density `ρ̂s = ρ |Y^s|/|Y| δ`.
    pub fn areal_density(&self, solid_fraction: f64) -> Option<f64> {
        self.density.map(|d| d * solid_fraction * self.thickness)
    }
}

fn elasticity(r: &mut Reader, section: &str) -> Option<Matrix6<f64>> {
    let has = |r: &mut Reader, k: &str| r.raw(section, k).is_some();
    let young = has(r, "E") || has(r, "nu");
    let lame = has(r, "lambda") || has(r, "mu");
    if young && lame {
        r.error(None, section, "E", "give either E/nu or lambda/mu, not both");
        return None;
    }
    if lame {
        let l = r.req_f64(section, "lambda");
        let m = r.req_positive(section, "mu");
        return Some(isotropic_stiffness(l?, m?));
    }
    let e = r.req_positive(section, "E");
    let nu = r.req_f64(section, "nu");
    let nu = nu?;
    if !(-1.0 < nu && nu < 0.5) {
        let entry = r.raw(section, "nu");
        r.error(entry, section, "nu", format!("must lie in (-1, 0.5), got {nu}"));
        return None;
    }
    let (l, m) = lame_from_young(e?, nu);
    Some(isotropic_stiffness(l, m))
}

pub fn parse_material(text: &str) -> Result<MaterialSpec> {
    let doc = Document::parse(text)?;
    let mut r = Reader::new(&doc);
    let solid = if doc.section("solid").is_some() { elasticity(&mut r, "solid") } else { None };
    let mut labels: Vec<(u32, Option<Matrix6<f64>>)> = Vec::new();
    for s in &doc.sections {
        if let Some(k) = s.name.strip_prefix("label ") {
            match k.trim().parse::<u32>() {
                Ok(k) if k >= 1 => labels.push((k, elasticity(&mut r, &s.name))),
                _ => r.errors.push(format!("line {}: [{}] needs a yarn label k >= 1", s.line, s.name)),
            }
        }
    }
    if doc.section("solid").is_none() && labels.is_empty() {
        r.errors.push("[solid] missing: no elasticity given".into());
    }
    let normal = r.req_positive("contact", "normal");
    let friction = r.req_positive("contact", "friction");
    let thickness = r.positive("plate", "thickness").unwrap_or(1.0);
    let density = r.positive("plate", "density");
    r.finish_unknown(&["solid", "label *", "contact", "plate"]);
    if !r.errors.is_empty() {
        return Err(Error::Validation(r.errors));
    }
    let mut elasticity = match solid {
        Some(d) if labels.is_empty() => vec![d],
        _ => {
            let max = labels.iter().map(|(k, _)| *k).max().unwrap_or(1) as usize;
            let mut v = Vec::with_capacity(max);
            for k in 1..=max as u32 {
                match labels.iter().find(|(l, _)| *l == k).and_then(|(_, d)| *d).or(solid) {
                    Some(d) => v.push(d),
                    None => return Err(Error::Validation(vec![format!("no elasticity for label {k} and no [solid] default")])),
                }
            }
            v
        }
    };
    elasticity.shrink_to_fit();
    let material = CellMaterial { elasticity, contact_normal: normal.unwrap_or(0.0), contact_friction: friction.unwrap_or(0.0) };
    material.validate()?;
    Ok(MaterialSpec { material, thickness, density })
}

pub fn read_material(path: &Path) -> Result<MaterialSpec> {
    parse_material(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn young_and_lame_agree() {
        let a = parse_material("[solid]\nE = 1\nnu = 0.3\n[contact]\nnormal = 10\nfriction = 1\n").unwrap();
        let (l, m) = lame_from_young(1.0, 0.3);
        let b = parse_material(&format!("[solid]\nlambda = {l:e}\nmu = {m:e}\n[contact]\nnormal = 10\nfriction = 1\n")).unwrap();
        assert_eq!(a.material, b.material);
        assert_eq!(a.thickness, 1.0);
        assert_eq!(a.material.contact_normal, 10.0);
    }

    #[test]
    fn per_label_overrides() {
        let m = parse_material("[solid]\nE = 1\nnu = 0.3\n[label 3]\nE = 5\nnu = 0.3\n[contact]\nnormal = 1\nfriction = 1\n[plate]\nthickness = 0.01\ndensity = 2\n").unwrap();
        assert_eq!(m.material.elasticity.len(), 3);
        assert_eq!(m.material.stiffness_for(1), m.material.stiffness_for(2));
        assert!((m.material.stiffness_for(3)[(0, 0)] / m.material.stiffness_for(1)[(0, 0)] - 5.0).abs() < 1e-12);
        assert_eq!(m.areal_density(0.5), Some(0.01));
    }

    #[test]
    fn all_violations_listed() {
        match parse_material("[solid]\nE = -1\nnu = 0.7\n[contact]\nfriction = 0\n[extra]\n") {
            Err(Error::Validation(v)) => assert!(v.len() >= 5, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }
}
