//! Plate tensor files.
//!
//! ```text
//! AHOM
//! a11 a12 a16
//! a21 a22 a26
//! a61 a62 a66
//! BHOM
//! ...
//! CHOM
//! ...
//! KHAT
//! k11 k12 k13
//! k21 k22 k23
//! k31 k32 k33
//! RHOS
//! rho
//! FACET 12
//! CHOM
//! ...
//! END
//! ```
//!
//! Every section is optional. A `FACET n ... END` block overrides the
//! global sections on Σ quad `n`. Numbers are written in the shortest form
//! that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::tensors::StiffnessTriple;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorBlock {
    pub a: Option<Matrix3<f64>>,
    pub b: Option<Matrix3<f64>>,
    pub c: Option<Matrix3<f64>>,
    pub khat: Option<Matrix3<f64>>,
    pub rho_s: Option<f64>,
}

impl TensorBlock {
    pub fn triple(&self) -> Option<StiffnessTriple> {
        Some(StiffnessTriple::from_voigt(self.a?, self.b.unwrap_or_else(Matrix3::zeros), self.c?))
    }

    pub fn set_triple(&mut self, t: &StiffnessTriple) {
        self.a = Some(t.a_voigt());
        self.b = Some(t.b_voigt());
        self.c = Some(t.c_voigt());
    }

    fn merged_over(&self, base: &TensorBlock) -> TensorBlock {
        TensorBlock {
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            c: self.c.or(base.c),
            khat: self.khat.or(base.khat),
            rho_s: self.rho_s.or(base.rho_s),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorFile {
    pub global: TensorBlock,
    /// Per-facet overrides, sorted by facet index.
    pub facets: Vec<(usize, TensorBlock)>,
}

impl TensorFile {
    pub fn from_triple(t: &StiffnessTriple) -> Self {
        let mut f = Self::default();
        f.global.set_triple(t);
        f
    }

    /// Effective data on facet `q`.
    pub fn on_facet(&self, q: usize) -> TensorBlock {
        match self.facets.iter().find(|(i, _)| *i == q) {
            Some((_, b)) => b.merged_over(&self.global),
            None => self.global.clone(),
        }
    }
}

fn write_matrix(out: &mut String, name: &str, m: &Matrix3<f64>) {
    let _ = writeln!(out, "{name}");
    for r in 0..3 {
        let _ = writeln!(out, "{:e} {:e} {:e}", m[(r, 0)], m[(r, 1)], m[(r, 2)]);
    }
}

fn write_block(out: &mut String, b: &TensorBlock) {
    for (name, m) in [("AHOM", &b.a), ("BHOM", &b.b), ("CHOM", &b.c), ("KHAT", &b.khat)] {
        if let Some(m) = m {
            write_matrix(out, name, m);
        }
    }
    if let Some(r) = b.rho_s {
        let _ = writeln!(out, "RHOS\n{r:e}");
    }
}

pub fn write_tensor_file(f: &TensorFile) -> String {
    let mut out = String::new();
    write_block(&mut out, &f.global);
    for (q, b) in &f.facets {
        let _ = writeln!(out, "FACET {q}");
        write_block(&mut out, b);
        out.push_str("END\n");
    }
    out
}

pub fn parse_tensor_file(text: &str) -> Result<TensorFile> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut file = TensorFile::default();
    let mut facet: Option<(usize, TensorBlock)> = None;
    let mut i = 0;
    let row = |i: usize, n: usize| -> Result<Vec<f64>> {
        let (line, l) = *lines.get(i).ok_or(Error::Parse { line: lines.last().map_or(0, |x| x.0), msg: "unexpected end of file".into() })?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line, msg: format!("bad number: {e}") })?;
        if v.len() != n {
            return Err(Error::Parse { line, msg: format!("expected {n} numbers, found {}", v.len()) });
        }
        Ok(v)
    };
    while i < lines.len() {
        let (line, l) = lines[i];
        let block = match &mut facet {
            Some((_, b)) => b,
            None => &mut file.global,
        };
        let mut words = l.split_whitespace();
        match words.next().unwrap_or("") {
            name @ ("AHOM" | "BHOM" | "CHOM" | "KHAT") => {
                let mut m = Matrix3::zeros();
                for r in 0..3 {
                    let v = row(i + 1 + r, 3)?;
                    for c in 0..3 {
                        m[(r, c)] = v[c];
                    }
                }
                let slot = match name {
                    "AHOM" => &mut block.a,
                    "BHOM" => &mut block.b,
                    "CHOM" => &mut block.c,
                    _ => &mut block.khat,
                };
                if slot.replace(m).is_some() {
                    return Err(Error::Parse { line, msg: format!("duplicate {name} section") });
                }
                i += 4;
            }
            "RHOS" => {
                if block.rho_s.replace(row(i + 1, 1)?[0]).is_some() {
                    return Err(Error::Parse { line, msg: "duplicate RHOS section".into() });
                }
                i += 2;
            }
            "FACET" => {
                if facet.is_some() {
                    return Err(Error::Parse { line, msg: "nested FACET block".into() });
                }
                let q = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or(Error::Parse { line, msg: "FACET needs a facet index".into() })?;
                if file.facets.iter().any(|(p, _)| *p == q) {
                    return Err(Error::Parse { line, msg: format!("facet {q} given twice") });
                }
                facet = Some((q, TensorBlock::default()));
                i += 1;
            }
            "END" => {
                let f = facet.take().ok_or(Error::Parse { line, msg: "END without FACET".into() })?;
                file.facets.push(f);
                i += 1;
            }
            other => return Err(Error::Parse { line, msg: format!("unknown section `{other}`") }),
        }
    }
    if facet.is_some() {
        return Err(Error::Parse { line: lines.last().map_or(0, |x| x.0), msg: "FACET block without END".into() });
    }
    file.facets.sort_by_key(|(q, _)| *q);
    Ok(file)
}

pub fn read_tensor_file(path: &Path) -> Result<TensorFile> {
    parse_tensor_file(&std::fs::read_to_string(path)?)
}

pub fn save_tensor_file(path: &Path, f: &TensorFile) -> Result<()> {
    std::fs::write(path, write_tensor_file(f))?;
    Ok(())
}

/// Set the `KHAT` section of `path`, keeping everything else; creates the
/// file when it does not exist.
pub fn merge_khat(path: &Path, khat: &Matrix3<f64>) -> Result<TensorFile> {
    let mut f = if path.exists() { read_tensor_file(path)? } else { TensorFile::default() };
    f.global.khat = Some(*khat);
    save_tensor_file(path, &f)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(v: &[f64]) -> Matrix3<f64> {
        Matrix3::from_row_slice(&v[..9])
    }

    proptest! {
        #[test]
        fn round_trip_is_bitwise(v in proptest::collection::vec(-1e12..1e12f64, 46), q in 0usize..100) {
            let f = TensorFile {
                global: TensorBlock { a: Some(mat(&v[0..])), b: Some(mat(&v[9..])), c: Some(mat(&v[18..])), khat: Some(mat(&v[27..])), rho_s: Some(v[36]) },
                facets: vec![(q, TensorBlock { c: Some(mat(&v[37..])), ..Default::default() })],
            };
            let back = parse_tensor_file(&write_tensor_file(&f)).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(write_tensor_file(&back), write_tensor_file(&f));
        }
    }

    #[test]
    fn facet_overrides_global() {
        let text = "AHOM\n1 0 0\n0 1 0\n0 0 1\nCHOM\n2 0 0\n0 2 0\n0 0 2\nFACET 3\nCHOM\n5 0 0\n0 5 0\n0 0 5\nEND\n";
        let f = parse_tensor_file(text).unwrap();
        assert_eq!(f.on_facet(3).c.unwrap()[(0, 0)], 5.0);
        assert_eq!(f.on_facet(3).a.unwrap()[(0, 0)], 1.0);
        assert_eq!(f.on_facet(0).c.unwrap()[(0, 0)], 2.0);
        assert!(f.on_facet(0).triple().is_some());
    }

    #[test]
    fn malformed_files_report_lines() {
        assert!(matches!(parse_tensor_file("AHOM\n1 2 3\n1 2\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_tensor_file("XHOM\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_tensor_file("FACET 1\nRHOS\n1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn khat_merge_keeps_other_sections() {
        let dir = std::env::temp_dir().join(format!("filterfsi-merge-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.txt");
        let t = StiffnessTriple::from_voigt(Matrix3::identity(), Matrix3::zeros(), Matrix3::identity() * 0.5);
        save_tensor_file(&path, &TensorFile::from_triple(&t)).unwrap();
        let f = merge_khat(&path, &(Matrix3::identity() * 3.0)).unwrap();
        assert_eq!(read_tensor_file(&path).unwrap(), f);
        assert_eq!(f.global.triple().unwrap(), t);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
