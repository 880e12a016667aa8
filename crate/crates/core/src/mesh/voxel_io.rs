//! Plain-text voxel masks: a header `m1 m2 m3`, then `m3` slabs of `m2` rows
//! of `m1` integers (0 = fluid, k >= 1 = yarn label k). Slabs run from the
//! bottom (`y3 = -1/2`) upwards, rows from `y2 = 0`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelMask {
    pub resolution: [usize; 3],
    pub labels: Vec<u32>,
}

pub fn parse_voxel_mask(text: &str) -> Result<VoxelMask> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty voxel file".into() })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse { line: hline, msg: format!("bad header: {e}") })?;
    if dims.len() != 3 || dims.iter().any(|&d| d == 0) {
        return Err(Error::Parse { line: hline, msg: "header must be three positive integers `m1 m2 m3`".into() });
    }
    let res = [dims[0], dims[1], dims[2]];
    let mut labels = Vec::with_capacity(res[0] * res[1] * res[2]);
    let mut rows = 0;
    for (n, line) in lines {
        let row: Vec<u32> = line
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: n, msg: format!("bad voxel label: {e}") })?;
        if row.len() != res[0] {
            return Err(Error::Parse { line: n, msg: format!("expected {} labels, found {}", res[0], row.len()) });
        }
        labels.extend(row);
        rows += 1;
        if rows > res[1] * res[2] {
            return Err(Error::Parse { line: n, msg: "too many rows".into() });
        }
    }
    if rows != res[1] * res[2] {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {} rows, found {rows}", res[1] * res[2]),
        });
    }
    Ok(VoxelMask { resolution: res, labels })
}

pub fn write_voxel_mask(mask: &VoxelMask) -> String {
    let [m1, m2, m3] = mask.resolution;
    let mut out = format!("{m1} {m2} {m3}\n");
    for k in 0..m3 {
        for j in 0..m2 {
            let row: Vec<String> = (0..m1).map(|i| mask.labels[i + m1 * (j + m2 * k)].to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        if k + 1 < m3 {
            out.push('\n');
        }
    }
    out
}
