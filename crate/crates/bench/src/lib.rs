//! Shared fixtures for the benchmarks.

use filterfsi::assembly::InterfaceData;
use filterfsi::mesh::{build_cell_mesh, build_fluid_cell_mesh, CellMesh, ChannelMesh};
use filterfsi::solver::FsiModel;
use filterfsi::tensors::StiffnessTriple;
use nalgebra::Matrix3;

/// Channel model with identity `K̂⁻¹` and a soft isotropic plate.
pub fn channel_model(n: usize) -> FsiModel {
    let mesh = ChannelMesh::new([1.0, 1.0, 0.5], [n, n, n]).expect("mesh");
    let t = StiffnessTriple::from_voigt(Matrix3::identity(), Matrix3::zeros(), Matrix3::identity() * 0.1);
    let iface = InterfaceData::uniform(&mesh, Matrix3::identity(), t, 1.0);
    FsiModel::new(mesh, 1.0, 1.0, iface).expect("model")
}

/// Fully solid cell of `m³` voxels.
pub fn solid_cell(m: usize) -> CellMesh {
    build_cell_mesh([m, m, m], vec![1; m * m * m]).expect("cell")
}

/// Cube of edge `c` voxels centred in an `m³` fluid cell.
pub fn inclusion_cell(m: usize, c: usize) -> CellMesh {
    let lo = (m - c) / 2;
    let mut labels = vec![0u32; m * m * m];
    for k in lo..lo + c {
        for j in lo..lo + c {
            for i in lo..lo + c {
                labels[i + m * (j + m * k)] = 1;
            }
        }
    }
    build_fluid_cell_mesh([m, m, m], labels, [1.0; 3]).expect("cell")
}
