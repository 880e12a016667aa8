//! Structured meshes: the channel around the interface plane and voxelized
//! unit cells.

mod cell;
mod channel;
mod voxel_io;

pub use cell::{build_cell_mesh, build_cell_mesh_scaled, build_fluid_cell_mesh, CellMesh, ContactFacet};
pub use channel::{build_channel_mesh, tag_boundaries, ChannelMesh, Face, FacetTag, SigmaQuad, TaggedFacet};
pub use voxel_io::{parse_voxel_mask, write_voxel_mask, VoxelMask};
