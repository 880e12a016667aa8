//! File formats: scenarios, materials, plate tensors, field output and the
//! energy log.

pub mod config;
pub mod fields;
pub mod kv;
pub mod material;
pub mod samplers;
pub mod tensor_file;

pub use config::{parse_config, parse_config_str, ScenarioConfig};
pub use fields::{read_energy_csv, read_fields, write_energy_csv, write_fields, write_sigma_vtk, write_volume_vtk};
pub use material::{parse_material, read_material, MaterialSpec};
pub use samplers::{InflowSampler, ScalarSampler, VectorSampler};
pub use tensor_file::{merge_khat, parse_tensor_file, read_tensor_file, save_tensor_file, write_tensor_file, TensorBlock, TensorFile};
