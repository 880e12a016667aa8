//! Homogenized permeable-plate fluid-structure interaction.

pub mod assembly;
pub mod error;
pub mod fe;
pub mod homogenize;
pub mod io;
pub mod mesh;
pub mod permeability;
pub mod solver;
pub mod sparse;
pub mod tensors;

pub use error::{Error, Result};
