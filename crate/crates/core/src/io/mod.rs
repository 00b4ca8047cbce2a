//! File formats: MSH input, native pentatope meshes, nodal field files,
//! VTK slices and run configurations.

pub mod config;
pub mod fieldfile;
pub mod msh;
pub mod p4m;
pub mod vtk;

pub use config::RunConfig;
pub use fieldfile::{read_fields, write_fields};
pub use msh::{read_msh, write_msh};
pub use p4m::{read_p4m, write_p4m};
pub use vtk::{write_vtk_slice, PointArray, PointData};
