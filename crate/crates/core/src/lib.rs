//! Space-time meshes of pentatopes: extrusion of tetrahedral meshes,
//! elastic mesh update in four dimensions, point location and slicing, and
//! a scalar space-time finite element solver.

pub mod emum;
pub mod error;
pub mod extrude;
pub mod fields;
pub mod generate;
pub mod geometry;
pub mod io;
pub mod krylov;
pub mod locate;
pub mod mesh;
pub mod pipeline;
pub mod quadrature;
pub mod scalar;
pub mod sparse;

pub use emum::{deform, DirichletEntry, DirichletSet, ElasticParams, NodalField4};
pub use error::{Error, Result};
pub use extrude::{extrude, split_prism, ExtrusionSpec};
pub use fields::{DisplacementField, FieldKind, ScalarField, ValveGate};
pub use geometry::{Point3, Point4};
pub use krylov::SolveStats;
pub use locate::{interpolate, slice, LocateIndex, LocateResult, LocateStatus, NodalField, SliceJob, SliceQuery};
pub use mesh::{validate, BoundaryFacet, PentaMesh, Provenance, TetMesh, ValidationReport, BOTTOM, TOP};
pub use scalar::{assemble_solve, supg_tau, Advection, ScalarDirichlet, ScalarProblem};
