//! Semi-discrete operator for the coupled heat and moisture system.
//!
//! Vertex-centred finite volumes on a uniform grid: node `j` owns the cell
//! `[x_j − Δx/2, x_j + Δx/2]` (half cells at the two faces of the wall).
//! Fluxes through cell faces use harmonic means of the nodal coefficients of
//! the layer containing that face, so a node sitting on a material interface
//! sees one layer on each side.

mod closure;
mod operator;
mod stability;

pub use closure::{apply_robin_closure, BoundaryFlux, Side};
pub use operator::{assemble_operator, SemiDiscreteOperator, VolumeSource};
pub use stability::{gershgorin, CooMatrix, StabilityEstimate};
