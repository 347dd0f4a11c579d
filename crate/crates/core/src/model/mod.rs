//! Physical and dimensionless model: grid, materials, walls, state and forcing.

mod forcing;
mod grid;
mod material;
mod saturation;
mod state;
mod wall;

pub use forcing::{BoundaryForcing, BoundaryKind, SaturationRef, SideForcing, TimeFn, TimeSeries};
pub use grid::Grid1D;
pub use material::{
    builtin_material, AdmissibleBox, Coefficients, CoefficientModel, ConstantMaterial,
    CoefficientScales, Dimensionless, Insulation, PolynomialMaterial, RammedEarth, WaterProperties,
    TABLE1_MAT1, TABLE1_MAT2,
};
pub use saturation::{saturation_pressure, SATURATION_T_MIN};
pub use state::StateField;
pub use wall::{build_wall, evaluate_coefficients, Layer, WallAssembly};

use thiserror::Error;

/// Errors raised while building or evaluating the model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("saturation pressure undefined for T = {0} K (requires T > 159.5 K)")]
    SaturationDomain(f64),
    #[error("coordinate {x} outside wall [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },
    #[error("invalid wall: {0}")]
    InvalidWall(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("interface at x = {x} does not coincide with a grid node (spacing {spacing})")]
    InterfaceNotOnNode { x: f64, spacing: f64 },
    #[error("surface temperature u = {u} must be positive on the {side} boundary")]
    BoundarySingularity { side: &'static str, u: f64 },
    #[error("state has {got} nodes, grid has {expected}")]
    StateShape { expected: usize, got: usize },
    #[error("unknown material '{0}'")]
    UnknownMaterial(String),
    #[error("{0}")]
    Invalid(String),
}
