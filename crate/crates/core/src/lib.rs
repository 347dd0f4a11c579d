//! Coupled heat and moisture transfer through multilayer porous walls,
//! marched in time with explicit Euler, Du Fort–Frankel and the
//! super-time-stepping (STS) Runge–Kutta–Chebyshev / Runge–Kutta–Legendre
//! integrators.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: grids, material coefficient models, layered walls, state
//!   fields and boundary forcing.
//! - [`dimensionless`]: reference scales and the Fourier/Biot groups.
//! - [`discretization`]: the semi-discrete operator, boundary closures and
//!   spectral-radius estimates.
//! - [`integrators`]: time marching schemes and super-step schedules.
//! - [`metrics`]: error norms, significant correct digits, cost ratios and
//!   drying post-processing.
//! - [`cases`]: configuration, presets, case runners and output files.

// `!(x > 0.0)` style checks are deliberate so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod dimensionless;
pub mod discretization;
pub mod integrators;
pub mod metrics;
pub mod model;

pub use dimensionless::{BiotSet, DimensionlessGroups, ScalingSet};
pub use discretization::{assemble_operator, SemiDiscreteOperator, StabilityEstimate};
pub use integrators::{
    build_schedule, dufort_frankel_run, euler_run, sts_run, OdeSystem, RunOptions, RunReport,
    Scheme, StsKind, SuperStepSchedule,
};
pub use model::{
    build_wall, evaluate_coefficients, saturation_pressure, BoundaryForcing, Coefficients,
    CoefficientModel, Grid1D, StateField, WallAssembly,
};
