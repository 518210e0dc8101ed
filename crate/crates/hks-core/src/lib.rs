//! Pseudospectral simulation and analysis toolkit for hyperbolic
//! Keller-Segel dynamics with time-dependent parameters.
//!
//! The crate provides:
//! - periodic grids, FFT-based multiplier operators and grid norms
//!   ([`grid`], [`field`], [`spectral`]);
//! - parameter schedules and right-hand sides for the unified equation
//!   family, the damping transform, and the linearized fixed-point
//!   iteration ([`schedule`], [`equation`], [`friedrichs`], [`damping`]);
//! - RK4 time stepping with CFL control, divergence detection and norm
//!   monitors ([`integrator`]);
//! - dyadic Littlewood-Paley decomposition and Besov norms ([`besov`]);
//! - closed-form global-existence thresholds, blow-up-time lower bounds and
//!   related validators ([`oracles`]);
//! - a small binary snapshot format for fields ([`snapshot`]).

// `!(x >= 0.0)` is used throughout to reject NaN along with the sign check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod damping;
pub mod equation;
pub mod error;
mod fft;
pub mod field;
pub mod friedrichs;
pub mod grid;
pub mod integrator;
pub mod oracles;
pub mod schedule;
pub mod snapshot;
pub mod spectral;

pub use besov::{
    besov_norm, dyadic_blocks, homogeneous_b0_norm, interpolation_check, low_freq_cutoff,
    BesovIndex, LpBlocks,
};
pub use damping::damping_transform_residual;
pub use equation::{
    rhs_damped, rhs_divergence, rhs_unified, specialize_parameters, EquationVariant, HksParams,
};
pub use error::{HksError, Result};
pub use field::{lp_norm, RealField};
pub use friedrichs::{friedrichs_iterate, FriedrichsResult, Trajectory};
pub use grid::TorusGrid;
pub use integrator::{
    integrate, integrate_with_trajectory, rk4_step, MonitorSet, RunRecord, RunStatus, SolverConfig,
};
pub use oracles::{IntegralBundle, OracleReport, TheoryConfig};
pub use schedule::ParameterSchedule;
pub use snapshot::{load_snapshot, read_snapshot, save_snapshot, write_snapshot};
pub use spectral::{
    bessel_potential, forward_transform, gradient, inverse_transform, laplacian, SpectralField,
};
