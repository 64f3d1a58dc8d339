//! Simulation core for rf-SQUID qubits coupled through a single cavity mode:
//! device spectrum, dispersive parameters, model Hamiltonians, closed and
//! open dynamics, protocol verification and timescale arithmetic.
//!
//! Numerical types are generic over [`Real`]; the aliases below fix `f64`.

// Validation compares as `!(x > 0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod feasibility;
pub mod linalg;
pub mod model;
pub mod protocols;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CMat = scalar::CMat<f64>;
pub type CVec = scalar::CVec<f64>;
pub type SquidParams = spectrum::SquidParams<f64>;
pub type SpectrumResult = spectrum::SpectrumResult<f64>;
pub type CavityParams = coupling::CavityParams<f64>;
pub type DriveParams = coupling::DriveParams<f64>;
pub type EffectiveParams = coupling::EffectiveParams<f64>;
pub type SquidChannel = model::SquidChannel<f64>;
pub type SystemModel = model::SystemModel<f64>;
pub type StateVector = dynamics::StateVector<f64>;
pub type DensityMatrix = dynamics::DensityMatrix<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type CollapseChannel = dynamics::CollapseChannel<f64>;
pub type GateMatrix = protocols::GateMatrix<f64>;
pub type Decoherence = protocols::Decoherence<f64>;
pub type RunOptions = protocols::RunOptions<f64>;
