//! Simulation and parameter estimation for pulsed resonant spectroscopy of a
//! single optical two-level emitter.
//!
//! The crate is organised bottom-up:
//!
//! - [`dynamics`]: Bloch-vector and density-matrix propagation of a driven,
//!   decaying two-level system (closed-form rotations plus an RK4 master
//!   equation integrator).
//! - [`noise`]: spectral diffusion, dephasing envelopes, PLE line shapes and
//!   the laser coherence model.
//! - [`protocols`]: lifetime, Rabi, PLE and Ramsey experiments producing
//!   noisy synthetic [`CurveData`].
//! - [`photonstats`]: photon click streams and pulsed HBT autocorrelation.
//! - [`fitting`]: Levenberg–Marquardt least squares and the model zoo used to
//!   extract T1, the π-pulse power, linewidths and T2*.
//!
//! Units: time in ns, ordinary frequency in GHz, angular frequency in rad/ns,
//! optical power in μW, and ħ = 1 throughout.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod noise;
pub mod photonstats;
pub mod protocols;
pub mod rng;

pub use data::{CurveData, CurveMeta};
pub use dynamics::{EmitterParams, Pulse, PulseShape, QuantumState, SequenceSegment};
pub use error::{Error, Result};
pub use fitting::{FitModel, FitResult, FitStatus};
pub use noise::{DiffusionKind, LaserModel, SpectralDiffusionModel};
pub use photonstats::{ClickRecord, CoincidenceHistogram, Detector, HbtConfig};
pub use protocols::{Interferogram, MichelsonGeometry};

/// Speed of light in μm/ns.
pub const SPEED_OF_LIGHT_UM_PER_NS: f64 = 299_792.458;

/// Laser repetition period at 80 MHz, in ns.
pub const REP_PERIOD_NS: f64 = 12.5;
