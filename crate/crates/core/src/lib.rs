//! Zeroth-order mirror descent (ZOMD) under a biased two-point value oracle.
//!
//! The crate bundles four things that usually live in separate scripts:
//!
//! * a mirror-descent solver whose only access to the objective is a noisy,
//!   possibly biased, function-value oracle (`solver`, `oracle`),
//! * the Gaussian-smoothing two-point gradient estimator together with
//!   Monte Carlo reference computations of the smoothed function and its
//!   gradient (`estimator`),
//! * closed-form evaluation of every constant the convergence theory needs —
//!   smoothing gap, bias propagation, second-moment caps, concentration
//!   curves, confidence-level iteration counts (`analysis`),
//! * seeded, bit-reproducible experiment plumbing for validating those
//!   constants empirically (`rng`, `solver::run_ensemble`).
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the type
//! aliases at the crate root pin the `f64` instantiations the CLI uses.

pub mod analysis;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod numerics;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod vecops;

pub use error::{Error, Result};
pub use scalar::{cast, Scalar};

/// `f64` geometry as used by the CLI.
pub type Geometry64 = geometry::Geometry<f64>;
/// `f64` objective description.
pub type Objective64 = oracle::ObjectiveSpec<f64>;
/// `f64` noise law.
pub type Noise64 = oracle::NoiseModel<f64>;
/// `f64` estimator configuration.
pub type NgaConfig64 = estimator::NgaConfig<f64>;
/// `f64` step-size schedule.
pub type StepSchedule64 = solver::StepSchedule<f64>;
/// `f64` experiment bundle.
pub type Experiment64 = solver::Experiment<f64>;
/// `f64` recorded trajectory.
pub type Trajectory64 = solver::Trajectory<f64>;
/// `f64` theoretical constants.
pub type TheoryParams64 = analysis::TheoryParams<f64>;
