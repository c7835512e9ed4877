//! Extended H₂ attitude estimation from MARG sensor data.
//!
//! The estimator gain is synthesized once, offline, about the zero-attitude
//! operating point of the linearized Euler-angle model. Online, the filter
//! state is propagated through the full nonlinear gyro kinematics and
//! corrected with the fixed gain applied to the accelerometer/magnetometer
//! residual. A conventional continuous-discrete EKF over the same models is
//! provided as the comparison baseline, together with a seeded Monte-Carlo
//! harness that generates slow/small-angle and fast/large-angle scenarios.
//!
//! Module map:
//! - [`kinematics`]: Euler-rate matrix, 3-2-1 DCM, angle wrapping.
//! - [`sensors`]: gyro/accel/mag simulation and noise covariances.
//! - [`dynamics`]: nonlinear process and measurement models, RK4 step.
//! - [`linearization`]: Jacobians and the assembled [`LinearModel`].
//! - [`synthesis`]: H₂ gain via the filter Riccati equation, LMI certificate,
//!   Lyapunov/CARE solvers, plain-text gain files.
//! - [`filters`]: the extended H₂ filter and the EKF baseline.
//! - [`harness`]: scenarios, experiment runner, metrics and timing.
//!
//! With the default `parallel` feature, Monte-Carlo trials are spread over
//! the rayon pool; results are bit-identical to the sequential path because
//! every trial owns its random stream.

pub mod dynamics;
pub mod error;
pub mod filters;
pub mod harness;
pub mod kinematics;
pub mod linearization;
pub mod sensors;
pub mod synthesis;

pub use dynamics::{EulerState, Measurement6};
pub use error::{Error, Result};
pub use filters::{eh2::Eh2Filter, ekf::EkfState};
pub use kinematics::EulerAngles;
pub use linearization::LinearModel;
pub use sensors::{ImuSample, NoiseParams, WorldConstants};
pub use synthesis::GainCertificate;

/// Seeded random source used for every stochastic operation in the crate.
pub type RandomSource = rand_chacha::ChaCha8Rng;
