//! State estimators over the Euler-angle models: the extended H₂ filter with a
//! fixed, precomputed gain and a continuous-discrete EKF baseline.
//!
//! The residual `h(x̂) - y` lives in accelerometer/magnetometer space, so no
//! angle wrapping happens inside either filter; wrapping is a metrics concern.

pub mod eh2;
pub mod ekf;
pub mod init;

pub use eh2::{eh2_step, Eh2Filter};
pub use ekf::{default_initial_covariance, ekf_step, EkfState};
pub use init::initialize_from_first_sample;
