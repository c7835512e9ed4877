//! Forward models for the gyroscope, accelerometer and magnetometer.
//!
//! Measurements are generated as truth plus zero-mean Gaussian noise; the
//! gyro additionally carries a bias that follows a random walk discretized
//! with `sqrt(dt)` scaling.

use nalgebra::{Matrix6, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{dcm_body_from_inertial, EulerAngles};

/// Per-axis noise standard deviations.
///
/// The defaults are MPU-9250-like values chosen for this crate; they are
/// configuration, not measured constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseParams {
    /// Gyro white noise (rad/s).
    pub n_w: f64,
    /// Gyro bias random-walk intensity (rad/s per sqrt(s)).
    pub n_b: f64,
    /// Accelerometer white noise (m/s²).
    pub n_a: f64,
    /// Magnetometer white noise (normalized units).
    pub n_m: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            n_w: 0.005,
            n_b: 1e-4,
            n_a: 0.02,
            n_m: 0.005,
        }
    }
}

impl NoiseParams {
    pub fn zero() -> Self {
        Self {
            n_w: 0.0,
            n_b: 0.0,
            n_a: 0.0,
            n_m: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_w", self.n_w),
            ("n_b", self.n_b),
            ("n_a", self.n_a),
            ("n_m", self.n_m),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Reference vectors expressed in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldConstants {
    /// Gravity (m/s²), z-down.
    pub g_inertial: Vector3<f64>,
    /// Earth magnetic field (normalized), roughly 50° dip.
    pub h_inertial: Vector3<f64>,
}

impl Default for WorldConstants {
    fn default() -> Self {
        Self {
            g_inertial: Vector3::new(0.0, 0.0, 9.81),
            h_inertial: Vector3::new(0.48, 0.0, 0.58),
        }
    }
}

impl WorldConstants {
    pub fn validate(&self) -> Result<()> {
        let g = self.g_inertial;
        let h = self.h_inertial;
        if !(g.iter().all(|v| v.is_finite()) && h.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("world constants"));
        }
        if g.norm() == 0.0 || h.norm() == 0.0 {
            return Err(Error::InvalidParameter(
                "reference vectors must be nonzero".into(),
            ));
        }
        // Yaw is unobservable when the field is parallel to gravity.
        if g.cross(&h).norm() <= 1e-9 * g.norm() * h.norm() {
            return Err(Error::InvalidParameter(
                "magnetic field is parallel to gravity; yaw unobservable".into(),
            ));
        }
        Ok(())
    }
}

/// One timestamped gyro/accel/mag triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    pub omega_m: Vector3<f64>,
    pub a_m: Vector3<f64>,
    pub m_m: Vector3<f64>,
}

fn gaussian3<R: Rng + ?Sized>(std: f64, rng: &mut R) -> Vector3<f64> {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    Vector3::new(x, y, z) * std
}

pub fn simulate_gyro<R: Rng + ?Sized>(
    omega_true: &Vector3<f64>,
    bias: &Vector3<f64>,
    p: &NoiseParams,
    rng: &mut R,
) -> Vector3<f64> {
    omega_true + bias + gaussian3(p.n_w, rng)
}

/// One Euler–Maruyama step of the bias random walk.
pub fn step_bias<R: Rng + ?Sized>(
    bias: &Vector3<f64>,
    p: &NoiseParams,
    dt: f64,
    rng: &mut R,
) -> Vector3<f64> {
    debug_assert!(dt > 0.0, "bias step requires dt > 0");
    bias + gaussian3(p.n_b * dt.sqrt(), rng)
}

pub fn simulate_accel<R: Rng + ?Sized>(
    e: &EulerAngles,
    w: &WorldConstants,
    p: &NoiseParams,
    rng: &mut R,
) -> Vector3<f64> {
    dcm_body_from_inertial(e) * w.g_inertial + gaussian3(p.n_a, rng)
}

pub fn simulate_mag<R: Rng + ?Sized>(
    e: &EulerAngles,
    w: &WorldConstants,
    p: &NoiseParams,
    rng: &mut R,
) -> Vector3<f64> {
    dcm_body_from_inertial(e) * w.h_inertial + gaussian3(p.n_m, rng)
}

/// `diag(n_w² I3, n_b² I3)`.
pub fn process_noise_cov(p: &NoiseParams) -> Matrix6<f64> {
    block_diag(p.n_w * p.n_w, p.n_b * p.n_b)
}

/// `diag(n_a² I3, n_m² I3)`.
pub fn measurement_noise_cov(p: &NoiseParams) -> Matrix6<f64> {
    block_diag(p.n_a * p.n_a, p.n_m * p.n_m)
}

fn block_diag(upper: f64, lower: f64) -> Matrix6<f64> {
    Matrix6::from_diagonal(&nalgebra::Vector6::new(
        upper, upper, upper, lower, lower, lower,
    ))
}
