//! Nonlinear process and measurement models over the state `[attitude; gyro bias]`.

use nalgebra::{Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kinematics::{check_gimbal, AttitudeTrig, EulerAngles};
use crate::sensors::WorldConstants;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerState {
    pub attitude: EulerAngles,
    /// Gyro bias (rad/s).
    pub bias: Vector3<f64>,
}

impl EulerState {
    pub fn new(attitude: EulerAngles, bias: Vector3<f64>) -> Self {
        Self { attitude, bias }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let a = self.attitude;
        Vector6::new(a.phi, a.theta, a.psi, self.bias.x, self.bias.y, self.bias.z)
    }

    /// Rebuilds a state from a raw vector, wrapping roll and yaw.
    pub fn from_vector(v: &Vector6<f64>) -> Result<Self> {
        check_gimbal(v[1])?;
        Ok(Self {
            attitude: EulerAngles::new(v[0], v[1], v[2])?,
            bias: Vector3::new(v[3], v[4], v[5]),
        })
    }
}

/// Stacked accelerometer and magnetometer output `y`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Measurement6 {
    pub accel: Vector3<f64>,
    pub mag: Vector3<f64>,
}

impl Measurement6 {
    pub fn new(accel: Vector3<f64>, mag: Vector3<f64>) -> Self {
        Self { accel, mag }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(
            self.accel.x,
            self.accel.y,
            self.accel.z,
            self.mag.x,
            self.mag.y,
            self.mag.z,
        )
    }
}

/// Noise-free `f(x, u, 0)` evaluated on a raw state vector.
#[inline]
pub(crate) fn process_rhs(x: &Vector6<f64>, omega_m: &Vector3<f64>) -> Result<Vector6<f64>> {
    check_gimbal(x[1])?;
    let trig = AttitudeTrig::new(x[0], x[1], x[2]);
    Ok(rates_from_trig(&trig, x, omega_m))
}

#[inline]
pub(crate) fn rates_from_trig(
    trig: &AttitudeTrig,
    x: &Vector6<f64>,
    omega_m: &Vector3<f64>,
) -> Vector6<f64> {
    let v = omega_m - Vector3::new(x[3], x[4], x[5]);
    let r = trig.rate_matrix() * v;
    Vector6::new(r.x, r.y, r.z, 0.0, 0.0, 0.0)
}

/// `(T(attitude) (omega_m - bias), 0)`.
pub fn state_derivative(x: &EulerState, omega_m: &Vector3<f64>) -> Result<Vector6<f64>> {
    process_rhs(&x.to_vector(), omega_m)
}

/// `y = [R g; R h]`; the bias does not enter.
pub fn measurement(x: &EulerState, w: &WorldConstants) -> Measurement6 {
    let r = AttitudeTrig::from_angles(&x.attitude).dcm();
    Measurement6::new(r * w.g_inertial, r * w.h_inertial)
}

/// Classical fourth-order Runge–Kutta step with the right-hand side allowed to fail.
#[inline]
pub(crate) fn rk4<F>(x: &Vector6<f64>, dt: f64, mut rhs: F) -> Result<Vector6<f64>>
where
    F: FnMut(&Vector6<f64>) -> Result<Vector6<f64>>,
{
    let k1 = rhs(x)?;
    let k2 = rhs(&(x + k1 * (0.5 * dt)))?;
    let k3 = rhs(&(x + k2 * (0.5 * dt)))?;
    let k4 = rhs(&(x + k3 * dt))?;
    Ok(x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0))
}

/// Dead-reckoning step with `omega_m` held over the interval.
pub fn integrate_step(x: &EulerState, omega_m: &Vector3<f64>, dt: f64) -> Result<EulerState> {
    debug_assert!(dt > 0.0);
    let next = rk4(&x.to_vector(), dt, |s| process_rhs(s, omega_m))?;
    EulerState::from_vector(&next)
}
