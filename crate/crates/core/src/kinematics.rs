//! Euler-angle attitude kinematics for the 3-2-1 (yaw, pitch, roll) sequence.
//!
//! Conventions: the DCM maps inertial-frame vectors into the body frame and is
//! the product `R1(phi) * R2(theta) * R3(psi)` of passive elementary rotations.
//! Roll and yaw are wrapped to `(-pi, pi]`; pitch must stay strictly inside
//! `(-pi/2, pi/2)` and the rate map refuses pitch within [`GIMBAL_EPS`] of the
//! singularity.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exclusion band (rad) around pitch = ±π/2.
pub const GIMBAL_EPS: f64 = 1e-6;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = (PI - x).rem_euclid(TAU);
    PI - r
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    /// Builds a valid attitude, wrapping roll and yaw.
    pub fn new(phi: f64, theta: f64, psi: f64) -> Result<Self> {
        if !(phi.is_finite() && theta.is_finite() && psi.is_finite()) {
            return Err(Error::NonFinite("euler angles"));
        }
        if theta.abs() >= FRAC_PI_2 {
            return Err(Error::GimbalLock { theta });
        }
        Ok(Self {
            phi: wrap_angle(phi),
            theta,
            psi: wrap_angle(psi),
        })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vector3<f64>) -> Result<Self> {
        Self::new(v.x, v.y, v.z)
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.phi, self.theta, self.psi)
    }

    /// True when pitch is outside the gimbal exclusion band.
    pub fn clear_of_gimbal_lock(&self) -> bool {
        self.theta.abs() < FRAC_PI_2 - GIMBAL_EPS
    }
}

/// Cached sines and cosines of one attitude. Shared between the rate map and
/// the DCM so hot loops evaluate each trig function once.
#[derive(Debug, Clone, Copy)]
pub struct AttitudeTrig {
    pub sphi: f64,
    pub cphi: f64,
    pub sth: f64,
    pub cth: f64,
    pub spsi: f64,
    pub cpsi: f64,
}

impl AttitudeTrig {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        let (sphi, cphi) = phi.sin_cos();
        let (sth, cth) = theta.sin_cos();
        let (spsi, cpsi) = psi.sin_cos();
        Self {
            sphi,
            cphi,
            sth,
            cth,
            spsi,
            cpsi,
        }
    }

    pub fn from_angles(e: &EulerAngles) -> Self {
        Self::new(e.phi, e.theta, e.psi)
    }

    /// Rate map `T`. The caller is responsible for the gimbal check.
    #[inline]
    pub fn rate_matrix(&self) -> Matrix3<f64> {
        let tth = self.sth / self.cth;
        let sec = 1.0 / self.cth;
        Matrix3::new(
            1.0,
            tth * self.sphi,
            tth * self.cphi,
            0.0,
            self.cphi,
            -self.sphi,
            0.0,
            self.sphi * sec,
            self.cphi * sec,
        )
    }

    /// Expanded form of `R1(phi) R2(theta) R3(psi)`.
    #[inline]
    pub fn dcm(&self) -> Matrix3<f64> {
        let Self {
            sphi,
            cphi,
            sth,
            cth,
            spsi,
            cpsi,
        } = *self;
        Matrix3::new(
            cth * cpsi,
            cth * spsi,
            -sth,
            -cphi * spsi + sphi * sth * cpsi,
            cphi * cpsi + sphi * sth * spsi,
            sphi * cth,
            sphi * spsi + cphi * sth * cpsi,
            -sphi * cpsi + cphi * sth * spsi,
            cphi * cth,
        )
    }
}

pub(crate) fn check_gimbal(theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("pitch"));
    }
    if theta.abs() >= FRAC_PI_2 - GIMBAL_EPS {
        return Err(Error::GimbalLock { theta });
    }
    Ok(())
}

/// Euler-rate matrix `T` with `(phi_dot, theta_dot, psi_dot) = T * omega_body`.
pub fn kinematic_matrix(e: &EulerAngles) -> Result<Matrix3<f64>> {
    check_gimbal(e.theta)?;
    Ok(AttitudeTrig::from_angles(e).rate_matrix())
}

/// Inverse of [`kinematic_matrix`]: body rates from Euler rates.
pub fn kinematic_matrix_inverse(e: &EulerAngles) -> Result<Matrix3<f64>> {
    check_gimbal(e.theta)?;
    let t = AttitudeTrig::from_angles(e);
    Ok(Matrix3::new(
        1.0,
        0.0,
        -t.sth,
        0.0,
        t.cphi,
        t.sphi * t.cth,
        0.0,
        -t.sphi,
        t.cphi * t.cth,
    ))
}

pub fn rot_x(phi: f64) -> Matrix3<f64> {
    let (s, c) = phi.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}

pub fn rot_y(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

pub fn rot_z(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Direction cosine matrix from the inertial frame to the body frame.
pub fn dcm_body_from_inertial(e: &EulerAngles) -> Matrix3<f64> {
    rot_x(e.phi) * rot_y(e.theta) * rot_z(e.psi)
}

pub fn euler_rates(e: &EulerAngles, omega_body: &Vector3<f64>) -> Result<Vector3<f64>> {
    Ok(kinematic_matrix(e)? * omega_body)
}

/// Per-axis difference `a - b`, each component wrapped into `(-pi, pi]`.
pub fn angle_error(a: &EulerAngles, b: &EulerAngles) -> Vector3<f64> {
    Vector3::new(
        wrap_angle(a.phi - b.phi),
        wrap_angle(a.theta - b.theta),
        wrap_angle(a.psi - b.psi),
    )
}
