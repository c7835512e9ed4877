use nalgebra::{Matrix3, Vector3};

use crate::dynamics::EulerState;
use crate::error::{Error, Result};
use crate::kinematics::EulerAngles;
use crate::sensors::{ImuSample, WorldConstants};

fn triad(primary: &Vector3<f64>, secondary: &Vector3<f64>) -> Option<Matrix3<f64>> {
    let t1 = primary.try_normalize(1e-12)?;
    let t2 = primary
        .cross(secondary)
        .try_normalize(1e-9 * primary.norm() * secondary.norm())?;
    let t3 = t1.cross(&t2);
    Some(Matrix3::from_columns(&[t1, t2, t3]))
}

/// Attitude from one accelerometer/magnetometer pair, bias zero.
///
/// Gravity fixes roll and pitch exactly; the magnetometer only resolves yaw
/// (tilt-compensated). With gravity along +z this reduces to
/// `phi = atan2(a_y, a_z)` and `theta = -asin(a_x / |g|)`.
pub fn initialize_from_first_sample(sample: &ImuSample, w: &WorldConstants) -> Result<EulerState> {
    let a = sample.a_m;
    let g_norm = w.g_inertial.norm();
    if a.norm().is_nan() || a.norm() < 0.5 * g_norm {
        return Err(Error::DegenerateSample(format!(
            "|a_m| = {} below half of |g| = {g_norm}",
            a.norm()
        )));
    }
    let body = triad(&a, &sample.m_m).ok_or_else(|| {
        Error::DegenerateSample("magnetometer reading parallel to gravity".into())
    })?;
    let inertial = triad(&w.g_inertial, &w.h_inertial)
        .ok_or_else(|| Error::DegenerateSample("reference vectors are parallel".into()))?;
    let r = body * inertial.transpose();
    let theta = (-r[(0, 2)]).atan2((r[(0, 0)].powi(2) + r[(0, 1)].powi(2)).sqrt());
    let phi = r[(1, 2)].atan2(r[(2, 2)]);
    let psi = r[(0, 1)].atan2(r[(0, 0)]);
    let attitude = EulerAngles::new(phi, theta, psi)?;
    if !attitude.clear_of_gimbal_lock() {
        return Err(Error::GimbalLock { theta });
    }
    Ok(EulerState::new(attitude, Vector3::zeros()))
}
