use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_step, measurement, EulerState};
use crate::error::{Error, Result};
use crate::linearization::{jacobians_process, measurement_jacobian};
use crate::sensors::{
    measurement_noise_cov, process_noise_cov, ImuSample, NoiseParams, WorldConstants,
};

/// `diag(0.1² I3, 0.01² I3)`: attitude in rad², bias in (rad/s)².
pub fn default_initial_covariance() -> Matrix6<f64> {
    Matrix6::from_diagonal(&Vector6::new(0.01, 0.01, 0.01, 1e-4, 1e-4, 1e-4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EkfState {
    pub xhat: EulerState,
    pub p: Matrix6<f64>,
}

impl EkfState {
    pub fn new(xhat: EulerState) -> Self {
        Self {
            xhat,
            p: default_initial_covariance(),
        }
    }

    pub fn with_covariance(xhat: EulerState, p: Matrix6<f64>) -> Self {
        Self { xhat, p }
    }

    pub fn step(
        &self,
        sample: &ImuSample,
        w: &WorldConstants,
        q: &NoiseParams,
        dt: f64,
    ) -> Result<Self> {
        ekf_step(self, sample, w, q, dt)
    }
}

/// Continuous-discrete EKF step.
///
/// Predict: RK4 mean propagation, `P = F P F^T + Qd` with `F = I + A(x̂) dt`
/// and `Qd = G diag(n_w² I, n_b² I) G^T dt`. Update with accelerometer and
/// magnetometer, Jacobians re-evaluated at the predicted state.
pub fn ekf_step(
    s: &EkfState,
    sample: &ImuSample,
    w: &WorldConstants,
    q: &NoiseParams,
    dt: f64,
) -> Result<EkfState> {
    debug_assert!(dt > 0.0);
    let jac = jacobians_process(&s.xhat, &sample.omega_m)?;
    let x_pred = integrate_step(&s.xhat, &sample.omega_m, dt)?;
    let f = Matrix6::identity() + jac.a * dt;
    let q_d = jac.bw * process_noise_cov(q) * jac.bw.transpose() * dt;
    let p_pred = f * s.p * f.transpose() + q_d;

    let h = measurement_jacobian(&x_pred.attitude, w);
    let s_cov = h * p_pred * h.transpose() + measurement_noise_cov(q);
    let chol = s_cov.cholesky().ok_or(Error::InnovationCovSingular)?;
    let hp = h * p_pred;
    let gain = chol.solve(&hp).transpose();

    let y = nalgebra::Vector6::new(
        sample.a_m.x,
        sample.a_m.y,
        sample.a_m.z,
        sample.m_m.x,
        sample.m_m.y,
        sample.m_m.z,
    );
    let innovation = y - measurement(&x_pred, w).to_vector();
    let x_upd = x_pred.to_vector() + gain * innovation;
    let p_upd = (Matrix6::identity() - gain * h) * p_pred;
    let p_upd = (p_upd + p_upd.transpose()) * 0.5;
    Ok(EkfState {
        xhat: EulerState::from_vector(&x_upd)?,
        p: p_upd,
    })
}
