use nalgebra::{Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::dynamics::{rates_from_trig, rk4, EulerState};
use crate::error::{Error, Result};
use crate::kinematics::{check_gimbal, AttitudeTrig, EulerAngles};
use crate::sensors::{ImuSample, WorldConstants};
use crate::synthesis::GainCertificate;

/// Extended H₂ filter: nonlinear propagation plus a constant output-injection gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eh2Filter {
    pub xhat: EulerState,
    pub gain: Matrix6<f64>,
}

impl Eh2Filter {
    pub fn new(xhat: EulerState, gain: Matrix6<f64>) -> Result<Self> {
        if gain.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("filter gain"));
        }
        Ok(Self { xhat, gain })
    }

    /// Uses the certified gain; refuses gains whose LMI check failed.
    pub fn from_certificate(xhat: EulerState, cert: &GainCertificate) -> Result<Self> {
        if !cert.lmi_feasible {
            return Err(Error::InvalidParameter(
                "gain certificate is not LMI-feasible".into(),
            ));
        }
        Self::new(xhat, cert.gain6()?)
    }

    pub fn step(&self, sample: &ImuSample, world: &WorldConstants, dt: f64) -> Result<Self> {
        eh2_step(self, sample, world, dt)
    }

    /// Output of interest `z = Cz x̂`.
    pub fn estimate(&self) -> EulerAngles {
        self.xhat.attitude
    }
}

/// One RK4 step of `x̂' = f(x̂, ω_m, 0) + L (h(x̂, 0) - y)` with `ω_m` and `y`
/// held over the interval.
pub fn eh2_step(
    s: &Eh2Filter,
    sample: &ImuSample,
    w: &WorldConstants,
    dt: f64,
) -> Result<Eh2Filter> {
    debug_assert!(dt > 0.0);
    let omega = sample.omega_m;
    let (g, h) = (w.g_inertial, w.h_inertial);
    let (a_m, m_m) = (sample.a_m, sample.m_m);
    let gain = &s.gain;
    let rhs = |x: &Vector6<f64>| -> Result<Vector6<f64>> {
        check_gimbal(x[1])?;
        let trig = AttitudeTrig::new(x[0], x[1], x[2]);
        let r = trig.dcm();
        let ra: Vector3<f64> = r * g - a_m;
        let rm: Vector3<f64> = r * h - m_m;
        let residual = Vector6::new(ra.x, ra.y, ra.z, rm.x, rm.y, rm.z);
        Ok(rates_from_trig(&trig, x, &omega) + gain * residual)
    };
    let next = rk4(&s.xhat.to_vector(), dt, rhs)?;
    Ok(Eh2Filter {
        xhat: EulerState::from_vector(&next)?,
        gain: s.gain,
    })
}
