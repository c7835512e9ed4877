//! Deterministic reference motions.
//!
//! Sequential profile: the run is split into three equal slots and axis `i`
//! moves only in slot `i`, tracing `A sin²(ν τ)` with `ν = speed / A` so the
//! peak Euler-angle rate equals the configured speed. Only whole humps are
//! flown, so every axis starts and ends each slot at rest at zero.
//!
//! Simultaneous profile: every axis follows `A sin(ν t + phase)` with
//! `ν = speed / A` for the whole run.

use nalgebra::Vector3;

use super::config::{CaseId, Profile, ScenarioConfig, REGIME_LIMIT_DEG};
use crate::error::{Error, Result};
use crate::kinematics::{euler_rates, kinematic_matrix_inverse, EulerAngles, GIMBAL_EPS};

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub attitude: Vec<EulerAngles>,
    /// Body angular velocity (rad/s) at each sample.
    pub body_rate: Vec<Vector3<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

struct AxisMotion {
    amplitude: f64,
    freq: f64,
    start: f64,
    active: f64,
    phase: f64,
}

impl AxisMotion {
    fn angle_and_rate(&self, profile: Profile, t: f64) -> (f64, f64) {
        if self.amplitude == 0.0 || self.freq == 0.0 {
            return (0.0, 0.0);
        }
        match profile {
            Profile::Sequential => {
                let tau = t - self.start;
                if tau < 0.0 || tau >= self.active {
                    return (0.0, 0.0);
                }
                let arg = self.freq * tau;
                (
                    self.amplitude * arg.sin().powi(2),
                    self.amplitude * self.freq * (2.0 * arg).sin(),
                )
            }
            Profile::Simultaneous => {
                let arg = self.freq * t + self.phase;
                (
                    self.amplitude * arg.sin(),
                    self.amplitude * self.freq * arg.cos(),
                )
            }
        }
    }
}

fn axis_motions(cfg: &ScenarioConfig) -> Result<[AxisMotion; 3]> {
    let slot = cfg.duration / 3.0;
    let mut out = Vec::with_capacity(3);
    for axis in 0..3 {
        let amplitude = cfg.amplitude_deg[axis].to_radians();
        let freq = if amplitude > 0.0 {
            cfg.angular_speed / amplitude
        } else {
            0.0
        };
        let (start, active) = match cfg.profile {
            Profile::Sequential => {
                let humps = if freq > 0.0 {
                    (slot * freq / std::f64::consts::PI + 1e-9).floor()
                } else {
                    0.0
                };
                if freq > 0.0 && humps < 1.0 {
                    return Err(Error::Config(format!(
                        "axis {axis}: a {:.3}° excursion at {} rad/s does not fit in a {slot} s slot",
                        cfg.amplitude_deg[axis], cfg.angular_speed
                    )));
                }
                (
                    axis as f64 * slot,
                    humps * std::f64::consts::PI / freq.max(f64::MIN_POSITIVE),
                )
            }
            Profile::Simultaneous => (0.0, cfg.duration),
        };
        out.push(AxisMotion {
            amplitude,
            freq,
            start,
            active,
            phase: cfg.phase[axis],
        });
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}

/// Samples the reference motion at the IMU rate, checking the case's angle
/// regime at every sample.
pub fn generate_trajectory(cfg: &ScenarioConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let motions = axis_motions(cfg)?;
    let n = cfg.num_samples();
    let limit = REGIME_LIMIT_DEG.to_radians();
    let mut times = Vec::with_capacity(n);
    let mut attitude = Vec::with_capacity(n);
    let mut body_rate = Vec::with_capacity(n);
    let mut all_axes_large = false;

    for k in 0..n {
        let t = k as f64 / cfg.imu_rate;
        let mut angles = [0.0; 3];
        let mut rates = [0.0; 3];
        for (axis, motion) in motions.iter().enumerate() {
            (angles[axis], rates[axis]) = motion.angle_and_rate(cfg.profile, t);
        }
        if angles[1].abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_EPS {
            return Err(Error::Config(format!(
                "pitch {} rad at t = {t} breaches the gimbal guard",
                angles[1]
            )));
        }
        match cfg.case_id {
            CaseId::I if angles.iter().any(|a| a.abs() >= limit) => {
                return Err(Error::Config(format!(
                    "case I trajectory reaches {angles:?} rad at t = {t}"
                )));
            }
            CaseId::II if angles.iter().all(|a| a.abs() > limit) => all_axes_large = true,
            _ => {}
        }
        let e = EulerAngles::new(angles[0], angles[1], angles[2])
            .map_err(|e| Error::Config(e.to_string()))?;
        let omega = kinematic_matrix_inverse(&e).map_err(|e| Error::Config(e.to_string()))?
            * Vector3::from(rates);
        times.push(t);
        attitude.push(e);
        body_rate.push(omega);
    }
    if cfg.case_id == CaseId::II && !all_axes_large {
        return Err(Error::Config(format!(
            "case II trajectory never exceeds {REGIME_LIMIT_DEG}° on all axes at once"
        )));
    }
    Ok(Trajectory {
        times,
        attitude,
        body_rate,
    })
}

/// Euler-angle rates implied by a trajectory sample, for consistency checks.
pub fn sample_euler_rates(traj: &Trajectory, k: usize) -> Result<Vector3<f64>> {
    euler_rates(&traj.attitude[k], &traj.body_rate[k])
}
