use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kinematics::GIMBAL_EPS;
use crate::sensors::{NoiseParams, WorldConstants};

/// Angle separating the slow/small and fast/large regimes (degrees).
pub const REGIME_LIMIT_DEG: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseId {
    /// Slow, small-angle motion, axes excited one at a time.
    #[serde(rename = "I")]
    I,
    /// Fast, large-angle motion on all axes together.
    #[serde(rename = "II")]
    II,
    #[serde(rename = "custom")]
    Custom,
}

impl std::str::FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(CaseId::I),
            "II" | "2" => Ok(CaseId::II),
            "custom" => Ok(CaseId::Custom),
            other => Err(Error::Config(format!(
                "unknown case {other:?} (expected I, II or custom)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Each axis performs `sin²` excursions in its own third of the run.
    Sequential,
    /// All axes follow phase-shifted sinusoids over the whole run.
    Simultaneous,
}

/// Scenario description. Serialized field-for-field as the JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub case_id: CaseId,
    /// Seconds.
    pub duration: f64,
    /// Hz.
    pub imu_rate: f64,
    /// Peak Euler-angle rate per axis (rad/s).
    pub angular_speed: f64,
    /// Peak excursion per axis (roll, pitch, yaw), degrees.
    pub amplitude_deg: [f64; 3],
    pub profile: Profile,
    /// Phase offsets (rad) for the simultaneous profile.
    #[serde(default)]
    pub phase: [f64; 3],
    /// Sensor noise used to generate the measurements.
    pub noise: NoiseParams,
    /// Noise assumed by the filters (gain design and EKF covariances).
    /// Defaults to `noise`; set it when simulating noise-free streams.
    #[serde(default)]
    pub filter_noise: Option<NoiseParams>,
    pub world: WorldConstants,
    /// True gyro bias at t = 0 (rad/s).
    #[serde(default)]
    pub initial_bias: [f64; 3],
    pub seed: u64,
    pub num_trials: usize,
    /// Convergence window dropped before computing error metrics (s).
    #[serde(default = "default_exclude_initial")]
    pub exclude_initial: f64,
}

fn default_exclude_initial() -> f64 {
    5.0
}

impl ScenarioConfig {
    /// Slow and small: 50 s at π/50 rad/s, one `sin²` hump per axis, in turn.
    pub fn case_i() -> Self {
        let duration = 50.0;
        let angular_speed = PI / 50.0;
        let slot = duration / 3.0;
        let amplitude = (angular_speed * slot / PI).to_degrees();
        Self {
            case_id: CaseId::I,
            duration,
            imu_rate: 100.0,
            angular_speed,
            amplitude_deg: [amplitude; 3],
            profile: Profile::Sequential,
            phase: [0.0; 3],
            noise: NoiseParams::default(),
            filter_noise: None,
            world: WorldConstants::default(),
            initial_bias: [0.0; 3],
            seed: 1,
            num_trials: 10,
            exclude_initial: default_exclude_initial(),
        }
    }

    /// Fast and large: 10 s at π/3 rad/s, 60° sinusoids on all axes at once.
    pub fn case_ii() -> Self {
        Self {
            case_id: CaseId::II,
            duration: 10.0,
            angular_speed: PI / 3.0,
            amplitude_deg: [60.0; 3],
            profile: Profile::Simultaneous,
            ..Self::case_i()
        }
    }

    pub fn for_case(case: CaseId) -> Self {
        match case {
            CaseId::I => Self::case_i(),
            CaseId::II => Self::case_ii(),
            CaseId::Custom => Self {
                case_id: CaseId::Custom,
                ..Self::case_i()
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn filter_noise(&self) -> NoiseParams {
        self.filter_noise.unwrap_or(self.noise)
    }

    pub fn initial_bias(&self) -> Vector3<f64> {
        Vector3::from(self.initial_bias)
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.imu_rate
    }

    pub fn num_samples(&self) -> usize {
        (self.duration * self.imu_rate).round() as usize + 1
    }

    /// First 16 hex digits of the SHA-256 of the compact JSON form.
    pub fn config_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(digest)[..16].to_string()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("duration", self.duration)?;
        positive("imu_rate", self.imu_rate)?;
        if self.num_trials == 0 {
            return Err(Error::Config("num_trials must be at least 1".into()));
        }
        if !(self.angular_speed.is_finite() && self.angular_speed >= 0.0) {
            return Err(Error::Config(format!(
                "angular_speed must be >= 0, got {}",
                self.angular_speed
            )));
        }
        if !(self.exclude_initial.is_finite()
            && self.exclude_initial >= 0.0
            && self.exclude_initial < self.duration)
        {
            return Err(Error::Config(format!(
                "exclude_initial must lie in [0, duration), got {}",
                self.exclude_initial
            )));
        }
        if self
            .amplitude_deg
            .iter()
            .chain(self.phase.iter())
            .any(|v| !v.is_finite())
            || self
                .amplitude_deg
                .iter()
                .any(|&a| !(0.0..=180.0).contains(&a))
        {
            return Err(Error::Config(
                "amplitudes must lie in [0, 180] degrees".into(),
            ));
        }
        if self.amplitude_deg[1].to_radians() >= FRAC_PI_2 - GIMBAL_EPS {
            return Err(Error::Config(format!(
                "pitch amplitude {}° reaches the gimbal-lock band",
                self.amplitude_deg[1]
            )));
        }
        let to_config = |e: Error| Error::Config(e.to_string());
        self.noise.validate().map_err(to_config)?;
        self.filter_noise().validate().map_err(to_config)?;
        self.world.validate().map_err(to_config)?;
        if self.initial_bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("initial_bias must be finite".into()));
        }
        match self.case_id {
            CaseId::I if self.amplitude_deg.iter().any(|&a| a >= REGIME_LIMIT_DEG) => {
                Err(Error::Config(format!(
                    "case I requires amplitudes below {REGIME_LIMIT_DEG}°, got {:?}",
                    self.amplitude_deg
                )))
            }
            CaseId::II if self.amplitude_deg.iter().any(|&a| a <= REGIME_LIMIT_DEG) => {
                Err(Error::Config(format!(
                    "case II requires amplitudes above {REGIME_LIMIT_DEG}°, got {:?}",
                    self.amplitude_deg
                )))
            }
            _ => Ok(()),
        }
    }
}
