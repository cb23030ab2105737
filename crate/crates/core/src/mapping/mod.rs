//! Follower-to-leader haptic mapping: contact force to motor current,
//! contact force to fingertip pressure duty, and palm temperature to the
//! thermoelectric setpoint. Pose retargeting in the other direction lives in
//! [`retarget`].

pub mod retarget;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::FINGERS;

pub const PALM_SENSORS: usize = 27;
pub const PALM_ROWS: usize = 3;
pub const PALM_COLUMNS: usize = 9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MappingError {
    #[error("force must be a non-negative number, got {0}")]
    NegativeForce(f64),
    #[error("sensor fault: palm sensor {index} reads {value}")]
    SensorFault { index: usize, value: f64 },
    #[error("invalid mapping config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, MappingError>;

/// Force-to-current conversion factor kept as a ratio so the full-scale
/// point maps exactly (6000 N -> 1750 mA).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentGain {
    pub milliamps: f64,
    pub per_newtons: f64,
}

impl CurrentGain {
    pub fn apply(&self, force: f64) -> f64 {
        force * self.milliamps / self.per_newtons
    }

    pub fn ma_per_newton(&self) -> f64 {
        self.milliamps / self.per_newtons
    }
}

impl Default for CurrentGain {
    fn default() -> Self {
        CurrentGain {
            milliamps: 1750.0,
            per_newtons: 6000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempLimits {
    pub min: f64,
    pub max: f64,
}

impl TempLimits {
    pub fn clamp(&self, t: f64) -> f64 {
        t.clamp(self.min, self.max)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.min && t <= self.max
    }
}

impl Default for TempLimits {
    fn default() -> Self {
        TempLimits {
            min: 10.0,
            max: 55.0,
        }
    }
}

/// Row-major 3x9 palm array, middle three columns of every row.
pub fn default_central_sensors() -> [usize; 9] {
    let mut idx = [0; 9];
    let mut n = 0;
    for row in 0..PALM_ROWS {
        for col in 3..6 {
            idx[n] = row * PALM_COLUMNS + col;
            n += 1;
        }
    }
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingConfig {
    /// Contact force (N) that must be exceeded before anything is rendered.
    pub force_threshold: f64,
    pub current_gain: CurrentGain,
    /// Intensity parameter `k` of the duty law.
    pub pressure_gain: f64,
    pub temp_limits: TempLimits,
    pub current_limit: f64,
    /// Setpoint of the SAFE command.
    pub ambient: f64,
    /// Width (N) of an optional on/off band centred on the threshold.
    pub hysteresis: Option<f64>,
    pub central_sensors: [usize; 9],
}

impl Default for MappingConfig {
    fn default() -> Self {
        MappingConfig {
            force_threshold: 1.47,
            current_gain: CurrentGain::default(),
            pressure_gain: 1000.0,
            temp_limits: TempLimits::default(),
            current_limit: 1750.0,
            ambient: 24.0,
            hysteresis: None,
            central_sensors: default_central_sensors(),
        }
    }
}

impl MappingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MappingError::InvalidConfig(msg));
        if !(self.force_threshold >= 0.0) {
            return bad(format!("force threshold {} < 0", self.force_threshold));
        }
        if !(self.current_gain.milliamps > 0.0 && self.current_gain.per_newtons > 0.0) {
            return bad("current gain must be positive".into());
        }
        if !(self.pressure_gain > 0.0) {
            return bad(format!(
                "pressure gain {} must be positive",
                self.pressure_gain
            ));
        }
        if !(self.temp_limits.min < self.temp_limits.max) {
            return bad("temperature limits must satisfy min < max".into());
        }
        if !(self.current_limit > 0.0) {
            return bad(format!(
                "current limit {} must be positive",
                self.current_limit
            ));
        }
        if let Some(h) = self.hysteresis {
            if !(h >= 0.0) {
                return bad(format!("hysteresis band {h} must be non-negative"));
            }
        }
        if self.central_sensors.iter().any(|&i| i >= PALM_SENSORS) {
            return bad("central sensor index out of range".into());
        }
        Ok(())
    }
}

/// Follower-side measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub forces: [f64; FINGERS],
    pub palm_temps: [f64; PALM_SENSORS],
    pub timestamp: f64,
}

impl SensorFrame {
    pub fn uniform(forces: [f64; FINGERS], palm: f64, timestamp: f64) -> Self {
        SensorFrame {
            forces,
            palm_temps: [palm; PALM_SENSORS],
            timestamp,
        }
    }
}

/// Leader-side actuation for one control tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HapticCommand {
    pub sequence: u32,
    /// mA, positive resists flexion.
    pub motor_current: [f64; FINGERS],
    pub pwm_duty: [f64; FINGERS],
    pub palm_setpoint: f64,
}

impl HapticCommand {
    /// Zero current, zero duty, ambient setpoint.
    pub fn safe(sequence: u32, ambient: f64) -> Self {
        HapticCommand {
            sequence,
            motor_current: [0.0; FINGERS],
            pwm_duty: [0.0; FINGERS],
            palm_setpoint: ambient,
        }
    }

    pub fn is_safe(&self, ambient: f64) -> bool {
        self.motor_current.iter().all(|&i| i == 0.0)
            && self.pwm_duty.iter().all(|&d| d == 0.0)
            && self.palm_setpoint == ambient
    }

    /// Everything except the sequence number.
    pub fn same_output(&self, other: &HapticCommand) -> bool {
        let bits = |c: &HapticCommand| {
            c.motor_current
                .iter()
                .chain(&c.pwm_duty)
                .chain(std::iter::once(&c.palm_setpoint))
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        bits(self) == bits(other)
    }
}

fn check_force(force: f64) -> Result<()> {
    if force >= 0.0 {
        Ok(())
    } else {
        Err(MappingError::NegativeForce(force))
    }
}

/// Target motor current in mA: zero up to and including the threshold,
/// then `k_I * F` clipped to the current limit.
pub fn force_to_current(force: f64, cfg: &MappingConfig) -> Result<f64> {
    check_force(force)?;
    if force <= cfg.force_threshold {
        return Ok(0.0);
    }
    Ok(cfg.current_gain.apply(force).clamp(0.0, cfg.current_limit))
}

/// PWM duty of the fingertip actuator, `clip(k/1000 * (F - F_t), 0, 1)`.
pub fn pressure_duty(force: f64, cfg: &MappingConfig) -> Result<f64> {
    check_force(force)?;
    if force <= cfg.force_threshold {
        return Ok(0.0);
    }
    Ok((cfg.pressure_gain / 1000.0 * (force - cfg.force_threshold)).clamp(0.0, 1.0))
}

/// Mean of the central palm sensors, clamped to the safe temperature band.
pub fn palm_setpoint(frame: &SensorFrame, cfg: &MappingConfig) -> Result<f64> {
    if let Some((index, &value)) = frame
        .palm_temps
        .iter()
        .enumerate()
        .find(|(_, t)| t.is_nan())
    {
        return Err(MappingError::SensorFault { index, value });
    }
    let sum: f64 = cfg
        .central_sensors
        .iter()
        .map(|&i| frame.palm_temps[i])
        .sum();
    Ok(cfg
        .temp_limits
        .clamp(sum / cfg.central_sensors.len() as f64))
}

/// Stateful wrapper owning the sequence counter and, when enabled, the
/// per-finger hysteresis state.
#[derive(Debug, Clone)]
pub struct Mapper {
    cfg: MappingConfig,
    sequence: u32,
    engaged: [bool; FINGERS],
}

impl Mapper {
    pub fn new(cfg: MappingConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Mapper {
            cfg,
            sequence: 0,
            engaged: [false; FINGERS],
        })
    }

    pub fn config(&self) -> &MappingConfig {
        &self.cfg
    }

    pub fn sequence(&self) -> u32 {
        self.sequence
    }

    fn next_sequence(&mut self) -> u32 {
        self.sequence = self.sequence.wrapping_add(1);
        self.sequence
    }

    pub fn safe_command(&mut self) -> HapticCommand {
        self.engaged = [false; FINGERS];
        let seq = self.next_sequence();
        HapticCommand::safe(seq, self.cfg.ambient)
    }

    fn gate(&mut self, finger: usize, force: f64) -> bool {
        match self.cfg.hysteresis {
            None => force > self.cfg.force_threshold,
            Some(band) => {
                let half = band / 2.0;
                let on = if self.engaged[finger] {
                    force > self.cfg.force_threshold - half
                } else {
                    force > self.cfg.force_threshold + half
                };
                self.engaged[finger] = on;
                on
            }
        }
    }

    /// Map one sensor frame. Negative forces are rejected; a faulty palm
    /// reading (NaN anywhere in the frame) yields the SAFE command.
    pub fn compute_command(&mut self, frame: &SensorFrame) -> Result<HapticCommand> {
        if frame.forces.iter().any(|f| f.is_nan()) {
            return Ok(self.safe_command());
        }
        for &f in &frame.forces {
            check_force(f)?;
        }
        let setpoint = match palm_setpoint(frame, &self.cfg) {
            Ok(t) => t,
            Err(MappingError::SensorFault { .. }) => return Ok(self.safe_command()),
            Err(e) => return Err(e),
        };
        let mut motor_current = [0.0; FINGERS];
        let mut pwm_duty = [0.0; FINGERS];
        for (i, &force) in frame.forces.iter().enumerate() {
            if !self.gate(i, force) {
                continue;
            }
            motor_current[i] = self
                .cfg
                .current_gain
                .apply(force)
                .clamp(0.0, self.cfg.current_limit);
            pwm_duty[i] = (self.cfg.pressure_gain / 1000.0 * (force - self.cfg.force_threshold))
                .clamp(0.0, 1.0);
        }
        Ok(HapticCommand {
            sequence: self.next_sequence(),
            motor_current,
            pwm_duty,
            palm_setpoint: setpoint,
        })
    }
}
