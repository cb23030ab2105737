//! Electro-osmotic fingertip actuator as a second-order underdamped system
//! from drive voltage to chamber pressure.
//!
//! Parameters are tabulated at 50, 100, 150 and 200 V and interpolated
//! linearly in |V|. Only the 200 V row is fitted to measured anchors (peak
//! pressure and the time to reach 0.5 kPa); the lower rows scale the peak
//! with voltage and use smaller overshoots, and are not calibrated against
//! measurements. Negative voltages produce suction of the same magnitude.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_dt, heun, PlantError, Result};

pub const MAX_DT_S: f64 = 1e-3;
pub const MAX_VOLTAGE: f64 = 200.0;
pub const PEAK_PRESSURE_KPA: f64 = 2.47;
pub const PEAK_PROTRUSION_MM: f64 = 1.65;
/// Assumed settled pressure at 200 V.
pub const STEADY_PRESSURE_200V_KPA: f64 = 2.1;
/// Pressure change a fingertip can just distinguish.
pub const PERCEPTION_THRESHOLD_KPA: f64 = 0.5;
pub const THRESHOLD_CROSSING_S: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub voltage: f64,
    /// Settled pressure (kPa) for a constant drive at `voltage`.
    pub steady_gain: f64,
    pub natural_frequency: f64,
    pub damping_ratio: f64,
}

/// Unit step response of `wn^2 / (s^2 + 2 zeta wn s + wn^2)` at normalised time `wn * t`.
pub fn unit_step_response(damping_ratio: f64, normalized_time: f64) -> f64 {
    let z = damping_ratio;
    let root = (1.0 - z * z).sqrt();
    let wd_t = root * normalized_time;
    1.0 - (-z * normalized_time).exp() * (wd_t.cos() + z / root * wd_t.sin())
}

/// Damping ratio giving a fractional overshoot of `overshoot`.
pub fn damping_for_overshoot(overshoot: f64) -> f64 {
    let l = overshoot.ln();
    -l / (PI * PI + l * l).sqrt()
}

impl ResponseRow {
    /// Fit a row to a step response: its peak, its settled value and the time
    /// at which it first reaches `level`.
    pub fn from_step_targets(
        voltage: f64,
        peak: f64,
        steady: f64,
        level: f64,
        crossing_time: f64,
    ) -> Result<Self> {
        if !(peak > steady && steady > 0.0) {
            return Err(PlantError::Calibration(format!(
                "need peak > steady > 0, got peak {peak} steady {steady}"
            )));
        }
        if !(level > 0.0 && level < steady && crossing_time > 0.0) {
            return Err(PlantError::Calibration(format!(
                "crossing level {level} must lie in (0, {steady})"
            )));
        }
        let zeta = damping_for_overshoot((peak - steady) / steady);
        // The rising edge up to the first peak is monotone in normalised time.
        let target = level / steady;
        let (mut lo, mut hi) = (0.0, PI / (1.0 - zeta * zeta).sqrt());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if unit_step_response(zeta, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(ResponseRow {
            voltage,
            steady_gain: steady,
            natural_frequency: 0.5 * (lo + hi) / crossing_time,
            damping_ratio: zeta,
        })
    }

    /// Peak of the ideal continuous step response.
    pub fn ideal_peak(&self) -> f64 {
        let z = self.damping_ratio;
        self.steady_gain * (1.0 + (-z * PI / (1.0 - z * z).sqrt()).exp())
    }

    pub fn overshoot(&self) -> f64 {
        self.ideal_peak() / self.steady_gain - 1.0
    }

    fn lerp(&self, other: &ResponseRow, frac: f64) -> ResponseRow {
        let mix = |a: f64, b: f64| a + (b - a) * frac;
        ResponseRow {
            voltage: mix(self.voltage, other.voltage),
            steady_gain: mix(self.steady_gain, other.steady_gain),
            natural_frequency: mix(self.natural_frequency, other.natural_frequency),
            damping_ratio: mix(self.damping_ratio, other.damping_ratio),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrofluidicParams {
    /// Rows sorted by voltage, ascending.
    pub rows: [ResponseRow; 4],
    /// Protrusion per unit pressure (mm/kPa).
    pub protrusion_per_kpa: f64,
}

impl MicrofluidicParams {
    pub fn calibrated() -> Self {
        let top = ResponseRow::from_step_targets(
            MAX_VOLTAGE,
            PEAK_PRESSURE_KPA,
            STEADY_PRESSURE_200V_KPA,
            PERCEPTION_THRESHOLD_KPA,
            THRESHOLD_CROSSING_S,
        )
        .expect("200 V anchors are consistent");
        let lower = |voltage: f64, overshoot: f64| {
            let peak = PEAK_PRESSURE_KPA * voltage / MAX_VOLTAGE;
            ResponseRow {
                voltage,
                steady_gain: peak / (1.0 + overshoot),
                natural_frequency: top.natural_frequency,
                damping_ratio: damping_for_overshoot(overshoot),
            }
        };
        MicrofluidicParams {
            rows: [
                lower(50.0, 0.04),
                lower(100.0, 0.08),
                lower(150.0, 0.12),
                top,
            ],
            protrusion_per_kpa: PEAK_PROTRUSION_MM / PEAK_PRESSURE_KPA,
        }
    }

    /// Response parameters at drive magnitude `|volts|`.
    pub fn row_at(&self, volts: f64) -> ResponseRow {
        let v = volts.abs().min(MAX_VOLTAGE);
        let first = self.rows[0];
        if v <= first.voltage {
            return ResponseRow {
                voltage: v,
                steady_gain: first.steady_gain * v / first.voltage,
                ..first
            };
        }
        for pair in self.rows.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if v <= b.voltage {
                return a.lerp(&b, (v - a.voltage) / (b.voltage - a.voltage));
            }
        }
        self.rows[3]
    }
}

impl Default for MicrofluidicParams {
    fn default() -> Self {
        MicrofluidicParams::calibrated()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrofluidicPlant {
    params: MicrofluidicParams,
    drive_voltage: f64,
    row: ResponseRow,
    pressure: f64,
    pressure_rate: f64,
}

impl MicrofluidicPlant {
    pub fn new(params: MicrofluidicParams) -> Self {
        let row = params.row_at(0.0);
        MicrofluidicPlant {
            params,
            drive_voltage: 0.0,
            row,
            pressure: 0.0,
            pressure_rate: 0.0,
        }
    }

    pub fn set_voltage(&mut self, volts: f64) -> Result<()> {
        if !(volts.abs() <= MAX_VOLTAGE) {
            return Err(PlantError::VoltageOutOfRange {
                volts,
                limit: MAX_VOLTAGE,
            });
        }
        self.drive_voltage = volts;
        self.row = self.params.row_at(volts);
        Ok(())
    }

    /// Average drive voltage of a PWM duty at full supply.
    pub fn set_duty(&mut self, duty: f64) -> Result<()> {
        self.set_voltage(duty.clamp(0.0, 1.0) * MAX_VOLTAGE)
    }

    pub fn drive_voltage(&self) -> f64 {
        self.drive_voltage
    }

    /// kPa, negative under suction.
    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn protrusion_mm(&self) -> f64 {
        self.pressure * self.params.protrusion_per_kpa
    }

    pub fn params(&self) -> &MicrofluidicParams {
        &self.params
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        check_dt(dt, MAX_DT_S)?;
        let target = self.row.steady_gain.copysign(self.drive_voltage);
        let target = if self.drive_voltage == 0.0 {
            0.0
        } else {
            target
        };
        let wn = self.row.natural_frequency;
        let zeta = self.row.damping_ratio;
        let [p, v] = heun([self.pressure, self.pressure_rate], dt, |&[p, v]| {
            [v, wn * wn * (target - p) - 2.0 * zeta * wn * v]
        });
        self.pressure = p;
        self.pressure_rate = v;
        Ok(())
    }
}

impl Default for MicrofluidicPlant {
    fn default() -> Self {
        MicrofluidicPlant::new(MicrofluidicParams::calibrated())
    }
}

/// Summary of a simulated step response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    pub peak: f64,
    pub peak_time: f64,
    pub final_value: f64,
    pub overshoot: f64,
    /// First time the response reaches the perception threshold.
    pub threshold_crossing: Option<f64>,
}

/// Simulate a voltage step from rest. Returns `(t, pressure, protrusion)`
/// samples, one per step.
pub fn simulate_step(
    params: &MicrofluidicParams,
    volts: f64,
    duration: f64,
    dt: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let mut plant = MicrofluidicPlant::new(params.clone());
    plant.set_voltage(volts)?;
    let steps = (duration / dt).round() as usize;
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        plant.step(dt)?;
        out.push((k as f64 * dt, plant.pressure(), plant.protrusion_mm()));
    }
    Ok(out)
}

pub fn step_metrics(trace: &[(f64, f64, f64)]) -> StepMetrics {
    let (mut peak, mut peak_time) = (f64::MIN, 0.0);
    let mut crossing = None;
    for &(t, p, _) in trace {
        if p > peak {
            peak = p;
            peak_time = t;
        }
        if crossing.is_none() && p >= PERCEPTION_THRESHOLD_KPA {
            crossing = Some(t);
        }
    }
    let final_value = trace.last().map_or(0.0, |s| s.1);
    StepMetrics {
        peak,
        peak_time,
        final_value,
        overshoot: if final_value > 0.0 {
            peak / final_value - 1.0
        } else {
            0.0
        },
        threshold_crossing: crossing,
    }
}
