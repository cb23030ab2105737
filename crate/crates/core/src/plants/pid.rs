use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl Default for PidGains {
    /// Tuned for the default thermal plant: 24 -> 40 C settles in about 5 s.
    fn default() -> Self {
        PidGains {
            kp: 1.0,
            ki: 0.2,
            kd: 0.0,
        }
    }
}

/// PID with derivative on measurement and conditional integration: the
/// integral only moves on steps where the output is not clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PidController {
    pub gains: PidGains,
    pub output_limit: f64,
    pub windup_limit: f64,
    integral: f64,
    last_measurement: Option<f64>,
}

impl PidController {
    pub fn new(gains: PidGains, output_limit: f64, windup_limit: f64) -> Self {
        PidController {
            gains,
            output_limit,
            windup_limit,
            integral: 0.0,
            last_measurement: None,
        }
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.last_measurement = None;
    }

    pub fn step(&mut self, setpoint: f64, measured: f64, dt: f64) -> f64 {
        let error = setpoint - measured;
        let derivative = match self.last_measurement {
            Some(prev) if dt > 0.0 => (measured - prev) / dt,
            _ => 0.0,
        };
        self.last_measurement = Some(measured);
        let PidGains { kp, ki, kd } = self.gains;
        let candidate = (self.integral + error * dt).clamp(-self.windup_limit, self.windup_limit);
        let raw = kp * error + ki * candidate - kd * derivative;
        if raw.abs() <= self.output_limit {
            self.integral = candidate;
            raw
        } else {
            let held = kp * error + ki * self.integral - kd * derivative;
            if held.is_nan() {
                return 0.0;
            }
            held.clamp(-self.output_limit, self.output_limit)
        }
    }
}

impl Default for PidController {
    fn default() -> Self {
        PidController::new(PidGains::default(), 5.0, 50.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error_gives_zero_output() {
        let mut pid = PidController::default();
        assert_eq!(pid.step(30.0, 30.0, 0.01), 0.0);
    }

    #[test]
    fn large_error_saturates_and_freezes_integral() {
        let mut pid = PidController::default();
        assert_eq!(pid.step(55.0, 24.0, 0.01), 5.0);
        assert_eq!(pid.integral(), 0.0);
        assert_eq!(pid.step(0.0, 60.0, 0.01), -5.0);
    }

    #[test]
    fn derivative_acts_on_measurement() {
        let mut pid = PidController::new(
            PidGains {
                kp: 0.0,
                ki: 0.0,
                kd: 1.0,
            },
            5.0,
            50.0,
        );
        assert_eq!(pid.step(10.0, 20.0, 0.1), 0.0);
        // Setpoint jump does not kick; measurement rise of 0.1 over 0.1 s does.
        assert!((pid.step(40.0, 20.1, 0.1) + 1.0).abs() < 1e-9);
    }
}
