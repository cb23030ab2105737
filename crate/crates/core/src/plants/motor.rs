use serde::{Deserialize, Serialize};

/// Current-controlled servo in torque mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorPlant {
    pub stall_torque: f64,
    /// Friction felt when back-driving the unpowered servo.
    pub resistance_torque: f64,
    pub current_limit: f64,
    commanded_current: f64,
}

impl Default for MotorPlant {
    fn default() -> Self {
        MotorPlant {
            stall_torque: 0.52,
            resistance_torque: 0.03,
            current_limit: 1750.0,
            commanded_current: 0.0,
        }
    }
}

impl MotorPlant {
    /// Nm per mA.
    pub fn torque_constant(&self) -> f64 {
        self.stall_torque / self.current_limit
    }

    /// Output torque for `current` mA, linear and clipped at stall.
    pub fn motor_torque(&self, current: f64) -> f64 {
        (current * self.stall_torque / self.current_limit)
            .clamp(-self.stall_torque, self.stall_torque)
    }

    pub fn command(&mut self, current: f64) {
        self.commanded_current = current;
    }

    pub fn commanded_current(&self) -> f64 {
        self.commanded_current
    }

    pub fn torque(&self) -> f64 {
        self.motor_torque(self.commanded_current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torque_examples() {
        let m = MotorPlant::default();
        assert_eq!(m.motor_torque(1750.0), 0.52);
        assert_eq!(m.motor_torque(0.0), 0.0);
        assert!((m.motor_torque(875.0) - 0.26).abs() < 1e-15);
        assert_eq!(m.motor_torque(5000.0), 0.52);
        assert_eq!(m.motor_torque(-5000.0), -0.52);
    }
}
