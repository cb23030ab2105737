use serde::{Deserialize, Serialize};

pub const MAX_TILT_DEG: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CupParams {
    /// Wall stiffness against the fingers (N/m).
    pub wall_stiffness: f64,
    /// Wall deformation (m) past which granules spill.
    pub spill_threshold: f64,
    /// Spill rate per newton of grip above spill onset, g/(N s).
    pub spill_rate: f64,
    /// Minimum grip to hold the cup: `hold_base + hold_per_deg * tilt`.
    pub hold_base: f64,
    pub hold_per_deg: f64,
    pub fill_mass: f64,
    pub diameter: f64,
}

impl Default for CupParams {
    fn default() -> Self {
        CupParams {
            wall_stiffness: 300.0,
            spill_threshold: 0.008,
            spill_rate: 5.0,
            hold_base: 0.5,
            hold_per_deg: 0.15,
            fill_mass: 100.0,
            diameter: 0.07,
        }
    }
}

/// Deformable cup filled with granules. Spilled mass only grows and the
/// dropped flag latches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularCup {
    pub params: CupParams,
    spilled: f64,
    deformation: f64,
    lifted: bool,
    dropped: bool,
}

impl GranularCup {
    pub fn new(params: CupParams) -> Self {
        GranularCup {
            params,
            spilled: 0.0,
            deformation: 0.0,
            lifted: false,
            dropped: false,
        }
    }

    /// A cup that is already off the table.
    pub fn lifted(params: CupParams) -> Self {
        GranularCup {
            lifted: true,
            ..GranularCup::new(params)
        }
    }

    pub fn lift(&mut self) {
        self.lifted = true;
    }

    pub fn is_lifted(&self) -> bool {
        self.lifted
    }

    pub fn hold_min(&self, tilt_deg: f64) -> f64 {
        self.params.hold_base + self.params.hold_per_deg * tilt_deg
    }

    /// Grip force at which the wall deformation reaches the spill threshold.
    pub fn spill_onset(&self) -> f64 {
        self.params.wall_stiffness * self.params.spill_threshold
    }

    pub fn spilled(&self) -> f64 {
        self.spilled
    }

    pub fn remaining(&self) -> f64 {
        self.params.fill_mass - self.spilled
    }

    pub fn deformation(&self) -> f64 {
        self.deformation
    }

    pub fn dropped(&self) -> bool {
        self.dropped
    }

    pub fn contact_force(&self, penetration: f64) -> f64 {
        if self.dropped {
            0.0
        } else {
            self.params.wall_stiffness * penetration.max(0.0)
        }
    }

    pub fn cup_step(&mut self, grip: f64, tilt_deg: f64, dt: f64) {
        if self.dropped {
            return;
        }
        let tilt = tilt_deg.clamp(0.0, MAX_TILT_DEG);
        let grip = grip.max(0.0);
        self.deformation = grip / self.params.wall_stiffness;
        if self.deformation > self.params.spill_threshold {
            let excess = grip - self.spill_onset();
            self.spilled =
                (self.spilled + self.params.spill_rate * excess * dt).min(self.params.fill_mass);
        }
        if self.lifted && grip < self.hold_min(tilt) {
            self.dropped = true;
            self.spilled = self.params.fill_mass;
        }
    }
}
