//! Palm temperature sensing membrane on the follower hand: 27 sensors laid
//! out row-major 3x9, each a first-order lag towards the temperature of
//! whatever touches it.

use serde::{Deserialize, Serialize};

use super::heun;
use crate::mapping::{default_central_sensors, PALM_SENSORS};

pub const DEFAULT_SENSOR_TIME_CONSTANT_S: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContactRegion {
    None,
    /// The nine central sensors only.
    Central,
    Full,
    Mask(Vec<usize>),
}

impl ContactRegion {
    pub fn contains(&self, index: usize) -> bool {
        match self {
            ContactRegion::None => false,
            ContactRegion::Full => true,
            ContactRegion::Central => default_central_sensors().contains(&index),
            ContactRegion::Mask(m) => m.contains(&index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membrane {
    temps: [f64; PALM_SENSORS],
    pub ambient: f64,
    pub time_constant: f64,
}

impl Membrane {
    pub fn new(ambient: f64, time_constant: f64) -> Self {
        Membrane {
            temps: [ambient; PALM_SENSORS],
            ambient,
            time_constant,
        }
    }

    pub fn temps(&self) -> &[f64; PALM_SENSORS] {
        &self.temps
    }

    /// Advance all sensors by `dt`. Sensors inside `region` relax towards
    /// `object_temp`, the rest towards ambient.
    pub fn sense(
        &mut self,
        object_temp: f64,
        region: &ContactRegion,
        dt: f64,
    ) -> [f64; PALM_SENSORS] {
        let tau = self.time_constant;
        for (i, t) in self.temps.iter_mut().enumerate() {
            let target = if region.contains(i) {
                object_temp
            } else {
                self.ambient
            };
            let [next] = heun([*t], dt, |&[x]| [(target - x) / tau]);
            *t = next;
        }
        self.temps
    }
}

impl Default for Membrane {
    fn default() -> Self {
        Membrane::new(super::thermo::AMBIENT_C, DEFAULT_SENSOR_TIME_CONSTANT_S)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ambient_object_leaves_sensors_unchanged() {
        let mut m = Membrane::default();
        for _ in 0..1000 {
            m.sense(24.0, &ContactRegion::Full, 1e-3);
        }
        assert!(m.temps().iter().all(|&t| t == 24.0));
    }

    #[test]
    fn full_contact_converges_to_object() {
        let mut m = Membrane::default();
        for _ in 0..10_000 {
            m.sense(60.0, &ContactRegion::Full, 1e-3);
        }
        assert!(m.temps().iter().all(|&t| (t - 60.0).abs() < 1e-9));
    }

    #[test]
    fn central_contact_after_one_time_constant() {
        let mut m = Membrane::default();
        let steps = (DEFAULT_SENSOR_TIME_CONSTANT_S / 1e-3).round() as usize;
        for _ in 0..steps {
            m.sense(60.0, &ContactRegion::Central, 1e-3);
        }
        // 24 + 36 * (1 - e^-1)
        let expected = 24.0 + 36.0 * (1.0 - (-1f64).exp());
        for (i, &t) in m.temps().iter().enumerate() {
            if default_central_sensors().contains(&i) {
                assert!((t - expected).abs() < 1e-4, "{t} vs {expected}");
                assert!((t - 46.75).abs() < 0.05);
            } else {
                assert_eq!(t, 24.0);
            }
        }
    }
}
