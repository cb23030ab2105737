//! Thermoelectric palm module: first-order relaxation of the surface
//! temperature towards a voltage-dependent steady state.

use serde::{Deserialize, Serialize};

use super::{check_dt, heun, PlantError, Result};

pub const MAX_DT_S: f64 = 1e-2;
pub const MAX_VOLTAGE: f64 = 5.0;
pub const AMBIENT_C: f64 = 24.0;
pub const DEFAULT_TIME_CONSTANT_S: f64 = 1.2;
const GUARD_BAND_C: (f64, f64) = (0.0, 80.0);

/// Piecewise-linear map from drive voltage to settled surface temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyMap {
    anchors: Vec<(f64, f64)>,
}

impl SteadyMap {
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(PlantError::Calibration(
                "steady map needs two anchors".into(),
            ));
        }
        if anchors
            .windows(2)
            .any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1))
        {
            return Err(PlantError::Calibration(
                "steady map anchors must be strictly increasing in voltage and temperature".into(),
            ));
        }
        Ok(SteadyMap { anchors })
    }

    /// -5 V -> 10 C, 0 V -> ambient, +5 V -> 55 C.
    pub fn calibrated(ambient: f64) -> Self {
        SteadyMap::new(vec![
            (-MAX_VOLTAGE, 10.0),
            (0.0, ambient),
            (MAX_VOLTAGE, 55.0),
        ])
        .expect("ambient must lie strictly between 10 and 55 C")
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn at(&self, volts: f64) -> f64 {
        let first = self.anchors[0];
        let last = self.anchors[self.anchors.len() - 1];
        if volts <= first.0 {
            return first.1;
        }
        if volts >= last.0 {
            return last.1;
        }
        let i = self.anchors.partition_point(|a| a.0 <= volts).max(1);
        let (a, b) = (self.anchors[i - 1], self.anchors[i]);
        a.1 + (b.1 - a.1) * (volts - a.0) / (b.0 - a.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoPlant {
    drive_voltage: f64,
    surface_temp: f64,
    ambient: f64,
    steady_map: SteadyMap,
    time_constant: f64,
}

impl ThermoPlant {
    pub fn new(ambient: f64, steady_map: SteadyMap, time_constant: f64) -> Self {
        ThermoPlant {
            drive_voltage: 0.0,
            surface_temp: ambient,
            ambient,
            steady_map,
            time_constant,
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
        Ok(())
    }

    pub fn drive_voltage(&self) -> f64 {
        self.drive_voltage
    }

    pub fn surface_temp(&self) -> f64 {
        self.surface_temp
    }

    pub fn ambient(&self) -> f64 {
        self.ambient
    }

    pub fn steady_map(&self) -> &SteadyMap {
        &self.steady_map
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        check_dt(dt, MAX_DT_S)?;
        let target = self.steady_map.at(self.drive_voltage);
        let tau = self.time_constant;
        let [t] = heun([self.surface_temp], dt, |&[t]| [(target - t) / tau]);
        self.surface_temp = t.clamp(GUARD_BAND_C.0, GUARD_BAND_C.1);
        Ok(())
    }
}

impl Default for ThermoPlant {
    fn default() -> Self {
        ThermoPlant::new(
            AMBIENT_C,
            SteadyMap::calibrated(AMBIENT_C),
            DEFAULT_TIME_CONSTANT_S,
        )
    }
}
