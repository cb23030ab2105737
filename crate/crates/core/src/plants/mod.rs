//! Lumped dynamic models of the leader-side actuators and the follower-side
//! palm sensing membrane, integrated with a fixed-step explicit trapezoidal
//! (Heun) scheme.

pub mod membrane;
pub mod microfluidic;
pub mod motor;
pub mod pid;
pub mod thermo;

pub use membrane::{ContactRegion, Membrane};
pub use microfluidic::{MicrofluidicParams, MicrofluidicPlant, ResponseRow, StepMetrics};
pub use motor::MotorPlant;
pub use pid::{PidController, PidGains};
pub use thermo::{SteadyMap, ThermoPlant};

use thiserror::Error;

/// Plant integration rate used by the session runtime.
pub const PLANT_DT_S: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("step {dt} s outside (0, {max}] s")]
    StepOutOfRange { dt: f64, max: f64 },
    #[error("drive voltage {volts} V outside [-{limit}, {limit}] V")]
    VoltageOutOfRange { volts: f64, limit: f64 },
    #[error("calibration failed: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, PlantError>;

pub(crate) fn check_dt(dt: f64, max: f64) -> Result<()> {
    if dt > 0.0 && dt <= max {
        Ok(())
    } else {
        Err(PlantError::StepOutOfRange { dt, max })
    }
}

/// One explicit trapezoidal step of `x' = f(x)`.
pub(crate) fn heun<const N: usize>(
    x: [f64; N],
    dt: f64,
    f: impl Fn(&[f64; N]) -> [f64; N],
) -> [f64; N] {
    let k1 = f(&x);
    let predictor: [f64; N] = std::array::from_fn(|i| x[i] + dt * k1[i]);
    let k2 = f(&predictor);
    std::array::from_fn(|i| x[i] + 0.5 * dt * (k1[i] + k2[i]))
}
