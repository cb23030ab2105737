//! Bench characterization runs for the three leader-side actuators, with
//! CSV writers matching what `mfe characterize` emits.

use std::io::Write;

use crate::kinematics::{fingertip_force, LinkageGeometry};
use crate::plants::microfluidic::{simulate_step, MicrofluidicParams};
use crate::plants::{MotorPlant, PidController, PlantError, ThermoPlant, PLANT_DT_S};

pub const CONTROL_DT_S: f64 = 0.01;

pub const MOTOR_CSV_HEADER: [&str; 3] = ["current_mA", "torque_Nm", "rest_force_N"];
pub const FLUIDIC_CSV_HEADER: [&str; 4] = ["t_s", "input", "pressure_kPa", "protrusion_mm"];
pub const THERMO_CSV_HEADER: [&str; 3] = ["t_s", "voltage_V", "temp_C"];

/// Torque and rest-pose fingertip force over the current range.
pub fn motor_sweep(
    motor: &MotorPlant,
    geom: &LinkageGeometry,
    step_ma: f64,
) -> Vec<(f64, f64, f64)> {
    let n = (motor.current_limit / step_ma).round() as usize;
    let rest = LinkageGeometry::rest_pose();
    (0..=n)
        .map(|i| {
            let current = (i as f64 * step_ma).min(motor.current_limit);
            let torque = motor.motor_torque(current);
            let force = fingertip_force(geom, &rest, torque).unwrap_or(f64::NAN);
            (current, torque, force)
        })
        .collect()
}

/// Step responses at each voltage, concatenated; `input` holds the voltage.
pub fn fluidic_steps(
    params: &MicrofluidicParams,
    voltages: &[f64],
    duration: f64,
) -> Result<Vec<(f64, f64, f64, f64)>, PlantError> {
    let mut rows = Vec::new();
    for &v in voltages {
        for (t, p, x) in simulate_step(params, v, duration, PLANT_DT_S)? {
            rows.push((t, v, p, x));
        }
    }
    Ok(rows)
}

/// Constant drive voltage from ambient.
pub fn thermo_open_loop(volts: f64, duration: f64) -> Result<Vec<(f64, f64, f64)>, PlantError> {
    let mut plant = ThermoPlant::default();
    plant.set_voltage(volts)?;
    let steps = (duration / PLANT_DT_S).round() as usize;
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        plant.step(PLANT_DT_S)?;
        out.push((k as f64 * PLANT_DT_S, volts, plant.surface_temp()));
    }
    Ok(out)
}

/// PID tracking of `setpoint` from ambient: controller at the control rate,
/// plant at the plant rate, one sample per control tick.
pub fn thermo_closed_loop(
    setpoint: f64,
    duration: f64,
) -> Result<Vec<(f64, f64, f64)>, PlantError> {
    let mut plant = ThermoPlant::default();
    let mut pid = PidController::default();
    let substeps = (CONTROL_DT_S / PLANT_DT_S).round() as usize;
    let ticks = (duration / CONTROL_DT_S).round() as usize;
    let mut out = Vec::with_capacity(ticks);
    for k in 0..ticks {
        let volts = pid.step(setpoint, plant.surface_temp(), CONTROL_DT_S);
        plant.set_voltage(volts)?;
        for _ in 0..substeps {
            plant.step(PLANT_DT_S)?;
        }
        out.push(((k + 1) as f64 * CONTROL_DT_S, volts, plant.surface_temp()));
    }
    Ok(out)
}

/// Time after which the trace stays within `band` of `target`; `None` if
/// it is still outside at the end.
pub fn settling_time(trace: &[(f64, f64, f64)], target: f64, band: f64) -> Option<f64> {
    match trace.iter().rposition(|s| (s.2 - target).abs() > band) {
        None => trace.first().map(|s| s.0),
        Some(i) if i + 1 < trace.len() => Some(trace[i + 1].0),
        Some(_) => None,
    }
}

fn write_rows<W: Write, const N: usize>(
    out: W,
    header: [&str; N],
    rows: impl IntoIterator<Item = [f64; N]>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_motor_csv<W: Write>(out: W, rows: &[(f64, f64, f64)]) -> csv::Result<()> {
    write_rows(
        out,
        MOTOR_CSV_HEADER,
        rows.iter().map(|&(a, b, c)| [a, b, c]),
    )
}

pub fn write_fluidic_csv<W: Write>(out: W, rows: &[(f64, f64, f64, f64)]) -> csv::Result<()> {
    write_rows(
        out,
        FLUIDIC_CSV_HEADER,
        rows.iter().map(|&(a, b, c, d)| [a, b, c, d]),
    )
}

pub fn write_thermo_csv<W: Write>(out: W, rows: &[(f64, f64, f64)]) -> csv::Result<()> {
    write_rows(
        out,
        THERMO_CSV_HEADER,
        rows.iter().map(|&(a, b, c)| [a, b, c]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_loop_reaches_setpoint() {
        let trace = thermo_closed_loop(40.0, 10.0).unwrap();
        let settle = settling_time(&trace, 40.0, 1.0).unwrap();
        assert!((3.0..=6.0).contains(&settle), "{settle}");
        assert!(trace.iter().all(|s| s.1.abs() <= 5.0));
    }

    #[test]
    fn motor_sweep_ends_at_stall() {
        let rows = motor_sweep(
            &MotorPlant::default(),
            &LinkageGeometry::calibrated(),
            250.0,
        );
        let last = rows.last().unwrap();
        assert_eq!(last.0, 1750.0);
        assert!((last.1 - 0.52).abs() < 1e-12);
    }

    #[test]
    fn settling_time_edges() {
        let tr = [(0.1, 0.0, 0.0), (0.2, 0.0, 5.0), (0.3, 0.0, 5.2)];
        assert_eq!(settling_time(&tr, 5.0, 0.5), Some(0.2));
        assert_eq!(settling_time(&tr, 0.0, 0.5), None);
        assert_eq!(settling_time(&tr[1..], 5.0, 0.5), Some(0.2));
    }
}
