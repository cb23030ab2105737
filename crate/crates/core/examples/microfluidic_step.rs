//! Step responses of the fingertip pressure actuator at the four
//! calibrated drive voltages.
//!
//!     cargo run --example microfluidic_step

use mfe::plants::microfluidic::{simulate_step, step_metrics, MicrofluidicParams};
use mfe::plants::PLANT_DT_S;

fn main() -> mfe::plants::Result<()> {
    let params = MicrofluidicParams::calibrated();
    println!(
        "{:>5} {:>9} {:>8} {:>10} {:>8} {:>12}",
        "V", "peak_kPa", "peak_s", "final_kPa", "over_%", "0.5kPa_at_s"
    );
    for v in [50.0, 100.0, 150.0, 200.0] {
        let trace = simulate_step(&params, v, 1.0, PLANT_DT_S)?;
        let m = step_metrics(&trace);
        let crossing = m
            .threshold_crossing
            .map_or("never".to_string(), |t| format!("{t:.3}"));
        println!(
            "{v:>5.0} {:>9.4} {:>8.3} {:>10.4} {:>8.1} {crossing:>12}",
            m.peak,
            m.peak_time,
            m.final_value,
            100.0 * m.overshoot
        );
    }
    let peak = step_metrics(&simulate_step(&params, 200.0, 1.0, PLANT_DT_S)?);
    println!(
        "peak protrusion at 200 V: {:.3} mm",
        peak.peak * params.protrusion_per_kpa
    );
    Ok(())
}
