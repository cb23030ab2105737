//! Open-loop extremes and closed-loop setpoint tracking of the palm
//! thermoelectric module.
//!
//!     cargo run --example thermal_loop

use mfe::characterize::{settling_time, thermo_closed_loop, thermo_open_loop};

fn main() -> mfe::plants::Result<()> {
    for v in [5.0, -5.0] {
        let trace = thermo_open_loop(v, 15.0)?;
        println!(
            "open loop {v:+.0} V: {:.2} C after 15 s",
            trace.last().unwrap().2
        );
    }
    for setpoint in [40.0, 55.0, 10.0] {
        let trace = thermo_closed_loop(setpoint, 20.0)?;
        let peak = trace.iter().map(|s| s.2).fold(f64::MIN, f64::max);
        match settling_time(&trace, setpoint, 1.0) {
            Some(t) => println!("24 -> {setpoint} C: within 1 C from {t:.2} s, max {peak:.2} C"),
            None => println!("24 -> {setpoint} C: not settled in 20 s"),
        }
    }
    Ok(())
}
