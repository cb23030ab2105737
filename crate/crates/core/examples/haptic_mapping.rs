//! Force, pressure and temperature rendering of a handful of follower
//! sensor frames.
//!
//!     cargo run --example haptic_mapping

use mfe::mapping::{force_to_current, pressure_duty, Mapper, MappingConfig, SensorFrame};

fn main() -> mfe::mapping::Result<()> {
    let cfg = MappingConfig::default();
    println!("{:>8} {:>12} {:>8}", "F_N", "current_mA", "duty");
    for f in [0.0, 1.0, 1.47, 1.5, 2.0, 2.47, 3.0, 6000.0, 9000.0] {
        println!(
            "{f:>8.2} {:>12.4} {:>8.3}",
            force_to_current(f, &cfg)?,
            pressure_duty(f, &cfg)?
        );
    }

    let mut mapper = Mapper::new(cfg)?;
    let frames = [
        SensorFrame::uniform([0.0, 2.0, 2.3, 0.5, 4.0], 24.0, 0.0),
        SensorFrame::uniform([3.0; 5], 60.0, 0.01),
        SensorFrame::uniform([3.0; 5], 4.0, 0.02),
        SensorFrame::uniform([3.0; 5], f64::NAN, 0.03),
    ];
    for frame in &frames {
        let c = mapper.compute_command(frame)?;
        println!(
            "seq {} current {:?} duty {:?} setpoint {} C{}",
            c.sequence,
            c.motor_current.map(|v| (v * 1000.0).round() / 1000.0),
            c.pwm_duty.map(|v| (v * 1000.0).round() / 1000.0),
            c.palm_setpoint,
            if c.is_safe(mapper.config().ambient) {
                " (SAFE)"
            } else {
                ""
            }
        );
    }
    Ok(())
}
