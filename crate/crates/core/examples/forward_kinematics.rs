//! Fingertip position, moment arm and fingertip force of one exoskeleton
//! finger at a few poses.
//!
//!     cargo run --example forward_kinematics

use mfe::kinematics::{fingertip_force, forward_kinematics, moment_arm, LinkageGeometry};
use mfe::plants::MotorPlant;

fn main() -> mfe::kinematics::Result<()> {
    let geom = LinkageGeometry::calibrated();
    let torque = MotorPlant::default().motor_torque(1750.0);
    let poses = [
        ("extended", [0.0, 0.0, 0.0, 0.0]),
        ("rest", LinkageGeometry::rest_pose()),
        ("swung", [30f64.to_radians(), 0.5, 0.5, 10f64.to_radians()]),
        ("folded", [0.0, 1.44, 1.44, 0.0]),
    ];
    println!(
        "{:<9} {:>9} {:>9} {:>9} {:>8} {:>8}",
        "pose", "x_m", "y_m", "z_m", "arm_m", "F_N"
    );
    for (name, q) in poses {
        let p = forward_kinematics(&geom, &q)?.position;
        let arm = moment_arm(&geom, &q)?;
        let f = fingertip_force(&geom, &q, torque)?;
        println!(
            "{name:<9} {:>9.5} {:>9.5} {:>9.5} {arm:>8.4} {f:>8.3}",
            p[0], p[1], p[2]
        );
    }
    Ok(())
}
