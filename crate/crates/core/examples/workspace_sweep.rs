//! Fingertip force range over the joint-limit box at stall and at the
//! back-drive friction torque. Pass a path to also dump the stall sweep.
//!
//!     cargo run --release --example workspace_sweep [sweep.csv]

use std::fs::File;
use std::io::BufWriter;

use mfe::kinematics::{
    workspace_force_range, workspace_sweep, write_sweep_csv, LinkageGeometry, DEFAULT_SWEEP_GRID,
};
use mfe::plants::MotorPlant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geom = LinkageGeometry::calibrated();
    let motor = MotorPlant::default();
    for (label, torque) in [
        ("stall", motor.stall_torque),
        ("back-drive", motor.resistance_torque),
    ] {
        let r = workspace_force_range(&geom, torque, DEFAULT_SWEEP_GRID)?;
        println!(
            "{label:>10} {torque:.2} Nm: {:.3} .. {:.3} N over {} poses ({} singular skipped)",
            r.min, r.max, r.evaluated, r.skipped
        );
        let deg = |q: [f64; 4]| q.map(|a| (a.to_degrees() * 10.0).round() / 10.0);
        println!(
            "{:>10} weakest at {:?} deg, strongest at {:?} deg",
            "",
            deg(r.min_pose),
            deg(r.max_pose)
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        let out = BufWriter::new(File::create(&path)?);
        write_sweep_csv(
            out,
            workspace_sweep(&geom, motor.stall_torque, DEFAULT_SWEEP_GRID)?,
        )?;
        println!("sweep written to {path}");
    }
    Ok(())
}
