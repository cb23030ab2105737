//! Object recognition: the operator closes on cylinders of two sizes and
//! cubes of two stiffnesses and compares what the rendering gives away.
//!
//!     cargo run --release --example task1_discrimination

use mfe::kinematics::ENCODER_QUANTUM_DEG;
use mfe::session::{run_combined, Scenario, SessionConfig, Summary};

fn run(file: &str) -> Summary {
    let path = format!("{}/../../scenarios/{file}", env!("CARGO_MANIFEST_DIR"));
    let cfg = SessionConfig::new(Scenario::load(&path).expect("scenario loads"));
    run_combined(&cfg).expect("session runs").summary
}

fn main() {
    let small = run("task1-shape-60mm.toml");
    let large = run("task1-shape-80mm.toml");
    let (a, b) = (
        small.contact_onset_deg[1].unwrap(),
        large.contact_onset_deg[1].unwrap(),
    );
    println!("index contact onset: 60 mm at {a:.3} deg, 80 mm at {b:.3} deg");
    println!(
        "gap {:.3} deg = {:.1} encoder quanta",
        a - b,
        (a - b) / ENCODER_QUANTUM_DEG
    );

    let soft = run("task1-stiffness-soft.toml");
    let stiff = run("task1-stiffness-stiff.toml");
    let (ps, pk) = (
        soft.penetration_at_target_m.unwrap(),
        stiff.penetration_at_target_m.unwrap(),
    );
    println!(
        "penetration at 3 N: soft {:.3} mm, stiff {:.3} mm, ratio {:.3}",
        ps * 1e3,
        pk * 1e3,
        ps / pk
    );
}
