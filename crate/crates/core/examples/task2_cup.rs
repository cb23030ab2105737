//! Holding a granule-filled cup while it is lifted and tilted, with and
//! without haptic feedback reaching the operator.
//!
//!     cargo run --release --example task2_cup

use mfe::session::{run_combined, Scenario, SessionConfig};

fn main() {
    for file in ["task2-cup-hold-band.toml", "task2-cup-no-feedback.toml"] {
        let path = format!("{}/../../scenarios/{file}", env!("CARGO_MANIFEST_DIR"));
        let cfg = SessionConfig::new(Scenario::load(&path).expect("scenario loads"));
        let s = run_combined(&cfg).expect("session runs").summary;
        println!(
            "{:<24} grip peak {:>6.2} N final {:>6.2} N, spilled {:>6.2} g{}",
            s.scenario,
            s.peak_grip_n,
            s.final_grip_n,
            s.spilled_g,
            if s.dropped { ", dropped" } else { "" }
        );
    }
}
