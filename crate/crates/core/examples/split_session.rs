//! Run leader and follower as separate endpoints talking over UDP and
//! compare with the single-loop run of the same scenario.
//!
//!     cargo run --release --example split_session

use mfe::session::{run_session, Scenario, SessionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = format!(
        "{}/../../scenarios/task2-cup-hold-band.toml",
        env!("CARGO_MANIFEST_DIR")
    );
    let cfg = SessionConfig::new(Scenario::load(&path)?);
    let combined = run_session(&cfg)?;
    let split = run_session(&cfg.clone().split())?;
    let same = combined.log.to_csv_string() == split.log.to_csv_string();
    println!(
        "{} ticks; combined and split logs {}",
        split.log.len(),
        if same { "identical" } else { "differ" }
    );
    println!("frame log: {} bytes", split.frames.len());
    Ok(())
}
