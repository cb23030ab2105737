//! Write a session log to disk, read it back and re-derive every haptic
//! command from the logged sensor frames.
//!
//!     cargo run --release --example replay_audit

use mfe::session::{replay, run_combined, Scenario, SessionConfig, SessionLog};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = format!(
        "{}/../../scenarios/cup-outage.toml",
        env!("CARGO_MANIFEST_DIR")
    );
    let cfg = SessionConfig::new(Scenario::load(&path)?);
    let out = run_combined(&cfg)?;
    let file = std::env::temp_dir().join("mfe-replay-audit.csv");
    out.log.save(&file)?;
    let log = SessionLog::load(&file)?;
    println!(
        "{} ticks, {} with the link lost",
        log.len(),
        out.summary.lost_ticks
    );

    let mapping = &cfg.scenario.mapping;
    println!(
        "fresh log: {} divergences",
        replay(&log, mapping)?.divergences
    );

    let mut tampered = log.clone();
    tampered.records[420].leader.command.motor_current[1] += 0.5;
    let report = replay(&tampered, mapping)?;
    println!(
        "tampered log: first divergence at tick {}",
        report.first.map_or(0, |d| d.tick)
    );

    let mut shifted = mapping.clone();
    shifted.force_threshold = 1.2;
    println!(
        "threshold 1.2 N: {} divergences",
        replay(&log, &shifted)?.divergences
    );
    Ok(())
}
