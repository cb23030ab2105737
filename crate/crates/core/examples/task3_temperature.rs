//! Temperature recognition: three cups of water pressed against the palm
//! in shuffled order, ranked by the glove temperature they produce.
//!
//!     cargo run --release --example task3_temperature

use mfe::session::{run_combined, Scenario, SessionConfig};

fn main() {
    let path = format!(
        "{}/../../scenarios/task3-temperature.toml",
        env!("CARGO_MANIFEST_DIR")
    );
    let cfg = SessionConfig::new(Scenario::load(&path).expect("scenario loads"));
    let s = run_combined(&cfg).expect("session runs").summary;
    for p in &s.presentations {
        let settle = p.settle_s.map_or("no".into(), |t| format!("{t:.2} s"));
        println!(
            "cup {:>4.1} C at {:>4.1} s: target {:>4.1} C, rendered {:>6.2} C, settled {settle}",
            p.cup_c, p.start_s, p.target_c, p.rendered_c
        );
    }
    if let Some(r) = &s.ranking {
        println!(
            "ranked warmest first: {:?} (decided at {:.2} s)",
            r.order_c, r.decided_at_s
        );
    }
}
