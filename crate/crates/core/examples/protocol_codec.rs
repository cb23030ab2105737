//! Wire images, decode errors and link impairments of the leader/follower
//! protocol.
//!
//!     cargo run --example protocol_codec

use mfe::mapping::SensorFrame;
use mfe::protocol::{Direction, Fate, Frame, LinkModel, Outage};

fn hex(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    let hb = Frame::heartbeat(1, 0).encode();
    println!("heartbeat ({} bytes): {}", hb.len(), hex(&hb));

    let sensor = Frame::sensor(
        42,
        1_250_000,
        &SensorFrame::uniform([0.0, 2.5, 0.0, 0.0, 0.0], 31.0, 1.25),
    );
    let img = sensor.encode();
    println!("sensor frame: {} bytes", img.len());
    for (label, bad) in [
        ("short", img[..10].to_vec()),
        ("bit flip", {
            let mut b = img.clone();
            b[30] ^= 0x04;
            b
        }),
    ] {
        println!("{label:>9}: {}", Frame::decode(&bad).unwrap_err());
    }

    let link = LinkModel {
        drop_probability: 0.2,
        seed: 5,
        outages: vec![Outage {
            start_s: 0.05,
            end_s: 0.08,
            direction: None,
        }],
        ..LinkModel::default()
    };
    for seq in 1..=10u32 {
        let sent = u64::from(seq - 1) * 10_000;
        let fate = match link.fate(Direction::LeaderToFollower, seq, sent) {
            Fate::Dropped => "dropped".to_string(),
            Fate::DeliverAt(at) => format!("delivered after {:.1} ms", (at - sent) as f64 / 1000.0),
        };
        println!("seq {seq:>2} sent at {:>3} ms: {fate}", sent / 1000);
    }
}
