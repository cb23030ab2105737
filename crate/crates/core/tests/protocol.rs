use std::path::PathBuf;

use mfe::protocol::codec::{COMMAND_VALUES, ENCODER_VALUES, MIN_FRAME_LEN, SENSOR_VALUES};
use mfe::protocol::{
    watchdog_step, DecodeError, Direction, Fate, Frame, LinkModel, LinkState, Outage, Payload,
    SequenceFilter, SimLink, Watchdog,
};
use mfe::session::{check_safety, run_combined, Scenario, SessionConfig};
use proptest::prelude::*;

/// Bitwise reflected CRC-32/IEEE, no tables.
fn crc32_oracle(bytes: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc ^= u32::from(b);
        for _ in 0..8 {
            crc = if crc & 1 == 1 {
                (crc >> 1) ^ 0xEDB8_8320
            } else {
                crc >> 1
            };
        }
    }
    !crc
}

fn payload() -> impl Strategy<Value = Payload> {
    let bits = any::<u32>().prop_map(f32::from_bits);
    prop_oneof![
        prop::collection::vec(bits.clone(), ENCODER_VALUES)
            .prop_map(|v| Payload::Encoder(v.try_into().unwrap())),
        prop::collection::vec(bits.clone(), SENSOR_VALUES)
            .prop_map(|v| Payload::Sensor(v.try_into().unwrap())),
        prop::collection::vec(bits, COMMAND_VALUES)
            .prop_map(|v| Payload::Command(v.try_into().unwrap())),
        Just(Payload::Heartbeat),
    ]
}

fn frame() -> impl Strategy<Value = Frame> {
    (any::<u32>(), any::<u64>(), payload()).prop_map(|(sequence, timestamp_us, payload)| Frame {
        sequence,
        timestamp_us,
        payload,
    })
}

#[test]
fn heartbeat_crc_matches_oracle() {
    let img = Frame::heartbeat(1, 0).encode();
    assert_eq!(img.len(), MIN_FRAME_LEN);
    let carried = u32::from_le_bytes(img[18..].try_into().unwrap());
    assert_eq!(carried, crc32_oracle(&img[..18]));
    assert_eq!(carried, 0x6D54_B7BE);
}

#[test]
fn every_single_bit_flip_is_rejected() {
    let sensor = mfe::mapping::SensorFrame::uniform([0.1, 2.0, 3.5, 0.0, 9.0], 37.5, 4.2);
    let img = Frame::sensor(77, 4_200_000, &sensor).encode();
    assert_eq!(
        crc32_oracle(&img[..img.len() - 4]).to_le_bytes(),
        img[img.len() - 4..]
    );
    for bit in 0..img.len() * 8 {
        let mut bad = img.clone();
        bad[bit / 8] ^= 1 << (bit % 8);
        assert!(
            matches!(Frame::decode(&bad), Err(DecodeError::BadCrc { .. })),
            "bit {bit} accepted"
        );
    }
}

#[test]
fn header_errors_behind_a_valid_crc() {
    let reseal = |mut body: Vec<u8>| {
        let crc = crc32_oracle(&body);
        body.extend_from_slice(&crc.to_le_bytes());
        body
    };
    let img = Frame::heartbeat(3, 9).encode();
    let body = img[..img.len() - 4].to_vec();

    let mut b = body.clone();
    b[0] = b'X';
    assert!(matches!(
        Frame::decode(&reseal(b)),
        Err(DecodeError::BadMagic(_))
    ));
    let mut b = body.clone();
    b[2] = 2;
    assert!(matches!(
        Frame::decode(&reseal(b)),
        Err(DecodeError::BadVersion(2))
    ));
    let mut b = body.clone();
    b[3] = 9;
    assert!(matches!(
        Frame::decode(&reseal(b)),
        Err(DecodeError::UnknownKind(9))
    ));
    let mut b = body.clone();
    b[16] = 4;
    assert!(matches!(
        Frame::decode(&reseal(b)),
        Err(DecodeError::Truncated { .. })
    ));
    let mut b = body.clone();
    b.extend_from_slice(&[0; 4]);
    assert!(matches!(
        Frame::decode(&reseal(b)),
        Err(DecodeError::TrailingBytes { extra: 4 })
    ));
    let mut b = body;
    b[16] = 4;
    b.extend_from_slice(&[0; 4]);
    assert!(matches!(
        Frame::decode(&reseal(b)),
        Err(DecodeError::BadPayloadLength { .. })
    ));
}

#[test]
fn sim_link_releases_in_delivery_order() {
    let mut link = SimLink::new(
        LinkModel {
            seed: 3,
            ..LinkModel::default()
        },
        Direction::LeaderToFollower,
    );
    for seq in 1..=200u32 {
        link.push(
            Frame::heartbeat(seq, 0).encode(),
            seq,
            u64::from(seq) * 1000,
        );
    }
    let out = link.poll(u64::MAX);
    assert_eq!(out.len(), 200);
    assert_eq!(link.in_flight(), 0);
}

#[test]
fn outage_drops_everything_inside_window() {
    let model = LinkModel {
        outages: vec![Outage {
            start_s: 0.1,
            end_s: 0.2,
            direction: Some(Direction::FollowerToLeader),
        }],
        ..LinkModel::default()
    };
    for ms in 0..300u64 {
        let us = ms * 1000;
        let up = model.fate(Direction::FollowerToLeader, ms as u32, us);
        let down = model.fate(Direction::LeaderToFollower, ms as u32, us);
        assert_eq!(up == Fate::Dropped, (100..200).contains(&ms), "{ms} ms");
        assert_ne!(down, Fate::Dropped);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn codec_round_trips(f in frame()) {
        let img = f.encode();
        prop_assert_eq!(img.len(), f.encoded_len());
        prop_assert_eq!(Frame::peek_len(&img), Some(img.len()));
        let back = Frame::decode(&img).unwrap();
        prop_assert_eq!(back.encode(), img);
    }

    #[test]
    fn decode_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let _ = Frame::decode(&bytes);
    }

    #[test]
    fn resealed_garbage_never_panics(body in prop::collection::vec(any::<u8>(), 18..200)) {
        let mut img = body.clone();
        img.extend_from_slice(&crc32_oracle(&body).to_le_bytes());
        if let Ok(f) = Frame::decode(&img) {
            prop_assert_eq!(f.encode(), img);
        }
    }
}

proptest! {
    #[test]
    fn sequence_filter_output_strictly_increases(seqs in prop::collection::vec(any::<u32>(), 0..300)) {
        let mut filter = SequenceFilter::default();
        let accepted: Vec<u32> = seqs.iter().copied().filter(|&s| filter.accept(s)).collect();
        prop_assert!(accepted.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(filter.rejected() as usize, seqs.len() - accepted.len());
    }

    #[test]
    fn fate_is_deterministic_and_bounded(
        seed in any::<u64>(), seq in any::<u32>(), sent in 0u64..1 << 40,
        latency in 0.0f64..50.0, jitter in 0.0f64..20.0, p in 0.0f64..1.0,
    ) {
        let model = LinkModel { latency_ms: latency, jitter_ms: jitter, drop_probability: p, seed, outages: vec![] };
        let a = model.fate(Direction::LeaderToFollower, seq, sent);
        prop_assert_eq!(a, model.fate(Direction::LeaderToFollower, seq, sent));
        if let Fate::DeliverAt(at) = a {
            let delay = (at - sent) as f64 / 1000.0;
            prop_assert!(delay >= 1.0 - 1e-9);
            prop_assert!(delay <= (latency + jitter).max(1.0) + 1e-3);
        }
    }

    #[test]
    fn watchdog_step_threshold(age in 0.0f64..1000.0, timeout in 1.0f64..500.0) {
        let expected = if age > timeout { LinkState::Lost } else { LinkState::Live };
        prop_assert_eq!(watchdog_step(age, timeout), expected);
    }

    #[test]
    fn watchdog_tracks_last_feed(feeds in prop::collection::btree_set(0u64..2_000_000, 1..40), probe in 0u64..2_500_000) {
        let mut w = Watchdog::new(200.0);
        let mut last = None;
        for &t in feeds.iter().filter(|&&t| t <= probe) {
            w.feed(t);
            last = Some(t);
        }
        let expected = match last {
            Some(t) if probe - t <= 200_000 => LinkState::Live,
            _ => LinkState::Lost,
        };
        prop_assert_eq!(w.state(probe), expected);
    }
}

fn cup_scenario() -> Scenario {
    let path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/task2-cup-hold-band.toml");
    Scenario::load(path).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lost_link_always_commands_safe(
        seed in any::<u64>(),
        p in 0.0f64..0.7,
        outages in prop::collection::vec((0.0f64..1.5, 0.0f64..0.6, 0u8..3), 0..4),
    ) {
        let mut s = cup_scenario();
        s.duration_s = 2.0;
        s.link.seed = seed;
        s.link.drop_probability = p;
        s.link.outages = outages
            .into_iter()
            .map(|(start, len, d)| Outage {
                start_s: start,
                end_s: start + len,
                direction: [None, Some(Direction::LeaderToFollower), Some(Direction::FollowerToLeader)][d as usize],
            })
            .collect();
        let cfg = SessionConfig::new(s);
        let out = run_combined(&cfg).unwrap();
        let ambient = cfg.scenario.mapping.ambient;
        for r in &out.log.records {
            if r.leader.link == LinkState::Lost {
                prop_assert!(r.leader.command.is_safe(ambient), "tick {}", r.tick);
            }
        }
        let safety = check_safety(&out.log, &cfg.scenario.mapping);
        prop_assert!(safety.is_safe(), "{:?}", safety.violations);
    }
}
