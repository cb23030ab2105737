//! Receiver-side loss and latency injection.
//!
//! Every delivery decision is a pure function of the link seed, the
//! direction and the frame's sequence number, so a frame gets the same fate
//! whether the endpoints share a loop or talk over a socket.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Earliest delivery after the send time; keeps every frame causal.
pub const MIN_DELAY_US: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LeaderToFollower,
    FollowerToLeader,
}

impl Direction {
    fn stream(self) -> u64 {
        match self {
            Direction::LeaderToFollower => 1,
            Direction::FollowerToLeader => 2,
        }
    }
}

/// Interval during which every frame sent is lost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outage {
    pub start_s: f64,
    pub end_s: f64,
    /// Restrict the outage to one direction; both when absent.
    #[serde(default)]
    pub direction: Option<Direction>,
}

impl Outage {
    pub fn covers(&self, dir: Direction, sent_s: f64) -> bool {
        self.direction.is_none_or(|d| d == dir) && sent_s >= self.start_s && sent_s < self.end_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkModel {
    pub latency_ms: f64,
    /// Half-width of the uniform jitter added to the latency.
    pub jitter_ms: f64,
    pub drop_probability: f64,
    pub seed: u64,
    pub outages: Vec<Outage>,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel {
            latency_ms: 5.0,
            jitter_ms: 2.0,
            drop_probability: 0.0,
            seed: 0,
            outages: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Dropped,
    DeliverAt(u64),
}

impl LinkModel {
    pub fn ideal(latency_ms: f64) -> Self {
        LinkModel {
            latency_ms,
            jitter_ms: 0.0,
            ..LinkModel::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.latency_ms >= 0.0 && self.jitter_ms >= 0.0) {
            return Err("latency and jitter must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.drop_probability) && self.drop_probability != 1.0 {
            return Err(format!(
                "drop probability {} outside [0, 1]",
                self.drop_probability
            ));
        }
        Ok(())
    }

    /// Lower bound on the delivery delay of any frame.
    pub fn min_delay_us(&self) -> u64 {
        (((self.latency_ms - self.jitter_ms) * 1e3).round().max(0.0) as u64).max(MIN_DELAY_US)
    }

    pub fn fate(&self, dir: Direction, sequence: u32, sent_us: u64) -> Fate {
        let sent_s = sent_us as f64 / 1e6;
        if self.outages.iter().any(|o| o.covers(dir, sent_s)) {
            return Fate::Dropped;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((dir.stream() << 32) | u64::from(sequence));
        let u: f64 = rng.random();
        if u < self.drop_probability {
            return Fate::Dropped;
        }
        let jitter = if self.jitter_ms > 0.0 {
            rng.random_range(-self.jitter_ms..=self.jitter_ms)
        } else {
            0.0
        };
        let delay = (((self.latency_ms + jitter) * 1e3).round().max(0.0) as u64).max(MIN_DELAY_US);
        Fate::DeliverAt(sent_us + delay)
    }
}

/// Frames in flight in one direction, released once their delivery time
/// has passed. Reordering only happens through jitter.
#[derive(Debug, Clone)]
pub struct SimLink {
    model: LinkModel,
    dir: Direction,
    in_flight: Vec<(u64, u32, Vec<u8>)>,
    dropped: u64,
}

impl SimLink {
    pub fn new(model: LinkModel, dir: Direction) -> Self {
        SimLink {
            model,
            dir,
            in_flight: Vec::new(),
            dropped: 0,
        }
    }

    pub fn model(&self) -> &LinkModel {
        &self.model
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Accept a frame from the wire. `sequence` and `sent_us` come from its
    /// header; undecodable bytes should be passed with the receive time.
    pub fn push(&mut self, bytes: Vec<u8>, sequence: u32, sent_us: u64) {
        match self.model.fate(self.dir, sequence, sent_us) {
            Fate::Dropped => self.dropped += 1,
            Fate::DeliverAt(at) => self.in_flight.push((at, sequence, bytes)),
        }
    }

    /// Frames whose delivery time is at or before `now_us`, earliest first
    /// and by sequence on ties, independent of the order they were pushed.
    pub fn poll(&mut self, now_us: u64) -> Vec<Vec<u8>> {
        let (mut ready, pending): (Vec<_>, Vec<_>) = self
            .in_flight
            .drain(..)
            .partition(|(at, _, _)| *at <= now_us);
        self.in_flight = pending;
        ready.sort_by_key(|(at, seq, _)| (*at, *seq));
        ready.into_iter().map(|(_, _, b)| b).collect()
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fate_is_a_function_of_seed_direction_and_sequence() {
        let m = LinkModel {
            drop_probability: 0.3,
            seed: 9,
            ..LinkModel::default()
        };
        for seq in 0..200 {
            assert_eq!(
                m.fate(Direction::LeaderToFollower, seq, 1000),
                m.fate(Direction::LeaderToFollower, seq, 1000)
            );
        }
        let differs = (0..200).any(|s| {
            m.fate(Direction::LeaderToFollower, s, 0) != m.fate(Direction::FollowerToLeader, s, 0)
        });
        assert!(differs);
    }

    #[test]
    fn delays_stay_in_band() {
        let m = LinkModel::default();
        for seq in 0..1000 {
            match m.fate(Direction::FollowerToLeader, seq, 50_000) {
                Fate::DeliverAt(at) => assert!((53_000..=57_000).contains(&at), "{at}"),
                Fate::Dropped => panic!("lossless link dropped a frame"),
            }
        }
    }

    #[test]
    fn outage_drops_everything_inside() {
        let m = LinkModel {
            outages: vec![Outage {
                start_s: 1.0,
                end_s: 1.3,
                direction: None,
            }],
            ..LinkModel::default()
        };
        assert_eq!(
            m.fate(Direction::LeaderToFollower, 5, 1_100_000),
            Fate::Dropped
        );
        assert_ne!(
            m.fate(Direction::LeaderToFollower, 5, 1_300_000),
            Fate::Dropped
        );
    }

    #[test]
    fn sim_link_releases_in_delivery_order() {
        let mut link = SimLink::new(LinkModel::ideal(5.0), Direction::LeaderToFollower);
        link.push(vec![1], 1, 0);
        link.push(vec![2], 2, 1000);
        assert!(link.poll(4999).is_empty());
        assert_eq!(link.poll(6000), vec![vec![1], vec![2]]);
        assert_eq!(link.in_flight(), 0);
    }
}
