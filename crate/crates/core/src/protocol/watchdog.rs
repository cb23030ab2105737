use serde::{Deserialize, Serialize};

pub const DEFAULT_TIMEOUT_MS: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LinkState {
    Live,
    Lost,
}

impl LinkState {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkState::Live => "LIVE",
            LinkState::Lost => "LOST",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "LIVE" => Some(LinkState::Live),
            "LOST" => Some(LinkState::Lost),
            _ => None,
        }
    }
}

pub fn watchdog_step(last_rx_age_ms: f64, timeout_ms: f64) -> LinkState {
    if last_rx_age_ms > timeout_ms {
        LinkState::Lost
    } else {
        LinkState::Live
    }
}

/// Receiver-side silence timer. The link counts as lost until the first
/// frame arrives.
#[derive(Debug, Clone, PartialEq)]
pub struct Watchdog {
    timeout_us: u64,
    last_rx_us: Option<u64>,
}

impl Watchdog {
    pub fn new(timeout_ms: f64) -> Self {
        Watchdog {
            timeout_us: (timeout_ms * 1e3).round() as u64,
            last_rx_us: None,
        }
    }

    pub fn feed(&mut self, now_us: u64) {
        self.last_rx_us = Some(now_us);
    }

    pub fn state(&self, now_us: u64) -> LinkState {
        match self.last_rx_us {
            None => LinkState::Lost,
            Some(rx) if now_us.saturating_sub(rx) > self.timeout_us => LinkState::Lost,
            Some(_) => LinkState::Live,
        }
    }
}

impl Default for Watchdog {
    fn default() -> Self {
        Watchdog::new(DEFAULT_TIMEOUT_MS)
    }
}

/// Drops frames that are not newer than the last accepted one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SequenceFilter {
    last: Option<u32>,
    rejected: u64,
}

impl SequenceFilter {
    pub fn accept(&mut self, sequence: u32) -> bool {
        if self.last.is_some_and(|last| sequence <= last) {
            self.rejected += 1;
            return false;
        }
        self.last = Some(sequence);
        true
    }

    pub fn last(&self) -> Option<u32> {
        self.last
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold() {
        assert_eq!(watchdog_step(0.0, 200.0), LinkState::Live);
        assert_eq!(watchdog_step(200.0, 200.0), LinkState::Live);
        assert_eq!(watchdog_step(201.0, 200.0), LinkState::Lost);
    }

    #[test]
    fn timer_tracks_last_receive() {
        let mut w = Watchdog::default();
        assert_eq!(w.state(0), LinkState::Lost);
        w.feed(1_000);
        assert_eq!(w.state(201_000), LinkState::Live);
        assert_eq!(w.state(201_001), LinkState::Lost);
        w.feed(300_000);
        assert_eq!(w.state(300_000), LinkState::Live);
    }

    #[test]
    fn stale_sequences_are_discarded() {
        let mut f = SequenceFilter::default();
        assert!(f.accept(3));
        assert!(!f.accept(2));
        assert!(!f.accept(3));
        assert!(f.accept(10));
        assert_eq!(f.rejected(), 2);
    }
}
