//! Leader/follower wire protocol: frame codec, link impairment model,
//! watchdog and transports.

pub mod codec;
pub mod link;
pub mod transport;
pub mod watchdog;

pub use codec::{seconds_to_us, DecodeError, Frame, FrameKind, Payload};
pub use link::{Direction, Fate, LinkModel, Outage, SimLink};
pub use transport::{
    load_frame_log, read_frame_log, FrameLogWriter, MemoryTransport, Transport, UdpTransport,
    FOLLOWER_TO_LEADER_PORT, LEADER_TO_FOLLOWER_PORT,
};
pub use watchdog::{watchdog_step, LinkState, SequenceFilter, Watchdog, DEFAULT_TIMEOUT_MS};
