//! Closed-loop session runtime on a logical clock: control ticks at the
//! control rate, plant integration at the plant rate, no sleeping.

pub mod audit;
pub mod config;
pub mod endpoint;
pub mod log;
pub mod run;
pub mod summary;

pub use audit::{check_safety, replay, ReplayReport, SafetyReport};
pub use config::{ConfigError, GeometrySpec, Mode, ObjectSpec, Scenario, SessionConfig, Task};
pub use endpoint::{FollowerEndpoint, LeaderEndpoint};
pub use log::{LogError, SessionLog, TickRecord};
pub use run::{run_combined, run_session, run_split, SessionOutput};
pub use summary::Summary;

use thiserror::Error;

use crate::mapping::MappingError;
use crate::plants::PlantError;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("tick {tick}: mapping failed: {source}")]
    Mapping { tick: u64, source: MappingError },
    #[error("tick {tick}: plant failed: {source}")]
    Plant { tick: u64, source: PlantError },
    #[error("{endpoint} transport: {source}")]
    Transport {
        endpoint: &'static str,
        source: std::io::Error,
    },
    #[error("{endpoint}: peer silent before tick {tick}")]
    PeerSilent { endpoint: &'static str, tick: u64 },
}

/// A session that stopped early, with every tick completed before the
/// failure.
#[derive(Debug, Error)]
#[error("{error} (after {} ticks)", partial.len())]
pub struct SessionFailure {
    #[source]
    pub error: SessionError,
    pub partial: SessionLog,
}
