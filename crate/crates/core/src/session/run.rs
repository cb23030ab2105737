//! Session drivers. Combined mode steps both endpoints in one loop; split
//! mode runs each endpoint on its own thread, coupled only by a transport.
//! Both feed every endpoint the same datagrams before the same tick, so
//! their logs agree whenever the transport itself loses nothing.

use std::time::Duration;

use crate::env::Presentation;
use crate::protocol::{Frame, Transport};

use super::config::{Mode, SessionConfig};
use super::endpoint::{FollowerEndpoint, FollowerRecord, LeaderEndpoint, LeaderRecord};
use super::log::{SessionLog, TickRecord};
use super::summary::Summary;
use super::{SessionError, SessionFailure};

pub const DEFAULT_PEER_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone)]
pub struct SessionOutput {
    pub log: SessionLog,
    pub summary: Summary,
    /// Every frame put on the wire plus the leader's command frames, in
    /// tick order.
    pub frames: Vec<u8>,
}

fn merge(
    cfg: &SessionConfig,
    leader: Vec<LeaderRecord>,
    follower: Vec<FollowerRecord>,
) -> SessionLog {
    let records = leader
        .into_iter()
        .zip(follower)
        .enumerate()
        .map(|(k, (leader, follower))| TickRecord {
            tick: k as u64,
            t: super::endpoint::tick_time(k as u64, cfg.control_hz).0,
            leader,
            follower,
        })
        .collect();
    SessionLog { records }
}

struct Endpoints {
    leader: LeaderEndpoint,
    follower: FollowerEndpoint,
    presentations: Vec<Presentation>,
}

fn build(cfg: &SessionConfig) -> Result<Endpoints, SessionError> {
    cfg.validate()?;
    let presentations = cfg.scenario.environment().presentations;
    let windows = presentations.iter().map(|p| (p.start, p.end)).collect();
    Ok(Endpoints {
        leader: LeaderEndpoint::new(cfg, windows)?,
        follower: FollowerEndpoint::new(cfg)?,
        presentations,
    })
}

fn failure(error: SessionError, partial: SessionLog) -> SessionFailure {
    SessionFailure { error, partial }
}

fn finish(
    cfg: &SessionConfig,
    log: SessionLog,
    frames: Vec<u8>,
    leader: &LeaderEndpoint,
    presentations: &[Presentation],
) -> SessionOutput {
    let summary = Summary::from_log(cfg, &log, presentations, leader.ranking());
    SessionOutput {
        log,
        summary,
        frames,
    }
}

pub fn run_combined(cfg: &SessionConfig) -> Result<SessionOutput, SessionFailure> {
    let Endpoints {
        mut leader,
        mut follower,
        presentations,
    } = build(cfg).map_err(|e| failure(e, SessionLog::default()))?;
    let mut to_leader = Vec::new();
    let mut to_follower = Vec::new();
    let mut frames = Vec::new();
    let mut log = SessionLog::default();
    for k in 0..cfg.ticks() {
        let step = leader
            .tick(k, std::mem::take(&mut to_leader))
            .and_then(|l| {
                follower
                    .tick(k, std::mem::take(&mut to_follower))
                    .map(|f| (l, f))
            });
        let (l, f) = match step {
            Ok(v) => v,
            Err(e) => return Err(failure(e, log)),
        };
        let enc = l.encoder.encode();
        let sensor = f.sensor.encode();
        frames.extend_from_slice(&enc);
        frames.extend_from_slice(&l.command.encode());
        frames.extend_from_slice(&sensor);
        to_follower.push(enc);
        to_leader.push(sensor);
        log.push(TickRecord {
            tick: k,
            t: super::endpoint::tick_time(k, cfg.control_hz).0,
            leader: l.record,
            follower: f.record,
        });
    }
    Ok(finish(cfg, log, frames, &leader, &presentations))
}

/// Drive one endpoint: before tick `k` wait until the peer's frames from
/// ticks `0..k` are in hand, since any of them may be due by then.
fn endpoint_loop<R>(
    name: &'static str,
    ticks: u64,
    transport: &mut dyn Transport,
    timeout: Duration,
    mut step: impl FnMut(u64, Vec<Vec<u8>>) -> Result<(R, Vec<Frame>), SessionError>,
) -> (Vec<R>, Vec<Vec<Frame>>, Option<SessionError>) {
    let mut records = Vec::new();
    let mut sent = Vec::new();
    let mut received = 0u64;
    for k in 0..ticks {
        let mut inbox = Vec::new();
        while received < k {
            match transport.recv(timeout) {
                Ok(Some(bytes)) => {
                    received += 1;
                    inbox.push(bytes);
                }
                Ok(None) => {
                    return (
                        records,
                        sent,
                        Some(SessionError::PeerSilent {
                            endpoint: name,
                            tick: k,
                        }),
                    )
                }
                Err(source) => {
                    return (
                        records,
                        sent,
                        Some(SessionError::Transport {
                            endpoint: name,
                            source,
                        }),
                    )
                }
            }
        }
        let (rec, out) = match step(k, inbox) {
            Ok(v) => v,
            Err(e) => return (records, sent, Some(e)),
        };
        if let Err(source) = transport.send(&out[0].encode()) {
            return (
                records,
                sent,
                Some(SessionError::Transport {
                    endpoint: name,
                    source,
                }),
            );
        }
        records.push(rec);
        sent.push(out);
    }
    (records, sent, None)
}

pub fn run_split(
    cfg: &SessionConfig,
    leader_transport: &mut dyn Transport,
    follower_transport: &mut dyn Transport,
    peer_timeout: Duration,
) -> Result<SessionOutput, SessionFailure> {
    let Endpoints {
        mut leader,
        mut follower,
        presentations,
    } = build(cfg).map_err(|e| failure(e, SessionLog::default()))?;
    let ticks = cfg.ticks();
    let (lead, foll) = std::thread::scope(|s| {
        let leader_ref = &mut leader;
        let l = s.spawn(move || {
            endpoint_loop(
                "leader",
                ticks,
                leader_transport,
                peer_timeout,
                |k, inbox| {
                    let t = leader_ref.tick(k, inbox)?;
                    Ok((t.record, vec![t.encoder, t.command]))
                },
            )
        });
        let f = s.spawn(move || {
            endpoint_loop(
                "follower",
                ticks,
                follower_transport,
                peer_timeout,
                |k, inbox| {
                    let t = follower.tick(k, inbox)?;
                    Ok((t.record, vec![t.sensor]))
                },
            )
        });
        (
            l.join().expect("leader thread panicked"),
            f.join().expect("follower thread panicked"),
        )
    });
    let (lrec, lframes, lerr) = lead;
    let (frec, fframes, ferr) = foll;
    let mut frames = Vec::new();
    for (l, f) in lframes.iter().zip(&fframes) {
        for fr in l.iter().chain(f) {
            fr.encode_into(&mut frames);
        }
    }
    let log = merge(cfg, lrec, frec);
    // The first failure causes the peer to go silent; report the cause.
    if let Some(e) = lerr
        .into_iter()
        .chain(ferr)
        .min_by_key(|e| !matches!(e, SessionError::PeerSilent { .. }))
    {
        return Err(failure(e, log));
    }
    Ok(finish(cfg, log, frames, &leader, &presentations))
}

/// Run in the configured mode. Split mode uses a UDP loopback pair on
/// ephemeral ports.
pub fn run_session(cfg: &SessionConfig) -> Result<SessionOutput, SessionFailure> {
    match cfg.mode {
        Mode::Combined => run_combined(cfg),
        Mode::Split => {
            let (mut a, mut b) =
                crate::protocol::UdpTransport::loopback_pair().map_err(|source| {
                    failure(
                        SessionError::Transport {
                            endpoint: "session",
                            source,
                        },
                        SessionLog::default(),
                    )
                })?;
            run_split(cfg, &mut a, &mut b, DEFAULT_PEER_TIMEOUT)
        }
    }
}
