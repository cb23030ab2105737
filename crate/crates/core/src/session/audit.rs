//! Post-run checks on a session log: the mapping determinism replay and the
//! actuation safety envelope.

use serde::{Deserialize, Serialize};

use crate::mapping::{HapticCommand, Mapper, MappingConfig, MappingError};
use crate::protocol::LinkState;

use super::log::SessionLog;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub tick: u64,
    pub logged: HapticCommand,
    pub replayed: HapticCommand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub ticks: usize,
    pub divergences: usize,
    pub first: Option<Divergence>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.divergences == 0
    }
}

/// Recompute every command from the logged sensor frames with a fresh
/// mapper and compare bit for bit, sequence numbers included.
pub fn replay(log: &SessionLog, cfg: &MappingConfig) -> Result<ReplayReport, MappingError> {
    let mut mapper = Mapper::new(cfg.clone())?;
    let mut report = ReplayReport {
        ticks: log.len(),
        divergences: 0,
        first: None,
    };
    for r in &log.records {
        let replayed = match (&r.leader.frame, r.leader.link) {
            (Some(frame), LinkState::Live) => mapper.compute_command(frame)?,
            _ => mapper.safe_command(),
        };
        let logged = &r.leader.command;
        if replayed.sequence != logged.sequence || !replayed.same_output(logged) {
            report.divergences += 1;
            if report.first.is_none() {
                report.first = Some(Divergence {
                    tick: r.tick,
                    logged: logged.clone(),
                    replayed,
                });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyViolation {
    pub tick: u64,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SafetyReport {
    pub violations: Vec<SafetyViolation>,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Current within the limit, duty in [0, 1], setpoint inside the
/// temperature band, and SAFE output whenever the link is lost.
pub fn check_safety(log: &SessionLog, cfg: &MappingConfig) -> SafetyReport {
    let mut report = SafetyReport::default();
    for r in &log.records {
        let c = &r.leader.command;
        let mut flag = |what: String| {
            report
                .violations
                .push(SafetyViolation { tick: r.tick, what })
        };
        for (i, &cur) in c.motor_current.iter().enumerate() {
            if !(cur.abs() <= cfg.current_limit) {
                flag(format!(
                    "finger {i} current {cur} mA exceeds {} mA",
                    cfg.current_limit
                ));
            }
        }
        for (i, &d) in c.pwm_duty.iter().enumerate() {
            if !(0.0..=1.0).contains(&d) {
                flag(format!("finger {i} duty {d} outside [0, 1]"));
            }
        }
        let sp = c.palm_setpoint;
        if !cfg.temp_limits.contains(sp) {
            flag(format!(
                "setpoint {sp} C outside [{}, {}] C",
                cfg.temp_limits.min, cfg.temp_limits.max
            ));
        }
        if r.leader.link == LinkState::Lost && !c.is_safe(cfg.ambient) {
            flag("command during LOST link is not SAFE".into());
        }
    }
    report
}
