use serde::{Deserialize, Serialize};

use crate::env::operator::Ranking;
use crate::env::Presentation;
use crate::kinematics::FINGERS;
use crate::mapping::MappingConfig;
use crate::protocol::{LinkModel, LinkState};

use super::audit::{check_safety, SafetyReport};
use super::config::{Mode, SessionConfig, Task};
use super::log::SessionLog;

/// Band used for "rendered temperature reached its target".
pub const TEMP_BAND_C: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSummary {
    /// Cup temperatures in the order the operator ranked them, warmest first.
    pub order_c: Vec<f64>,
    /// Palm temperature the operator felt at the end of each presentation.
    pub felt_c: Vec<f64>,
    pub decided_at_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresentationSummary {
    pub cup_c: f64,
    /// Cup temperature clamped to the rendering band.
    pub target_c: f64,
    pub start_s: f64,
    pub end_s: f64,
    /// Glove temperature on the last tick of the presentation.
    pub rendered_c: f64,
    /// Time from the start of the presentation until the glove temperature
    /// entered the band around the target and stayed there.
    pub settle_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub task: Task,
    pub mode: Mode,
    pub seed: u64,
    pub ticks: usize,
    pub duration_s: f64,
    pub mapping: MappingConfig,
    pub link: LinkModel,
    pub lost_ticks: usize,
    pub safe_ticks: usize,
    pub safety: SafetyReport,
    pub max_current_ma: f64,
    pub max_duty: f64,
    pub peak_grip_n: f64,
    pub final_grip_n: f64,
    pub spilled_g: f64,
    pub dropped: bool,
    /// Leader actuated angle (deg) behind the first follower contact, per finger.
    pub contact_onset_deg: [Option<f64>; FINGERS],
    pub force_target_n: Option<f64>,
    /// Mean follower penetration where the grip force crossed the target,
    /// interpolated between the two ticks either side.
    pub penetration_at_target_m: Option<f64>,
    pub ranking: Option<RankingSummary>,
    pub presentations: Vec<PresentationSummary>,
}

fn penetration_at(log: &SessionLog, target: f64) -> Option<f64> {
    let mean = |p: &[f64; FINGERS]| p.iter().sum::<f64>() / FINGERS as f64;
    let i = log.records.iter().position(|r| r.follower.grip >= target)?;
    let cur = &log.records[i].follower;
    if i == 0 {
        return Some(mean(&cur.penetration));
    }
    let prev = &log.records[i - 1].follower;
    let (f0, f1) = (prev.grip, cur.grip);
    let (p0, p1) = (mean(&prev.penetration), mean(&cur.penetration));
    Some(p0 + (target - f0) / (f1 - f0) * (p1 - p0))
}

fn presentation_summary(
    log: &SessionLog,
    p: &Presentation,
    cfg: &MappingConfig,
) -> Option<PresentationSummary> {
    let target = cfg.temp_limits.clamp(p.cup.water_temp);
    let inside: Vec<_> = log
        .records
        .iter()
        .filter(|r| r.t >= p.start && r.t < p.end)
        .collect();
    let last = inside.last()?;
    let settle_s = inside
        .iter()
        .rposition(|r| (r.leader.glove_temp - target).abs() > TEMP_BAND_C)
        .map_or(Some(0), |i| (i + 1 < inside.len()).then_some(i + 1))
        .map(|i| inside[i].t - p.start);
    Some(PresentationSummary {
        cup_c: p.cup.water_temp,
        target_c: target,
        start_s: p.start,
        end_s: p.end,
        rendered_c: last.leader.glove_temp,
        settle_s,
    })
}

impl Summary {
    pub fn from_log(
        cfg: &SessionConfig,
        log: &SessionLog,
        presentations: &[Presentation],
        ranking: Option<&Ranking>,
    ) -> Self {
        let sc = &cfg.scenario;
        let mapping = &sc.mapping;
        let fold =
            |f: fn(&super::log::TickRecord) -> f64| log.records.iter().map(f).fold(0.0, f64::max);
        let mut onset = [None; FINGERS];
        for r in &log.records {
            for (i, o) in onset.iter_mut().enumerate() {
                if o.is_none() && r.follower.forces[i] > 0.0 {
                    *o = Some(r.follower.leader_actuated[i].to_degrees());
                }
            }
        }
        let force_target_n = match sc.policy() {
            Ok(crate::env::OperatorPolicy::CloseUntilForce { target_n }) => Some(target_n),
            _ => None,
        };
        let last = log.records.last();
        Summary {
            scenario: sc.name.clone(),
            task: sc.task,
            mode: cfg.mode,
            seed: sc.seed,
            ticks: log.len(),
            duration_s: sc.duration_s,
            mapping: mapping.clone(),
            link: sc.link.clone(),
            lost_ticks: log
                .records
                .iter()
                .filter(|r| r.leader.link == LinkState::Lost)
                .count(),
            safe_ticks: log
                .records
                .iter()
                .filter(|r| r.leader.command.is_safe(mapping.ambient))
                .count(),
            safety: check_safety(log, mapping),
            max_current_ma: fold(|r| {
                r.leader
                    .command
                    .motor_current
                    .iter()
                    .fold(0.0, |a, &b| a.max(b.abs()))
            }),
            max_duty: fold(|r| {
                r.leader
                    .command
                    .pwm_duty
                    .iter()
                    .copied()
                    .fold(0.0, f64::max)
            }),
            peak_grip_n: fold(|r| r.follower.grip),
            final_grip_n: last.map_or(0.0, |r| r.follower.grip),
            spilled_g: last.map_or(0.0, |r| r.follower.spilled_g),
            dropped: last.is_some_and(|r| r.follower.dropped),
            contact_onset_deg: onset,
            force_target_n,
            penetration_at_target_m: force_target_n.and_then(|t| penetration_at(log, t)),
            ranking: ranking.map(|r| RankingSummary {
                order_c: r
                    .order
                    .iter()
                    .map(|&i| presentations[i].cup.water_temp)
                    .collect(),
                felt_c: r.readings.clone(),
                decided_at_s: r.decided_at,
            }),
            presentations: presentations
                .iter()
                .filter_map(|p| presentation_summary(log, p, mapping))
                .collect(),
        }
    }
}
