//! A session stepped one control tick at a time for the live console. The
//! operator's finger closures come from the console instead of a script;
//! everything else is the same leader/follower pipeline as a headless run.

use serde::{Deserialize, Serialize};

use mfe::kinematics::FINGERS;
use mfe::mapping::retarget::FOLLOWER_DOF;
use mfe::session::endpoint::{
    tick_time, FollowerEndpoint, FollowerRecord, LeaderEndpoint, LeaderRecord,
};
use mfe::session::{Scenario, SessionConfig, SessionError};

/// Console inputs are applied at most once per this many control ticks
/// (20 Hz at the default 100 Hz control rate); newer inputs replace
/// pending ones.
pub const INPUT_PERIOD_TICKS: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStatus {
    pub name: String,
    pub spilled_g: f64,
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub session_id: String,
    pub tick: u64,
    pub t_s: f64,
    pub angles_deg: Vec<f64>,
    pub targets_rad: [f64; FOLLOWER_DOF],
    pub force_n: [f64; FINGERS],
    pub current_ma: [f64; FINGERS],
    pub duty: [f64; FINGERS],
    pub pressure_kpa: [f64; FINGERS],
    pub glove_temp_c: f64,
    pub setpoint_c: f64,
    pub link: String,
    pub scenario: ScenarioStatus,
}

pub struct LiveSession {
    id: String,
    name: String,
    control_hz: u32,
    leader: LeaderEndpoint,
    follower: FollowerEndpoint,
    to_leader: Vec<Vec<u8>>,
    to_follower: Vec<Vec<u8>>,
    tick: u64,
    outage_until_tick: u64,
    pending_input: Option<[f64; FINGERS]>,
    last_input_tick: Option<u64>,
    inputs_applied: u64,
    last: Option<(LeaderRecord, FollowerRecord)>,
}

impl LiveSession {
    pub fn new(id: String, mut scenario: Scenario) -> Result<Self, SessionError> {
        scenario.operator.policy = "external".into();
        let name = scenario.name.clone();
        let cfg = SessionConfig::new(scenario);
        cfg.validate()?;
        let windows = cfg
            .scenario
            .environment()
            .presentations
            .iter()
            .map(|p| (p.start, p.end))
            .collect();
        Ok(LiveSession {
            id,
            name,
            control_hz: cfg.control_hz,
            leader: LeaderEndpoint::new(&cfg, windows)?,
            follower: FollowerEndpoint::new(&cfg)?,
            to_leader: Vec::new(),
            to_follower: Vec::new(),
            tick: 0,
            outage_until_tick: 0,
            pending_input: None,
            last_input_tick: None,
            inputs_applied: 0,
            last: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn inputs_applied(&self) -> u64 {
        self.inputs_applied
    }

    /// Finger closures in degrees of the actuated joint, thumb first.
    pub fn queue_input(&mut self, closure_deg: [f64; FINGERS]) {
        self.pending_input = Some(closure_deg);
    }

    /// Lose every frame in both directions for `ms` milliseconds.
    pub fn inject_outage(&mut self, ms: f64) {
        let ticks = (ms * f64::from(self.control_hz) / 1000.0).ceil() as u64;
        self.outage_until_tick = self.outage_until_tick.max(self.tick + ticks);
    }

    pub fn step(&mut self) -> Result<(), SessionError> {
        let due = self
            .last_input_tick
            .is_none_or(|t| self.tick >= t + INPUT_PERIOD_TICKS);
        if due {
            if let Some(deg) = self.pending_input.take() {
                self.leader.operator_mut().set_external(deg);
                self.last_input_tick = Some(self.tick);
                self.inputs_applied += 1;
            }
        }
        let k = self.tick;
        let l = self.leader.tick(k, std::mem::take(&mut self.to_leader))?;
        let f = self
            .follower
            .tick(k, std::mem::take(&mut self.to_follower))?;
        if k >= self.outage_until_tick {
            self.to_follower.push(l.encoder.encode());
            self.to_leader.push(f.sensor.encode());
        }
        self.last = Some((l.record, f.record));
        self.tick += 1;
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        let status = ScenarioStatus {
            name: self.name.clone(),
            spilled_g: self.last.as_ref().map_or(0.0, |(_, f)| f.spilled_g),
            dropped: self.last.as_ref().is_some_and(|(_, f)| f.dropped),
        };
        let t_s = tick_time(self.tick.saturating_sub(1), self.control_hz).0;
        match &self.last {
            Some((l, f)) => Snapshot {
                session_id: self.id.clone(),
                tick: self.tick - 1,
                t_s,
                angles_deg: l.angles.iter().map(|a| a.to_degrees()).collect(),
                targets_rad: f.targets,
                force_n: f.forces,
                current_ma: l.command.motor_current,
                duty: l.command.pwm_duty,
                pressure_kpa: l.pressure_kpa,
                glove_temp_c: l.glove_temp,
                setpoint_c: l.command.palm_setpoint,
                link: l.link.as_str().into(),
                scenario: status,
            },
            None => Snapshot {
                session_id: self.id.clone(),
                tick: 0,
                t_s,
                angles_deg: vec![0.0; FINGERS * 4],
                targets_rad: [0.0; FOLLOWER_DOF],
                force_n: [0.0; FINGERS],
                current_ma: [0.0; FINGERS],
                duty: [0.0; FINGERS],
                pressure_kpa: [0.0; FINGERS],
                glove_temp_c: self.leader.mapping().ambient,
                setpoint_c: self.leader.mapping().ambient,
                link: "LOST".into(),
                scenario: status,
            },
        }
    }
}
