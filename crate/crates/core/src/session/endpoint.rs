//! The two ends of a session. Each endpoint owns its half of the rig and
//! talks to the other only through encoded frames.

use serde::{Deserialize, Serialize};

use crate::env::operator::{Modalities, Perception, Ranking, ScriptedOperator};
use crate::env::Environment;
use crate::kinematics::{JointState, LinkageGeometry, FINGERS, JOINTS_PER_FINGER};
use crate::mapping::retarget::{retarget_pose, FollowerHand, FollowerTargets, FOLLOWER_DOF};
use crate::mapping::{HapticCommand, Mapper, MappingConfig, SensorFrame};
use crate::plants::{
    MicrofluidicParams, MicrofluidicPlant, MotorPlant, PidController, ThermoPlant,
};
use crate::protocol::{Direction, Frame, LinkState, SequenceFilter, SimLink, Watchdog};

use super::config::{ConfigError, SessionConfig};
use super::SessionError;

pub const ANGLES: usize = FINGERS * JOINTS_PER_FINGER;

/// Time of control tick `tick` in seconds and microseconds.
pub fn tick_time(tick: u64, control_hz: u32) -> (f64, u64) {
    let us = tick * 1_000_000 / u64::from(control_hz);
    (us as f64 / 1e6, us)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderRecord {
    pub link: LinkState,
    /// Encoder reading sent this tick.
    pub angles: [f64; ANGLES],
    /// Sensor frame the command was computed from, if any.
    pub frame: Option<SensorFrame>,
    pub frame_sequence: Option<u32>,
    pub command: HapticCommand,
    pub pressure_kpa: [f64; FINGERS],
    pub motor_torque: [f64; FINGERS],
    pub glove_temp: f64,
    pub thermo_voltage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerRecord {
    pub link: LinkState,
    /// Actuated leader angles behind the current targets.
    pub leader_actuated: [f64; FINGERS],
    pub targets: [f64; FOLLOWER_DOF],
    pub forces: [f64; FINGERS],
    pub penetration: [f64; FINGERS],
    pub grip: f64,
    pub spilled_g: f64,
    pub dropped: bool,
}

fn push_datagrams(link: &mut SimLink, datagrams: Vec<Vec<u8>>) -> usize {
    let mut corrupt = 0;
    for bytes in datagrams {
        match Frame::decode(&bytes) {
            Ok(f) => link.push(bytes, f.sequence, f.timestamp_us),
            Err(_) => corrupt += 1,
        }
    }
    corrupt
}

/// Deliverable frames, oldest first, with stale sequences removed.
fn receive(
    link: &mut SimLink,
    filter: &mut SequenceFilter,
    watchdog: &mut Watchdog,
    now_us: u64,
) -> Vec<Frame> {
    let mut fresh = Vec::new();
    for bytes in link.poll(now_us) {
        let Ok(frame) = Frame::decode(&bytes) else {
            continue;
        };
        if filter.accept(frame.sequence) {
            watchdog.feed(now_us);
            fresh.push(frame);
        }
    }
    fresh
}

pub struct LeaderEndpoint {
    control_hz: u32,
    substeps: u32,
    plant_dt: f64,
    geoms: [LinkageGeometry; FINGERS],
    mapper: Mapper,
    operator: ScriptedOperator,
    modalities: Modalities,
    motors: [MotorPlant; FINGERS],
    fluidics: [MicrofluidicPlant; FINGERS],
    thermo: ThermoPlant,
    pid: PidController,
    watchdog: Watchdog,
    filter: SequenceFilter,
    inbound: SimLink,
    latest: Option<(u32, SensorFrame)>,
    corrupt: usize,
}

pub struct LeaderTick {
    pub record: LeaderRecord,
    pub encoder: Frame,
    pub command: Frame,
}

impl LeaderEndpoint {
    pub fn new(
        cfg: &SessionConfig,
        presentation_windows: Vec<(f64, f64)>,
    ) -> Result<Self, ConfigError> {
        let sc = &cfg.scenario;
        let geoms = sc.leader_geometry()?;
        let mut operator = ScriptedOperator::new(sc.policy()?, sc.operator.posture, geoms.clone());
        operator.approach_step = sc.operator.approach_rate * cfg.control_dt();
        operator.set_presentation_windows(presentation_windows);
        let ambient = sc.mapping.ambient;
        Ok(LeaderEndpoint {
            control_hz: cfg.control_hz,
            substeps: cfg.substeps(),
            plant_dt: cfg.plant_dt(),
            mapper: Mapper::new(sc.mapping.clone())?,
            operator,
            modalities: sc.feedback,
            motors: std::array::from_fn(|_| MotorPlant::default()),
            fluidics: std::array::from_fn(|_| {
                MicrofluidicPlant::new(MicrofluidicParams::calibrated())
            }),
            thermo: ThermoPlant::new(
                ambient,
                crate::plants::SteadyMap::calibrated(ambient),
                crate::plants::thermo::DEFAULT_TIME_CONSTANT_S,
            ),
            pid: PidController::default(),
            watchdog: Watchdog::new(cfg.watchdog_ms),
            filter: SequenceFilter::default(),
            inbound: SimLink::new(sc.link.clone(), Direction::FollowerToLeader),
            latest: None,
            corrupt: 0,
            geoms,
        })
    }

    pub fn operator(&self) -> &ScriptedOperator {
        &self.operator
    }

    pub fn operator_mut(&mut self) -> &mut ScriptedOperator {
        &mut self.operator
    }

    pub fn ranking(&self) -> Option<&Ranking> {
        self.operator.ranking()
    }

    pub fn mapping(&self) -> &MappingConfig {
        self.mapper.config()
    }

    pub fn corrupt_frames(&self) -> usize {
        self.corrupt
    }

    pub fn tick(&mut self, tick: u64, datagrams: Vec<Vec<u8>>) -> Result<LeaderTick, SessionError> {
        let (t, now_us) = tick_time(tick, self.control_hz);
        self.corrupt += push_datagrams(&mut self.inbound, datagrams);
        for frame in receive(
            &mut self.inbound,
            &mut self.filter,
            &mut self.watchdog,
            now_us,
        ) {
            if let Some(s) = frame.sensor_frame() {
                self.latest = Some((frame.sequence, s));
            }
        }
        let link = self.watchdog.state(now_us);
        let used = match link {
            LinkState::Live => self.latest.clone(),
            LinkState::Lost => None,
        };
        let command = match &used {
            Some((_, frame)) => self
                .mapper
                .compute_command(frame)
                .map_err(|source| SessionError::Mapping { tick, source })?,
            None => self.mapper.safe_command(),
        };

        let plant_err = |source| SessionError::Plant { tick, source };
        for i in 0..FINGERS {
            self.motors[i].command(command.motor_current[i]);
            self.fluidics[i]
                .set_duty(command.pwm_duty[i])
                .map_err(plant_err)?;
        }
        let control_dt = self.plant_dt * f64::from(self.substeps);
        let volts = self.pid.step(
            command.palm_setpoint,
            self.thermo.surface_temp(),
            control_dt,
        );
        self.thermo.set_voltage(volts).map_err(plant_err)?;

        let cfg = self.mapper.config();
        let perception = Perception::from_rendered(
            t,
            &command,
            self.thermo.surface_temp(),
            cfg,
            self.modalities,
        );
        let pose = self.operator.next(&perception);
        let angles = pose.to_flat(&self.geoms);
        let encoder = Frame::encoder((tick + 1) as u32, now_us, &angles);
        let command_frame = Frame::command(now_us, &command);

        for _ in 0..self.substeps {
            for f in &mut self.fluidics {
                f.step(self.plant_dt).map_err(plant_err)?;
            }
            self.thermo.step(self.plant_dt).map_err(plant_err)?;
        }

        let (frame_sequence, frame) = match used {
            Some((seq, f)) => (Some(seq), Some(f)),
            None => (None, None),
        };
        Ok(LeaderTick {
            record: LeaderRecord {
                link,
                angles,
                frame,
                frame_sequence,
                command,
                pressure_kpa: std::array::from_fn(|i| self.fluidics[i].pressure()),
                motor_torque: std::array::from_fn(|i| self.motors[i].torque()),
                glove_temp: self.thermo.surface_temp(),
                thermo_voltage: volts,
            },
            encoder,
            command: command_frame,
        })
    }
}

pub struct FollowerEndpoint {
    control_hz: u32,
    substeps: u32,
    plant_dt: f64,
    leader_geoms: [LinkageGeometry; FINGERS],
    hand: FollowerHand,
    env: Environment,
    rate_limit: Option<f64>,
    watchdog: Watchdog,
    filter: SequenceFilter,
    inbound: SimLink,
    targets: FollowerTargets,
    positions: [f64; FOLLOWER_DOF],
    leader_actuated: [f64; FINGERS],
    corrupt: usize,
}

pub struct FollowerTick {
    pub record: FollowerRecord,
    pub sensor: Frame,
}

impl FollowerEndpoint {
    pub fn new(cfg: &SessionConfig) -> Result<Self, ConfigError> {
        let sc = &cfg.scenario;
        let hand = sc.follower_hand()?;
        let targets = FollowerTargets::open(&hand);
        let mut env = sc.environment();
        env.membrane = crate::plants::Membrane::new(sc.mapping.ambient, env.membrane.time_constant);
        Ok(FollowerEndpoint {
            control_hz: cfg.control_hz,
            substeps: cfg.substeps(),
            plant_dt: cfg.plant_dt(),
            leader_geoms: sc.leader_geometry()?,
            positions: targets.to_array(),
            targets,
            hand,
            env,
            rate_limit: sc.follower_rate_limit,
            watchdog: Watchdog::new(cfg.watchdog_ms),
            filter: SequenceFilter::default(),
            inbound: SimLink::new(sc.link.clone(), Direction::LeaderToFollower),
            leader_actuated: [0.0; FINGERS],
            corrupt: 0,
        })
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn corrupt_frames(&self) -> usize {
        self.corrupt
    }

    fn apply_pose(&mut self, frame: &Frame) {
        let Some(flat) = frame.encoder_angles() else {
            return;
        };
        let Ok(raw) = JointState::from_flat(frame.timestamp_s(), &flat) else {
            return;
        };
        let angles = std::array::from_fn(|i| {
            self.leader_geoms[i].clamp_angles(&raw.finger(i, &self.leader_geoms[i]))
        });
        let pose = JointState::full(raw.timestamp, angles);
        if let Ok(targets) = retarget_pose(&pose, &self.leader_geoms, &self.hand) {
            self.leader_actuated = pose.actuated(&self.leader_geoms);
            self.targets = targets;
        }
    }

    pub fn tick(
        &mut self,
        tick: u64,
        datagrams: Vec<Vec<u8>>,
    ) -> Result<FollowerTick, SessionError> {
        let (t, now_us) = tick_time(tick, self.control_hz);
        self.corrupt += push_datagrams(&mut self.inbound, datagrams);
        let fresh = receive(
            &mut self.inbound,
            &mut self.filter,
            &mut self.watchdog,
            now_us,
        );
        if let Some(frame) = fresh.last() {
            self.apply_pose(frame);
        }
        let link = self.watchdog.state(now_us);

        let goal = self.targets.to_array();
        let control_dt = self.plant_dt * f64::from(self.substeps);
        for (p, g) in self.positions.iter_mut().zip(goal) {
            *p = match self.rate_limit {
                Some(rate) => *p + (g - *p).clamp(-rate * control_dt, rate * control_dt),
                None => g,
            };
        }

        let sensor = Frame::sensor((tick + 1) as u32, now_us, &self.env.sensor_frame(t));

        let travel: [f64; FINGERS] =
            std::array::from_fn(|i| self.hand.fingers[i].travel(self.positions[i]));
        for s in 0..self.substeps {
            self.env
                .step(t + f64::from(s) * self.plant_dt, self.plant_dt, &travel);
        }

        let cup = self.env.cup();
        Ok(FollowerTick {
            record: FollowerRecord {
                link,
                leader_actuated: self.leader_actuated,
                targets: self.positions,
                forces: *self.env.forces(),
                penetration: *self.env.penetration(),
                grip: self.env.grip_force(),
                spilled_g: cup.map_or(0.0, |c| c.spilled()),
                dropped: cup.is_some_and(|c| c.dropped()),
            },
            sensor,
        })
    }
}
