//! Scenario files and session configuration.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::cup::{CupParams, GranularCup};
use crate::env::operator::{LeaderPosture, Modalities, OperatorError, OperatorPolicy};
use crate::env::{
    CompliantCube, EnvObject, Environment, GraspGeometry, Presentation, RigidCylinder, TiltProfile,
    WaterCup,
};
use crate::kinematics::{JointLimit, KinematicsError, LinkageGeometry, FINGERS, JOINTS_PER_FINGER};
use crate::mapping::retarget::FollowerHand;
use crate::mapping::{MappingConfig, MappingError};
use crate::plants::ContactRegion;
use crate::protocol::{LinkModel, DEFAULT_TIMEOUT_MS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Geometry(#[from] KinematicsError),
}

/// Exoskeleton finger geometry as written in config files: metres and
/// degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub link_lengths_m: [f64; 3],
    pub swing_offset_m: f64,
    pub limits_deg: [[f64; 2]; JOINTS_PER_FINGER],
    #[serde(default)]
    pub actuated_joint: usize,
}

impl GeometrySpec {
    pub fn build(&self) -> Result<LinkageGeometry, KinematicsError> {
        let limits = self
            .limits_deg
            .map(|[lo, hi]| JointLimit::from_degrees(lo, hi));
        LinkageGeometry::new(
            self.link_lengths_m,
            self.swing_offset_m,
            limits,
            self.actuated_joint,
        )
    }

    pub fn from_geometry(g: &LinkageGeometry) -> Self {
        GeometrySpec {
            link_lengths_m: g.link_lengths(),
            swing_offset_m: g.swing_offset(),
            limits_deg: g
                .joint_limits()
                .map(|l| [l.min.to_degrees(), l.max.to_degrees()]),
            actuated_joint: g.actuated_joint(),
        }
    }
}

/// Objects as written in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObjectSpec {
    #[default]
    Empty,
    Cylinder {
        diameter_m: f64,
        #[serde(default = "default_cylinder_stiffness")]
        contact_stiffness: f64,
    },
    Cube {
        stiffness: f64,
        thickness_m: f64,
    },
    Cup(#[serde(default)] CupParams),
}

fn default_cylinder_stiffness() -> f64 {
    RigidCylinder::new(0.0).contact_stiffness
}

impl ObjectSpec {
    pub fn build(&self) -> EnvObject {
        match *self {
            ObjectSpec::Empty => EnvObject::Empty,
            ObjectSpec::Cylinder {
                diameter_m,
                contact_stiffness,
            } => EnvObject::Cylinder(RigidCylinder {
                diameter: diameter_m,
                contact_stiffness,
            }),
            ObjectSpec::Cube {
                stiffness,
                thickness_m,
            } => EnvObject::Cube(CompliantCube {
                stiffness,
                thickness: thickness_m,
            }),
            ObjectSpec::Cup(params) => EnvObject::Cup(GranularCup::new(params)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorSpec {
    /// Policy string, e.g. `close-until-force:3` or `hold-band:2.1:2.3`.
    pub policy: String,
    /// Closure speed (rad/s) of the actuated joint while nothing is felt.
    pub approach_rate: f64,
    pub posture: LeaderPosture,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        OperatorSpec {
            policy: "external".into(),
            approach_rate: 0.5,
            posture: LeaderPosture::default(),
        }
    }
}

/// Cups of water held against the palm one after another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PresentationSpec {
    pub cup_temps_c: Vec<f64>,
    pub start_s: f64,
    pub hold_s: f64,
    /// Pause between presentations.
    pub gap_s: f64,
    /// Shuffle the presentation order with the scenario seed.
    pub shuffle: bool,
    pub region: ContactRegion,
}

impl Default for PresentationSpec {
    fn default() -> Self {
        PresentationSpec {
            cup_temps_c: Vec::new(),
            start_s: 0.0,
            hold_s: 20.0,
            gap_s: 0.0,
            shuffle: false,
            region: ContactRegion::Full,
        }
    }
}

impl PresentationSpec {
    pub fn build(&self, seed: u64) -> Vec<Presentation> {
        let mut temps = self.cup_temps_c.clone();
        if self.shuffle {
            temps.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        temps
            .iter()
            .enumerate()
            .map(|(i, &water_temp)| {
                let start = self.start_s + i as f64 * (self.hold_s + self.gap_s);
                Presentation {
                    start,
                    end: start + self.hold_s,
                    cup: WaterCup { water_temp },
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    #[default]
    Free,
    Shape,
    Stiffness,
    Cup,
    Temperature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub task: Task,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub feedback: Modalities,
    #[serde(default)]
    pub object: ObjectSpec,
    #[serde(default)]
    pub grasp: Option<GraspGeometry>,
    /// `[time_s, tilt_deg]` breakpoints.
    #[serde(default)]
    pub tilt: Vec<[f64; 2]>,
    #[serde(default)]
    pub lift_at_s: Option<f64>,
    #[serde(default)]
    pub presentations: Option<PresentationSpec>,
    #[serde(default)]
    pub link: LinkModel,
    #[serde(default)]
    pub mapping: MappingConfig,
    #[serde(default)]
    pub geometry: Option<GeometrySpec>,
    /// Follower actuator speed limit (rad/s); off when absent.
    #[serde(default)]
    pub follower_rate_limit: Option<f64>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        Scenario::from_toml(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source: Box::new(source),
        })
    }

    pub fn policy(&self) -> Result<OperatorPolicy, ConfigError> {
        Ok(OperatorPolicy::parse(&self.operator.policy)?)
    }

    pub fn leader_geometry(&self) -> Result<[LinkageGeometry; FINGERS], ConfigError> {
        let g = match &self.geometry {
            Some(spec) => spec.build()?,
            None => LinkageGeometry::calibrated(),
        };
        Ok(std::array::from_fn(|_| g.clone()))
    }

    pub fn follower_hand(&self) -> Result<FollowerHand, ConfigError> {
        let leader = self.leader_geometry()?;
        Ok(FollowerHand::inspire_like().with_reach_matched_to(&leader[1]))
    }

    pub fn environment(&self) -> Environment {
        let mut env = Environment::new(self.object.build());
        if let Some(g) = self.grasp {
            env.grasp = g;
        }
        env.tilt = TiltProfile {
            points: self.tilt.iter().map(|&[t, d]| (t, d)).collect(),
        };
        env.lift_at = self.lift_at_s;
        if let Some(p) = &self.presentations {
            env.presentations = p.build(self.seed);
            env.palm_region = p.region.clone();
        }
        env
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "duration must be positive, got {} s",
                self.duration_s
            )));
        }
        if !(self.operator.approach_rate > 0.0) {
            return Err(ConfigError::Invalid(
                "operator approach rate must be positive".into(),
            ));
        }
        if let Some(r) = self.follower_rate_limit {
            if !(r > 0.0) {
                return Err(ConfigError::Invalid(
                    "follower rate limit must be positive".into(),
                ));
            }
        }
        self.link.validate().map_err(ConfigError::Invalid)?;
        self.policy()?;
        self.mapping.validate()?;
        self.leader_geometry()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Combined,
    Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub scenario: Scenario,
    pub mode: Mode,
    pub control_hz: u32,
    pub plant_hz: u32,
    pub watchdog_ms: f64,
}

impl SessionConfig {
    pub fn new(scenario: Scenario) -> Self {
        SessionConfig {
            scenario,
            mode: Mode::Combined,
            control_hz: 100,
            plant_hz: 1000,
            watchdog_ms: DEFAULT_TIMEOUT_MS,
        }
    }

    pub fn split(mut self) -> Self {
        self.mode = Mode::Split;
        self
    }

    pub fn substeps(&self) -> u32 {
        self.plant_hz / self.control_hz
    }

    pub fn control_dt(&self) -> f64 {
        1.0 / f64::from(self.control_hz)
    }

    pub fn plant_dt(&self) -> f64 {
        1.0 / f64::from(self.plant_hz)
    }

    pub fn ticks(&self) -> u64 {
        (self.scenario.duration_s * f64::from(self.control_hz)).round() as u64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario.validate()?;
        if self.control_hz == 0
            || self.plant_hz == 0
            || !self.plant_hz.is_multiple_of(self.control_hz)
        {
            return Err(ConfigError::Invalid(format!(
                "plant rate {} Hz must be a positive multiple of control rate {} Hz",
                self.plant_hz, self.control_hz
            )));
        }
        if !(self.watchdog_ms > 0.0) {
            return Err(ConfigError::Invalid(
                "watchdog timeout must be positive".into(),
            ));
        }
        if self.ticks() == 0 {
            return Err(ConfigError::Invalid(
                "duration shorter than one control period".into(),
            ));
        }
        Ok(())
    }
}
