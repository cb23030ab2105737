//! Scripted stand-ins for the human operator. Each policy turns what the
//! leader device renders into the next commanded hand closure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{
    encoder_quantum, quantize_encoder, FingerAngles, JointLimit, JointState, LinkageGeometry,
    FINGERS,
};
use crate::mapping::{HapticCommand, MappingConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("unknown operator policy `{0}`")]
    UnknownPolicy(String),
    #[error("bad parameters for policy `{policy}`: {reason}")]
    BadParameters { policy: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum OperatorPolicy {
    /// Close until the perceived force reaches `target_n`, then hold.
    CloseUntilForce { target_n: f64 },
    /// Keep the perceived force inside `[low_n, high_n]`.
    HoldBand { low_n: f64, high_n: f64 },
    /// Keep the hand open and rank presented objects by palm temperature.
    TemperatureRanker,
    /// Closures are set from outside, e.g. by a live console.
    External,
}

impl OperatorPolicy {
    /// Parse `close-until-force:<N>`, `hold-band:<lo>:<hi>`,
    /// `temperature-ranker` or `external`.
    pub fn parse(spec: &str) -> Result<Self, OperatorError> {
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let nums = |n: usize| -> Result<Vec<f64>, OperatorError> {
            let bad = |reason: String| OperatorError::BadParameters {
                policy: name.to_string(),
                reason,
            };
            if args.len() != n {
                return Err(bad(format!("expected {n} values, got {}", args.len())));
            }
            args.iter()
                .map(|a| a.parse::<f64>().map_err(|e| bad(format!("{a}: {e}"))))
                .collect()
        };
        let policy = match name {
            "close-until-force" => OperatorPolicy::CloseUntilForce {
                target_n: nums(1)?[0],
            },
            "hold-band" => {
                let v = nums(2)?;
                OperatorPolicy::HoldBand {
                    low_n: v[0],
                    high_n: v[1],
                }
            }
            "temperature-ranker" => OperatorPolicy::TemperatureRanker,
            "external" => OperatorPolicy::External,
            other => return Err(OperatorError::UnknownPolicy(other.to_string())),
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<(), OperatorError> {
        let bad = |policy: &str, reason: &str| {
            Err(OperatorError::BadParameters {
                policy: policy.into(),
                reason: reason.into(),
            })
        };
        match *self {
            OperatorPolicy::CloseUntilForce { target_n } if !(target_n > 0.0) => {
                bad("close-until-force", "target force must be positive")
            }
            OperatorPolicy::HoldBand { low_n, high_n } if !(low_n > 0.0 && low_n < high_n) => {
                bad("hold-band", "need 0 < low < high")
            }
            _ => Ok(()),
        }
    }
}

/// Which rendered channels reach the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Modalities {
    pub force: bool,
    pub pressure: bool,
    pub thermal: bool,
}

impl Default for Modalities {
    fn default() -> Self {
        Modalities {
            force: true,
            pressure: true,
            thermal: true,
        }
    }
}

impl Modalities {
    pub fn none() -> Self {
        Modalities {
            force: false,
            pressure: false,
            thermal: false,
        }
    }
}

/// What the operator feels on one control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Perception {
    pub t: f64,
    /// Remote contact force per finger as inferred from the rendering.
    pub forces: [f64; FINGERS],
    pub palm_temp: Option<f64>,
}

impl Perception {
    /// The operator inverts the rendering laws: motor current gives the force
    /// directly; the fingertip duty only resolves the first newton above the
    /// threshold before it saturates.
    pub fn from_rendered(
        t: f64,
        command: &HapticCommand,
        glove_temp: f64,
        cfg: &MappingConfig,
        modalities: Modalities,
    ) -> Self {
        let forces = std::array::from_fn(|i| {
            if modalities.force {
                command.motor_current[i] / cfg.current_gain.ma_per_newton()
            } else if modalities.pressure && command.pwm_duty[i] > 0.0 {
                cfg.force_threshold + command.pwm_duty[i] * 1000.0 / cfg.pressure_gain
            } else {
                0.0
            }
        });
        Perception {
            t,
            forces,
            palm_temp: modalities.thermal.then_some(glove_temp),
        }
    }

    pub fn mean_force(&self) -> f64 {
        self.forces.iter().sum::<f64>() / FINGERS as f64
    }
}

/// How the operator's passive finger joints follow the actuated one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderPosture {
    pub passive_coupling: [f64; 2],
}

impl Default for LeaderPosture {
    fn default() -> Self {
        LeaderPosture {
            passive_coupling: [1.0, 0.8],
        }
    }
}

fn quantize_within(angle: f64, lim: &JointLimit) -> f64 {
    let q = quantize_encoder(lim.clamp(angle));
    if q > lim.max {
        q - encoder_quantum()
    } else if q < lim.min {
        q + encoder_quantum()
    } else {
        q
    }
}

impl LeaderPosture {
    /// Joint angles for a closure of the actuated joint, as the encoders
    /// would read them.
    pub fn finger(&self, closure: f64, geom: &LinkageGeometry) -> FingerAngles {
        let flex = closure.max(0.0);
        let raw = [
            closure,
            self.passive_coupling[0] * flex,
            self.passive_coupling[1] * flex,
            0.0,
        ];
        let lims = geom.joint_limits();
        std::array::from_fn(|j| quantize_within(raw[j], &lims[j]))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Ranking {
    /// Presentation indices, warmest first.
    pub order: Vec<usize>,
    pub readings: Vec<f64>,
    pub decided_at: f64,
}

#[derive(Debug, Clone)]
pub struct ScriptedOperator {
    policy: OperatorPolicy,
    posture: LeaderPosture,
    geoms: [LinkageGeometry; FINGERS],
    closure: [f64; FINGERS],
    /// Closure increment per tick while nothing is felt.
    pub approach_step: f64,
    /// Closure increment per tick once contact is felt.
    pub fine_step: f64,
    windows: Vec<(f64, f64)>,
    readings: Vec<Option<f64>>,
    ranking: Option<Ranking>,
}

impl ScriptedOperator {
    pub fn new(
        policy: OperatorPolicy,
        posture: LeaderPosture,
        geoms: [LinkageGeometry; FINGERS],
    ) -> Self {
        let closure =
            std::array::from_fn(|i| geoms[i].joint_limits()[geoms[i].actuated_joint()].clamp(0.0));
        ScriptedOperator {
            policy,
            posture,
            geoms,
            closure,
            approach_step: 0.005,
            fine_step: encoder_quantum(),
            windows: Vec::new(),
            readings: Vec::new(),
            ranking: None,
        }
    }

    pub fn policy(&self) -> &OperatorPolicy {
        &self.policy
    }

    /// Time windows the temperature ranker should compare.
    pub fn set_presentation_windows(&mut self, windows: Vec<(f64, f64)>) {
        self.readings = vec![None; windows.len()];
        self.windows = windows;
    }

    pub fn ranking(&self) -> Option<&Ranking> {
        self.ranking.as_ref()
    }

    /// Closure targets for the external policy, in degrees of the actuated
    /// joint. Values are quantized when the pose is built.
    pub fn set_external(&mut self, closure_deg: [f64; FINGERS]) {
        for i in 0..FINGERS {
            let lim = self.geoms[i].joint_limits()[self.geoms[i].actuated_joint()];
            self.closure[i] = lim.clamp(closure_deg[i].to_radians());
        }
    }

    fn step_all(&mut self, delta: f64) {
        for i in 0..FINGERS {
            let lim = self.geoms[i].joint_limits()[self.geoms[i].actuated_joint()];
            self.closure[i] = lim.clamp(self.closure[i] + delta);
        }
    }

    fn close_step(&self, felt: f64) -> f64 {
        if felt > 0.0 {
            self.fine_step
        } else {
            self.approach_step
        }
    }

    pub fn next(&mut self, perception: &Perception) -> JointState {
        let felt = perception.mean_force();
        match self.policy {
            OperatorPolicy::CloseUntilForce { target_n } => {
                if felt < target_n {
                    self.step_all(self.close_step(felt));
                }
            }
            OperatorPolicy::HoldBand { low_n, high_n } => {
                if felt < low_n {
                    self.step_all(self.close_step(felt));
                } else if felt > high_n {
                    self.step_all(-self.fine_step);
                }
            }
            OperatorPolicy::TemperatureRanker => self.observe_temperature(perception),
            OperatorPolicy::External => {}
        }
        self.pose(perception.t)
    }

    fn observe_temperature(&mut self, perception: &Perception) {
        let t = perception.t;
        for (i, &(start, end)) in self.windows.iter().enumerate() {
            if t >= start && t < end {
                self.readings[i] = perception.palm_temp;
            }
        }
        let done = self.windows.last().is_some_and(|&(_, end)| t >= end);
        if done && self.ranking.is_none() {
            let readings: Vec<f64> = self
                .readings
                .iter()
                .map(|r| r.unwrap_or(f64::NAN))
                .collect();
            let mut order: Vec<usize> = (0..readings.len()).collect();
            order.sort_by(|&a, &b| readings[b].total_cmp(&readings[a]));
            self.ranking = Some(Ranking {
                order,
                readings,
                decided_at: t,
            });
        }
    }

    pub fn pose(&self, t: f64) -> JointState {
        let angles = std::array::from_fn(|i| {
            let mut a = self.posture.finger(self.closure[i], &self.geoms[i]);
            let act = self.geoms[i].actuated_joint();
            a[act] = quantize_within(self.closure[i], &self.geoms[i].joint_limits()[act]);
            a
        });
        JointState::full(t, angles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geoms() -> [LinkageGeometry; FINGERS] {
        std::array::from_fn(|_| LinkageGeometry::calibrated())
    }

    fn felt(f: f64) -> Perception {
        Perception {
            t: 0.0,
            forces: [f; FINGERS],
            palm_temp: Some(24.0),
        }
    }

    #[test]
    fn parse_policies() {
        assert_eq!(
            OperatorPolicy::parse("close-until-force:2").unwrap(),
            OperatorPolicy::CloseUntilForce { target_n: 2.0 }
        );
        assert_eq!(
            OperatorPolicy::parse("hold-band:2.1:2.3").unwrap(),
            OperatorPolicy::HoldBand {
                low_n: 2.1,
                high_n: 2.3
            }
        );
        assert!(matches!(
            OperatorPolicy::parse("grab-harder"),
            Err(OperatorError::UnknownPolicy(_))
        ));
        assert!(OperatorPolicy::parse("hold-band:3:2").is_err());
        assert!(OperatorPolicy::parse("close-until-force").is_err());
    }

    #[test]
    fn pose_is_quantized_and_within_limits() {
        let g = geoms();
        let mut op = ScriptedOperator::new(
            OperatorPolicy::CloseUntilForce { target_n: 1.0 },
            LeaderPosture::default(),
            g.clone(),
        );
        for _ in 0..400 {
            let s = op.next(&felt(0.0));
            s.validate(&g).unwrap();
            for a in s.to_flat(&g) {
                let steps = a.to_degrees() / 0.088;
                assert!((steps - steps.round()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn close_until_force_stops_when_felt() {
        let g = geoms();
        let mut op = ScriptedOperator::new(
            OperatorPolicy::CloseUntilForce { target_n: 2.0 },
            LeaderPosture::default(),
            g.clone(),
        );
        let a = op.next(&felt(0.0)).actuated(&g)[1];
        let b = op.next(&felt(1.0)).actuated(&g)[1];
        let c = op.next(&felt(2.5)).actuated(&g)[1];
        assert!(a > 0.0);
        assert!((b - a - encoder_quantum()).abs() < 1e-9);
        assert_eq!(b, c);
    }

    #[test]
    fn hold_band_backs_off_when_too_tight() {
        let g = geoms();
        let mut op = ScriptedOperator::new(
            OperatorPolicy::HoldBand {
                low_n: 2.0,
                high_n: 2.4,
            },
            LeaderPosture::default(),
            g.clone(),
        );
        for _ in 0..50 {
            op.next(&felt(0.0));
        }
        let before = op.pose(0.0).actuated(&g)[0];
        let after = op.next(&felt(3.0)).actuated(&g)[0];
        assert!(after < before);
        let hold = op.next(&felt(2.2)).actuated(&g)[0];
        assert_eq!(hold, after);
    }

    #[test]
    fn ranker_orders_by_temperature() {
        let mut op = ScriptedOperator::new(
            OperatorPolicy::TemperatureRanker,
            LeaderPosture::default(),
            geoms(),
        );
        op.set_presentation_windows(vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]);
        for (t, temp) in [(0.5, 10.0), (1.5, 20.0), (2.5, 55.0), (3.0, 24.0)] {
            op.next(&Perception {
                t,
                forces: [0.0; FINGERS],
                palm_temp: Some(temp),
            });
        }
        assert_eq!(op.ranking().unwrap().order, vec![2, 1, 0]);
    }

    #[test]
    fn perception_inverts_rendering() {
        let cfg = MappingConfig::default();
        let mut m = crate::mapping::Mapper::new(cfg.clone()).unwrap();
        let cmd = m
            .compute_command(&crate::mapping::SensorFrame::uniform(
                [3.0, 0.0, 1.97, 0.0, 0.0],
                24.0,
                0.0,
            ))
            .unwrap();
        let p = Perception::from_rendered(0.0, &cmd, 24.0, &cfg, Modalities::default());
        assert!((p.forces[0] - 3.0).abs() < 1e-12);
        let p = Perception::from_rendered(
            0.0,
            &cmd,
            24.0,
            &cfg,
            Modalities {
                force: false,
                ..Modalities::default()
            },
        );
        assert!(
            (p.forces[0] - 2.47).abs() < 1e-12,
            "duty saturates one newton above threshold"
        );
        assert!((p.forces[2] - 1.97).abs() < 1e-9);
        let p = Perception::from_rendered(0.0, &cmd, 24.0, &cfg, Modalities::none());
        assert_eq!(p.forces, [0.0; FINGERS]);
        assert_eq!(p.palm_temp, None);
    }
}
