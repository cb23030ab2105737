//! Follower-side contact environment for the object recognition, cup
//! holding and temperature recognition tasks.
//!
//! Contact is one-dimensional per finger: a finger whose fingertip has
//! travelled past an object's surface is pressed into it by the excess
//! travel (the penetration), and the object's force law turns that into a
//! contact force.

pub mod cup;
pub mod operator;

pub use cup::{CupParams, GranularCup};
pub use operator::{LeaderPosture, OperatorPolicy, Perception, ScriptedOperator};

use serde::{Deserialize, Serialize};

use crate::kinematics::FINGERS;
use crate::mapping::SensorFrame;
use crate::plants::{ContactRegion, Membrane};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidCylinder {
    pub diameter: f64,
    pub contact_stiffness: f64,
}

impl RigidCylinder {
    pub fn new(diameter: f64) -> Self {
        RigidCylinder {
            diameter,
            contact_stiffness: 5000.0,
        }
    }
}

/// Linear up to half its thickness, ten times stiffer beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompliantCube {
    pub stiffness: f64,
    pub thickness: f64,
}

pub const CUBE_STIFFENING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaterCup {
    pub water_temp: f64,
}

pub trait ContactLaw {
    fn contact_force(&self, penetration: f64) -> f64;
}

impl ContactLaw for RigidCylinder {
    fn contact_force(&self, penetration: f64) -> f64 {
        self.contact_stiffness * penetration.max(0.0)
    }
}

impl ContactLaw for CompliantCube {
    fn contact_force(&self, penetration: f64) -> f64 {
        let p = penetration.max(0.0);
        let knee = 0.5 * self.thickness;
        if p <= knee {
            self.stiffness * p
        } else {
            self.stiffness * knee + CUBE_STIFFENING * self.stiffness * (p - knee)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvObject {
    Empty,
    Cylinder(RigidCylinder),
    Cube(CompliantCube),
    Cup(GranularCup),
}

impl EnvObject {
    /// Extent of the object along the closing direction of the hand.
    pub fn size(&self) -> Option<f64> {
        match self {
            EnvObject::Empty => None,
            EnvObject::Cylinder(c) => Some(c.diameter),
            EnvObject::Cube(c) => Some(c.thickness),
            EnvObject::Cup(c) => (!c.dropped()).then_some(c.params.diameter),
        }
    }

    pub fn contact_force(&self, penetration: f64) -> f64 {
        match self {
            EnvObject::Empty => 0.0,
            EnvObject::Cylinder(c) => c.contact_force(penetration),
            EnvObject::Cube(c) => c.contact_force(penetration),
            EnvObject::Cup(c) => c.contact_force(penetration),
        }
    }
}

/// Where objects sit relative to the follower fingers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspGeometry {
    /// Fingertip travel at which a zero-size object would be touched.
    pub hand_span: f64,
}

impl Default for GraspGeometry {
    fn default() -> Self {
        GraspGeometry { hand_span: 0.17 }
    }
}

impl GraspGeometry {
    pub fn contact_travel(&self, object_size: f64) -> f64 {
        self.hand_span - object_size
    }

    pub fn penetration(&self, object: &EnvObject, travel: f64) -> f64 {
        object
            .size()
            .map_or(0.0, |size| (travel - self.contact_travel(size)).max(0.0))
    }
}

/// Piecewise-linear tilt of the carried object over time, in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TiltProfile {
    pub points: Vec<(f64, f64)>,
}

impl TiltProfile {
    pub fn at(&self, t: f64) -> f64 {
        let pts = &self.points;
        match pts.len() {
            0 => 0.0,
            _ if t <= pts[0].0 => pts[0].1,
            _ if t >= pts[pts.len() - 1].0 => pts[pts.len() - 1].1,
            _ => {
                let i = pts.partition_point(|p| p.0 <= t);
                let (a, b) = (pts[i - 1], pts[i]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }
}

/// A cup of water held against the palm membrane for a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Presentation {
    pub start: f64,
    pub end: f64,
    pub cup: WaterCup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub object: EnvObject,
    pub grasp: GraspGeometry,
    pub tilt: TiltProfile,
    /// Time at which the carried object leaves the table.
    pub lift_at: Option<f64>,
    pub presentations: Vec<Presentation>,
    pub palm_region: ContactRegion,
    pub membrane: Membrane,
    penetration: [f64; FINGERS],
    forces: [f64; FINGERS],
}

impl Environment {
    pub fn new(object: EnvObject) -> Self {
        Environment {
            object,
            grasp: GraspGeometry::default(),
            tilt: TiltProfile::default(),
            lift_at: None,
            presentations: Vec::new(),
            palm_region: ContactRegion::Full,
            membrane: Membrane::default(),
            penetration: [0.0; FINGERS],
            forces: [0.0; FINGERS],
        }
    }

    pub fn presentation_at(&self, t: f64) -> Option<&Presentation> {
        self.presentations
            .iter()
            .find(|p| t >= p.start && t < p.end)
    }

    /// Advance the environment by `dt` given each follower fingertip's travel.
    pub fn step(&mut self, t: f64, dt: f64, travel: &[f64; FINGERS]) {
        for i in 0..FINGERS {
            self.penetration[i] = self.grasp.penetration(&self.object, travel[i]);
            self.forces[i] = self.object.contact_force(self.penetration[i]);
        }
        let grip = self.grip_force();
        let tilt = self.tilt.at(t);
        let lifted = self.lift_at.is_some_and(|at| t >= at);
        if let EnvObject::Cup(cup) = &mut self.object {
            if lifted {
                cup.lift();
            }
            cup.cup_step(grip, tilt, dt);
            if cup.dropped() {
                self.forces = [0.0; FINGERS];
            }
        }
        match self.presentation_at(t).map(|p| p.cup.water_temp) {
            Some(temp) => {
                let region = self.palm_region.clone();
                self.membrane.sense(temp, &region, dt);
            }
            None => {
                let ambient = self.membrane.ambient;
                self.membrane.sense(ambient, &ContactRegion::None, dt);
            }
        }
    }

    pub fn forces(&self) -> &[f64; FINGERS] {
        &self.forces
    }

    pub fn penetration(&self) -> &[f64; FINGERS] {
        &self.penetration
    }

    /// Mean contact force over the fingers.
    pub fn grip_force(&self) -> f64 {
        self.forces.iter().sum::<f64>() / FINGERS as f64
    }

    pub fn cup(&self) -> Option<&GranularCup> {
        match &self.object {
            EnvObject::Cup(c) => Some(c),
            _ => None,
        }
    }

    pub fn sensor_frame(&self, t: f64) -> SensorFrame {
        SensorFrame {
            forces: self.forces,
            palm_temps: *self.membrane.temps(),
            timestamp: t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contact_force_examples() {
        let cube = CompliantCube {
            stiffness: 200.0,
            thickness: 0.06,
        };
        assert_eq!(cube.contact_force(0.0), 0.0);
        assert!((cube.contact_force(0.010) - 2.0).abs() < 1e-12);
        let stiff = CompliantCube {
            stiffness: 600.0,
            ..cube
        };
        assert!((stiff.contact_force(0.012) / cube.contact_force(0.012) - 3.0).abs() < 1e-12);
        assert_eq!(RigidCylinder::new(0.06).contact_force(-0.01), 0.0);
    }

    #[test]
    fn cube_stiffens_past_half_thickness() {
        let cube = CompliantCube {
            stiffness: 100.0,
            thickness: 0.02,
        };
        assert!((cube.contact_force(0.01) - 1.0).abs() < 1e-12);
        assert!((cube.contact_force(0.011) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn penetration_starts_at_object_surface() {
        let g = GraspGeometry { hand_span: 0.17 };
        let obj = EnvObject::Cylinder(RigidCylinder::new(0.08));
        assert_eq!(g.penetration(&obj, 0.08), 0.0);
        assert!((g.penetration(&obj, 0.095) - 0.005).abs() < 1e-12);
        assert_eq!(g.penetration(&EnvObject::Empty, 1.0), 0.0);
    }

    #[test]
    fn tilt_profile_interpolates() {
        let p = TiltProfile {
            points: vec![(1.0, 0.0), (3.0, 10.0)],
        };
        assert_eq!(p.at(0.0), 0.0);
        assert_eq!(p.at(2.0), 5.0);
        assert_eq!(p.at(9.0), 10.0);
        assert_eq!(TiltProfile::default().at(4.0), 0.0);
    }
}
