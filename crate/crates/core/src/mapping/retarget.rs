//! Leader-to-follower pose retargeting.
//!
//! Each follower finger is a single flexion actuator driving a coupled
//! three-link chain. For every finger the follower flexion that minimises the
//! fingertip distance to the leader's fingertip is found by a bounded
//! golden-section search. Both fingertips are compared in their flexion
//! planes with the first flexion joints aligned; the follower thumb rotation
//! follows the leader thumb swing linearly.

use serde::{Deserialize, Serialize};

use crate::kinematics::{self, JointLimit, JointState, LinkageGeometry, FINGERS, SWING_JOINT};

pub const GOLDEN_TOLERANCE_RAD: f64 = 1e-4;
pub const FOLLOWER_DOF: usize = 6;
pub const THUMB: usize = 0;

/// One flexion actuator of the follower hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerFinger {
    pub link_lengths: [f64; 3],
    /// Joint angle per unit of actuator flexion, one entry per link.
    pub coupling: [f64; 3],
    pub limits: JointLimit,
}

impl FollowerFinger {
    pub fn tip(&self, q: f64) -> (f64, f64) {
        kinematics::planar_tip(&self.link_lengths, &self.coupling.map(|c| c * q))
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    fn tip_speed(&self, q: f64) -> f64 {
        let mut cum = 0.0;
        let (mut dx, mut dy) = (0.0, 0.0);
        for (l, c) in self.link_lengths.iter().zip(&self.coupling) {
            cum += c;
            let (s, co) = (cum * q).sin_cos();
            dx -= l * cum * s;
            dy += l * cum * co;
        }
        dx.hypot(dy)
    }

    /// Fingertip path length (m) travelled from the open limit to `q`.
    pub fn travel(&self, q: f64) -> f64 {
        const PANELS: usize = 64;
        let (a, b) = (self.limits.min, self.limits.clamp(q));
        if b <= a {
            return 0.0;
        }
        let h = (b - a) / PANELS as f64;
        let mut sum = self.tip_speed(a) + self.tip_speed(b);
        for i in 1..PANELS {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * self.tip_speed(a + h * i as f64);
        }
        sum * h / 3.0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FollowerFinger {
            link_lengths: self.link_lengths.map(|l| l * factor),
            ..self.clone()
        }
    }
}

/// Six-actuator follower hand: thumb, index, middle, ring and little
/// flexion plus thumb rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerHand {
    pub fingers: [FollowerFinger; FINGERS],
    pub thumb_rotation: JointLimit,
    /// Factor applied to leader fingertip positions before matching.
    pub tip_scale: f64,
}

impl FollowerHand {
    pub fn inspire_like() -> Self {
        let finger = FollowerFinger {
            link_lengths: [0.046, 0.027, 0.020],
            coupling: [1.0, 1.0, 0.8],
            limits: JointLimit::new(0.0, 1.45),
        };
        let thumb = FollowerFinger {
            link_lengths: [0.040, 0.030, 0.022],
            ..finger.clone()
        };
        FollowerHand {
            fingers: [
                thumb,
                finger.clone(),
                finger.clone(),
                finger.clone(),
                finger,
            ],
            thumb_rotation: JointLimit::new(0.0, 1.3),
            tip_scale: 1.0,
        }
    }

    /// Scale leader fingertips by the ratio of finger reaches.
    pub fn with_reach_matched_to(mut self, leader: &LinkageGeometry) -> Self {
        self.tip_scale = self.fingers[1].reach() / leader.reach();
        self
    }
}

impl Default for FollowerHand {
    fn default() -> Self {
        FollowerHand::inspire_like()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowerTargets {
    /// Flexion per finger, thumb first.
    pub flexion: [f64; FINGERS],
    pub thumb_rotation: f64,
    /// Which of the six actuators ended on a joint limit.
    pub saturated: [bool; FOLLOWER_DOF],
}

impl FollowerTargets {
    pub fn open(hand: &FollowerHand) -> Self {
        FollowerTargets {
            flexion: std::array::from_fn(|i| hand.fingers[i].limits.min),
            thumb_rotation: hand.thumb_rotation.min,
            saturated: [false; FOLLOWER_DOF],
        }
    }

    /// `[thumb, index, middle, ring, little, thumb_rotation]`.
    pub fn to_array(&self) -> [f64; FOLLOWER_DOF] {
        let f = self.flexion;
        [f[0], f[1], f[2], f[3], f[4], self.thumb_rotation]
    }

    pub fn from_array(a: [f64; FOLLOWER_DOF]) -> Self {
        FollowerTargets {
            flexion: [a[0], a[1], a[2], a[3], a[4]],
            thumb_rotation: a[5],
            saturated: [false; FOLLOWER_DOF],
        }
    }

    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|&s| s)
    }
}

/// Bounded golden-section minimisation. Returns the minimiser and whether it
/// lies on a bound.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, bool) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let (flo, fhi) = (f(lo), f(hi));
    if flo <= fx && flo <= fhi && x - lo <= tol {
        (lo, true)
    } else if fhi <= fx && hi - x <= tol {
        (hi, true)
    } else {
        (x, false)
    }
}

fn leader_planar_tip(geom: &LinkageGeometry, angles: &kinematics::FingerAngles) -> (f64, f64) {
    kinematics::planar_tip(&geom.link_lengths(), &[angles[0], angles[1], angles[2]])
}

/// Solve the follower flexion of a single finger.
pub fn retarget_finger(
    leader_geom: &LinkageGeometry,
    leader_angles: &kinematics::FingerAngles,
    follower: &FollowerFinger,
    tip_scale: f64,
) -> (f64, bool) {
    let (lx, ly) = leader_planar_tip(leader_geom, leader_angles);
    let (lx, ly) = (lx * tip_scale, ly * tip_scale);
    let error = |q: f64| {
        let (fx, fy) = follower.tip(q);
        (fx - lx).hypot(fy - ly)
    };
    golden_section(
        error,
        follower.limits.min,
        follower.limits.max,
        GOLDEN_TOLERANCE_RAD,
    )
}

pub fn retarget_pose(
    leader: &JointState,
    leader_geoms: &[LinkageGeometry; FINGERS],
    follower: &FollowerHand,
) -> kinematics::Result<FollowerTargets> {
    leader.validate(leader_geoms)?;
    let mut targets = FollowerTargets::open(follower);
    for i in 0..FINGERS {
        let angles = leader.finger(i, &leader_geoms[i]);
        let (q, sat) = retarget_finger(
            &leader_geoms[i],
            &angles,
            &follower.fingers[i],
            follower.tip_scale,
        );
        targets.flexion[i] = q;
        targets.saturated[i] = sat;
    }
    let thumb_swing = leader.finger(THUMB, &leader_geoms[THUMB])[SWING_JOINT];
    let src = leader_geoms[THUMB].joint_limits()[SWING_JOINT];
    let dst = follower.thumb_rotation;
    let frac = (thumb_swing - src.min) / src.span();
    let rot = dst.min + frac * dst.span();
    targets.thumb_rotation = dst.clamp(rot);
    targets.saturated[FOLLOWER_DOF - 1] = rot <= dst.min || rot >= dst.max;
    Ok(targets)
}
