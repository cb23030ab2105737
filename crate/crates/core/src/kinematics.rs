//! Finger linkage kinematics: forward kinematics, moment arm and fingertip
//! force transmission of the exoskeleton finger (three flexion joints and one
//! lateral swing joint per finger).
//!
//! Frame convention: the flexion joints rotate about `z`, so the planar chain
//! lives in the `x`/`y` plane with `x` pointing along the extended finger and
//! `y` towards the palm. The swing joint rotates the whole flexion plane about
//! the `y` axis through the finger base; the first flexion joint sits
//! `swing_offset` metres along `x` from that axis.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hall encoder resolution in degrees.
pub const ENCODER_QUANTUM_DEG: f64 = 0.088;

/// Number of joints per finger: three flexion joints followed by the swing joint.
pub const JOINTS_PER_FINGER: usize = 4;
pub const SWING_JOINT: usize = 3;
pub const FINGERS: usize = 5;

/// `moment_arm` refuses poses whose arm is below this.
pub const SINGULAR_ARM_M: f64 = 1e-6;
/// Workspace sweeps skip poses whose arm is below this.
pub const SWEEP_SKIP_ARM_M: f64 = 1e-3;
pub const DEFAULT_SWEEP_GRID: usize = 25;

/// Angles of one finger, `[flex0, flex1, flex2, swing]` in radians.
pub type FingerAngles = [f64; JOINTS_PER_FINGER];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("joint {joint} angle {angle:.6} rad outside [{min:.6}, {max:.6}]")]
    OutOfLimits {
        joint: usize,
        angle: f64,
        min: f64,
        max: f64,
    },
    #[error("singular pose: moment arm {arm:.3e} m below {threshold:.1e} m")]
    Singular { arm: f64, threshold: f64 },
    #[error("workspace analysis failed: {0}")]
    Analysis(String),
    #[error("full joint state needs {expected} angles, got {got}")]
    WrongDof { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, KinematicsError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimit {
    pub min: f64,
    pub max: f64,
}

impl JointLimit {
    pub const fn new(min: f64, max: f64) -> Self {
        JointLimit { min, max }
    }

    pub fn from_degrees(min: f64, max: f64) -> Self {
        JointLimit::new(min.to_radians(), max.to_radians())
    }

    pub fn contains(&self, angle: f64) -> bool {
        angle >= self.min && angle <= self.max
    }

    pub fn clamp(&self, angle: f64) -> f64 {
        angle.clamp(self.min, self.max)
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    /// `n` evenly spaced samples including both ends.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let step = if n > 1 {
            self.span() / (n - 1) as f64
        } else {
            0.0
        };
        (0..n).map(move |i| {
            if i + 1 == n {
                self.max
            } else {
                self.min + step * i as f64
            }
        })
    }
}

/// Link dimensions and joint ranges of one exoskeleton finger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageGeometry {
    link_lengths: [f64; 3],
    swing_offset: f64,
    joint_limits: [JointLimit; JOINTS_PER_FINGER],
    actuated_joint: usize,
}

impl LinkageGeometry {
    pub fn new(
        link_lengths: [f64; 3],
        swing_offset: f64,
        joint_limits: [JointLimit; JOINTS_PER_FINGER],
        actuated_joint: usize,
    ) -> Result<Self> {
        if link_lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(KinematicsError::InvalidGeometry(format!(
                "link lengths must be positive, got {link_lengths:?}"
            )));
        }
        if !(swing_offset.is_finite() && swing_offset >= 0.0) {
            return Err(KinematicsError::InvalidGeometry(format!(
                "swing offset must be non-negative, got {swing_offset}"
            )));
        }
        for (joint, lim) in joint_limits.iter().enumerate() {
            if !(lim.min < lim.max && lim.min > -PI && lim.max < PI) {
                return Err(KinematicsError::InvalidGeometry(format!(
                    "joint {joint} limit [{}, {}] must be non-empty and inside (-pi, pi)",
                    lim.min, lim.max
                )));
            }
        }
        if actuated_joint >= JOINTS_PER_FINGER {
            return Err(KinematicsError::InvalidGeometry(format!(
                "actuated joint {actuated_joint} out of range 0..{JOINTS_PER_FINGER}"
            )));
        }
        Ok(LinkageGeometry {
            link_lengths,
            swing_offset,
            joint_limits,
            actuated_joint,
        })
    }

    /// Default printed geometry.
    ///
    /// The link lengths sum to 0.1465 m so the fully extended pose has the
    /// longest moment arm (0.52 Nm / 3.55 N). The distal flexion limits are
    /// chosen so the fully folded corner of the joint box has an arm of
    /// 0.0636 m (0.52 Nm / 8.18 N). See [`LinkageGeometry::rest_pose`].
    pub fn calibrated() -> Self {
        let fold = CALIBRATED_FOLD_LIMIT_RAD;
        LinkageGeometry {
            link_lengths: [0.055, 0.050, 0.0415],
            swing_offset: 0.010,
            joint_limits: [
                JointLimit::from_degrees(-10.0, 80.0),
                JointLimit::new(0.0, fold),
                JointLimit::new(0.0, fold),
                JointLimit::from_degrees(-15.0, 15.0),
            ],
            actuated_joint: 0,
        }
    }

    /// Relaxed finger pose of the calibrated geometry; both distal joints
    /// flexed so the moment arm is 0.1156 m.
    pub fn rest_pose() -> FingerAngles {
        [
            20f64.to_radians(),
            CALIBRATED_REST_FLEX_RAD,
            CALIBRATED_REST_FLEX_RAD,
            0.0,
        ]
    }

    pub fn link_lengths(&self) -> [f64; 3] {
        self.link_lengths
    }

    pub fn swing_offset(&self) -> f64 {
        self.swing_offset
    }

    pub fn joint_limits(&self) -> &[JointLimit; JOINTS_PER_FINGER] {
        &self.joint_limits
    }

    pub fn actuated_joint(&self) -> usize {
        self.actuated_joint
    }

    /// Sum of the flexion link lengths.
    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    /// Same joint ranges, all lengths multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        LinkageGeometry::new(
            self.link_lengths.map(|l| l * factor),
            self.swing_offset * factor,
            self.joint_limits,
            self.actuated_joint,
        )
    }

    pub fn check_angles(&self, angles: &FingerAngles) -> Result<()> {
        for (joint, (&angle, lim)) in angles.iter().zip(&self.joint_limits).enumerate() {
            if !lim.contains(angle) {
                return Err(KinematicsError::OutOfLimits {
                    joint,
                    angle,
                    min: lim.min,
                    max: lim.max,
                });
            }
        }
        Ok(())
    }

    pub fn clamp_angles(&self, angles: &FingerAngles) -> FingerAngles {
        let mut out = *angles;
        for (a, lim) in out.iter_mut().zip(&self.joint_limits) {
            *a = lim.clamp(*a);
        }
        out
    }
}

impl Default for LinkageGeometry {
    fn default() -> Self {
        LinkageGeometry::calibrated()
    }
}

// Solved offline by bisection on the planar chain with links
// [0.055, 0.050, 0.0415] and equal distal flexion.
const CALIBRATED_FOLD_LIMIT_RAD: f64 = 1.444_303_475_493_891_5;
const CALIBRATED_REST_FLEX_RAD: f64 = 0.829_368_795_256_354_1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingertipPose {
    pub position: [f64; 3],
}

impl FingertipPose {
    pub fn norm(&self) -> f64 {
        self.position.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &FingertipPose) -> f64 {
        self.position
            .iter()
            .zip(&other.position)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Fingertip of a planar chain in the flexion plane, relative to the first
/// flexion joint. Angles are relative (each joint adds to the previous).
pub fn planar_tip(link_lengths: &[f64; 3], flexion: &[f64; 3]) -> (f64, f64) {
    let mut heading = 0.0;
    let (mut x, mut y) = (0.0, 0.0);
    for (l, theta) in link_lengths.iter().zip(flexion) {
        heading += theta;
        x += l * heading.cos();
        y += l * heading.sin();
    }
    (x, y)
}

pub fn forward_kinematics(geom: &LinkageGeometry, angles: &FingerAngles) -> Result<FingertipPose> {
    geom.check_angles(angles)?;
    Ok(forward_kinematics_unchecked(geom, angles))
}

pub(crate) fn forward_kinematics_unchecked(
    geom: &LinkageGeometry,
    angles: &FingerAngles,
) -> FingertipPose {
    let (px, py) = planar_tip(&geom.link_lengths, &[angles[0], angles[1], angles[2]]);
    let x = geom.swing_offset + px;
    let swing = angles[SWING_JOINT];
    FingertipPose {
        position: [x * swing.cos(), py, -x * swing.sin()],
    }
}

fn moment_arm_unchecked(geom: &LinkageGeometry, angles: &FingerAngles) -> f64 {
    match geom.actuated_joint {
        SWING_JOINT => {
            let (px, _) = planar_tip(&geom.link_lengths, &[angles[0], angles[1], angles[2]]);
            (geom.swing_offset + px).abs()
        }
        k => {
            // Distance from joint k to the tip does not depend on the heading
            // of link k, only on the joints distal to it.
            let mut heading = 0.0;
            let (mut x, mut y) = (0.0, 0.0);
            for i in k..3 {
                if i > k {
                    heading += angles[i];
                }
                x += geom.link_lengths[i] * heading.cos();
                y += geom.link_lengths[i] * heading.sin();
            }
            x.hypot(y)
        }
    }
}

/// Perpendicular distance from the actuated joint axis to the fingertip.
///
/// Flexion-plane model: the swing joint does not enter the arm of a flexion
/// actuator.
pub fn moment_arm(geom: &LinkageGeometry, angles: &FingerAngles) -> Result<f64> {
    geom.check_angles(angles)?;
    let arm = moment_arm_unchecked(geom, angles);
    if arm < SINGULAR_ARM_M {
        return Err(KinematicsError::Singular {
            arm,
            threshold: SINGULAR_ARM_M,
        });
    }
    Ok(arm)
}

/// Force at the fingertip produced by `torque` (Nm) on the actuated joint.
pub fn fingertip_force(geom: &LinkageGeometry, angles: &FingerAngles, torque: f64) -> Result<f64> {
    Ok(torque / moment_arm(geom, angles)?)
}

/// One pose of a workspace sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub angles: FingerAngles,
    pub arm: f64,
    pub force: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceRange {
    pub min: f64,
    pub max: f64,
    pub min_pose: FingerAngles,
    pub max_pose: FingerAngles,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Dense grid over the joint-limit box, `grid` samples per joint. Singular
/// poses (arm below 1 mm) are left out.
pub fn workspace_sweep(
    geom: &LinkageGeometry,
    torque: f64,
    grid: usize,
) -> Result<impl Iterator<Item = SweepSample> + '_> {
    if grid < 2 {
        return Err(KinematicsError::Analysis(format!(
            "grid resolution must be at least 2 samples per joint, got {grid}"
        )));
    }
    let lims = &geom.joint_limits;
    let poses = lims[0].grid(grid).flat_map(move |a0| {
        lims[1].grid(grid).flat_map(move |a1| {
            lims[2]
                .grid(grid)
                .flat_map(move |a2| lims[3].grid(grid).map(move |a3| [a0, a1, a2, a3]))
        })
    });
    Ok(poses.filter_map(move |angles| {
        let arm = moment_arm_unchecked(geom, &angles);
        (arm >= SWEEP_SKIP_ARM_M).then(|| SweepSample {
            angles,
            arm,
            force: torque / arm,
        })
    }))
}

pub fn workspace_force_range(
    geom: &LinkageGeometry,
    torque: f64,
    grid: usize,
) -> Result<ForceRange> {
    let mut best: Option<ForceRange> = None;
    let mut evaluated = 0;
    for s in workspace_sweep(geom, torque, grid)? {
        evaluated += 1;
        let r = best.get_or_insert(ForceRange {
            min: s.force,
            max: s.force,
            min_pose: s.angles,
            max_pose: s.angles,
            evaluated: 0,
            skipped: 0,
        });
        if s.force < r.min {
            r.min = s.force;
            r.min_pose = s.angles;
        }
        if s.force > r.max {
            r.max = s.force;
            r.max_pose = s.angles;
        }
    }
    let total = grid.pow(JOINTS_PER_FINGER as u32);
    let mut range = best.ok_or_else(|| {
        KinematicsError::Analysis("every pose of the workspace grid is singular".into())
    })?;
    range.evaluated = evaluated;
    range.skipped = total - evaluated;
    Ok(range)
}

pub const SWEEP_CSV_HEADER: &str = "theta0,theta1,theta2,theta3,arm_m,force_N";

pub fn write_sweep_csv<W: Write>(
    mut out: W,
    samples: impl IntoIterator<Item = SweepSample>,
) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for s in samples {
        let [a0, a1, a2, a3] = s.angles;
        writeln!(out, "{a0},{a1},{a2},{a3},{},{}", s.arm, s.force)?;
    }
    Ok(())
}

/// Encoder quantum in radians.
pub fn encoder_quantum() -> f64 {
    ENCODER_QUANTUM_DEG.to_radians()
}

/// Round an angle to the nearest encoder step, ties away from zero.
///
/// Step counts within 1e-9 of a half step are treated as ties so that
/// degree/radian conversions do not decide the rounding direction.
pub fn quantize_encoder(angle: f64) -> f64 {
    let steps = angle.to_degrees() / ENCODER_QUANTUM_DEG;
    let magnitude = steps.abs();
    let whole = if (magnitude.fract() - 0.5).abs() < 1e-9 {
        magnitude.trunc() + 1.0
    } else {
        magnitude.round()
    };
    (whole.copysign(steps) * ENCODER_QUANTUM_DEG).to_radians()
}

/// Joint angles of one hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HandAngles {
    /// Actuator encoders only: one angle per finger.
    Canonical([f64; FINGERS]),
    /// Actuator plus joint encoders: four angles per finger.
    Full([FingerAngles; FINGERS]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub timestamp: f64,
    pub angles: HandAngles,
}

impl JointState {
    pub fn canonical(timestamp: f64, angles: [f64; FINGERS]) -> Self {
        JointState {
            timestamp,
            angles: HandAngles::Canonical(angles),
        }
    }

    pub fn full(timestamp: f64, angles: [FingerAngles; FINGERS]) -> Self {
        JointState {
            timestamp,
            angles: HandAngles::Full(angles),
        }
    }

    /// Full state from a flat slice of 20 angles, finger-major.
    pub fn from_flat(timestamp: f64, flat: &[f64]) -> Result<Self> {
        let expected = FINGERS * JOINTS_PER_FINGER;
        if flat.len() != expected {
            return Err(KinematicsError::WrongDof {
                expected,
                got: flat.len(),
            });
        }
        let mut angles = [[0.0; JOINTS_PER_FINGER]; FINGERS];
        for (finger, chunk) in angles.iter_mut().zip(flat.chunks_exact(JOINTS_PER_FINGER)) {
            finger.copy_from_slice(chunk);
        }
        Ok(JointState::full(timestamp, angles))
    }

    pub fn dof(&self) -> usize {
        match self.angles {
            HandAngles::Canonical(_) => FINGERS,
            HandAngles::Full(_) => FINGERS * JOINTS_PER_FINGER,
        }
    }

    /// Angles of one finger. Canonical states only carry the actuated joint;
    /// the passive joints read as zero, clamped into their limits.
    pub fn finger(&self, finger: usize, geom: &LinkageGeometry) -> FingerAngles {
        match &self.angles {
            HandAngles::Full(a) => a[finger],
            HandAngles::Canonical(a) => {
                let mut out = geom.clamp_angles(&[0.0; JOINTS_PER_FINGER]);
                out[geom.actuated_joint] = a[finger];
                out
            }
        }
    }

    /// Reading of the actuator encoder of each finger.
    pub fn actuated(&self, geoms: &[LinkageGeometry; FINGERS]) -> [f64; FINGERS] {
        std::array::from_fn(|i| self.finger(i, &geoms[i])[geoms[i].actuated_joint])
    }

    pub fn to_flat(
        &self,
        geoms: &[LinkageGeometry; FINGERS],
    ) -> [f64; FINGERS * JOINTS_PER_FINGER] {
        let mut flat = [0.0; FINGERS * JOINTS_PER_FINGER];
        for (i, chunk) in flat.chunks_exact_mut(JOINTS_PER_FINGER).enumerate() {
            chunk.copy_from_slice(&self.finger(i, &geoms[i]));
        }
        flat
    }

    pub fn validate(&self, geoms: &[LinkageGeometry; FINGERS]) -> Result<()> {
        (0..FINGERS).try_for_each(|i| geoms[i].check_angles(&self.finger(i, &geoms[i])))
    }
}

/// Fingertip of every finger; fingers are kinematically independent.
pub fn hand_forward_kinematics(
    geoms: &[LinkageGeometry; FINGERS],
    state: &JointState,
) -> Result<[FingertipPose; FINGERS]> {
    let mut out = [FingertipPose { position: [0.0; 3] }; FINGERS];
    for (i, pose) in out.iter_mut().enumerate() {
        *pose = forward_kinematics(&geoms[i], &state.finger(i, &geoms[i]))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_geometry() -> LinkageGeometry {
        let wide = JointLimit::new(-3.0, 3.0);
        LinkageGeometry::new([0.045, 0.025, 0.020], 0.0, [wide; 4], 0).unwrap()
    }

    /// Independent route: complex-number chain summation.
    fn complex_chain(links: &[f64; 3], flexion: &[f64; 3]) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        let mut cum = 0.0;
        for (l, t) in links.iter().zip(flexion) {
            cum += t;
            // l * exp(i cum)
            let (s, c) = cum.sin_cos();
            re += l * c;
            im += l * s;
        }
        (re, im)
    }

    #[test]
    fn straight_chain_is_sum_of_links() {
        let p = forward_kinematics(&example_geometry(), &[0.0; 4]).unwrap();
        assert!((p.position[0] - 0.090).abs() < 1e-12);
        assert!(p.position[1].abs() < 1e-12 && p.position[2].abs() < 1e-12);
    }

    #[test]
    fn right_angle_flexion_rotates_chain() {
        let p =
            forward_kinematics(&example_geometry(), &[90f64.to_radians(), 0.0, 0.0, 0.0]).unwrap();
        assert!(p.position[0].abs() < 1e-12);
        assert!((p.position[1] - 0.090).abs() < 1e-12);
    }

    #[test]
    fn thirty_degree_flexion_matches_complex_summation() {
        let t = 30f64.to_radians();
        let p = forward_kinematics(&example_geometry(), &[t, t, t, 0.0]).unwrap();
        // Frozen from the complex-summation oracle.
        assert!((p.position[0] - 0.051_471_143_170_299_74).abs() < 1e-12);
        assert!((p.position[1] - 0.064_150_635_094_610_97).abs() < 1e-12);
        let (re, im) = complex_chain(&[0.045, 0.025, 0.020], &[t, t, t]);
        assert!((p.position[0] - re).abs() < 1e-15 && (p.position[1] - im).abs() < 1e-15);
    }

    #[test]
    fn out_of_limit_angle_names_joint() {
        let g = LinkageGeometry::calibrated();
        let mut a = LinkageGeometry::rest_pose();
        a[2] = -0.2;
        match forward_kinematics(&g, &a) {
            Err(KinematicsError::OutOfLimits { joint, .. }) => assert_eq!(joint, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn geometry_validation() {
        let lim = JointLimit::new(-1.0, 1.0);
        assert!(LinkageGeometry::new([0.0, 0.1, 0.1], 0.0, [lim; 4], 0).is_err());
        assert!(LinkageGeometry::new([0.1; 3], 0.0, [lim; 4], 4).is_err());
        assert!(LinkageGeometry::new([0.1; 3], 0.0, [JointLimit::new(1.0, 1.0); 4], 0).is_err());
        assert!(LinkageGeometry::new([0.1; 3], 0.0, [JointLimit::new(-4.0, 1.0); 4], 0).is_err());
    }

    #[test]
    fn moment_arm_examples() {
        assert!((moment_arm(&example_geometry(), &[0.0; 4]).unwrap() - 0.090).abs() < 1e-12);
        let g = LinkageGeometry::calibrated();
        let rest = moment_arm(&g, &LinkageGeometry::rest_pose()).unwrap();
        assert!((rest - 0.1156).abs() < 1e-9, "rest arm {rest}");
    }

    #[test]
    fn folded_over_axis_is_singular() {
        // Equal links folded by 120 degrees twice close the triangle.
        let lim = JointLimit::new(-3.0, 3.0);
        let g = LinkageGeometry::new([0.03; 3], 0.0, [lim; 4], 0).unwrap();
        let t = 120f64.to_radians();
        assert!(matches!(
            moment_arm(&g, &[0.0, t, t, 0.0]),
            Err(KinematicsError::Singular { .. })
        ));
        assert!(matches!(
            fingertip_force(&g, &[0.0, t, t, 0.0], 0.5),
            Err(KinematicsError::Singular { .. })
        ));
    }

    #[test]
    fn force_examples() {
        let g = LinkageGeometry::calibrated();
        let rest = LinkageGeometry::rest_pose();
        assert!((fingertip_force(&g, &rest, 0.52).unwrap() - 4.5).abs() < 0.01);
        assert_eq!(fingertip_force(&g, &rest, 0.0).unwrap(), 0.0);
        let folded = [0.0, g.joint_limits()[1].max, g.joint_limits()[2].max, 0.0];
        let arm = moment_arm(&g, &folded).unwrap();
        assert!((arm - 0.0636).abs() < 1e-9);
        assert!((fingertip_force(&g, &folded, 0.03).unwrap() - 0.4717).abs() < 1e-3);
    }

    #[test]
    fn sweep_requires_two_samples() {
        assert!(matches!(
            workspace_force_range(&LinkageGeometry::calibrated(), 0.52, 1),
            Err(KinematicsError::Analysis(_))
        ));
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_encoder(0.0), 0.0);
        let q = quantize_encoder(10f64.to_radians()).to_degrees();
        assert!((q - 114.0 * 0.088).abs() < 1e-9, "{q}");
        let tie = quantize_encoder(0.044f64.to_radians()).to_degrees();
        assert!((tie - 0.088).abs() < 1e-12, "{tie}");
        let neg = quantize_encoder((-0.044f64).to_radians()).to_degrees();
        assert!((neg + 0.088).abs() < 1e-12, "{neg}");
    }

    #[test]
    fn canonical_state_expands_with_passive_joints_at_rest() {
        let geoms: [LinkageGeometry; FINGERS] =
            std::array::from_fn(|_| LinkageGeometry::calibrated());
        let s = JointState::canonical(0.0, [0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(s.dof(), 5);
        assert_eq!(s.finger(2, &geoms[2]), [0.3, 0.0, 0.0, 0.0]);
        assert_eq!(s.actuated(&geoms), [0.1, 0.2, 0.3, 0.4, 0.5]);
        let full = JointState::from_flat(0.0, &s.to_flat(&geoms)).unwrap();
        assert_eq!(full.dof(), 20);
        assert!(JointState::from_flat(0.0, &[0.0; 19]).is_err());
    }

    #[test]
    fn sweep_csv_header() {
        let g = LinkageGeometry::calibrated();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, workspace_sweep(&g, 0.52, 2).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta0,theta1,theta2,theta3,arm_m,force_N\n"));
        assert_eq!(text.lines().count(), 1 + 16);
    }
}
