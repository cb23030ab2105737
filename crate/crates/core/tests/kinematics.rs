use mfe::env::LeaderPosture;
use mfe::kinematics::{
    encoder_quantum, fingertip_force, forward_kinematics, hand_forward_kinematics, moment_arm,
    quantize_encoder, workspace_sweep, JointState, LinkageGeometry, DEFAULT_SWEEP_GRID,
};
use mfe::mapping::retarget::{retarget_finger, FollowerHand};
use mfe::plants::MotorPlant;
use proptest::prelude::*;

/// Distance from the first flexion joint to the fingertip by summing link
/// vectors with absolute headings.
fn arm_oracle(l: [f64; 3], q1: f64, q2: f64) -> f64 {
    let x = l[0] + l[1] * q1.cos() + l[2] * (q1 + q2).cos();
    let y = l[1] * q1.sin() + l[2] * (q1 + q2).sin();
    x.hypot(y)
}

const REST_FORCE_N: f64 = 4.498_269_896_193_772;

#[test]
fn rest_force_matches_oracle() {
    let g = LinkageGeometry::calibrated();
    let q = LinkageGeometry::rest_pose();
    let oracle = 0.52 / arm_oracle([0.055, 0.050, 0.0415], q[1], q[2]);
    let got = fingertip_force(&g, &q, MotorPlant::default().motor_torque(1750.0)).unwrap();
    assert!((oracle - REST_FORCE_N).abs() < 1e-12, "oracle {oracle}");
    assert!((got - oracle).abs() < 1e-12);
}

#[test]
fn sweep_force_times_arm_is_torque() {
    let g = LinkageGeometry::calibrated();
    for s in workspace_sweep(&g, 0.52, 9).unwrap() {
        assert!((s.force * s.arm - 0.52).abs() < 1e-12);
        assert!((s.arm - arm_oracle(g.link_lengths(), s.angles[1], s.angles[2])).abs() < 1e-12);
    }
    assert_eq!(
        workspace_sweep(&g, 0.52, DEFAULT_SWEEP_GRID)
            .unwrap()
            .count(),
        25usize.pow(4)
    );
}

#[test]
fn retarget_agrees_with_dense_scan() {
    let leader = LinkageGeometry::calibrated();
    let hand = FollowerHand::inspire_like().with_reach_matched_to(&leader);
    let finger = &hand.fingers[1];
    let posture = LeaderPosture::default();
    for i in 0..=40 {
        let closure = (80.0 * i as f64 / 40.0).to_radians();
        let angles = posture.finger(closure, &leader);
        let (lx, ly) =
            mfe::kinematics::planar_tip(&leader.link_lengths(), &[angles[0], angles[1], angles[2]]);
        let err = |q: f64| {
            let (fx, fy) = finger.tip(q);
            (fx - lx * hand.tip_scale).hypot(fy - ly * hand.tip_scale)
        };
        let best = (0..=14_500)
            .map(|k| finger.limits.min + finger.limits.span() * k as f64 / 14_500.0)
            .fold(f64::INFINITY, |acc, q| acc.min(err(q)));
        let (q, _) = retarget_finger(&leader, &angles, finger, hand.tip_scale);
        assert!(
            err(q) <= best + 1e-6,
            "closure {closure}: {} vs scan {best}",
            err(q)
        );
    }
}

fn angles() -> impl Strategy<Value = [f64; 4]> {
    let g = LinkageGeometry::calibrated();
    let l = *g.joint_limits();
    (
        l[0].min..l[0].max,
        l[1].min..l[1].max,
        l[2].min..l[2].max,
        l[3].min..l[3].max,
    )
        .prop_map(|(a, b, c, d)| [a, b, c, d])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn fk_is_lipschitz(q in angles(), dq in prop::array::uniform4(-1e-4f64..1e-4)) {
        let g = LinkageGeometry::calibrated();
        let q2 = g.clamp_angles(&std::array::from_fn(|i| q[i] + dq[i]));
        let a = forward_kinematics(&g, &q).unwrap();
        let b = forward_kinematics(&g, &q2).unwrap();
        let step = (0..4).map(|i| (q2[i] - q[i]).abs()).sum::<f64>();
        // No point of the chain is farther than reach + offset from any axis.
        prop_assert!(a.distance(&b) <= (g.reach() + g.swing_offset()) * step + 1e-15);
    }

    #[test]
    fn fk_distance_in_plane_matches_arm(q in angles()) {
        let g = LinkageGeometry::calibrated();
        prop_assert!((moment_arm(&g, &q).unwrap() - arm_oracle(g.link_lengths(), q[1], q[2])).abs() < 1e-12);
        let p = forward_kinematics(&g, &q).unwrap().position;
        let radial = p[0].hypot(p[2]);
        prop_assert!((radial.hypot(p[1]) - forward_kinematics(&g, &q).unwrap().norm()).abs() < 1e-12);
    }

    #[test]
    fn quantize_is_idempotent_and_close(a in -3.0f64..3.0) {
        let q = quantize_encoder(a);
        prop_assert_eq!(quantize_encoder(q), q);
        prop_assert!((q - a).abs() <= 0.5 * encoder_quantum() + 1e-12);
    }

    #[test]
    fn posture_stays_within_limits(closure in -1.0f64..3.0) {
        let g = LinkageGeometry::calibrated();
        let q = LeaderPosture::default().finger(closure, &g);
        prop_assert!(g.check_angles(&q).is_ok());
    }

    #[test]
    fn fingers_are_decoupled(fingers in prop::array::uniform5(angles()), i in 0usize..5, other in angles()) {
        let geoms: [LinkageGeometry; 5] = std::array::from_fn(|_| LinkageGeometry::calibrated());
        let hand = hand_forward_kinematics(&geoms, &JointState::full(0.0, fingers)).unwrap();
        for (f, pose) in hand.iter().enumerate() {
            prop_assert_eq!(*pose, forward_kinematics(&geoms[f], &fingers[f]).unwrap());
        }
        let mut changed = fingers;
        changed[i] = other;
        let moved = hand_forward_kinematics(&geoms, &JointState::full(0.0, changed)).unwrap();
        for f in (0..5).filter(|&f| f != i) {
            prop_assert_eq!(moved[f], hand[f]);
        }
    }
}
