//! Map leader finger poses onto the six-actuator follower hand.
//!
//!     cargo run --example retargeting

use mfe::env::LeaderPosture;
use mfe::kinematics::{JointState, LinkageGeometry};
use mfe::mapping::retarget::{retarget_pose, FollowerHand};

fn main() -> mfe::kinematics::Result<()> {
    let leader = LinkageGeometry::calibrated();
    let geoms = std::array::from_fn(|_| leader.clone());
    let hand = FollowerHand::inspire_like().with_reach_matched_to(&leader);
    let posture = LeaderPosture::default();
    println!("tip scale {:.4}", hand.tip_scale);
    for deg in [0.0, 20.0, 40.0, 60.0, 80.0] {
        let mut fingers = std::array::from_fn(|_| posture.finger(f64::to_radians(deg), &leader));
        fingers[0][3] = 10f64.to_radians();
        let pose = JointState::full(0.0, fingers);
        let t = retarget_pose(&pose, &geoms, &hand)?;
        println!(
            "closure {deg:>4.0} deg -> flexion {:?} rad, thumb rotation {:.3} rad, travel {:.4} m{}",
            t.flexion.map(|q| (q * 1e4).round() / 1e4),
            t.thumb_rotation,
            hand.fingers[1].travel(t.flexion[1]),
            if t.any_saturated() { " (limit)" } else { "" }
        );
    }
    Ok(())
}
