#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Simulation stack for a multimodal haptic exoskeleton teleoperation rig:
//! leader linkage kinematics, haptic rendering laws, device plants, a
//! follower contact environment, the leader/follower wire protocol and the
//! session runtime tying them together.

pub mod characterize;
pub mod env;
pub mod kinematics;
pub mod mapping;
pub mod plants;
pub mod protocol;
pub mod session;
