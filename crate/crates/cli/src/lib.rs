//! Pieces of the `mfe` binary that are worth testing on their own.

pub mod live;
pub mod serve;
