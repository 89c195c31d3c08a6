//! Full-body path planning for statically stable legged robots walking on
//! elevation maps, plus a benchmark harness for comparing planners.

pub mod geometry;
pub mod metering;
pub mod spatial;
pub mod terrain;
pub mod robot;
pub mod constraints;
pub mod local_planner;
pub mod planners;
pub mod bench;
