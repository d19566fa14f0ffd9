//! Builds points whose empirical measures follow a target measure, by
//! concatenating typical orbit blocks with short connectors and shadowing
//! the result.

mod blocks;
mod connector;
mod schedule;
mod weave;

pub use blocks::{select_blocks, BlockFamily, BlockParams, BoundCheck, SelectionStats};
pub use connector::{connector, Connector};
pub use schedule::{build_schedule, Certificate, ConnectorTable, LevelPlan, LevelSchedule, Offsets, WeaveSchedule};
pub use weave::{
    concatenate, plan_weave, random_picks, separation_audit, weave_point, ConvergencePoint, Segment, SegmentKind,
    SeparationAudit, Slot, WeaveConfig, WeaveOutcome, WeavePlan, WovenOrbit,
};
