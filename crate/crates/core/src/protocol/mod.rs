//! Single-copy exclusion trees, multi-copy distinguishing strategies and
//! copy-count bounds.

mod bounds;
mod schedule;
mod synth;
mod tree;

pub use bounds::{bound_report, epsilon_schedule, parse_epsilon, BoundReport, EpsilonSchedule, DEFAULT_SCAN_MAX};
pub use schedule::{
    exclusion_schedule, guarantee_copies, plan_distinguish, CopySchedule, CopyStage, ExclusionSchedule, ScheduleEntry,
    Stage, StageSource, Strategy, DEFAULT_MAX_THRESHOLD,
};
pub use synth::{greedy_exclusion, synthesize_exclusion};
pub use tree::{MeasurementSpec, Node, Outcome, ProtocolTree, Target};
