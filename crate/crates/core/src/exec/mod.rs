//! Portable lane-group execution model.
//!
//! A lane group stands in for a GPU warp: `lane_width` logical lanes whose
//! observable behaviour must match lockstep execution. Each group is run by
//! one worker as a `lane_width`-wide inner loop. When instrumented, groups
//! record their memory instructions so that coalescing and the two kinds of
//! load imbalance can be measured.
//!
//! Word addresses are element indices within the owning array (A's nonzero
//! arrays, B's buffer, C's buffer); every array starts at a segment
//! boundary and a segment is `lane_width` consecutive words.

mod config;
mod cost;
mod group;
mod metrics;
mod trace;

pub use config::{ExecConfig, LANE_WIDTH_ENV, MAX_LANES};
pub use cost::{predict_overhead, register_usage, CostCounters};
pub use group::{lane_mask, run_lane_groups, split_regions, GroupRun, LaneGroup, Region};
pub use metrics::{
    coalescing_efficiency, coalescing_efficiency_of, imbalance, type1_imbalance, type2_utilization,
    type2_utilization_of,
};
pub use trace::{AccessKind, AccessStats, ExecTrace, Instrument, MemAccess};
