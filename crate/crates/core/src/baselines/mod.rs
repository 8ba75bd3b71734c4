//! Comparison planners: predict-then-act, trajectory-sampling SBMP and the
//! convex-lane restriction of the interacting planner.

mod convex_lane;
mod independent;
mod sbmp;

use serde::{Deserialize, Serialize};

pub use convex_lane::{
    clip_halfplane, convex_lane_plan, homotopy_signature, Lane, LanePartition, ConvexLanePlanner,
};
pub use independent::{collision_probability_disk, independent_plan, IndependentPlanner};
pub use sbmp::{
    sbmp_plan, sbmp_select, GaussianSource, GridSource, SbmpPlanner, SbmpSelection, TrajectorySource,
};

fn default_damping() -> f64 {
    1.0
}
fn default_freeze() -> f64 {
    0.05
}

/// Decoupled cost `ln w^R_ℓ + damping · ln C_f`, where `C_f` is the
/// predicted probability of never touching any frozen human prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndependentConfig {
    #[serde(default = "default_damping")]
    pub damping: f64,
    /// Hold position when the best path's predicted collision probability
    /// exceeds this.
    #[serde(default = "default_freeze")]
    pub freeze_threshold: f64,
}

impl Default for IndependentConfig {
    fn default() -> Self {
        Self { damping: default_damping(), freeze_threshold: default_freeze() }
    }
}

/// Trajectory draws per agent; `None` uses `samples_per_agent`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmpConfig {
    #[serde(default)]
    pub samples: Option<usize>,
}

fn default_lane_draws() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexLaneConfig {
    /// Lanes drawn by weight each cycle; candidates come from drawn lanes.
    #[serde(default = "default_lane_draws")]
    pub lane_draws: usize,
}

impl Default for ConvexLaneConfig {
    fn default() -> Self {
        Self { lane_draws: default_lane_draws() }
    }
}
