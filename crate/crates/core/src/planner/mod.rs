//! Planner interface, shared configuration and the by-name registry.

mod registry;
pub mod sigp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{ConvexLaneConfig, IndependentConfig, SbmpConfig};
use crate::gp::{GpError, KernelSpec, Position, TrajectoryObservations};
use crate::interaction::{InteractionError, OverlapMode};

pub use registry::{PlannerFactory, PlannerRegistry, RegistryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
    #[error("invalid planner configuration: {0}")]
    Config(String),
    #[error("basis set is empty or inconsistent: {0}")]
    InvalidBasis(String),
    #[error("every joint basis has zero coefficient")]
    AllColliding,
    #[error("full enumeration needs {needed} joint bases, limit is {limit}")]
    EnumerationTooLarge { needed: u128, limit: u64 },
}

/// Axis-aligned workspace bounds in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub min: Position,
    pub max: Position,
}

impl Workspace {
    pub fn contains(&self, p: Position) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }
}

/// Everything a planner sees at one replanning cycle.
#[derive(Debug, Clone)]
pub struct PlanningScene {
    pub t_now: i64,
    pub dt: f64,
    pub robot: TrajectoryObservations,
    pub robot_goal: Position,
    pub robot_max_speed: f64,
    pub humans: Vec<TrajectoryObservations>,
    pub collision_radius: f64,
    pub workspace: Workspace,
}

impl PlanningScene {
    pub fn robot_position(&self) -> Result<Position, PlanError> {
        self.robot.last().map(|(_, p)| p).ok_or(PlanError::Gp(GpError::EmptyObservations))
    }
}

fn default_samples() -> usize {
    500
}
fn default_alpha() -> [f64; 2] {
    [0.1, 1.0]
}
fn default_horizon() -> usize {
    30
}
fn default_dt() -> f64 {
    0.1
}
fn default_prune() -> f64 {
    20.0
}
fn default_robot_kernel() -> KernelSpec {
    KernelSpec { signal_variance: 1.0, length_scale: 1.0, noise_variance: 1e-3 }
}
fn default_human_kernel() -> KernelSpec {
    KernelSpec { signal_variance: 0.1, length_scale: 1.0, noise_variance: 1e-3 }
}
fn default_goal_slack() -> f64 {
    10.0
}
fn default_history() -> usize {
    8
}
fn default_body_variance() -> f64 {
    1.0
}
fn default_top_k() -> usize {
    5
}
fn default_max_enumeration() -> u64 {
    2_000_000
}

/// Planner parameters, shared by every registered planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    #[serde(default = "default_samples")]
    pub samples_per_agent: usize,
    /// Covariance multiplier range for sampled components.
    #[serde(default = "default_alpha")]
    pub alpha_range: [f64; 2],
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Seconds per step; scenarios overwrite it with the simulator step.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub include_ped_ped_terms: bool,
    /// Relative log-coefficient cutoff used by pruning (nats).
    #[serde(default = "default_prune")]
    pub prune_threshold: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub overlap_mode: OverlapMode,
    /// Score pairs by `ln(Λ/w)` instead of `ln Λ`; the normalizer `w` only
    /// depends on the covariances and otherwise acts as a prior on flexibility.
    #[serde(default)]
    pub lambda_ratio: bool,
    /// Added to the summed per-coordinate variance of every pair (m²). Acts
    /// as the avoidance scale: pairs closer than about `√(2·body_variance)`
    /// are penalized even when both predictions are confident.
    #[serde(default = "default_body_variance")]
    pub body_variance: f64,
    #[serde(default = "default_robot_kernel")]
    pub robot_kernel: KernelSpec,
    #[serde(default = "default_human_kernel")]
    pub human_kernel: KernelSpec,
    /// Goal pseudo-observation noise is `noise_variance * goal_slack`.
    #[serde(default = "default_goal_slack")]
    pub goal_slack: f64,
    /// Steps of measurement history used for conditioning.
    #[serde(default = "default_history")]
    pub history_window: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Upper bound on joint bases visited by full enumeration.
    #[serde(default = "default_max_enumeration")]
    pub max_enumeration: u64,
    #[serde(default)]
    pub independent: IndependentConfig,
    #[serde(default)]
    pub sbmp: SbmpConfig,
    #[serde(default)]
    pub convex_lane: ConvexLaneConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            samples_per_agent: default_samples(),
            alpha_range: default_alpha(),
            horizon: default_horizon(),
            dt: default_dt(),
            include_ped_ped_terms: false,
            prune_threshold: default_prune(),
            seed: 0,
            overlap_mode: OverlapMode::default(),
            lambda_ratio: false,
            body_variance: default_body_variance(),
            robot_kernel: default_robot_kernel(),
            human_kernel: default_human_kernel(),
            goal_slack: default_goal_slack(),
            history_window: default_history(),
            top_k: default_top_k(),
            max_enumeration: default_max_enumeration(),
            independent: IndependentConfig::default(),
            sbmp: SbmpConfig::default(),
            convex_lane: ConvexLaneConfig::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.samples_per_agent == 0 {
            return Err(PlanError::Config("samples_per_agent must be at least 1".into()));
        }
        let [lo, hi] = self.alpha_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(PlanError::Config(format!("alpha_range must satisfy 0 < low <= high, got {lo}..{hi}")));
        }
        if self.horizon == 0 {
            return Err(PlanError::Config("horizon must be at least 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(PlanError::Config("dt must be positive".into()));
        }
        if !(self.goal_slack > 0.0) {
            return Err(PlanError::Config("goal_slack must be positive".into()));
        }
        if self.history_window == 0 {
            return Err(PlanError::Config("history_window must be at least 1".into()));
        }
        if !(self.body_variance >= 0.0 && self.body_variance.is_finite()) {
            return Err(PlanError::Config("body_variance must be non-negative".into()));
        }
        if self.prune_threshold.is_nan() || self.prune_threshold < 0.0 {
            return Err(PlanError::Config("prune_threshold must be non-negative".into()));
        }
        self.robot_kernel.validate()?;
        self.human_kernel.validate()?;
        Ok(())
    }
}

/// A joint basis index `(ℓ, k₁, …, k_n)` with its log-coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointBasis {
    pub eta: Vec<usize>,
    pub log_coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Nominal,
    /// The planner chose to hold position (predicted risk too high).
    Frozen,
    /// No admissible basis; the robot holds position.
    Degraded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub best: JointBasis,
    /// Commanded robot position for the next step.
    pub action: Position,
    /// Selected robot mean over the horizon, starting at `t_now + 1`.
    pub robot_path: Vec<Position>,
    /// Highest coefficients, descending.
    pub top: Vec<JointBasis>,
    pub status: PlanStatus,
    pub elapsed_s: f64,
}

impl PlanResult {
    /// Hold-position result used when no basis is admissible.
    pub fn stop(position: Position, horizon: usize, status: PlanStatus) -> Self {
        Self {
            best: JointBasis { eta: Vec::new(), log_coeff: f64::NEG_INFINITY },
            action: position,
            robot_path: vec![position; horizon],
            top: Vec::new(),
            status,
            elapsed_s: 0.0,
        }
    }

    pub fn is_degraded(&self) -> bool {
        self.status == PlanStatus::Degraded
    }
}

/// A crowd navigation strategy that can be selected by name.
pub trait Planner: Send + Sync {
    fn name(&self) -> &'static str;

    fn plan(&self, scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError>;
}

/// SplitMix64 finalizer; derives independent stream seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
