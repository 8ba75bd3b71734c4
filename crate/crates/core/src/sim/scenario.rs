use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::gp::Position;
use crate::planner::{PlannerConfig, Workspace};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub start: Position,
    pub goal: Position,
    /// Meters per second; actions are clamped to `max_speed * dt` per step.
    pub max_speed: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSpec {
    /// Probability that a pedestrian measurement is missing at a step.
    #[serde(default)]
    pub dropout: f64,
    /// Standard deviation of additive position noise on pedestrians (m).
    #[serde(default)]
    pub noise_std: f64,
}

fn default_gain() -> f64 {
    1.5
}
fn default_range() -> f64 {
    0.5
}
fn default_reactive_radius() -> f64 {
    0.6
}
fn default_anticipation() -> f64 {
    0.5
}
fn default_speed_factor() -> f64 {
    1.5
}

/// Repulsion of reactive pedestrians from the robot. Not a calibrated human
/// model; just a yielding stand-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactiveParams {
    /// Peak repulsive velocity (m/s) at contact distance.
    #[serde(default = "default_gain")]
    pub gain: f64,
    /// Exponential decay length (m).
    #[serde(default = "default_range")]
    pub range: f64,
    /// Contact distance (m).
    #[serde(default = "default_reactive_radius")]
    pub radius: f64,
    /// Seconds of robot motion extrapolated when computing the repulsion.
    #[serde(default = "default_anticipation")]
    pub anticipation: f64,
    /// Speed cap as a multiple of the preferred speed.
    #[serde(default = "default_speed_factor")]
    pub max_speed_factor: f64,
}

impl Default for ReactiveParams {
    fn default() -> Self {
        Self {
            gain: default_gain(),
            range: default_range(),
            radius: default_reactive_radius(),
            anticipation: default_anticipation(),
            max_speed_factor: default_speed_factor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentScript {
    /// Walks the polyline at `speed`, then stands at the last waypoint.
    Waypoint { id: String, waypoints: Vec<Position>, speed: f64 },
    /// Recorded positions; the agent exists between its first and last step
    /// and is interpolated linearly across gaps.
    Replay { id: String, trace: Vec<(i64, Position)> },
    /// Heads for its waypoints at `speed` while being pushed away from the robot.
    Reactive { id: String, waypoints: Vec<Position>, speed: f64 },
}

impl AgentScript {
    pub fn id(&self) -> &str {
        match self {
            Self::Waypoint { id, .. } | Self::Replay { id, .. } | Self::Reactive { id, .. } => id,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invalid(format!("agent '{}': {m}", self.id())));
        match self {
            Self::Waypoint { waypoints, speed, .. } | Self::Reactive { waypoints, speed, .. } => {
                if waypoints.is_empty() {
                    return bad("needs at least one waypoint".into());
                }
                if !(*speed > 0.0 && speed.is_finite()) {
                    return bad(format!("preferred speed must be positive, got {speed}"));
                }
            }
            Self::Replay { trace, .. } => {
                if trace.is_empty() {
                    return bad("empty replay trace".into());
                }
                if trace.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return bad("replay trace steps must be strictly increasing".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    /// Record wall-clock planning time.
    #[default]
    Wall,
    /// Report zero planning time so metrics are byte-reproducible.
    Off,
}

fn default_goal_tolerance() -> f64 {
    0.3
}
fn default_max_degraded() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub dt: f64,
    pub max_steps: usize,
    pub collision_radius: f64,
    #[serde(default = "default_goal_tolerance")]
    pub goal_tolerance: f64,
    /// The episode fails after more consecutive degraded cycles than this.
    #[serde(default = "default_max_degraded")]
    pub max_degraded_cycles: usize,
    #[serde(default)]
    pub timing: Timing,
    pub workspace: Workspace,
    pub robot: RobotSpec,
    #[serde(default)]
    pub observation: ObservationSpec,
    #[serde(default)]
    pub reactive: ReactiveParams,
    #[serde(default)]
    pub agents: Vec<AgentScript>,
    #[serde(default)]
    pub planner: PlannerConfig,
    /// Registry name used when no planner is requested explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_planner: Option<String>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let s: Self = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, SimError> {
        toml::to_string(self).map_err(|e| SimError::Parse(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()?).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))
    }

    /// Copy with the planner step length tied to the simulator step and the
    /// planner seed tied to the scenario seed.
    pub fn resolved(&self) -> Self {
        let mut s = self.clone();
        s.planner.dt = s.dt;
        s.planner.seed = s.seed;
        s
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Invalid(m.to_string()));
        if self.schema_version != SCHEMA_VERSION {
            return Err(SimError::Invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.collision_radius > 0.0) {
            return bad("collision_radius must be positive");
        }
        if !(self.goal_tolerance >= 0.0) {
            return bad("goal_tolerance must be non-negative");
        }
        if !(self.robot.max_speed > 0.0) {
            return bad("robot max_speed must be positive");
        }
        let ws = &self.workspace;
        if !(ws.min[0] < ws.max[0] && ws.min[1] < ws.max[1]) {
            return bad("workspace min must be below max");
        }
        if !ws.contains(self.robot.start) {
            return bad("robot start lies outside the workspace");
        }
        if !(0.0..=1.0).contains(&self.observation.dropout) || !(self.observation.noise_std >= 0.0) {
            return bad("dropout must be in [0, 1] and noise_std non-negative");
        }
        let mut ids = std::collections::BTreeSet::new();
        for a in &self.agents {
            a.validate()?;
            if a.id() == super::ROBOT_ID || !ids.insert(a.id()) {
                return Err(SimError::Invalid(format!("duplicate or reserved agent id '{}'", a.id())));
            }
            let start = match a {
                AgentScript::Waypoint { waypoints, .. } | AgentScript::Reactive { waypoints, .. } => waypoints[0],
                AgentScript::Replay { trace, .. } => trace[0].1,
            };
            if !ws.contains(start) {
                return Err(SimError::Invalid(format!("agent '{}' starts outside the workspace", a.id())));
            }
        }
        self.planner.validate().map_err(|e| SimError::Invalid(e.to_string()))?;
        Ok(())
    }
}
