//! Deterministic 2-D crowd simulator, episode loop and metrics.

mod dataset;
mod scenario;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::gp::{Position, TrajectoryObservations};
use crate::linalg;
use crate::planner::{mix_seed, JointBasis, PlanError, PlanStatus, Planner, PlanningScene};

pub use dataset::{format_dataset, load_dataset, parse_dataset, save_dataset, DatasetError};
pub use scenario::{AgentScript, ObservationSpec, ReactiveParams, RobotSpec, Scenario, Timing, SCHEMA_VERSION};

/// Agent id used for the robot in logs.
pub const ROBOT_ID: &str = "robot";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
    #[error("planner failed at step {step}: {source}")]
    Planner { step: i64, source: PlanError },
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: String,
    /// `None` while a replayed agent is outside its recording.
    pub position: Option<Position>,
    pub velocity: [f64; 2],
    target: usize,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub step: i64,
    pub robot: Position,
    pub robot_velocity: [f64; 2],
    pub agents: Vec<AgentState>,
    pub robot_observations: TrajectoryObservations,
    pub human_observations: Vec<TrajectoryObservations>,
    rng: ChaCha8Rng,
}

/// What happened to the commanded action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub executed: Position,
    pub clamped: bool,
}

fn unit(v: [f64; 2]) -> ([f64; 2], f64) {
    let n = v[0].hypot(v[1]);
    if n > 1e-12 { ([v[0] / n, v[1] / n], n) } else { ([0.0, 0.0], 0.0) }
}

fn replay_at(trace: &[(i64, Position)], step: i64) -> Option<Position> {
    let (first, last) = (trace.first()?.0, trace.last()?.0);
    if step < first || step > last {
        return None;
    }
    let i = trace.partition_point(|(s, _)| *s < step);
    let (s1, p1) = trace[i];
    if s1 == step {
        return Some(p1);
    }
    let (s0, p0) = trace[i - 1];
    let t = (step - s0) as f64 / (s1 - s0) as f64;
    Some([p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])])
}

fn initial_velocity(waypoints: &[Position], speed: f64) -> [f64; 2] {
    match waypoints {
        [a, b, ..] => {
            let (u, _) = unit([b[0] - a[0], b[1] - a[1]]);
            [u[0] * speed, u[1] * speed]
        }
        _ => [0.0, 0.0],
    }
}

/// Repulsive velocity a reactive pedestrian at `p` feels from the robot.
pub fn reactive_push(p: Position, robot: Position, robot_velocity: [f64; 2], params: &ReactiveParams) -> [f64; 2] {
    let ahead = [
        robot[0] + robot_velocity[0] * params.anticipation,
        robot[1] + robot_velocity[1] * params.anticipation,
    ];
    let (u, d) = unit([p[0] - ahead[0], p[1] - ahead[1]]);
    let mag = params.gain * (-(d - params.radius) / params.range).exp();
    [mag * u[0], mag * u[1]]
}

impl SimState {
    /// State at step 0 with `history` steps of backfilled, noiseless
    /// measurements (constant velocity for scripted agents, a standing robot).
    pub fn new(scenario: &Scenario, history: usize) -> Self {
        let h = history.max(1) as i64;
        let mut robot_obs = TrajectoryObservations::empty(ROBOT_ID);
        for s in (1 - h)..=0 {
            robot_obs.push(s, scenario.robot.start).expect("increasing steps");
        }
        let mut agents = Vec::with_capacity(scenario.agents.len());
        let mut human_obs = Vec::with_capacity(scenario.agents.len());
        for a in &scenario.agents {
            let mut obs = TrajectoryObservations::empty(a.id());
            let (position, velocity) = match a {
                AgentScript::Waypoint { waypoints, speed, .. } | AgentScript::Reactive { waypoints, speed, .. } => {
                    let p0 = waypoints[0];
                    let v0 = initial_velocity(waypoints, *speed);
                    for s in (1 - h)..=0 {
                        let k = s as f64 * scenario.dt;
                        obs.push(s, [p0[0] + v0[0] * k, p0[1] + v0[1] * k]).expect("increasing steps");
                    }
                    (Some(p0), v0)
                }
                AgentScript::Replay { trace, .. } => {
                    for s in (1 - h)..=0 {
                        if let Some(p) = replay_at(trace, s) {
                            obs.push(s, p).expect("increasing steps");
                        }
                    }
                    (replay_at(trace, 0), [0.0, 0.0])
                }
            };
            agents.push(AgentState { id: a.id().to_string(), position, velocity, target: 1 });
            human_obs.push(obs);
        }
        Self {
            step: 0,
            robot: scenario.robot.start,
            robot_velocity: [0.0, 0.0],
            agents,
            robot_observations: robot_obs,
            human_observations: human_obs,
            rng: ChaCha8Rng::seed_from_u64(mix_seed(scenario.seed, 0x0B5E_7A7E)),
        }
    }

    /// Pedestrians present at the current step.
    pub fn human_positions(&self) -> impl Iterator<Item = (&str, Position)> {
        self.agents.iter().filter_map(|a| a.position.map(|p| (a.id.as_str(), p)))
    }

    pub fn min_human_distance(&self) -> f64 {
        self.human_positions()
            .map(|(_, p)| linalg::dist2(p, self.robot).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Advances every agent one step and moves the robot to `action`
    /// (clamped to the speed limit and the workspace).
    pub fn step(&mut self, scenario: &Scenario, action: Position) -> StepOutcome {
        let dt = scenario.dt;
        let next = self.step + 1;
        for (a, script) in self.agents.iter_mut().zip(&scenario.agents) {
            let old = a.position;
            match script {
                AgentScript::Waypoint { waypoints, speed, .. } => {
                    let mut p = old.expect("scripted agents are always present");
                    let mut budget = speed * dt;
                    while budget > 0.0 && a.target < waypoints.len() {
                        let w = waypoints[a.target];
                        let (u, d) = unit([w[0] - p[0], w[1] - p[1]]);
                        if d <= budget {
                            p = w;
                            budget -= d;
                            a.target += 1;
                        } else {
                            p = [p[0] + u[0] * budget, p[1] + u[1] * budget];
                            budget = 0.0;
                        }
                    }
                    a.position = Some(p);
                }
                AgentScript::Reactive { waypoints, speed, .. } => {
                    let p = old.expect("scripted agents are always present");
                    while a.target < waypoints.len() {
                        let w = waypoints[a.target];
                        if linalg::dist2(w, p).sqrt() <= speed * dt {
                            a.target += 1;
                        } else {
                            break;
                        }
                    }
                    let desired = match waypoints.get(a.target) {
                        Some(w) => {
                            let (u, _) = unit([w[0] - p[0], w[1] - p[1]]);
                            [u[0] * speed, u[1] * speed]
                        }
                        None => [0.0, 0.0],
                    };
                    let push = reactive_push(p, self.robot, self.robot_velocity, &scenario.reactive);
                    let mut v = [desired[0] + push[0], desired[1] + push[1]];
                    let (u, n) = unit(v);
                    let cap = scenario.reactive.max_speed_factor * speed;
                    if n > cap {
                        v = [u[0] * cap, u[1] * cap];
                    }
                    a.position = Some([p[0] + v[0] * dt, p[1] + v[1] * dt]);
                }
                AgentScript::Replay { trace, .. } => a.position = replay_at(trace, next),
            }
            a.velocity = match (old, a.position) {
                (Some(o), Some(n)) => [(n[0] - o[0]) / dt, (n[1] - o[1]) / dt],
                _ => [0.0, 0.0],
            };
        }

        let limit = scenario.robot.max_speed * dt;
        let (u, d) = unit([action[0] - self.robot[0], action[1] - self.robot[1]]);
        let clamped_speed = d > limit * (1.0 + 1e-9);
        let mut target = if clamped_speed { [self.robot[0] + u[0] * limit, self.robot[1] + u[1] * limit] } else { action };
        let ws = &scenario.workspace;
        let inside = [target[0].clamp(ws.min[0], ws.max[0]), target[1].clamp(ws.min[1], ws.max[1])];
        let clamped = clamped_speed || inside != target;
        target = inside;
        self.robot_velocity = [(target[0] - self.robot[0]) / dt, (target[1] - self.robot[1]) / dt];
        self.robot = target;
        self.step = next;
        self.observe(scenario);
        StepOutcome { executed: target, clamped }
    }

    fn observe(&mut self, scenario: &Scenario) {
        self.robot_observations.push(self.step, self.robot).expect("steps increase");
        let spec = &scenario.observation;
        for (a, obs) in self.agents.iter().zip(self.human_observations.iter_mut()) {
            let Some(p) = a.position else { continue };
            let u: f64 = self.rng.random();
            if u < spec.dropout {
                continue;
            }
            let mut m = p;
            if spec.noise_std > 0.0 {
                let nx: f64 = self.rng.sample(StandardNormal);
                let ny: f64 = self.rng.sample(StandardNormal);
                m = [p[0] + spec.noise_std * nx, p[1] + spec.noise_std * ny];
            }
            obs.push(self.step, m).expect("steps increase");
        }
    }

    pub fn scene(&self, scenario: &Scenario) -> PlanningScene {
        PlanningScene {
            t_now: self.step,
            dt: scenario.dt,
            robot: self.robot_observations.clone(),
            robot_goal: scenario.robot.goal,
            robot_max_speed: scenario.robot.max_speed,
            humans: self.human_observations.clone(),
            collision_radius: scenario.collision_radius,
            workspace: scenario.workspace,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub step: i64,
    pub agent: String,
    pub position: Position,
}

/// Every agent position at every simulated step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryLog {
    pub rows: Vec<LogRow>,
}

impl TrajectoryLog {
    fn record(&mut self, state: &SimState) {
        self.rows.push(LogRow { step: state.step, agent: ROBOT_ID.into(), position: state.robot });
        for (id, p) in state.human_positions() {
            self.rows.push(LogRow { step: state.step, agent: id.into(), position: p });
        }
    }

    /// `step agent_id x y` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            writeln!(out, "{} {} {} {}", r.step, r.agent, r.position[0], r.position[1]).expect("string write");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || DatasetError::Malformed { line: i + 1, message: format!("bad log row '{line}'") };
            if f.is_empty() {
                continue;
            }
            if f.len() != 4 {
                return Err(bad());
            }
            rows.push(LogRow {
                step: f[0].parse().map_err(|_| bad())?,
                agent: f[1].to_string(),
                position: [f[2].parse().map_err(|_| bad())?, f[3].parse().map_err(|_| bad())?],
            });
        }
        Ok(Self { rows })
    }

    /// Minimum robot-pedestrian distance per step, in step order.
    pub fn robot_distances(&self) -> Vec<(i64, f64)> {
        let mut out: Vec<(i64, f64)> = Vec::new();
        let mut robot = None;
        for r in &self.rows {
            if out.last().is_none_or(|(s, _)| *s != r.step) {
                out.push((r.step, f64::INFINITY));
                robot = None;
            }
            if r.agent == ROBOT_ID {
                robot = Some(r.position);
            } else if let Some(rp) = robot {
                let d = linalg::dist2(rp, r.position).sqrt();
                let last = out.last_mut().expect("pushed above");
                last.1 = last.1.min(d);
            }
        }
        out
    }
}

/// Summary metrics of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub run_id: String,
    /// Closest robot-pedestrian distance (m); infinite with no pedestrians.
    pub safety_m: f64,
    pub speed_mps: f64,
    /// Mean planning time per cycle (s).
    pub runtime_s: f64,
    pub samples: usize,
    pub collisions: usize,
    pub reached_goal: bool,
}

impl Metrics {
    pub const CSV_HEADER: &'static str = "run_id,safety_m,speed_mps,runtime_s,samples,collisions,reached_goal";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.run_id, self.safety_m, self.speed_mps, self.runtime_s, self.samples, self.collisions, self.reached_goal
        )
    }

    pub fn parse_csv_row(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 7 {
            return None;
        }
        Some(Self {
            run_id: f[0].to_string(),
            safety_m: f[1].parse().ok()?,
            speed_mps: f[2].parse().ok()?,
            runtime_s: f[3].parse().ok()?,
            samples: f[4].parse().ok()?,
            collisions: f[5].parse().ok()?,
            reached_goal: f[6].parse().ok()?,
        })
    }
}

/// Per-cycle planner diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub step: i64,
    pub status: PlanStatus,
    pub top: Vec<JointBasis>,
    pub elapsed_s: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub metrics: Metrics,
    pub log: TrajectoryLog,
    pub cycles: Vec<CycleRecord>,
    /// Too many consecutive degraded cycles.
    pub failed: bool,
}

impl Episode {
    pub fn clamped_steps(&self) -> usize {
        self.cycles.iter().filter(|c| c.clamped).count()
    }
}

/// Receding-horizon loop: plan, execute the first step, repeat until the
/// goal is reached, the step budget runs out or the planner stays degraded.
pub fn run_episode(scenario: &Scenario, planner: &dyn Planner, run_id: &str) -> Result<Episode, SimError> {
    scenario.validate()?;
    let scenario = scenario.resolved();
    // the same seed every cycle: common random numbers keep consecutive plans consistent
    let cfg = scenario.planner.clone();
    let mut state = SimState::new(&scenario, cfg.history_window);
    let mut log = TrajectoryLog::default();
    log.record(&state);
    let mut cycles = Vec::new();
    let mut degraded_run = 0usize;
    let mut failed = false;
    let mut path_length = 0.0;
    let goal = scenario.robot.goal;
    let at_goal = |p: Position| linalg::dist2(p, goal).sqrt() <= scenario.goal_tolerance;
    while state.step < scenario.max_steps as i64 && !at_goal(state.robot) {
        let scene = state.scene(&scenario);
        let result = planner.plan(&scene, &cfg).map_err(|source| SimError::Planner { step: state.step, source })?;
        if result.is_degraded() {
            degraded_run += 1;
            if degraded_run > scenario.max_degraded_cycles {
                failed = true;
                break;
            }
        } else {
            degraded_run = 0;
        }
        let before = state.robot;
        let step = state.step;
        let out = state.step(&scenario, result.action);
        path_length += linalg::dist2(before, out.executed).sqrt();
        log.record(&state);
        let elapsed_s = match scenario.timing {
            Timing::Wall => result.elapsed_s,
            Timing::Off => 0.0,
        };
        cycles.push(CycleRecord { step, status: result.status, top: result.top, elapsed_s, clamped: out.clamped });
    }
    let distances = log.robot_distances();
    let safety_m = distances.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let collisions = distances.iter().filter(|d| d.1 < scenario.collision_radius).count();
    let n = cycles.len();
    let metrics = Metrics {
        run_id: run_id.to_string(),
        safety_m,
        speed_mps: if n == 0 { 0.0 } else { path_length / (n as f64 * scenario.dt) },
        runtime_s: if n == 0 { 0.0 } else { cycles.iter().map(|c| c.elapsed_s).sum::<f64>() / n as f64 },
        samples: cfg.samples_per_agent,
        collisions,
        reached_goal: at_goal(state.robot),
    };
    Ok(Episode { metrics, log, cycles, failed })
}
