use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gp::{GPComponent, GPMixture, Position};
use crate::planner::sigp::{prepare_seeds, sample_agent, BasisSet, CoefficientTable};
use crate::planner::{
    mix_seed, JointBasis, PlanError, PlanResult, PlanStatus, Planner, PlannerConfig, PlanningScene, Workspace,
};

/// Keeps the part of a convex polygon with `normal · p ≤ offset`.
pub fn clip_halfplane(poly: &[Position], normal: [f64; 2], offset: f64) -> Vec<Position> {
    let side = |p: &Position| normal[0] * p[0] + normal[1] * p[1] - offset;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (sa, sb) = (side(&a), side(&b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Lane {
    /// Convex region, counter-clockwise.
    pub polygon: Vec<Position>,
    /// Lateral interval in the robot→goal frame.
    pub lateral: (f64, f64),
    /// Usable width after keeping a collision radius from bounding pedestrians.
    pub clearance: f64,
    pub weight: f64,
}

/// Free space ahead of the robot split into slabs along the robot→goal
/// direction, one boundary per nearby pedestrian ahead.
#[derive(Debug, Clone)]
pub struct LanePartition {
    pub origin: Position,
    pub heading: [f64; 2],
    /// Relevant pedestrian positions sorted by lateral offset.
    pub pedestrians: Vec<Position>,
    pub lanes: Vec<Lane>,
}

impl LanePartition {
    pub fn build(
        robot: Position,
        goal: Position,
        pedestrians: &[Position],
        workspace: &Workspace,
        radius: f64,
        reach: f64,
    ) -> Self {
        let d = [goal[0] - robot[0], goal[1] - robot[1]];
        let len = d[0].hypot(d[1]);
        let heading = if len > 1e-12 { [d[0] / len, d[1] / len] } else { [1.0, 0.0] };
        let mut part = Self { origin: robot, heading, pedestrians: Vec::new(), lanes: Vec::new() };
        let mut peds: Vec<Position> = pedestrians
            .iter()
            .copied()
            .filter(|p| {
                let s = part.longitudinal(*p);
                s > 0.0 && (p[0] - robot[0]).hypot(p[1] - robot[1]) <= reach + radius
            })
            .collect();
        peds.sort_by(|a, b| part.lateral(*a).total_cmp(&part.lateral(*b)));
        let mut bounds: Vec<f64> = vec![f64::NEG_INFINITY];
        bounds.extend(peds.iter().map(|p| part.lateral(*p)));
        bounds.push(f64::INFINITY);
        let rect = vec![
            workspace.min,
            [workspace.max[0], workspace.min[1]],
            workspace.max,
            [workspace.min[0], workspace.max[1]],
        ];
        let n = part.normal();
        let n_origin = n[0] * robot[0] + n[1] * robot[1];
        let mut lanes = Vec::with_capacity(bounds.len() - 1);
        for w in bounds.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut poly = rect.clone();
            if hi.is_finite() {
                poly = clip_halfplane(&poly, n, hi + n_origin);
            }
            if lo.is_finite() && !poly.is_empty() {
                poly = clip_halfplane(&poly, [-n[0], -n[1]], -lo - n_origin);
            }
            let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in &poly {
                let l = part.lateral(*p);
                pmin = pmin.min(l);
                pmax = pmax.max(l);
            }
            let bounded = lo.is_finite() as u8 + hi.is_finite() as u8;
            let clearance =
                if poly.len() < 3 { 0.0 } else { (pmax - pmin - radius * bounded as f64).max(0.0) };
            lanes.push(Lane { polygon: poly, lateral: (lo, hi), clearance, weight: 0.0 });
        }
        let total: f64 = lanes.iter().map(|l| l.clearance).sum();
        if total > 0.0 {
            for l in &mut lanes {
                l.weight = l.clearance / total;
            }
        }
        part.pedestrians = peds;
        part.lanes = lanes;
        part
    }

    fn normal(&self) -> [f64; 2] {
        [-self.heading[1], self.heading[0]]
    }

    pub fn longitudinal(&self, p: Position) -> f64 {
        (p[0] - self.origin[0]) * self.heading[0] + (p[1] - self.origin[1]) * self.heading[1]
    }

    pub fn lateral(&self, p: Position) -> f64 {
        let n = self.normal();
        (p[0] - self.origin[0]) * n[0] + (p[1] - self.origin[1]) * n[1]
    }

    /// The lane a path passes through, or `None` if it weaves across
    /// pedestrians inconsistently.
    pub fn lane_of(&self, path: &[Position]) -> Option<usize> {
        let sig = homotopy_signature(path, self.origin, self.heading, &self.pedestrians);
        let left = sig.iter().take_while(|&&s| s > 0).count();
        sig[left..].iter().all(|&s| s < 0).then_some(left)
    }
}

/// For each pedestrian: `+1` if the path passes on its left (positive
/// lateral side in the given heading frame) where it draws level, else `-1`.
pub fn homotopy_signature(path: &[Position], origin: Position, heading: [f64; 2], pedestrians: &[Position]) -> Vec<i8> {
    let n = [-heading[1], heading[0]];
    let lon = |p: &Position| (p[0] - origin[0]) * heading[0] + (p[1] - origin[1]) * heading[1];
    let lat = |p: &Position| (p[0] - origin[0]) * n[0] + (p[1] - origin[1]) * n[1];
    pedestrians
        .iter()
        .map(|q| {
            let s = lon(q);
            let level = path
                .iter()
                .min_by(|a, b| (lon(a) - s).abs().total_cmp(&(lon(b) - s).abs()))
                .expect("non-empty path");
            if lat(level) >= lat(q) { 1 } else { -1 }
        })
        .collect()
}

/// Human component frozen at its `t_now` mean and variance over the horizon.
fn frozen(c: &GPComponent, t_now: i64, horizon: usize) -> Result<GPComponent, PlanError> {
    let m = c.mean_at(t_now)?;
    let v = c.variance_at(t_now)?;
    let cov = DMatrix::from_fn(horizon, horizon, |i, j| v + if i == j { 1e-9 } else { 0.0 });
    Ok(GPComponent::new(t_now + 1, vec![m; horizon], Arc::new(cov), 1.0, 0.0)?)
}

/// Interacting selection with every interaction evaluated at the current
/// time only, restricted to robot samples inside lanes drawn by clearance.
pub fn convex_lane_plan(scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let (grid, seeds) = prepare_seeds(scene, cfg)?;
    let here = scene.robot_position()?;
    let robot = sample_agent(&seeds[0], 0, cfg.samples_per_agent, cfg)?;
    let mut agents = vec![robot];
    let mut positions = Vec::new();
    for s in &seeds[1..] {
        let f = frozen(&s.base, grid.t_now, grid.horizon)?;
        positions.push(f.mean()[0]);
        agents.push(GPMixture::new(s.observations.agent_id(), vec![f])?);
    }
    let basis = BasisSet::new(grid, agents)?;
    let reach = scene.robot_max_speed * cfg.horizon as f64 * grid.dt;
    let part = LanePartition::build(here, scene.robot_goal, &positions, &scene.workspace, scene.collision_radius, reach);
    let finish = |mut r: PlanResult| {
        r.elapsed_s = started.elapsed().as_secs_f64();
        Ok(r)
    };
    if part.lanes.iter().all(|l| l.weight <= 0.0) {
        return finish(PlanResult::stop(here, cfg.horizon, PlanStatus::Degraded));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, 0xC0_4E));
    let mut drawn = vec![false; part.lanes.len()];
    for _ in 0..cfg.convex_lane.lane_draws.max(1) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = part.lanes.iter().rposition(|l| l.weight > 0.0).unwrap_or(0);
        for (i, l) in part.lanes.iter().enumerate() {
            acc += l.weight;
            if u < acc && l.weight > 0.0 {
                pick = i;
                break;
            }
        }
        drawn[pick] = true;
    }
    let table = CoefficientTable::build(&basis, cfg)?;
    let zeros = basis.n_humans();
    let mut scored: Vec<JointBasis> = Vec::new();
    for l in 0..basis.robot().components.len() {
        if !part.lane_of(basis.horizon_mean(0, l)).is_some_and(|k| drawn[k]) {
            continue;
        }
        let mut eta = vec![l];
        eta.extend(std::iter::repeat_n(0, zeros));
        let c = table.coefficient(&eta);
        scored.push(JointBasis { eta, log_coeff: c });
    }
    scored.sort_by(|a, b| b.log_coeff.total_cmp(&a.log_coeff).then(a.eta[0].cmp(&b.eta[0])));
    match scored.first() {
        Some(best) if best.log_coeff > f64::NEG_INFINITY => {
            let path = basis.horizon_mean(0, best.eta[0]).to_vec();
            let best = best.clone();
            scored.truncate(cfg.top_k.max(1));
            finish(PlanResult {
                action: path[0],
                robot_path: path,
                best,
                top: scored,
                status: PlanStatus::Nominal,
                elapsed_s: 0.0,
            })
        }
        _ => finish(PlanResult::stop(here, cfg.horizon, PlanStatus::Degraded)),
    }
}

pub struct ConvexLanePlanner;

impl Planner for ConvexLanePlanner {
    fn name(&self) -> &'static str {
        "convex_lane"
    }

    fn plan(&self, scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
        convex_lane_plan(scene, cfg)
    }
}
