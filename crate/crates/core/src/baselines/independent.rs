use std::time::Instant;

use crate::gp::{GPComponent, GPMixture, Position, TimeGrid};
use crate::planner::sigp::{prepare_seeds, sample_agent};
use crate::planner::{JointBasis, PlanError, PlanResult, PlanStatus, Planner, PlannerConfig, PlanningScene};

/// `P(|X − center| < radius)` for `X ~ N(mean, var·I₂)`.
///
/// The squared distance over `var` is noncentral χ² with two degrees of
/// freedom; the CDF is evaluated as a Poisson mixture of Gamma CDFs.
pub fn collision_probability_disk(mean: Position, var: f64, center: Position, radius: f64) -> f64 {
    let d = (mean[0] - center[0]).hypot(mean[1] - center[1]);
    if var <= 0.0 {
        return if d < radius { 1.0 } else { 0.0 };
    }
    let sigma = var.sqrt();
    if (d - radius) / sigma > 8.0 {
        return 0.0;
    }
    let mu = d * d / (2.0 * var);
    let y = radius * radius / (2.0 * var);
    let ln_y = y.ln();
    let ln_mu = if mu > 0.0 { mu.ln() } else { f64::NEG_INFINITY };
    let j_max = (mu + 12.0 * mu.sqrt() + 40.0) as usize;
    let mut ln_fact = 0.0;
    // running e^{-y} Σ_{m≤j} y^m/m!
    let mut gamma_lower_sum = 0.0;
    let mut total = 0.0;
    for j in 0..=j_max {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        gamma_lower_sum += (-y + j as f64 * ln_y - ln_fact).exp();
        let cdf = (1.0 - gamma_lower_sum).max(0.0);
        if cdf < 1e-300 {
            break;
        }
        let pois = if j == 0 { (-mu).exp() } else { (-mu + j as f64 * ln_mu - ln_fact).exp() };
        total += pois * cdf;
    }
    total.clamp(0.0, 1.0)
}

/// `(score, ln C_f)` per robot basis against frozen human predictions.
/// Human components are read only; their weights never change.
pub fn independent_scores(
    robot: &GPMixture,
    humans: &[GPComponent],
    grid: &TimeGrid,
    collision_radius: f64,
    damping: f64,
) -> Result<Vec<(f64, f64)>, PlanError> {
    let steps: Vec<i64> = grid.horizon_steps().collect();
    let mut predictions = Vec::with_capacity(humans.len());
    for h in humans {
        let mut row = Vec::with_capacity(steps.len());
        for &s in &steps {
            row.push((h.mean_at(s)?, h.variance_at(s)?));
        }
        predictions.push(row);
    }
    let mut out = Vec::with_capacity(robot.components.len());
    for c in &robot.components {
        let mut log_cf = 0.0;
        for (k, &s) in steps.iter().enumerate() {
            let r = c.mean_at(s)?;
            for row in &predictions {
                let (m, v) = row[k];
                log_cf += (1.0 - collision_probability_disk(m, v, r, collision_radius)).ln();
            }
        }
        let score = if damping == 0.0 { c.log_weight } else { c.log_weight + damping * log_cf };
        out.push((score, log_cf));
    }
    Ok(out)
}

/// Predict-then-act: humans follow their MAP prediction regardless of the
/// robot, the robot picks the sample with the best decoupled cost and holds
/// position when even that one is predicted to collide.
pub fn independent_plan(scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let (grid, seeds) = prepare_seeds(scene, cfg)?;
    let robot = sample_agent(&seeds[0], 0, cfg.samples_per_agent, cfg)?;
    let humans: Vec<GPComponent> = seeds[1..].iter().map(|s| s.base.clone()).collect();
    let scores = independent_scores(&robot, &humans, &grid, scene.collision_radius, cfg.independent.damping)?;
    let mut best = 0;
    for (l, s) in scores.iter().enumerate() {
        if s.0 > scores[best].0 {
            best = l;
        }
    }
    let here = scene.robot_position()?;
    let (score, log_cf) = scores[best];
    let mut result = if score == f64::NEG_INFINITY {
        PlanResult::stop(here, cfg.horizon, PlanStatus::Degraded)
    } else if 1.0 - log_cf.exp() > cfg.independent.freeze_threshold {
        PlanResult::stop(here, cfg.horizon, PlanStatus::Frozen)
    } else {
        let c = &robot.components[best];
        let path: Vec<Position> = grid.horizon_steps().map(|s| c.mean_at(s)).collect::<Result<_, _>>()?;
        let mut eta = vec![best];
        eta.extend(std::iter::repeat_n(0, humans.len()));
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].0.total_cmp(&scores[a].0).then(a.cmp(&b)));
        let top = order
            .iter()
            .take(cfg.top_k.max(1))
            .map(|&l| {
                let mut e = vec![l];
                e.extend(std::iter::repeat_n(0, humans.len()));
                JointBasis { eta: e, log_coeff: scores[l].0 }
            })
            .collect();
        PlanResult {
            best: JointBasis { eta, log_coeff: score },
            action: path[0],
            robot_path: path,
            top,
            status: PlanStatus::Nominal,
            elapsed_s: 0.0,
        }
    };
    result.elapsed_s = started.elapsed().as_secs_f64();
    Ok(result)
}

pub struct IndependentPlanner;

impl Planner for IndependentPlanner {
    fn name(&self) -> &'static str {
        "independent"
    }

    fn plan(&self, scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
        independent_plan(scene, cfg)
    }
}
