use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gp::{GPComponent, Position, TimeGrid};
use crate::linalg;
use crate::planner::sigp::prepare_seeds;
use crate::planner::{mix_seed, JointBasis, PlanError, PlanResult, PlanStatus, Planner, PlannerConfig, PlanningScene};
use crate::sampling::TrajectorySampler;

/// Anything that can produce whole horizon trajectories with their log-probability.
pub trait TrajectorySource {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<Position>, f64);
}

/// Horizon marginal of a GP component.
pub struct GaussianSource {
    mean: Vec<Position>,
    sampler: TrajectorySampler,
}

impl GaussianSource {
    pub fn from_component(c: &GPComponent, grid: &TimeGrid) -> Result<Self, PlanError> {
        let h = c.restrict(grid.t_now + 1, grid.last_step())?;
        Ok(Self { sampler: TrajectorySampler::for_component(&h)?, mean: h.mean().to_vec() })
    }
}

impl TrajectorySource for GaussianSource {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<Position>, f64) {
        let (path, sq) = self.sampler.draw(rng, &self.mean);
        (path, self.sampler.log_density_from_sq(sq))
    }
}

/// Independent categorical choice among a few points at every step.
#[derive(Debug, Clone)]
pub struct GridSource {
    /// Per step: candidate points with log-probabilities summing to one.
    pub steps: Vec<Vec<(Position, f64)>>,
}

impl GridSource {
    /// Every path the source can produce.
    pub fn enumerate(&self) -> Vec<(Vec<Position>, f64)> {
        let mut out = vec![(Vec::new(), 0.0)];
        for choices in &self.steps {
            let mut next = Vec::with_capacity(out.len() * choices.len());
            for (path, lp) in &out {
                for (p, l) in choices {
                    let mut q: Vec<Position> = path.clone();
                    q.push(*p);
                    next.push((q, lp + l));
                }
            }
            out = next;
        }
        out
    }
}

impl TrajectorySource for GridSource {
    fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<Position>, f64) {
        let mut path = Vec::with_capacity(self.steps.len());
        let mut lp = 0.0;
        for choices in &self.steps {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = choices.len() - 1;
            for (i, (_, l)) in choices.iter().enumerate() {
                acc += l.exp();
                if u < acc {
                    pick = i;
                    break;
                }
            }
            path.push(choices[pick].0);
            lp += choices[pick].1;
        }
        (path, lp)
    }
}

/// Draws and the chosen tuple.
#[derive(Debug, Clone)]
pub struct SbmpSelection {
    pub best: JointBasis,
    pub robot_path: Vec<Position>,
}

fn collides(a: &[Position], b: &[Position], radius: f64) -> bool {
    let r2 = radius * radius;
    a.iter().zip(b).any(|(p, q)| linalg::dist2(*p, *q) < r2)
}

/// Best tuple over drawn trajectories (robot first): collision indicator at
/// `radius` plus summed log-probabilities. `None` when every tuple collides.
pub fn sbmp_select(draws: &[Vec<(Vec<Position>, f64)>], radius: f64) -> Option<SbmpSelection> {
    let (robot, humans) = draws.split_first()?;
    let mut best: Option<JointBasis> = None;
    for (l, (rpath, rlp)) in robot.iter().enumerate() {
        let mut total = *rlp;
        let mut eta = vec![l];
        for h in humans {
            let mut pick: Option<(usize, f64)> = None;
            for (k, (hpath, hlp)) in h.iter().enumerate() {
                if !collides(rpath, hpath, radius) && pick.is_none_or(|(_, v)| *hlp > v) {
                    pick = Some((k, *hlp));
                }
            }
            match pick {
                Some((k, v)) => {
                    total += v;
                    eta.push(k);
                }
                None => {
                    total = f64::NEG_INFINITY;
                    break;
                }
            }
        }
        if total > f64::NEG_INFINITY && best.as_ref().is_none_or(|b| total > b.log_coeff) {
            best = Some(JointBasis { eta, log_coeff: total });
        }
    }
    best.map(|b| SbmpSelection { robot_path: robot[b.eta[0]].0.clone(), best: b })
}

/// `n` draws from each source, each agent on its own stream of `seed`.
pub fn draw_all<S: TrajectorySource>(sources: &[S], n: usize, seed: u64) -> Vec<Vec<(Vec<Position>, f64)>> {
    sources
        .iter()
        .enumerate()
        .map(|(a, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ 0x5B3D_0000, a as u64));
            (0..n).map(|_| s.draw(&mut rng)).collect()
        })
        .collect()
}

/// Sampling-based planning over whole trajectories drawn from every agent's MAP GP.
pub fn sbmp_plan(scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let (grid, seeds) = prepare_seeds(scene, cfg)?;
    let sources = seeds
        .iter()
        .map(|s| GaussianSource::from_component(&s.base, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let n = cfg.sbmp.samples.unwrap_or(cfg.samples_per_agent).max(1);
    let draws = draw_all(&sources, n, cfg.seed);
    let mut result = match sbmp_select(&draws, scene.collision_radius) {
        Some(sel) => PlanResult {
            action: sel.robot_path[0],
            robot_path: sel.robot_path,
            top: vec![sel.best.clone()],
            best: sel.best,
            status: PlanStatus::Nominal,
            elapsed_s: 0.0,
        },
        None => PlanResult::stop(scene.robot_position()?, cfg.horizon, PlanStatus::Degraded),
    };
    result.elapsed_s = started.elapsed().as_secs_f64();
    Ok(result)
}

pub struct SbmpPlanner;

impl Planner for SbmpPlanner {
    fn name(&self) -> &'static str {
        "sbmp"
    }

    fn plan(&self, scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
        sbmp_plan(scene, cfg)
    }
}
