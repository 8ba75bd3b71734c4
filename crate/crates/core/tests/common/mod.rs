#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sigp_core::gp::{self, GPComponent, GPMixture, GoalHint, KernelSpec, MeanPrior, Position, TimeGrid, TrajectoryObservations};
use sigp_core::planner::sigp::BasisSet;
use sigp_core::planner::{PlanningScene, Workspace};
use sigp_core::sim::Scenario;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../bench/scenarios").join(format!("{name}.toml"))
}

pub fn load_scenario(name: &str) -> Scenario {
    Scenario::load(scenario_path(name)).expect("bundled scenario")
}

/// Random well-conditioned covariance of size `t`, entries of order `scale`.
pub fn random_spd(rng: &mut ChaCha8Rng, t: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(t, t, |_, _| rng.random_range(-1.0..1.0));
    let mut m = &a * a.transpose() / t as f64 * scale;
    for i in 0..t {
        m[(i, i)] += 0.1 * scale;
    }
    m
}

pub fn random_component(rng: &mut ChaCha8Rng, t: usize, first_step: i64, scale: f64) -> GPComponent {
    let mean = (0..t).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    GPComponent::new(first_step, mean, Arc::new(random_spd(rng, t, scale)), 1.0, 0.0).unwrap()
}

/// Robot plus `n_humans` agents with 1..=`max_bases` random components each,
/// all supported on the horizon `1..=t` of a grid at `t_now = 0`.
pub fn random_basis(rng: &mut ChaCha8Rng, n_humans: usize, max_bases: usize, t: usize) -> BasisSet {
    let grid = TimeGrid::new(0, t, 0.1).unwrap();
    let mut agents = Vec::new();
    for a in 0..=n_humans {
        let centre = if a == 0 { [0.0, 0.0] } else { [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)] };
        let n = rng.random_range(1..=max_bases);
        let cov = Arc::new(random_spd(rng, t, 0.2));
        let components = (0..n)
            .map(|_| {
                let mean = (0..t)
                    .map(|_| [centre[0] + rng.random_range(-0.8..0.8), centre[1] + rng.random_range(-0.8..0.8)])
                    .collect();
                GPComponent::new(1, mean, Arc::clone(&cov), rng.random_range(0.1..1.0), rng.random_range(-3.0..0.0))
                    .unwrap()
            })
            .collect();
        agents.push(gp::normalize_mixture(GPMixture::new(format!("a{a}"), components).unwrap()).unwrap());
    }
    BasisSet::new(grid, agents).unwrap()
}

/// Every index tuple in lexicographic order.
pub fn all_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out.into_iter().flat_map(|p| (0..n).map(move |k| [p.clone(), vec![k]].concat())).collect();
    }
    out
}

/// Robot standing at the origin, pedestrians standing still.
pub fn static_scene(peds: &[Position], goal: Position, history: usize) -> PlanningScene {
    let steps = (1 - history as i64)..=0;
    let standing = |id: String, p: Position| TrajectoryObservations::new(id, steps.clone().map(|s| (s, p)).collect()).unwrap();
    PlanningScene {
        t_now: 0,
        dt: 0.1,
        robot: standing("robot".into(), [0.0, 0.0]),
        robot_goal: goal,
        robot_max_speed: 1.0,
        humans: peds.iter().enumerate().map(|(i, p)| standing(format!("p{i}"), *p)).collect(),
        collision_radius: 0.35,
        workspace: Workspace { min: [-1.0, -4.0], max: [10.0, 4.0] },
    }
}

/// 1..=10 gappy samples of a random walk, the last one at step 0.
pub fn random_observations(rng: &mut ChaCha8Rng) -> TrajectoryObservations {
    let n = rng.random_range(1..=10);
    let mut steps = vec![0i64];
    while steps.len() < n {
        let s = steps[steps.len() - 1] - rng.random_range(1..=3);
        steps.push(s);
    }
    steps.reverse();
    let mut p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
    let samples = steps
        .into_iter()
        .map(|s| {
            p = [p[0] + rng.random_range(-0.2..0.2), p[1] + rng.random_range(-0.2..0.2)];
            (s, p)
        })
        .collect();
    TrajectoryObservations::new("agent", samples).unwrap()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    inv
}

/// Textbook GP posterior on `first observation ..= last horizon step`.
pub fn direct_posterior(
    obs: &TrajectoryObservations,
    kernel: &KernelSpec,
    grid: &TimeGrid,
    goal: Option<&GoalHint>,
    prior: &MeanPrior,
) -> (Vec<Position>, Vec<Vec<f64>>) {
    let k = |a: i64, b: i64| {
        let d = (a - b) as f64 * grid.dt / kernel.length_scale;
        kernel.signal_variance * (-0.5 * d * d).exp()
    };
    let mut x: Vec<(i64, Position, f64)> = obs.samples().iter().map(|&(s, p)| (s, p, kernel.noise_variance)).collect();
    if let Some(g) = goal {
        x.push((grid.last_step(), g.position, kernel.noise_variance * g.slack));
    }
    let support: Vec<i64> = (obs.samples()[0].0..=grid.last_step()).collect();
    let kxx: Vec<Vec<f64>> = x
        .iter()
        .enumerate()
        .map(|(i, a)| x.iter().enumerate().map(|(j, b)| k(a.0, b.0) + if i == j { a.2 } else { 0.0 }).collect())
        .collect();
    let kinv = invert(kxx);
    let n = x.len();
    let mut mean = Vec::new();
    for &s in &support {
        let mut m = prior.at(s, grid.dt);
        for c in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    m[c] += k(s, x[i].0) * kinv[i][j] * (x[j].1[c] - prior.at(x[j].0, grid.dt)[c]);
                }
            }
        }
        mean.push(m);
    }
    let cov = support
        .iter()
        .map(|&a| {
            support
                .iter()
                .map(|&b| {
                    let mut v = k(a, b);
                    for i in 0..n {
                        for j in 0..n {
                            v -= k(a, x[i].0) * kinv[i][j] * k(x[j].0, b);
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    (mean, cov)
}
