//! Sparse interacting GP planner.
//!
//! Every agent (robot first) gets a set of sampled GP components. A joint
//! basis `η = (ℓ, k₁, …, k_n)` is scored by
//! `ln w^R_ℓ + Σᵢ (ln Λ^{R,i}_{ℓ,kᵢ} + ln w^i_{kᵢ})`, optionally plus the
//! pedestrian-pedestrian terms `Σ_{i<j} ln Λ^{i,j}_{kᵢ,kⱼ}`. With
//! `lambda_ratio` set, every `Λ` is replaced by `Λ/w`. The robot then
//! executes the first step of the selected robot mean.

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{mix_seed, JointBasis, PlanError, PlanResult, PlanStatus, Planner, PlannerConfig, PlanningScene};
use crate::gp::{
    self, GPComponent, GPMixture, GoalHint, KernelSpec, ObservationBlock, Position, TimeGrid,
    TrajectoryObservations,
};
use crate::interaction::{self, OverlapMode};
use crate::linalg;
use crate::sampling::TrajectorySampler;

/// The conditioned MAP component of one agent and the data it came from.
#[derive(Debug, Clone)]
pub struct AgentSeed {
    pub base: GPComponent,
    pub observations: TrajectoryObservations,
    pub kernel: KernelSpec,
}

/// Sampled components for the robot (agent 0) and each human.
#[derive(Debug, Clone)]
pub struct BasisSet {
    grid: TimeGrid,
    agents: Vec<GPMixture>,
}

impl BasisSet {
    pub fn new(grid: TimeGrid, agents: Vec<GPMixture>) -> Result<Self, PlanError> {
        if agents.is_empty() {
            return Err(PlanError::InvalidBasis("no robot basis".into()));
        }
        for (a, mix) in agents.iter().enumerate() {
            if mix.components.is_empty() {
                return Err(PlanError::InvalidBasis(format!("agent {a} has no components")));
            }
            for c in &mix.components {
                c.index_of(grid.t_now + 1)?;
                c.index_of(grid.last_step())?;
            }
        }
        Ok(Self { grid, agents })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn agents(&self) -> &[GPMixture] {
        &self.agents
    }

    pub fn robot(&self) -> &GPMixture {
        &self.agents[0]
    }

    pub fn humans(&self) -> &[GPMixture] {
        &self.agents[1..]
    }

    pub fn n_humans(&self) -> usize {
        self.agents.len() - 1
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.agents.iter().map(|m| m.components.len()).collect()
    }

    pub fn component(&self, agent: usize, index: usize) -> &GPComponent {
        &self.agents[agent].components[index]
    }

    /// Mean of a component over the horizon steps.
    pub fn horizon_mean(&self, agent: usize, index: usize) -> &[Position] {
        let c = self.component(agent, index);
        let a = (self.grid.t_now + 1 - c.first_step()) as usize;
        &c.mean()[a..a + self.grid.horizon]
    }

    fn horizon_variance(&self, agent: usize, index: usize) -> Vec<f64> {
        let c = self.component(agent, index);
        let a = (self.grid.t_now + 1 - c.first_step()) as usize;
        let cov = c.base_cov();
        (a..a + self.grid.horizon).map(|i| c.cov_scale() * cov[(i, i)]).collect()
    }
}

/// Draws `count` components for one agent: the MAP intent with the smallest
/// flexibility as sample 0, then `α ~ U[alpha_range]`, `μ ~ N(μ₀, αΣ₀)` and
/// `Σ = αΣ₀`, so less flexible components stay closer to the MAP intent.
///
/// The log-weight is the data likelihood plus the intent's log-density under
/// the MAP posterior, `−½‖L₀⁻¹(μ − μ₀)‖²`, so the MAP intent is always the
/// most preferred one; weights are normalized per agent.
pub fn sample_agent(
    seed: &AgentSeed,
    agent_index: usize,
    count: usize,
    cfg: &PlannerConfig,
) -> Result<GPMixture, PlanError> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, agent_index as u64));
    let block = ObservationBlock::new(&seed.base, &seed.observations, &seed.kernel)?;
    let sampler = TrajectorySampler::for_component(&seed.base)?;
    let [lo, hi] = cfg.alpha_range;
    let mut components = Vec::with_capacity(count);
    // the MAP intent at its tightest flexibility
    let mut base = seed.base.resampled(seed.base.mean().to_vec(), lo)?;
    base.log_weight = block.log_likelihood(base.mean(), base.cov_scale())?;
    components.push(base);
    for _ in 1..count {
        let (draw, sq) = sampler.draw(&mut rng, seed.base.mean());
        let alpha = lo + (hi - lo) * rng.random::<f64>();
        let r = alpha.sqrt();
        let mean: Vec<Position> = draw
            .iter()
            .zip(seed.base.mean())
            .map(|(d, m)| [m[0] + r * (d[0] - m[0]), m[1] + r * (d[1] - m[1])])
            .collect();
        let mut c = seed.base.resampled(mean, alpha)?;
        c.log_weight = block.log_likelihood(c.mean(), c.cov_scale())? - 0.5 * alpha * sq;
        components.push(c);
    }
    Ok(gp::normalize_mixture(GPMixture::new(seed.observations.agent_id(), components)?)?)
}

pub fn sample_bases(seeds: &[AgentSeed], grid: &TimeGrid, cfg: &PlannerConfig) -> Result<BasisSet, PlanError> {
    let agents = seeds
        .iter()
        .enumerate()
        .map(|(i, s)| sample_agent(s, i, cfg.samples_per_agent, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    BasisSet::new(*grid, agents)
}

/// Pairwise log-Λ tables plus per-component log-weights.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    sizes: Vec<usize>,
    log_w: Vec<Vec<f64>>,
    /// `[i][ℓ * Nᵢ + k]` for human `i` (0-based among humans).
    robot_human: Vec<Vec<f64>>,
    /// `[pair(i, j)][kᵢ * Nⱼ + kⱼ]`, empty unless pedestrian terms are on.
    ped_ped: Vec<Vec<f64>>,
    include_ped_ped: bool,
}

struct HorizonData {
    means: Vec<Position>,
    vars: Vec<f64>,
    n: usize,
}

impl HorizonData {
    fn new(basis: &BasisSet, agent: usize, body: f64) -> Self {
        let n = basis.agents[agent].components.len();
        let t = basis.grid.horizon;
        let mut means = Vec::with_capacity(n * t);
        let mut vars = Vec::with_capacity(n * t);
        for k in 0..n {
            means.extend_from_slice(basis.horizon_mean(agent, k));
            vars.extend(basis.horizon_variance(agent, k).into_iter().map(|v| v + body));
        }
        Self { means, vars, n }
    }
}

fn pair_table(
    basis: &BasisSet,
    a: usize,
    b: usize,
    data: &[HorizonData],
    cfg: &PlannerConfig,
) -> Result<Vec<f64>, PlanError> {
    let t = basis.grid.horizon;
    let (da, db) = (&data[a], &data[b]);
    let mut out = Vec::with_capacity(da.n * db.n);
    for l in 0..da.n {
        for k in 0..db.n {
            let (ma, va) = (&da.means[l * t..(l + 1) * t], &da.vars[l * t..(l + 1) * t]);
            let (mb, vb) = (&db.means[k * t..(k + 1) * t], &db.vars[k * t..(k + 1) * t]);
            let v = match (cfg.overlap_mode, cfg.lambda_ratio) {
                (OverlapMode::PerStep, true) => interaction::per_step_log_lambda_ratio(ma, va, mb, vb),
                (OverlapMode::PerStep, false) => interaction::per_step_log_lambda(ma, va, 1.0, mb, vb, 1.0),
                (OverlapMode::Stacked, _) => pair_log_lambda(basis.component(a, l), basis.component(b, k), &basis.grid, cfg)?,
            };
            out.push(v);
        }
    }
    Ok(out)
}

/// Horizon restriction with half the body variance added to the diagonal.
fn with_body(c: &GPComponent, grid: &TimeGrid, body_variance: f64) -> Result<GPComponent, PlanError> {
    let h = c.restrict(grid.t_now + 1, grid.last_step())?;
    if body_variance == 0.0 {
        return Ok(h);
    }
    let mut cov = h.covariance();
    for i in 0..cov.nrows() {
        cov[(i, i)] += 0.5 * body_variance;
    }
    Ok(GPComponent::new(h.first_step(), h.mean().to_vec(), Arc::new(cov), 1.0, h.log_weight)?)
}

/// `ln Λ` (or `ln(Λ/w)`) of one pair through the reference route.
fn pair_log_lambda(a: &GPComponent, b: &GPComponent, grid: &TimeGrid, cfg: &PlannerConfig) -> Result<f64, PlanError> {
    let (a, b) = (with_body(a, grid, cfg.body_variance)?, with_body(b, grid, cfg.body_variance)?);
    let o = interaction::horizon_overlap(&a, &b, grid, cfg.overlap_mode)?;
    Ok(if cfg.lambda_ratio { o.log_lambda - o.log_w } else { o.log_lambda })
}

fn pair_index(i: usize, j: usize, n: usize) -> usize {
    // i < j, both in 0..n
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl CoefficientTable {
    pub fn build(basis: &BasisSet, cfg: &PlannerConfig) -> Result<Self, PlanError> {
        let sizes = basis.sizes();
        let n_h = basis.n_humans();
        let body = 0.5 * cfg.body_variance;
        let data: Vec<HorizonData> = (0..basis.agents.len()).map(|a| HorizonData::new(basis, a, body)).collect();
        let robot_human = (1..=n_h)
            .map(|i| pair_table(basis, 0, i, &data, cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ped_ped = Vec::new();
        if cfg.include_ped_ped_terms {
            for i in 0..n_h {
                for j in (i + 1)..n_h {
                    ped_ped.push(pair_table(basis, i + 1, j + 1, &data, cfg)?);
                }
            }
        }
        Ok(Self {
            sizes,
            log_w: basis.agents.iter().map(|m| m.log_weights()).collect(),
            robot_human,
            ped_ped,
            include_ped_ped: cfg.include_ped_ped_terms,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_humans(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn log_weight(&self, agent: usize, index: usize) -> f64 {
        self.log_w[agent][index]
    }

    /// `ln Λ^{R,i}` for human `i` (0-based among humans).
    pub fn robot_human(&self, human: usize, l: usize, k: usize) -> f64 {
        self.robot_human[human][l * self.sizes[human + 1] + k]
    }

    pub fn ped_ped(&self, i: usize, j: usize, ki: usize, kj: usize) -> Option<f64> {
        if !self.include_ped_ped {
            return None;
        }
        let n = self.n_humans();
        Some(self.ped_ped[pair_index(i, j, n)][ki * self.sizes[j + 1] + kj])
    }

    pub fn coefficient(&self, eta: &[usize]) -> f64 {
        let n = self.n_humans();
        let mut total = self.log_w[0][eta[0]];
        for i in 0..n {
            total += self.robot_human(i, eta[0], eta[i + 1]) + self.log_w[i + 1][eta[i + 1]];
        }
        if self.include_ped_ped {
            for i in 0..n {
                for j in (i + 1)..n {
                    total += self.ped_ped(i, j, eta[i + 1], eta[j + 1]).unwrap_or(0.0);
                }
            }
        }
        total
    }

    /// For robot basis `ℓ`, each human's best component and the resulting
    /// total (valid when pedestrian terms are off).
    fn factorized_row(&self, l: usize) -> (f64, Vec<usize>) {
        let mut total = self.log_w[0][l];
        let mut ks = Vec::with_capacity(self.n_humans());
        for i in 0..self.n_humans() {
            let ni = self.sizes[i + 1];
            let row = &self.robot_human[i][l * ni..(l + 1) * ni];
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (k, lam) in row.iter().enumerate() {
                let v = lam + self.log_w[i + 1][k];
                if v > best.0 {
                    best = (v, k);
                }
            }
            total += best.0;
            ks.push(best.1);
        }
        (total, ks)
    }

    /// Log of the summed coefficient mass of all joint bases containing robot
    /// basis `ℓ`, for every `ℓ`.
    pub fn robot_log_masses(&self) -> Result<Vec<f64>, PlanError> {
        if !self.include_ped_ped {
            return Ok((0..self.sizes[0])
                .map(|l| {
                    let mut total = self.log_w[0][l];
                    for i in 0..self.n_humans() {
                        let ni = self.sizes[i + 1];
                        let terms: Vec<f64> = (0..ni)
                            .map(|k| self.robot_human[i][l * ni + k] + self.log_w[i + 1][k])
                            .collect();
                        total += linalg::log_sum_exp(&terms);
                    }
                    total
                })
                .collect());
        }
        // FIXME: linear-domain accumulation per robot basis; fine at enumeration sizes.
        let mut per_l = vec![Vec::new(); self.sizes[0]];
        self.enumerate(u64::MAX, |eta, c| per_l[eta[0]].push(c))?;
        Ok(per_l.iter().map(|v| linalg::log_sum_exp(v)).collect())
    }

    fn enumeration_size(&self) -> u128 {
        self.sizes.iter().map(|&s| s as u128).product()
    }

    /// Visits every joint basis in lexicographic order of `η`.
    fn enumerate(&self, limit: u64, mut visit: impl FnMut(&[usize], f64)) -> Result<(), PlanError> {
        let needed = self.enumeration_size();
        if needed > limit as u128 {
            return Err(PlanError::EnumerationTooLarge { needed, limit });
        }
        let mut eta = vec![0usize; self.sizes.len()];
        loop {
            visit(&eta, self.coefficient(&eta));
            let mut d = eta.len();
            loop {
                if d == 0 {
                    return Ok(());
                }
                d -= 1;
                eta[d] += 1;
                if eta[d] < self.sizes[d] {
                    break;
                }
                eta[d] = 0;
            }
        }
    }
}

/// Recomputes `ln [Λw]_η` directly from the components.
pub fn joint_coefficient(basis: &BasisSet, eta: &[usize], cfg: &PlannerConfig) -> Result<f64, PlanError> {
    let sizes = basis.sizes();
    if eta.len() != sizes.len() || eta.iter().zip(&sizes).any(|(e, s)| e >= s) {
        return Err(PlanError::InvalidBasis(format!("index tuple {eta:?} out of range for sizes {sizes:?}")));
    }
    let grid = basis.grid();
    let robot = basis.component(0, eta[0]);
    let mut total = robot.log_weight;
    for i in 1..sizes.len() {
        let h = basis.component(i, eta[i]);
        total += pair_log_lambda(robot, h, grid, cfg)? + h.log_weight;
    }
    if cfg.include_ped_ped_terms {
        for i in 1..sizes.len() {
            for j in (i + 1)..sizes.len() {
                let (a, b) = (basis.component(i, eta[i]), basis.component(j, eta[j]));
                total += pair_log_lambda(a, b, grid, cfg)?;
            }
        }
    }
    Ok(total)
}

fn result_for(basis: &BasisSet, best: JointBasis, top: Vec<JointBasis>) -> PlanResult {
    let path = basis.horizon_mean(0, best.eta[0]).to_vec();
    PlanResult { action: path[0], robot_path: path, best, top, status: PlanStatus::Nominal, elapsed_s: 0.0 }
}

/// Maximum-coefficient joint basis, with ties going to the smallest `η`.
pub fn select_optimal(basis: &BasisSet, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let table = CoefficientTable::build(basis, cfg)?;
    select_with_table(basis, &table, cfg)
}

pub fn select_with_table(
    basis: &BasisSet,
    table: &CoefficientTable,
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    let top_k = cfg.top_k.max(1);
    let mut top: Vec<JointBasis> = Vec::new();
    let push_top = |top: &mut Vec<JointBasis>, eta: &[usize], c: f64| {
        if top.len() < top_k || c > top[top.len() - 1].log_coeff {
            let pos = top.partition_point(|b| b.log_coeff >= c);
            top.insert(pos, JointBasis { eta: eta.to_vec(), log_coeff: c });
            top.truncate(top_k);
        }
    };
    if table.include_ped_ped {
        table.enumerate(cfg.max_enumeration, |eta, c| push_top(&mut top, eta, c))?;
    } else {
        for l in 0..table.sizes[0] {
            let (c, ks) = table.factorized_row(l);
            let mut eta = Vec::with_capacity(ks.len() + 1);
            eta.push(l);
            eta.extend(ks);
            push_top(&mut top, &eta, c);
        }
    }
    let best = top[0].clone();
    if best.log_coeff == f64::NEG_INFINITY {
        return Err(PlanError::AllColliding);
    }
    Ok(result_for(basis, best, top))
}

/// Result of [`prune`].
#[derive(Debug, Clone)]
pub struct PrunedBasis {
    pub basis: BasisSet,
    /// Original component indices kept, per agent.
    pub kept: Vec<Vec<usize>>,
}

impl PrunedBasis {
    pub fn retained_counts(&self) -> Vec<usize> {
        self.kept.iter().map(Vec::len).collect()
    }
}

/// Drops components whose best joint basis falls below `max − threshold`.
pub fn prune(basis: &BasisSet, table: &CoefficientTable, threshold: f64) -> Result<PrunedBasis, PlanError> {
    let sizes = table.sizes().to_vec();
    let mut best: Vec<Vec<f64>> = sizes.iter().map(|&n| vec![f64::NEG_INFINITY; n]).collect();
    if table.include_ped_ped {
        table.enumerate(u64::MAX, |eta, c| {
            for (a, &e) in eta.iter().enumerate() {
                if c > best[a][e] {
                    best[a][e] = c;
                }
            }
        })?;
    } else {
        for l in 0..sizes[0] {
            let (total, ks) = table.factorized_row(l);
            best[0][l] = total;
            for i in 0..table.n_humans() {
                let rest = total - (table.robot_human(i, l, ks[i]) + table.log_weight(i + 1, ks[i]));
                for k in 0..sizes[i + 1] {
                    let c = rest + table.robot_human(i, l, k) + table.log_weight(i + 1, k);
                    if c > best[i + 1][k] {
                        best[i + 1][k] = c;
                    }
                }
            }
        }
    }
    let global = best[0].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let keep = |c: f64| global == f64::NEG_INFINITY || threshold.is_infinite() || c >= global - threshold;
    let kept: Vec<Vec<usize>> = best
        .iter()
        .map(|row| row.iter().enumerate().filter(|(_, c)| keep(**c)).map(|(i, _)| i).collect())
        .collect();
    let agents = basis
        .agents()
        .iter()
        .zip(&kept)
        .map(|(mix, idx)| GPMixture::new(mix.agent_id.clone(), idx.iter().map(|&i| mix.components[i].clone()).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PrunedBasis { basis: BasisSet::new(*basis.grid(), agents)?, kept })
}

/// Robot bases grouped by spatial proximity of their horizon means.
#[derive(Debug, Clone)]
pub struct ModeCluster {
    pub members: Vec<usize>,
    pub log_mass: f64,
}

/// Greedy leader clustering in descending mass order: a robot basis joins the
/// first cluster whose leader path stays within `radius` at every step.
pub fn cluster_robot_modes(basis: &BasisSet, log_masses: &[f64], radius: f64) -> Vec<ModeCluster> {
    let mut order: Vec<usize> = (0..log_masses.len()).collect();
    order.sort_by(|&a, &b| log_masses[b].total_cmp(&log_masses[a]).then(a.cmp(&b)));
    let r2 = radius * radius;
    let mut leaders: Vec<usize> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for l in order {
        let path = basis.horizon_mean(0, l);
        let found = leaders.iter().position(|&lead| {
            basis.horizon_mean(0, lead).iter().zip(path).all(|(p, q)| linalg::dist2(*p, *q) <= r2)
        });
        match found {
            Some(c) => members[c].push(l),
            None => {
                leaders.push(l);
                members.push(vec![l]);
            }
        }
    }
    let mut clusters: Vec<ModeCluster> = members
        .into_iter()
        .map(|m| {
            let lm: Vec<f64> = m.iter().map(|&l| log_masses[l]).collect();
            ModeCluster { log_mass: linalg::log_sum_exp(&lm), members: m }
        })
        .collect();
    clusters.sort_by(|a, b| b.log_mass.total_cmp(&a.log_mass));
    clusters
}

/// Share of the total mass carried by the `k` heaviest clusters.
pub fn top_cluster_mass_fraction(clusters: &[ModeCluster], k: usize) -> f64 {
    let all: Vec<f64> = clusters.iter().map(|c| c.log_mass).collect();
    let top: Vec<f64> = all.iter().take(k).copied().collect();
    (linalg::log_sum_exp(&top) - linalg::log_sum_exp(&all)).exp()
}

/// Position of the robot's goal pseudo-observation at the horizon end: along
/// the goal direction at maximum speed. It may lie past the goal, so the robot
/// arrives at speed instead of creeping in.
pub fn robot_goal_hint(scene: &PlanningScene, grid: &TimeGrid, slack: f64) -> Result<GoalHint, PlanError> {
    let (last_step, p) = scene.robot.last().ok_or(PlanError::Gp(gp::GpError::EmptyObservations))?;
    let reach = scene.robot_max_speed * (grid.last_step() - last_step) as f64 * grid.dt;
    let d = [scene.robot_goal[0] - p[0], scene.robot_goal[1] - p[1]];
    let dist = d[0].hypot(d[1]);
    let position = if dist == 0.0 { scene.robot_goal } else { [p[0] + d[0] / dist * reach, p[1] + d[1] / dist * reach] };
    Ok(GoalHint { position, slack })
}

/// Constant-velocity goal guess for a pedestrian.
pub fn human_goal_hint(obs: &TrajectoryObservations, grid: &TimeGrid, slack: f64) -> Option<GoalHint> {
    let (last_step, p) = obs.last()?;
    let v = obs.velocity_estimate(grid.dt);
    let secs = (grid.last_step() - last_step) as f64 * grid.dt;
    Some(GoalHint { position: [p[0] + v[0] * secs, p[1] + v[1] * secs], slack })
}

/// Conditions the robot and every observed human on their recent history.
/// Humans without measurements in the history window are left out.
pub fn prepare_seeds(scene: &PlanningScene, cfg: &PlannerConfig) -> Result<(TimeGrid, Vec<AgentSeed>), PlanError> {
    cfg.validate()?;
    let grid = TimeGrid::new(scene.t_now, cfg.horizon, scene.dt)?;
    let from = scene.t_now - cfg.history_window as i64 + 1;
    let robot_obs = scene.robot.window(from, scene.t_now);
    if robot_obs.is_empty() {
        return Err(PlanError::Gp(gp::GpError::EmptyObservations));
    }
    let goal = robot_goal_hint(scene, &grid, cfg.goal_slack)?;
    let robot = AgentSeed {
        base: gp::condition(&robot_obs, &cfg.robot_kernel, &grid, Some(&goal))?,
        observations: robot_obs,
        kernel: cfg.robot_kernel,
    };
    let mut seeds = vec![robot];
    for h in &scene.humans {
        let obs = h.window(from, scene.t_now);
        let Some(goal) = human_goal_hint(&obs, &grid, cfg.goal_slack) else { continue };
        seeds.push(AgentSeed {
            base: gp::condition(&obs, &cfg.human_kernel, &grid, Some(&goal))?,
            observations: obs,
            kernel: cfg.human_kernel,
        });
    }
    Ok((grid, seeds))
}

/// One receding-horizon cycle: condition, sample, score, select.
pub fn plan_step(scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let (grid, seeds) = prepare_seeds(scene, cfg)?;
    let basis = sample_bases(&seeds, &grid, cfg)?;
    let mut result = match select_optimal(&basis, cfg) {
        Ok(r) => r,
        Err(PlanError::AllColliding) => PlanResult::stop(scene.robot_position()?, cfg.horizon, PlanStatus::Degraded),
        Err(e) => return Err(e),
    };
    result.elapsed_s = started.elapsed().as_secs_f64();
    Ok(result)
}

pub struct SigpPlanner;

impl Planner for SigpPlanner {
    fn name(&self) -> &'static str {
        "sigp"
    }

    fn plan(&self, scene: &PlanningScene, cfg: &PlannerConfig) -> Result<PlanResult, PlanError> {
        plan_step(scene, cfg)
    }
}
