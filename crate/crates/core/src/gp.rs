//! Gaussian process regression over agent trajectories.
//!
//! Each spatial coordinate is an independent GP sharing one squared-exponential
//! kernel. Because both coordinates are observed at the same steps they share
//! a single posterior covariance, which [`GPComponent`] stores once behind an
//! `Arc` together with a scalar multiplier so that scaled samples are cheap.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LN_2PI};

/// A planar position or displacement in meters.
pub type Position = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("no observations to condition on")]
    EmptyObservations,
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("observation steps must be strictly increasing (step {step} after {previous})")]
    NonMonotoneSteps { previous: i64, step: i64 },
    #[error("observation at step {step} lies after the current step {t_now}")]
    FutureObservation { step: i64, t_now: i64 },
    #[error("kernel matrix is not positive definite")]
    Singular,
    #[error("step {step} outside component support [{first}, {last}]")]
    OutsideSupport { step: i64, first: i64, last: i64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("mixture has no components")]
    EmptyMixture,
    #[error("every mixture weight is zero")]
    AllWeightsZero,
}

/// Discrete planning horizon: the prediction covers steps `t_now+1 ..= t_now+horizon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_now: i64,
    pub horizon: usize,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_now: i64, horizon: usize, dt: f64) -> Result<Self, GpError> {
        if horizon == 0 {
            return Err(GpError::InvalidGrid("horizon must be at least one step".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(GpError::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { t_now, horizon, dt })
    }

    pub fn last_step(&self) -> i64 {
        self.t_now + self.horizon as i64
    }

    pub fn horizon_steps(&self) -> impl Iterator<Item = i64> {
        (self.t_now + 1)..=self.last_step()
    }

    pub fn seconds(&self, step: i64) -> f64 {
        step as f64 * self.dt
    }
}

/// Timestamped, possibly gappy position measurements of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryObservations {
    agent_id: String,
    samples: Vec<(i64, Position)>,
}

impl TrajectoryObservations {
    pub fn new(agent_id: impl Into<String>, samples: Vec<(i64, Position)>) -> Result<Self, GpError> {
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(GpError::NonMonotoneSteps { previous: w[0].0, step: w[1].0 });
            }
        }
        if samples.iter().any(|(_, p)| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(GpError::NonFinite("observation"));
        }
        Ok(Self { agent_id: agent_id.into(), samples })
    }

    pub fn empty(agent_id: impl Into<String>) -> Self {
        Self { agent_id: agent_id.into(), samples: Vec::new() }
    }

    pub fn push(&mut self, step: i64, position: Position) -> Result<(), GpError> {
        if let Some(&(previous, _)) = self.samples.last() {
            if step <= previous {
                return Err(GpError::NonMonotoneSteps { previous, step });
            }
        }
        self.samples.push((step, position));
        Ok(())
    }

    pub fn agent_id(&self) -> &str {
        &self.agent_id
    }

    pub fn samples(&self) -> &[(i64, Position)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<(i64, Position)> {
        self.samples.last().copied()
    }

    /// Observations with step in `from..=to`.
    pub fn window(&self, from: i64, to: i64) -> Self {
        Self {
            agent_id: self.agent_id.clone(),
            samples: self
                .samples
                .iter()
                .filter(|(s, _)| *s >= from && *s <= to)
                .copied()
                .collect(),
        }
    }

    /// Least-squares velocity (m/s) over the stored samples; zero with fewer than two.
    pub fn velocity_estimate(&self, dt: f64) -> [f64; 2] {
        let n = self.samples.len();
        if n < 2 {
            return [0.0, 0.0];
        }
        let ts: Vec<f64> = self.samples.iter().map(|(s, _)| *s as f64 * dt).collect();
        let t_mean = ts.iter().sum::<f64>() / n as f64;
        let var: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
        let mut v = [0.0; 2];
        for (c, vc) in v.iter_mut().enumerate() {
            let p_mean = self.samples.iter().map(|(_, p)| p[c]).sum::<f64>() / n as f64;
            let cov: f64 = self
                .samples
                .iter()
                .zip(&ts)
                .map(|((_, p), t)| (t - t_mean) * (p[c] - p_mean))
                .sum();
            *vc = cov / var;
        }
        v
    }
}

/// Squared-exponential kernel with additive isotropic measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// σ_f², squared meters.
    pub signal_variance: f64,
    /// Seconds.
    pub length_scale: f64,
    /// σ_n², squared meters.
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn new(signal_variance: f64, length_scale: f64, noise_variance: f64) -> Result<Self, GpError> {
        let k = Self { signal_variance, length_scale, noise_variance };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), GpError> {
        for (name, v) in [
            ("signal_variance", self.signal_variance),
            ("length_scale", self.length_scale),
            ("noise_variance", self.noise_variance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GpError::InvalidKernel(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, t1: f64, t2: f64) -> f64 {
        let d = (t1 - t2) / self.length_scale;
        self.signal_variance * (-0.5 * d * d).exp()
    }
}

/// Soft goal appended as a pseudo-observation at the last horizon step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalHint {
    pub position: Position,
    /// Multiplier on the kernel noise variance for the pseudo-observation.
    pub slack: f64,
}

/// Linear prior mean `anchor + velocity * (t - t_anchor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanPrior {
    pub anchor_step: i64,
    pub anchor: Position,
    /// m/s.
    pub velocity: [f64; 2],
}

impl MeanPrior {
    /// Anchored at the latest observation; the velocity points at the goal
    /// (arriving at the final horizon step) or is zero without one.
    pub fn from_observations(
        obs: &TrajectoryObservations,
        grid: &TimeGrid,
        goal: Option<&GoalHint>,
    ) -> Result<Self, GpError> {
        let (anchor_step, anchor) = obs.last().ok_or(GpError::EmptyObservations)?;
        let velocity = match goal {
            Some(g) => {
                let secs = (grid.last_step() - anchor_step) as f64 * grid.dt;
                [(g.position[0] - anchor[0]) / secs, (g.position[1] - anchor[1]) / secs]
            }
            None => [0.0, 0.0],
        };
        Ok(Self { anchor_step, anchor, velocity })
    }

    pub fn at(&self, step: i64, dt: f64) -> Position {
        let s = (step - self.anchor_step) as f64 * dt;
        [self.anchor[0] + self.velocity[0] * s, self.anchor[1] + self.velocity[1] * s]
    }
}

/// One Gaussian mixture component over a contiguous block of steps.
///
/// The support starts at `first_step` and, for components produced by
/// [`condition`], ends at the last horizon step, so the observed history and
/// the prediction live in one joint Gaussian.
#[derive(Debug, Clone)]
pub struct GPComponent {
    first_step: i64,
    mean: Vec<Position>,
    base_cov: Arc<DMatrix<f64>>,
    cov_scale: f64,
    pub log_weight: f64,
}

impl GPComponent {
    pub fn new(
        first_step: i64,
        mean: Vec<Position>,
        cov: Arc<DMatrix<f64>>,
        cov_scale: f64,
        log_weight: f64,
    ) -> Result<Self, GpError> {
        let n = mean.len();
        if n == 0 || cov.nrows() != n || cov.ncols() != n {
            return Err(GpError::InvalidGrid(format!(
                "mean has {n} steps but covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(GpError::NonFinite("mean"));
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(GpError::NonFinite("covariance"));
        }
        if !(cov_scale > 0.0 && cov_scale.is_finite()) {
            return Err(GpError::NonFinite("covariance scale"));
        }
        if log_weight.is_nan() || log_weight == f64::INFINITY {
            return Err(GpError::NonFinite("log weight"));
        }
        Ok(Self { first_step, mean, base_cov: cov, cov_scale, log_weight })
    }

    pub fn first_step(&self) -> i64 {
        self.first_step
    }

    pub fn last_step(&self) -> i64 {
        self.first_step + self.mean.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn index_of(&self, step: i64) -> Result<usize, GpError> {
        if step < self.first_step || step > self.last_step() {
            return Err(GpError::OutsideSupport { step, first: self.first_step, last: self.last_step() });
        }
        Ok((step - self.first_step) as usize)
    }

    pub fn mean(&self) -> &[Position] {
        &self.mean
    }

    pub fn mean_at(&self, step: i64) -> Result<Position, GpError> {
        Ok(self.mean[self.index_of(step)?])
    }

    /// Per-coordinate marginal variance at `step`.
    pub fn variance_at(&self, step: i64) -> Result<f64, GpError> {
        let i = self.index_of(step)?;
        Ok(self.cov_scale * self.base_cov[(i, i)])
    }

    pub fn cov_scale(&self) -> f64 {
        self.cov_scale
    }

    pub fn base_cov(&self) -> &Arc<DMatrix<f64>> {
        &self.base_cov
    }

    /// The per-coordinate covariance matrix, materialized.
    pub fn covariance(&self) -> DMatrix<f64> {
        self.base_cov.as_ref() * self.cov_scale
    }

    /// Same component with covariance `scale * base` and a new mean.
    pub fn resampled(&self, mean: Vec<Position>, scale: f64) -> Result<Self, GpError> {
        Self::new(self.first_step, mean, Arc::clone(&self.base_cov), self.cov_scale * scale, 0.0)
    }

    /// Restriction to steps `from..=to` (both inside the support).
    pub fn restrict(&self, from: i64, to: i64) -> Result<Self, GpError> {
        let a = self.index_of(from)?;
        let b = self.index_of(to)?;
        if b < a {
            return Err(GpError::InvalidGrid(format!("empty restriction {from}..={to}")));
        }
        let n = b - a + 1;
        let cov = self.base_cov.view((a, a), (n, n)).into_owned();
        Self::new(from, self.mean[a..=b].to_vec(), Arc::new(cov), self.cov_scale, self.log_weight)
    }
}

/// Weighted set of components describing one agent.
#[derive(Debug, Clone)]
pub struct GPMixture {
    pub agent_id: String,
    pub components: Vec<GPComponent>,
}

impl GPMixture {
    pub fn new(agent_id: impl Into<String>, components: Vec<GPComponent>) -> Result<Self, GpError> {
        if components.is_empty() {
            return Err(GpError::EmptyMixture);
        }
        Ok(Self { agent_id: agent_id.into(), components })
    }

    pub fn log_weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.log_weight).collect()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, c) in self.components.iter().enumerate() {
            if c.log_weight > self.components[best].log_weight {
                best = i;
            }
        }
        best
    }
}

/// Posterior GP on the support `first observation ..= t_now + horizon`, using
/// the default linear prior of [`MeanPrior::from_observations`].
pub fn condition(
    obs: &TrajectoryObservations,
    kernel: &KernelSpec,
    grid: &TimeGrid,
    goal: Option<&GoalHint>,
) -> Result<GPComponent, GpError> {
    let prior = MeanPrior::from_observations(obs, grid, goal)?;
    condition_with_prior(obs, kernel, grid, goal, &prior)
}

pub fn condition_with_prior(
    obs: &TrajectoryObservations,
    kernel: &KernelSpec,
    grid: &TimeGrid,
    goal: Option<&GoalHint>,
    prior: &MeanPrior,
) -> Result<GPComponent, GpError> {
    kernel.validate()?;
    let samples = obs.samples();
    let Some(&(first_step, _)) = samples.first() else {
        return Err(GpError::EmptyObservations);
    };
    if let Some(&(step, _)) = samples.iter().find(|(s, _)| *s > grid.t_now) {
        return Err(GpError::FutureObservation { step, t_now: grid.t_now });
    }

    // Training inputs: observations plus the optional goal pseudo-observation.
    let mut train: Vec<(i64, Position, f64)> =
        samples.iter().map(|&(s, p)| (s, p, kernel.noise_variance)).collect();
    if let Some(g) = goal {
        if !(g.slack > 0.0 && g.slack.is_finite()) {
            return Err(GpError::InvalidKernel(format!("goal slack must be positive, got {}", g.slack)));
        }
        train.push((grid.last_step(), g.position, kernel.noise_variance * g.slack));
    }

    let n = train.len();
    let support: Vec<i64> = (first_step..=grid.last_step()).collect();
    let m = support.len();
    let t = |s: i64| grid.seconds(s);

    let k_train = DMatrix::from_fn(n, n, |i, j| {
        kernel.eval(t(train[i].0), t(train[j].0)) + if i == j { train[i].2 } else { 0.0 }
    });
    let chol = k_train.cholesky().ok_or(GpError::Singular)?;

    let k_cross = DMatrix::from_fn(n, m, |i, j| kernel.eval(t(train[i].0), t(support[j])));
    let mut mean = vec![[0.0; 2]; m];
    for c in 0..2 {
        let resid = DVector::from_fn(n, |i, _| train[i].1[c] - prior.at(train[i].0, grid.dt)[c]);
        let alpha = chol.solve(&resid);
        let post = k_cross.transpose() * alpha;
        for (j, mj) in mean.iter_mut().enumerate() {
            mj[c] = prior.at(support[j], grid.dt)[c] + post[j];
        }
    }

    let l = chol.l();
    let v = l
        .solve_lower_triangular(&k_cross)
        .ok_or(GpError::Singular)?;
    let k_test = DMatrix::from_fn(m, m, |i, j| kernel.eval(t(support[i]), t(support[j])));
    let mut cov = k_test - v.transpose() * v;
    linalg::symmetrize(&mut cov);

    GPComponent::new(first_step, mean, Arc::new(cov), 1.0, 0.0)
}

/// Precomputed observation block of a component family sharing one base
/// covariance: the observed indices, residual-free data and `Σ_obs`.
#[derive(Debug, Clone)]
pub(crate) struct ObservationBlock {
    indices: Vec<usize>,
    data: Vec<Position>,
    base_block: DMatrix<f64>,
    noise_variance: f64,
}

impl ObservationBlock {
    pub(crate) fn new(
        component: &GPComponent,
        obs: &TrajectoryObservations,
        kernel: &KernelSpec,
    ) -> Result<Self, GpError> {
        if obs.is_empty() {
            return Err(GpError::EmptyObservations);
        }
        let indices = obs
            .samples()
            .iter()
            .map(|(s, _)| component.index_of(*s))
            .collect::<Result<Vec<_>, _>>()?;
        let data = obs.samples().iter().map(|(_, p)| *p).collect();
        let base = component.base_cov();
        let n = indices.len();
        let base_block = DMatrix::from_fn(n, n, |i, j| base[(indices[i], indices[j])]);
        Ok(Self { indices, data, base_block, noise_variance: kernel.noise_variance })
    }

    /// `log N(z | mean[obs], scale * Σ_obs + σ_n² I)` summed over both coordinates.
    pub(crate) fn log_likelihood(&self, mean: &[Position], scale: f64) -> Result<f64, GpError> {
        let n = self.indices.len();
        let mut cov = &self.base_block * scale;
        for i in 0..n {
            cov[(i, i)] += self.noise_variance;
        }
        let chol = cov.cholesky().ok_or(GpError::Singular)?;
        let log_det = linalg::log_det(&chol);
        let mut total = 0.0;
        for c in 0..2 {
            let r = DVector::from_fn(n, |i, _| self.data[i][c] - mean[self.indices[i]][c]);
            let w = chol.l().solve_lower_triangular(&r).ok_or(GpError::Singular)?;
            total += -0.5 * (w.norm_squared() + log_det + n as f64 * LN_2PI);
        }
        Ok(total)
    }
}

/// Log-likelihood of `obs` under `component` with measurement noise σ_n².
pub fn log_data_likelihood(
    component: &GPComponent,
    obs: &TrajectoryObservations,
    kernel: &KernelSpec,
) -> Result<f64, GpError> {
    ObservationBlock::new(component, obs, kernel)?.log_likelihood(component.mean(), component.cov_scale())
}

/// Shift log-weights so they log-sum-exp to zero.
pub fn normalize_mixture(mut mix: GPMixture) -> Result<GPMixture, GpError> {
    if mix.components.is_empty() {
        return Err(GpError::EmptyMixture);
    }
    let lw = mix.log_weights();
    if lw.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
        return Err(GpError::NonFinite("log weight"));
    }
    let z = linalg::log_sum_exp(&lw);
    if z == f64::NEG_INFINITY {
        return Err(GpError::AllWeightsZero);
    }
    for c in &mut mix.components {
        c.log_weight -= z;
    }
    Ok(mix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel() -> KernelSpec {
        KernelSpec::new(1.0, 1.0, 1e-4).unwrap()
    }

    #[test]
    fn constant_data_at_origin_predicts_origin() {
        let obs = TrajectoryObservations::new("a", (0..5).map(|s| (s, [0.0, 0.0])).collect()).unwrap();
        let grid = TimeGrid::new(4, 10, 0.1).unwrap();
        let c = condition(&obs, &kernel(), &grid, None).unwrap();
        for p in c.mean() {
            assert!(p[0].abs() < 1e-12 && p[1].abs() < 1e-12);
        }
    }

    #[test]
    fn noise_free_single_observation_is_interpolated() {
        let obs = TrajectoryObservations::new("a", vec![(3, [1.0, 0.0])]).unwrap();
        let grid = TimeGrid::new(3, 4, 0.1).unwrap();
        let k = KernelSpec::new(1.0, 1.0, 1e-12).unwrap();
        let c = condition(&obs, &k, &grid, None).unwrap();
        let m = c.mean_at(3).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-9 && m[1].abs() < 1e-12);
    }

    #[test]
    fn support_spans_history_and_horizon() {
        let obs = TrajectoryObservations::new("a", vec![(2, [0.0, 0.0]), (5, [1.0, 0.0])]).unwrap();
        let grid = TimeGrid::new(6, 3, 0.1).unwrap();
        let c = condition(&obs, &kernel(), &grid, None).unwrap();
        assert_eq!(c.first_step(), 2);
        assert_eq!(c.last_step(), 9);
        assert_eq!(c.len(), 8);
    }

    #[test]
    fn goal_pulls_the_horizon_end() {
        let obs = TrajectoryObservations::new("a", vec![(0, [0.0, 0.0])]).unwrap();
        let grid = TimeGrid::new(0, 10, 0.1).unwrap();
        let goal = GoalHint { position: [1.0, 2.0], slack: 10.0 };
        let c = condition(&obs, &kernel(), &grid, Some(&goal)).unwrap();
        let end = c.mean_at(10).unwrap();
        assert!((end[0] - 1.0).abs() < 1e-3 && (end[1] - 2.0).abs() < 1e-3);
        // straight-line prior toward the goal
        let mid = c.mean_at(5).unwrap();
        assert!((mid[0] - 0.5).abs() < 1e-3 && (mid[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn condition_rejects_bad_inputs() {
        let grid = TimeGrid::new(0, 3, 0.1).unwrap();
        let empty = TrajectoryObservations::empty("a");
        assert_eq!(condition(&empty, &kernel(), &grid, None).unwrap_err(), GpError::EmptyObservations);
        let future = TrajectoryObservations::new("a", vec![(1, [0.0, 0.0])]).unwrap();
        assert!(matches!(
            condition(&future, &kernel(), &grid, None),
            Err(GpError::FutureObservation { .. })
        ));
        let bad = KernelSpec { signal_variance: 1.0, length_scale: 1.0, noise_variance: 0.0 };
        let obs = TrajectoryObservations::new("a", vec![(0, [0.0, 0.0])]).unwrap();
        assert!(matches!(condition(&obs, &bad, &grid, None), Err(GpError::InvalidKernel(_))));
    }

    #[test]
    fn vanishing_noise_with_dense_history_is_singular() {
        // Near-duplicate inputs make the SE Gram matrix numerically rank deficient.
        let k = KernelSpec::new(1.0, 100.0, 1e-300).unwrap();
        let obs = TrajectoryObservations::new("a", (0..6).map(|s| (s, [s as f64, 0.0])).collect()).unwrap();
        let grid = TimeGrid::new(5, 2, 0.01).unwrap();
        assert_eq!(condition(&obs, &k, &grid, None).unwrap_err(), GpError::Singular);
    }

    #[test]
    fn observations_reject_non_monotone_steps() {
        assert!(matches!(
            TrajectoryObservations::new("a", vec![(2, [0.0, 0.0]), (2, [1.0, 0.0])]),
            Err(GpError::NonMonotoneSteps { .. })
        ));
        let mut o = TrajectoryObservations::empty("a");
        o.push(1, [0.0, 0.0]).unwrap();
        assert!(o.push(0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn velocity_estimate_recovers_constant_velocity() {
        let obs = TrajectoryObservations::new(
            "a",
            (0..5).map(|s| (s, [1.3 * 0.1 * s as f64, -0.2 * s as f64])).collect(),
        )
        .unwrap();
        let v = obs.velocity_estimate(0.1);
        assert!((v[0] - 1.3).abs() < 1e-12 && (v[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_log_likelihood_matches_hand_evaluation() {
        let cov = Arc::new(DMatrix::from_element(1, 1, 1.0));
        let c = GPComponent::new(0, vec![[0.0, 0.0]], cov, 1.0, 0.0).unwrap();
        let obs = TrajectoryObservations::new("a", vec![(0, [2.0, 2.0])]).unwrap();
        let k = KernelSpec::new(1.0, 1.0, 1e-14).unwrap();
        let ll = log_data_likelihood(&c, &obs, &k).unwrap();
        let per_coord = -0.5 * (LN_2PI + 4.0);
        assert!((ll - 2.0 * per_coord).abs() < 1e-9);
    }

    #[test]
    fn likelihood_peaks_when_mean_passes_through_data() {
        let obs = TrajectoryObservations::new("a", vec![(0, [0.5, 0.0]), (1, [0.6, 0.1])]).unwrap();
        let grid = TimeGrid::new(1, 3, 0.1).unwrap();
        let k = kernel();
        let base = condition(&obs, &k, &grid, None).unwrap();
        let exact: Vec<Position> = {
            let mut m = base.mean().to_vec();
            m[0] = [0.5, 0.0];
            m[1] = [0.6, 0.1];
            m
        };
        let c0 = base.resampled(exact.clone(), 1.0).unwrap();
        let top = log_data_likelihood(&c0, &obs, &k).unwrap();
        let cov = {
            let mut s = c0.covariance().view((0, 0), (2, 2)).into_owned();
            s[(0, 0)] += k.noise_variance;
            s[(1, 1)] += k.noise_variance;
            s
        };
        let max_attainable = 2.0 * -0.5 * (cov.determinant().ln() + 2.0 * LN_2PI);
        assert!((top - max_attainable).abs() < 1e-9);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in -20..=20 {
            let shift = i as f64 * 0.01;
            let m: Vec<Position> = exact.iter().map(|p| [p[0] + shift, p[1]]).collect();
            let ll = log_data_likelihood(&base.resampled(m, 1.0).unwrap(), &obs, &k).unwrap();
            if ll > best.0 {
                best = (ll, shift);
            }
        }
        assert_eq!(best.1, 0.0);
    }

    #[test]
    fn closer_mean_gets_larger_weight() {
        let cov = Arc::new(DMatrix::identity(2, 2));
        let obs = TrajectoryObservations::new("a", vec![(0, [0.0, 0.0]), (1, [0.0, 0.0])]).unwrap();
        let a = GPComponent::new(0, vec![[0.1, 0.0]; 2], cov.clone(), 1.0, 0.0).unwrap();
        let b = GPComponent::new(0, vec![[0.5, 0.0]; 2], cov, 1.0, 0.0).unwrap();
        let k = kernel();
        assert!(log_data_likelihood(&a, &obs, &k).unwrap() > log_data_likelihood(&b, &obs, &k).unwrap());
    }

    #[test]
    fn likelihood_rejects_steps_outside_support() {
        let cov = Arc::new(DMatrix::identity(2, 2));
        let c = GPComponent::new(5, vec![[0.0, 0.0]; 2], cov, 1.0, 0.0).unwrap();
        let obs = TrajectoryObservations::new("a", vec![(4, [0.0, 0.0])]).unwrap();
        assert!(matches!(log_data_likelihood(&c, &obs, &kernel()), Err(GpError::OutsideSupport { .. })));
    }

    fn mixture(weights: &[f64]) -> GPMixture {
        let cov = Arc::new(DMatrix::identity(1, 1));
        GPMixture::new(
            "a",
            weights
                .iter()
                .map(|&w| GPComponent::new(0, vec![[0.0, 0.0]], cov.clone(), 1.0, w).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn normalize_examples() {
        let one = normalize_mixture(mixture(&[-7.0])).unwrap();
        assert_eq!(one.components[0].log_weight, 0.0);

        let two = normalize_mixture(mixture(&[3.0, 3.0])).unwrap();
        for c in &two.components {
            assert!((c.log_weight - 0.5f64.ln()).abs() < 1e-15);
        }

        // direct exponentiate-sum-divide oracle
        let raw = [0.0, -1.0, -2.0];
        let total: f64 = raw.iter().map(|w: &f64| w.exp()).sum();
        let expected: Vec<f64> = raw.iter().map(|w| (w.exp() / total).ln()).collect();
        let three = normalize_mixture(mixture(&raw)).unwrap();
        for (c, e) in three.components.iter().zip(&expected) {
            assert!((c.log_weight - e).abs() < 1e-12);
        }

        assert_eq!(
            normalize_mixture(mixture(&[f64::NEG_INFINITY, f64::NEG_INFINITY])).unwrap_err(),
            GpError::AllWeightsZero
        );
    }

    #[test]
    fn restrict_extracts_a_sub_block() {
        let obs = TrajectoryObservations::new("a", vec![(0, [0.0, 0.0]), (1, [0.1, 0.0])]).unwrap();
        let grid = TimeGrid::new(1, 5, 0.1).unwrap();
        let c = condition(&obs, &kernel(), &grid, None).unwrap();
        let r = c.restrict(2, 4).unwrap();
        assert_eq!(r.first_step(), 2);
        assert_eq!(r.len(), 3);
        assert_eq!(r.mean_at(3).unwrap(), c.mean_at(3).unwrap());
        assert_eq!(r.variance_at(4).unwrap(), c.variance_at(4).unwrap());
        assert!(c.restrict(4, 9).is_err());
    }
}
