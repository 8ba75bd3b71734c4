//! Pairwise interaction between two Gaussian trajectory components.
//!
//! The central quantity is the Gaussian product normalizer
//! `P(κ) = ∫ N(x | μ_a, Σ_a) N(x | μ_b, Σ_b) dx = w · exp(-½ δᵀ(Σ_a+Σ_b)⁻¹δ)`
//! with `w = (2π)^{-T/2} |Σ_a+Σ_b|^{-1/2}`, and the non-collision weight
//! `Λ = w − P(κ)`. Everything is kept in the log domain.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gp::{GPComponent, GpError, Position, TimeGrid};
use crate::linalg::{self, LN_2PI};
use crate::sampling::TrajectorySampler;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InteractionError {
    #[error("components cover different steps ({a_first}..={a_last} vs {b_first}..={b_last})")]
    MismatchedSupport { a_first: i64, a_last: i64, b_first: i64, b_last: i64 },
    #[error("summed covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("trajectory lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Gp(#[from] GpError),
}

/// `(ln w, ln P(κ), ln Λ)` for one component pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapCoefficient {
    pub log_w: f64,
    pub log_pk: f64,
    pub log_lambda: f64,
}

impl OverlapCoefficient {
    /// Builds the triple from `ln w` and the Mahalanobis term `½ δᵀ S⁻¹ δ`.
    pub fn from_mahalanobis(log_w: f64, half_maha: f64) -> Self {
        Self { log_w, log_pk: log_w - half_maha, log_lambda: log_w + linalg::log1mexp(half_maha) }
    }

    /// `Λ / w`, the fraction of the maximal overlap that is avoided.
    pub fn lambda_ratio(&self) -> f64 {
        (self.log_lambda - self.log_w).exp()
    }

    /// Independent blocks (stacked coordinates): `w` and `P(κ)` multiply.
    pub fn stack(self, other: Self) -> Self {
        let log_w = self.log_w + other.log_w;
        let half_maha = (self.log_w - self.log_pk) + (other.log_w - other.log_pk);
        Self::from_mahalanobis(log_w, half_maha)
    }
}

/// One spatial coordinate: `mean_*` of length T, `cov_*` T×T.
pub fn overlap_1d(
    mean_a: &DVector<f64>,
    cov_a: &DMatrix<f64>,
    mean_b: &DVector<f64>,
    cov_b: &DMatrix<f64>,
) -> Result<OverlapCoefficient, InteractionError> {
    let t = mean_a.len();
    if mean_b.len() != t || cov_a.nrows() != t || cov_b.nrows() != t {
        return Err(InteractionError::LengthMismatch(t, mean_b.len()));
    }
    let sum = cov_a + cov_b;
    let chol = sum.cholesky().ok_or(InteractionError::NotPositiveDefinite)?;
    let delta = mean_a - mean_b;
    let w = chol
        .l()
        .solve_lower_triangular(&delta)
        .ok_or(InteractionError::NotPositiveDefinite)?;
    let log_w = -0.5 * (t as f64 * LN_2PI + linalg::log_det(&chol));
    Ok(OverlapCoefficient::from_mahalanobis(log_w, 0.5 * w.norm_squared()))
}

fn same_support(a: &GPComponent, b: &GPComponent) -> Result<(), InteractionError> {
    if a.first_step() != b.first_step() || a.len() != b.len() {
        return Err(InteractionError::MismatchedSupport {
            a_first: a.first_step(),
            a_last: a.last_step(),
            b_first: b.first_step(),
            b_last: b.last_step(),
        });
    }
    Ok(())
}

/// Closed-form collision coefficients over the components' common support,
/// both coordinates stacked block-diagonally.
pub fn collision_prob(a: &GPComponent, b: &GPComponent) -> Result<OverlapCoefficient, InteractionError> {
    same_support(a, b)?;
    let t = a.len();
    let sum = a.covariance() + b.covariance();
    let chol = sum.cholesky().ok_or(InteractionError::NotPositiveDefinite)?;
    let log_w_coord = -0.5 * (t as f64 * LN_2PI + linalg::log_det(&chol));
    let mut half_maha = 0.0;
    for c in 0..2 {
        let delta = DVector::from_fn(t, |i, _| a.mean()[i][c] - b.mean()[i][c]);
        let w = chol
            .l()
            .solve_lower_triangular(&delta)
            .ok_or(InteractionError::NotPositiveDefinite)?;
        half_maha += 0.5 * w.norm_squared();
    }
    Ok(OverlapCoefficient::from_mahalanobis(2.0 * log_w_coord, half_maha))
}

/// How the pairwise overlap is aggregated over the planning horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    /// [`collision_prob`] on each horizon step separately; the log-coefficients
    /// add, so Λ is the product of per-step non-collision weights.
    #[default]
    PerStep,
    /// [`collision_prob`] once on the whole stacked horizon.
    Stacked,
}

/// Overlap of two components on the horizon of `grid`.
pub fn horizon_overlap(
    a: &GPComponent,
    b: &GPComponent,
    grid: &TimeGrid,
    mode: OverlapMode,
) -> Result<OverlapCoefficient, InteractionError> {
    let (from, to) = (grid.t_now + 1, grid.last_step());
    match mode {
        OverlapMode::Stacked => collision_prob(&a.restrict(from, to)?, &b.restrict(from, to)?),
        OverlapMode::PerStep => {
            let mut log_w = 0.0;
            let mut log_lambda = 0.0;
            for step in from..=to {
                let o = collision_prob(&a.restrict(step, step)?, &b.restrict(step, step)?)?;
                log_w += o.log_w;
                log_lambda += o.log_lambda;
            }
            Ok(OverlapCoefficient {
                log_w,
                log_pk: log_w + linalg::log1mexp(log_w - log_lambda),
                log_lambda,
            })
        }
    }
}

/// `1 − e^{−x}` for `x ≥ 0`; `exp_m1` only where cancellation matters.
#[inline]
fn one_minus_exp_neg(x: f64) -> f64 {
    if x < 0.5 { -(-x).exp_m1() } else { 1.0 - (-x).exp() }
}

/// Per-step overlap in closed form from marginal variances; identical to
/// [`horizon_overlap`] with [`OverlapMode::PerStep`] but without allocation.
///
/// `var_*[τ]` are per-coordinate variances, already scaled.
#[inline]
pub fn per_step_log_lambda(
    mean_a: &[Position],
    var_a: &[f64],
    scale_a: f64,
    mean_b: &[Position],
    var_b: &[f64],
    scale_b: f64,
) -> f64 {
    // ln Λ_τ = -ln(2π s) + ln(1 - exp(-|δ|²/(2s))),  s = σ²_a + σ²_b
    // accumulated as one running product, rescaled before it under/overflows
    let mut total = 0.0;
    let mut prod = 1.0;
    for i in 0..mean_a.len() {
        let inv_s = 1.0 / (scale_a * var_a[i] + scale_b * var_b[i]);
        let dx = mean_a[i][0] - mean_b[i][0];
        let dy = mean_a[i][1] - mean_b[i][1];
        let x = 0.5 * (dx * dx + dy * dy) * inv_s;
        prod *= if x < 40.0 { one_minus_exp_neg(x) * inv_s } else { inv_s };
        if !(1e-150..=1e150).contains(&prod) {
            if prod == 0.0 {
                return f64::NEG_INFINITY;
            }
            total += prod.ln();
            prod = 1.0;
        }
    }
    total + prod.ln() - mean_a.len() as f64 * LN_2PI
}

/// `ln(Λ/w)` summed over steps: the per-step overlap without the Gaussian
/// normalizer, i.e. `Σ_τ ln(1 − exp(−|δ_τ|²/(2s_τ)))`.
#[inline]
pub fn per_step_log_lambda_ratio(mean_a: &[Position], var_a: &[f64], mean_b: &[Position], var_b: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut prod = 1.0;
    for i in 0..mean_a.len() {
        let dx = mean_a[i][0] - mean_b[i][0];
        let dy = mean_a[i][1] - mean_b[i][1];
        let x = (dx * dx + dy * dy) / (2.0 * (var_a[i] + var_b[i]));
        if x < 40.0 {
            prod *= one_minus_exp_neg(x);
            if prod < 1e-150 {
                if prod == 0.0 {
                    return f64::NEG_INFINITY;
                }
                total += prod.ln();
                prod = 1.0;
            }
        }
    }
    total + prod.ln()
}

/// Smooth avoidance factor `∏_τ (1 − exp(−|a(τ)−b(τ)|² / 2γ))`.
pub fn finite_gamma_psi(a: &[Position], b: &[Position], gamma: f64) -> Result<f64, InteractionError> {
    if a.len() != b.len() {
        return Err(InteractionError::LengthMismatch(a.len(), b.len()));
    }
    if !(gamma > 0.0) {
        return Err(InteractionError::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(p, q)| 1.0 - (-linalg::dist2(*p, *q) / (2.0 * gamma)).exp())
        .product())
}

/// Monte-Carlo estimate of the probability that paths drawn from `a` and `b`
/// never come within `collision_radius` of each other.
pub fn bar_delta_mc(
    a: &GPComponent,
    b: &GPComponent,
    collision_radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64, InteractionError> {
    same_support(a, b)?;
    if n_samples == 0 {
        return Err(InteractionError::InvalidParameter("n_samples must be at least 1".into()));
    }
    if !(collision_radius > 0.0) {
        return Err(InteractionError::InvalidParameter("collision radius must be positive".into()));
    }
    let sa = TrajectorySampler::for_component(a)?;
    let sb = TrajectorySampler::for_component(b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = collision_radius * collision_radius;
    let mut clear = 0usize;
    for _ in 0..n_samples {
        let (pa, _) = sa.draw(&mut rng, a.mean());
        let (pb, _) = sb.draw(&mut rng, b.mean());
        if pa.iter().zip(&pb).all(|(p, q)| linalg::dist2(*p, *q) > r2) {
            clear += 1;
        }
    }
    Ok(clear as f64 / n_samples as f64)
}
