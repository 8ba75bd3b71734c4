//! Draws of whole trajectories from a component's Gaussian.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::gp::{GPComponent, GpError, Position};
use crate::linalg;

/// Lower Cholesky factor of a per-coordinate covariance, reused across draws.
#[derive(Debug, Clone)]
pub struct TrajectorySampler {
    factor: DMatrix<f64>,
    log_det: f64,
}

impl TrajectorySampler {
    pub fn new(cov: &DMatrix<f64>) -> Result<Self, GpError> {
        let (chol, _) = linalg::cholesky_jittered(cov).ok_or(GpError::Singular)?;
        let log_det = linalg::log_det(&chol);
        Ok(Self { factor: chol.l(), log_det })
    }

    pub fn for_component(c: &GPComponent) -> Result<Self, GpError> {
        Self::new(&c.covariance())
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// `mean + L ε` per coordinate, returning the path and `‖ε‖²` summed over
    /// both coordinates.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, mean: &[Position]) -> (Vec<Position>, f64) {
        let n = self.dim();
        debug_assert_eq!(mean.len(), n);
        let mut out = mean.to_vec();
        let mut sq = 0.0;
        for c in 0..2 {
            let eps = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            sq += eps.norm_squared();
            let d = &self.factor * eps;
            for (o, di) in out.iter_mut().zip(d.iter()) {
                o[c] += di;
            }
        }
        (out, sq)
    }

    /// Log density of a draw whose standardized squared norm is `sq`.
    pub fn log_density_from_sq(&self, sq: f64) -> f64 {
        -0.5 * (sq + 2.0 * self.log_det + 2.0 * self.dim() as f64 * linalg::LN_2PI)
    }

    /// Log density of an arbitrary path under `N(mean, LLᵀ)` per coordinate.
    pub fn log_density(&self, mean: &[Position], path: &[Position]) -> f64 {
        let n = self.dim();
        let mut sq = 0.0;
        for c in 0..2 {
            let r = DVector::from_fn(n, |i, _| path[i][c] - mean[i][c]);
            let w = self
                .factor
                .solve_lower_triangular(&r)
                .expect("factor has a positive diagonal");
            sq += w.norm_squared();
        }
        self.log_density_from_sq(sq)
    }
}
