//! Small numerical helpers shared by the GP and interaction modules.

use nalgebra::{Cholesky, DMatrix, Dyn};

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln(1 - exp(-x))` for `x >= 0`, accurate near both ends.
pub fn log1mexp(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else if x < std::f64::consts::LN_2 {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Symmetrize in place: `(A + Aᵀ) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Cholesky with escalating diagonal jitter for PSD matrices that are
/// numerically singular. Returns the factor and the jitter that was added.
pub fn cholesky_jittered(m: &DMatrix<f64>) -> Option<(Cholesky<f64, Dyn>, f64)> {
    if let Some(c) = m.clone().cholesky() {
        return Some((c, 0.0));
    }
    let n = m.nrows().max(1);
    let scale = (m.trace() / n as f64).abs().max(f64::MIN_POSITIVE);
    let mut jitter = scale * 1e-12;
    for _ in 0..10 {
        let mut shifted = m.clone();
        for i in 0..m.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(c) = shifted.cholesky() {
            return Some((c, jitter));
        }
        jitter *= 10.0;
    }
    None
}

/// `ln |A|` from a Cholesky factor.
pub fn log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    let l = chol.l_dirty();
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
}

pub fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}
