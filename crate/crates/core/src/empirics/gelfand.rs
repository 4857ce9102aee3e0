//! Norm-moment sequences of matrix powers: `μ_k = ‖Jᵏ‖_F² / rows`.
//!
//! The sequence starts at 1 (`J⁰ = I`), may pass through a transient, and
//! its large-`k` growth rate `μ_k^{1/2k}` converges to the spectral radius —
//! the empirical handle on regimes where the limiting density consists of
//! atoms plus a disk and the radius alone undersells the transient.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Moments above this are reported as diverged and the sequence truncated;
/// squared Frobenius norms of later powers would overflow.
const OVERFLOW_CAP: f64 = 1e150;

/// `μ_k = ‖Jᵏ‖_F² / rows` for `k = 0, 1, …, k_max`, by iterated products.
/// The returned sequence is truncated early if it exceeds `1e150`.
pub fn norm_moment_sequence(j: &DenseMatrix, k_max: u32) -> Result<Vec<f64>> {
    if j.rows != j.cols {
        return Err(Error::InvalidParams(format!(
            "matrix powers need a square matrix; got {}×{}",
            j.rows, j.cols
        )));
    }
    if j.rows == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    let rows = j.rows as f64;
    let mut seq = Vec::with_capacity(k_max as usize + 1);
    seq.push(1.0);
    let mut power = j.clone();
    for _ in 1..=k_max {
        let mu = power.frobenius_sq() / rows;
        if !mu.is_finite() || mu > OVERFLOW_CAP {
            break;
        }
        seq.push(mu);
        power = power.matmul(j);
    }
    Ok(seq)
}

/// Growth-rate estimates `μ_k^{1/2k}` for `k ≥ 1` — each entry is an
/// approximation of the spectral radius, converging from the transient.
pub fn growth_rates(moments: &[f64]) -> Vec<f64> {
    moments
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &mu)| mu.powf(0.5 / k as f64))
        .collect()
}
