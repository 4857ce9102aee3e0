//! Closed-form asymptotics in the saturated-gate limits: the fraction of
//! sites a hard gate leaves open, the exponential rate at which the spectral
//! gap at λ = 1 pinches as the update gain grows, erfc-family fits for the
//! eigenvalue accumulation CDF, and norm-moment (Gelfand) sequences for long
//! Jacobian products.

use crate::activation::sigmoid;
use crate::error::{Error, Result};
use crate::params::{Arch, GatedNetParams};
use statrs::function::erf::{erf_inv, erfc};
use statrs::function::gamma::ln_gamma;

/// Fraction of sites whose update gate saturates closed when the gate gain
/// diverges with offset ratio `beta = b_z / a_z`, given the steady state
/// variance `c_h` of the pre-activation field: `α = ½ erfc(β / √(2 C_h))`.
pub fn binary_gate_closed_fraction(beta: f64, c_h: f64) -> Result<f64> {
    if !(c_h > 0.0) || !c_h.is_finite() {
        return Err(Error::InvalidParams(format!(
            "pre-activation variance c_h = {c_h} must be positive and finite"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidParams(format!("offset ratio beta = {beta} must be finite")));
    }
    Ok(0.5 * erfc(beta / (2.0 * c_h).sqrt()))
}

/// Exponential pinching rate of the spectral gap at λ = 1: for large update
/// gain the nearest eigenvalue sits at distance `~ exp(−c √C_h · a_z)` with
///
/// `c = β/√C_h + √2 · erf⁻¹(2/ρ₀² − 1)`,
///
/// where `ρ₀` is the local radius at updating sites and `β = b_z / a_z`. The gap
/// closes only when updating sites are locally expanding (`ρ₀ > 1`) yet rare
/// enough that the cloud still avoids the unit circle (`α ρ₀² < 1`, i.e.
/// `c > 0`); both failure modes are reported as unsupported regimes.
pub fn pinching_rate(rho0: f64, beta: f64, c_h: f64) -> Result<f64> {
    if !(c_h > 0.0) || !c_h.is_finite() {
        return Err(Error::InvalidParams(format!(
            "pre-activation variance c_h = {c_h} must be positive and finite"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidParams(format!("offset ratio beta = {beta} must be finite")));
    }
    if !(rho0 > 1.0) || !rho0.is_finite() {
        return Err(Error::UnsupportedRegime(format!(
            "pinching requires locally expanding updating sites (rho0 > 1); got rho0 = {rho0}"
        )));
    }
    let c = beta / c_h.sqrt() + std::f64::consts::SQRT_2 * erf_inv(2.0 / (rho0 * rho0) - 1.0);
    if !(c > 0.0) {
        return Err(Error::UnsupportedRegime(format!(
            "no exponential pinching: rho0² ≥ 1/α here (rate would be {c} ≤ 0), so the \
             eigenvalue cloud reaches the unit circle at finite gain"
        )));
    }
    Ok(c)
}

/// Least-squares fit of `cdf ≈ c1 · erfc(c2 / gain)` over measured
/// accumulation fractions at several update gains.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct ErfcFit {
    pub c1: f64,
    pub c2: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
}

/// Fit the two-parameter family `y = c1 · erfc(c2 / g)` to points
/// `(gains[i], cdf[i])`. `c1` is profiled in closed form (linear least
/// squares at fixed `c2`); `c2` is located on a log grid and polished by
/// golden-section search.
pub fn fit_cdf_erfc(gains: &[f64], cdf: &[f64]) -> Result<ErfcFit> {
    if gains.len() != cdf.len() {
        return Err(Error::InvalidParams(format!(
            "gains ({}) and cdf ({}) must align",
            gains.len(),
            cdf.len()
        )));
    }
    if gains.len() < 3 {
        return Err(Error::InvalidParams(
            "need at least 3 points to fit the two-parameter erfc family".into(),
        ));
    }
    for (&g, &y) in gains.iter().zip(cdf) {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidParams(format!("gains must be positive and finite; got {g}")));
        }
        if !y.is_finite() || y < 0.0 {
            return Err(Error::InvalidParams(format!(
                "cdf values must be finite and non-negative; got {y}"
            )));
        }
    }
    let n = cdf.len() as f64;
    let mean_y = cdf.iter().sum::<f64>() / n;
    let ss_tot: f64 = cdf.iter().map(|&y| (y - mean_y) * (y - mean_y)).sum();
    if !(ss_tot > 0.0) {
        return Err(Error::Degenerate(
            "cdf values are all equal; the fit quality is undefined".into(),
        ));
    }
    let syy: f64 = cdf.iter().map(|&y| y * y).sum();

    // Profiled residual: for fixed c2 the optimal amplitude is
    // c1 = Σ y·e / Σ e² with e_i = erfc(c2 / g_i).
    let sse_at = |log_c2: f64| -> (f64, f64) {
        let c2 = 10f64.powf(log_c2);
        let mut se2 = 0.0;
        let mut sye = 0.0;
        for (&g, &y) in gains.iter().zip(cdf) {
            let e = erfc(c2 / g);
            se2 += e * e;
            sye += y * e;
        }
        if !(se2 > 0.0) {
            return (f64::INFINITY, 0.0);
        }
        let c1 = sye / se2;
        ((syy - c1 * sye).max(0.0), c1)
    };

    const GRID: usize = 600;
    let (lo, hi) = (-4.0, 3.0);
    let step = (hi - lo) / (GRID - 1) as f64;
    let mut best = (f64::INFINITY, lo);
    for k in 0..GRID {
        let t = lo + step * k as f64;
        let (sse, _) = sse_at(t);
        if sse < best.0 {
            best = (sse, t);
        }
    }
    // Golden-section polish within one grid step of the best node.
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (sse_at(c).0, sse_at(d).0);
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = sse_at(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = sse_at(d).0;
        }
    }
    let t_star = 0.5 * (a + b);
    let (sse, c1) = sse_at(t_star);
    Ok(ErfcFit { c1, c2: 10f64.powf(t_star), r_squared: 1.0 - sse / ss_tot })
}

/// Saturation regime of the update gate for norm-moment sequences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpdateRegime {
    /// Gate gain → ∞: each site's gate is an independent coin, closed
    /// (fully updating, z = 0) with probability `alpha`.
    Binary { alpha: f64 },
    /// Gate gain = 0 with deterministic bias: every site shares the same
    /// partial update `z = σ(b_z)`.
    Frozen,
}

/// Normalized squared-norm moment `μ_n = E‖Jⁿ‖_F² / n_rows` of an n-step
/// Jacobian product in a saturated-update regime, with `rho_sq` the squared
/// local radius of the non-gate channel.
///
/// Binary: `μ_n = (1−α) Σ_{k=0}^{n} (α ρ²)^k` — a geometric transient that
/// saturates when `α ρ² < 1` and diverges otherwise.
///
/// Frozen: `μ_n = Σ_q C(n,q)² z^{2(n−q)} ((1−z)²ρ²)^q`, evaluated by
/// log-sum-exp so large `n` neither overflows nor loses the head terms.
pub fn gelfand_moment(
    params: &GatedNetParams,
    regime: UpdateRegime,
    rho_sq: f64,
    n: u32,
) -> Result<f64> {
    params.expect_arch(Arch::Gru)?;
    if !(rho_sq >= 0.0) || !rho_sq.is_finite() {
        return Err(Error::InvalidParams(format!(
            "squared local radius rho_sq = {rho_sq} must be non-negative and finite"
        )));
    }
    match regime {
        UpdateRegime::Binary { alpha } => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::InvalidParams(format!(
                    "closed-gate fraction alpha = {alpha} must lie in [0, 1]"
                )));
            }
            if alpha == 1.0 {
                return Ok(0.0);
            }
            let x = alpha * rho_sq;
            let mut acc = 0.0;
            let mut term = 1.0;
            for _ in 0..=n {
                acc += term;
                term *= x;
                if !acc.is_finite() {
                    break;
                }
            }
            Ok((1.0 - alpha) * acc)
        }
        UpdateRegime::Frozen => {
            if params.gain.z != 0.0 || params.bias_var.z != 0.0 {
                return Err(Error::UnsupportedRegime(
                    "the frozen-update moment formula needs a deterministic shared gate \
                     (zero update gain and zero update bias variance)"
                        .into(),
                ));
            }
            let z = sigmoid(params.bias_mean.z);
            let w = (1.0 - z) * rho_sq.sqrt();
            if z == 0.0 {
                return Ok(w.powi(2 * n as i32));
            }
            if w == 0.0 {
                return Ok(z.powi(2 * n as i32));
            }
            let nf = n as f64;
            let ln_z = z.ln();
            let ln_w = w.ln();
            let ln_fact_n = ln_gamma(nf + 1.0);
            let mut exponents = Vec::with_capacity(n as usize + 1);
            let mut max_m = f64::NEG_INFINITY;
            for q in 0..=n {
                let qf = q as f64;
                let ln_binom = ln_fact_n - ln_gamma(qf + 1.0) - ln_gamma(nf - qf + 1.0);
                let m = 2.0 * (ln_binom + (nf - qf) * ln_z + qf * ln_w);
                max_m = max_m.max(m);
                exponents.push(m);
            }
            let sum: f64 = exponents.iter().map(|&m| (m - max_m).exp()).sum();
            Ok(max_m.exp() * sum)
        }
    }
}

/// Limit of the binary-regime moment sequence, `(1−α)/(1−αρ²)`, defined when
/// the geometric series converges (`α ρ² < 1`).
pub fn gelfand_binary_limit(alpha: f64, rho_sq: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!(
            "closed-gate fraction alpha = {alpha} must lie in [0, 1]"
        )));
    }
    if !(rho_sq >= 0.0) || !rho_sq.is_finite() {
        return Err(Error::InvalidParams(format!(
            "squared local radius rho_sq = {rho_sq} must be non-negative and finite"
        )));
    }
    if alpha * rho_sq >= 1.0 {
        return Err(Error::UnsupportedRegime(format!(
            "the moment sequence diverges: alpha * rho_sq = {} ≥ 1",
            alpha * rho_sq
        )));
    }
    Ok((1.0 - alpha) / (1.0 - alpha * rho_sq))
}

/// Asymptotic growth rate `lim μ_n^{1/2n} = z + (1−z)√ρ²` of the
/// frozen-update moment sequence — the norm-moment estimate of the spectral
/// radius for a shared deterministic gate `z = σ(b_z)`.
pub fn gelfand_frozen_radius(params: &GatedNetParams, rho_sq: f64) -> Result<f64> {
    params.expect_arch(Arch::Gru)?;
    if params.gain.z != 0.0 || params.bias_var.z != 0.0 {
        return Err(Error::UnsupportedRegime(
            "the frozen-update radius needs a deterministic shared gate \
             (zero update gain and zero update bias variance)"
                .into(),
        ));
    }
    if !(rho_sq >= 0.0) || !rho_sq.is_finite() {
        return Err(Error::InvalidParams(format!(
            "squared local radius rho_sq = {rho_sq} must be non-negative and finite"
        )));
    }
    let z = sigmoid(params.bias_mean.z);
    Ok(z + (1.0 - z) * rho_sq.sqrt())
}
