//! Fixed points of the infinite-width GRU second-moment map.
//!
//! A time-independent state obeys `h = φ(y)` neuron-wise wherever the update
//! gate is not fully closed, so its second moment solves the scalar
//! self-consistency `C = ⟨φ(y)²⟩` with `y ~ N(m_h, a_h² C_r(C) C + v_h)`.
//! The solver brackets every root of `C - ⟨φ(y)²⟩` on a log grid and polishes
//! by bisection; stability of each root is read off the shaping parameter
//! ρ² evaluated there (the spectral support of the Jacobian at a fixed point
//! touches the unit circle exactly when ρ = 1, for any update-gate gain).

use crate::mft::kernels::{gru_kernels, rho_t_sq};
use crate::params::{Activation, Arch, GatedNetParams, Gate};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which solution branch of the second-moment map a root belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FpBranch {
    /// The trivial root `C = 0` (exists only for centered, noise-free
    /// candidate bias).
    Zero,
    /// The smaller of two nonzero roots (unstable as a map iteration).
    NonZeroLower,
    /// The largest nonzero root.
    NonZeroUpper,
}

/// One root of the second-moment self-consistency.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FixedPointSolution {
    pub branch: FpBranch,
    /// Steady second moment `C = ⟨h²⟩` at the fixed point.
    pub c_h: f64,
    /// Second moment of the candidate pre-activation there.
    pub c_y: f64,
    /// Shaping parameter ρ (square root of ρ²) of the Jacobian spectrum.
    pub rho0: f64,
    /// Linear stability of the fixed point: ρ < 1.
    pub stable: bool,
    /// Residual `C - ⟨φ(y)²⟩` at the returned root.
    pub residual: f64,
}

fn second_moment_residual(params: &GatedNetParams, c: f64) -> Result<f64> {
    let k = gru_kernels(params, c)?;
    Ok(c - k.c_phi)
}

/// Finds all fixed points of the GRU second-moment map.
///
/// Roots are bracketed on a 400-point log-spaced grid over [1e-12, 1]
/// (activations are bounded by 1, so no root can lie outside) and refined by
/// bisection to relative accuracy 1e-12. More than two nonzero roots would
/// contradict the shape of the map and is reported as a numeric failure.
pub fn gru_fp_solve(params: &GatedNetParams) -> Result<Vec<FixedPointSolution>> {
    params.expect_arch(Arch::Gru)?;
    params.validate()?;

    let zero_branch_exists =
        params.bias_mean.get(Gate::H) == 0.0 && params.bias_var.get(Gate::H) == 0.0;

    let grid = 400usize;
    let (lo_exp, hi_exp) = (-12.0_f64, 0.0_f64);
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_c = 10f64.powf(lo_exp);
    let mut prev_g = second_moment_residual(params, prev_c)?;
    for i in 1..=grid {
        let c = 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / grid as f64);
        let g = second_moment_residual(params, c)?;
        if prev_g == 0.0 {
            roots.push(prev_c);
        } else if prev_g * g < 0.0 {
            // Bisect to relative width 1e-12.
            let (mut a, mut b, mut ga) = (prev_c, c, prev_g);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if (b - a) <= 1e-12 * mid {
                    break;
                }
                let gm = second_moment_residual(params, mid)?;
                if gm == 0.0 {
                    a = mid;
                    b = mid;
                } else if ga * gm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    ga = gm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_c = c;
        prev_g = g;
    }
    // Deduplicate brackets that straddle grid joints.
    roots.dedup_by(|b, a| (*b - *a).abs() <= 1e-6 * b.max(*a));
    // The grid starts at 1e-12; anything that converged to the bottom edge is
    // the zero root seen through the finite bracket.
    roots.retain(|&c| c > 2e-12);

    if roots.len() > 2 {
        return Err(Error::Numeric(format!(
            "found {} nonzero second-moment roots; the map admits at most two",
            roots.len()
        )));
    }

    let mut out = Vec::new();
    if zero_branch_exists {
        out.push(solution_at(params, 0.0, FpBranch::Zero)?);
    }
    match roots.len() {
        0 => {}
        1 => out.push(solution_at(params, roots[0], FpBranch::NonZeroUpper)?),
        _ => {
            out.push(solution_at(params, roots[0], FpBranch::NonZeroLower)?);
            out.push(solution_at(params, roots[1], FpBranch::NonZeroUpper)?);
        }
    }
    Ok(out)
}

fn solution_at(params: &GatedNetParams, c: f64, branch: FpBranch) -> Result<FixedPointSolution> {
    let k = gru_kernels(params, c)?;
    let rho_sq = rho_t_sq(params, c)?;
    let rho0 = rho_sq.sqrt();
    Ok(FixedPointSolution {
        branch,
        c_h: c,
        c_y: k.var_y + k.mean_y * k.mean_y,
        rho0,
        stable: rho0 < 1.0,
        residual: c - k.c_phi,
    })
}

/// Perturbative nonzero fixed points of the zero-bias tanh GRU near the
/// critical candidate gain `a_h = 2`, as explicit functions of the reset
/// gain `a_r` and the offset `eps = a_h - 2`.
///
/// Expanding the second-moment map to quadratic order in `C` gives
/// `0 = ε + c₁ C + c₂ C²` with `c₁ = (a_r² - 8)/4·(-1)`-type coefficients;
/// the balance of the first two terms yields the pitchfork branch
/// `C = 4ε/(8 - a_r²)`, and for `a_r² > 8` the quadratic root
/// `C₀ = 6(a_r² - 8)/(3a_r⁴ + 24a_r² - 136)` survives at ε = 0 with linear
/// correction `f(a_r) ε/(a_r² - 8)`,
/// `f = 4(9u⁴ + 72u³ + 744u² - 11424u + 31552)/(3u² + 24u - 136)²`, u = a_r².
///
/// Returned values are `(branch, C)` pairs; the zero branch (always present
/// at zero bias) is omitted. Near the tricritical reset gain `a_r = √8` the
/// linear-in-ε structure collapses (the branch scales like √ε) and the
/// expansion is refused.
pub fn gru_fp_perturbative(a_r: f64, eps: f64) -> Result<Vec<(FpBranch, f64)>> {
    if !(a_r.is_finite() && a_r >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "reset gain must be finite and nonnegative, got {a_r}"
        )));
    }
    let sqrt8 = 8f64.sqrt();
    if (a_r - sqrt8).abs() <= 1e-3 {
        return Err(Error::Degenerate(
            "reset gain at the tricritical value √8: the nonzero branch scales like √ε and has \
             no linear-in-ε expansion"
                .into(),
        ));
    }
    let u = a_r * a_r;
    let pitchfork = 4.0 * eps / (8.0 - u);
    if u < 8.0 {
        // Supercritical side: a single nonzero branch exists only for ε > 0.
        return Ok(if eps > 0.0 {
            vec![(FpBranch::NonZeroUpper, pitchfork)]
        } else {
            vec![]
        });
    }
    // Subcritical side (u > 8): a quadratic root persists at ε = 0.
    let denom = 3.0 * u * u + 24.0 * u - 136.0;
    let c0 = 6.0 * (u - 8.0) / denom;
    let f = 4.0 * (9.0 * u.powi(4) + 72.0 * u.powi(3) + 744.0 * u * u - 11424.0 * u + 31552.0)
        / (denom * denom);
    let upper = c0 + f * eps / (u - 8.0);
    Ok(if eps > 0.0 {
        // The pitchfork root is negative here; only the quadratic branch is
        // physical, and the zero fixed point has already destabilized.
        vec![(FpBranch::NonZeroUpper, upper)]
    } else if eps < 0.0 {
        // Bistable window: a small unstable root (4|ε|/(u-8), which is what
        // the pitchfork expression evaluates to here) and the large stable
        // one.
        vec![
            (FpBranch::NonZeroLower, pitchfork),
            (FpBranch::NonZeroUpper, upper),
        ]
    } else {
        vec![(FpBranch::NonZeroUpper, c0)]
    })
}

/// Convenience: the perturbative branch list for a parameter set, reading
/// `a_r` and `eps = a_h - 2` off the gains. Requires zero biases and tanh.
pub fn gru_fp_perturbative_for(params: &GatedNetParams) -> Result<Vec<(FpBranch, f64)>> {
    params.expect_arch(Arch::Gru)?;
    if !params.zero_bias() || params.activation != Activation::Tanh {
        return Err(Error::UnsupportedRegime(
            "the perturbative fixed-point expansion assumes zero biases and tanh".into(),
        ));
    }
    gru_fp_perturbative(params.gain.get(Gate::R), params.gain.get(Gate::H) - 2.0)
}
