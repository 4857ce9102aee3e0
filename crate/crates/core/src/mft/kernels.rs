//! Equal-time Gaussian kernels of the infinite-width gated network.
//!
//! At width n → ∞ every pre-activation of a GRU becomes a Gaussian field
//! whose variance is set by the steady second moment `C_h = ⟨h²⟩`:
//!
//! * update gate   ζ ~ N(m_z, a_z² C_h + v_z)
//! * reset gate    ξ ~ N(m_r, a_r² C_h + v_r)
//! * candidate     y ~ N(m_h, a_h² C_r C_h + v_h)
//!
//! with `C_r = ⟨σ(ξ)²⟩` feeding the candidate variance (reset value and
//! state at the same neuron decorrelate at large n, so the product's second
//! moment factorizes). The kernels below are the Gaussian averages of the
//! gate values and their derivatives that enter the fixed-point equations
//! and every spectral expectation.

use crate::activation::{sigmoid, sigmoid_prime};
use crate::mft::quadrature::{gauss_expect, gauss_expect_checked};
use crate::params::{Activation, Arch, GatedNetParams, Gate};
use crate::{Error, Result};
use statrs::function::erf::erfc;

/// Equal-time kernels of a GRU at steady second moment `c_h`.
#[derive(Clone, Copy, Debug)]
pub struct GruKernels {
    /// ⟨σ(ξ)²⟩ — second moment of the reset gate.
    pub c_r: f64,
    /// ⟨σ'(ξ)²⟩ — second moment of the reset-gate derivative.
    pub c_rprime: f64,
    /// ⟨σ(ζ)²⟩ — second moment of the update gate.
    pub c_z: f64,
    /// ⟨σ(ζ)⟩ — mean update gate (κ); `1 - κ` is the mean leak.
    pub kappa: f64,
    /// ⟨σ'(ζ)²⟩ — second moment of the update-gate derivative.
    pub c_zprime: f64,
    /// Mean of the candidate pre-activation y.
    pub mean_y: f64,
    /// Variance of the candidate pre-activation y.
    pub var_y: f64,
    /// ⟨φ(y)²⟩ — second moment of the candidate activation.
    pub c_phi: f64,
    /// ⟨φ'(y)²⟩ — second moment of the candidate slope.
    pub c_phiprime: f64,
    /// P(φ'(y) ≠ 0) — unit for tanh; the interior-interval probability for
    /// hard-saturating activations.
    pub eta: f64,
}

/// Gaussian moments of a logistic gate with pre-activation N(mean, var).
fn gate_kernels(mean: f64, var: f64) -> (f64, f64, f64) {
    let c = gauss_expect(mean, var, |x| {
        let s = sigmoid(x);
        s * s
    });
    let kappa = gauss_expect(mean, var, sigmoid);
    let c_prime = gauss_expect(mean, var, |x| {
        let s = sigmoid_prime(x);
        s * s
    });
    (c, kappa, c_prime)
}

fn gate_mean_var(params: &GatedNetParams, gate: Gate, c_h: f64) -> (f64, f64) {
    let a = params.gain.get(gate);
    (
        params.bias_mean.get(gate),
        a * a * c_h + params.bias_var.get(gate),
    )
}

/// Computes all equal-time GRU kernels at steady second moment `c_h`.
pub fn gru_kernels(params: &GatedNetParams, c_h: f64) -> Result<GruKernels> {
    params.expect_arch(Arch::Gru)?;
    params.validate()?;
    if !(c_h >= 0.0 && c_h.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "steady second moment must be finite and nonnegative, got {c_h}"
        )));
    }
    let (m_r, v_r) = gate_mean_var(params, Gate::R, c_h);
    let (m_z, v_z) = gate_mean_var(params, Gate::Z, c_h);
    let (c_r, _, c_rprime) = gate_kernels(m_r, v_r);
    let (c_z, kappa, c_zprime) = gate_kernels(m_z, v_z);

    let mean_y = params.bias_mean.get(Gate::H);
    let a_h = params.gain.get(Gate::H);
    let var_y = a_h * a_h * c_r * c_h + params.bias_var.get(Gate::H);

    let act = params.activation;
    let c_phi = gauss_expect_checked(mean_y, var_y, |y| {
        let p = act.apply(y);
        p * p
    });
    let c_phiprime = gauss_expect_checked(mean_y, var_y, |y| {
        let p = act.prime(y);
        p * p
    });
    let eta = match act {
        Activation::Tanh => 1.0,
        Activation::HardTanh => {
            if var_y <= 0.0 {
                if mean_y.abs() < 1.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                // P(-1 < y < 1) written with erfc for accuracy in both tails.
                let sd = var_y.sqrt();
                let upper = 0.5 * erfc((mean_y - 1.0) / (std::f64::consts::SQRT_2 * sd));
                let lower = 0.5 * erfc((mean_y + 1.0) / (std::f64::consts::SQRT_2 * sd));
                (upper - lower).clamp(0.0, 1.0)
            }
        }
    };

    Ok(GruKernels {
        c_r,
        c_rprime,
        c_z,
        kappa,
        c_zprime,
        mean_y,
        var_y,
        c_phi,
        c_phiprime,
        eta,
    })
}

/// The shaping parameter of the GRU Jacobian's spectral support,
///
/// `ρ² = a_h² ⟨φ'(y)²⟩ (C_r + a_r² C_r' C_h)`,
///
/// combining the direct candidate path (through the frozen reset value) and
/// the reset-modulation path (through the reset-gate slope). Returns ρ²; the
/// fixed-point stability threshold is ρ² = 1 and the disk-shaped support of
/// the leak-free network has radius ρ.
pub fn rho_t_sq(params: &GatedNetParams, c_h: f64) -> Result<f64> {
    let k = gru_kernels(params, c_h)?;
    let a_h = params.gain.get(Gate::H);
    let a_r = params.gain.get(Gate::R);
    Ok(a_h * a_h * k.c_phiprime * (k.c_r + a_r * a_r * k.c_rprime * c_h))
}
