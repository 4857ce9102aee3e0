//! Trace of the resolvent `G(λ) = E tr[(λ − J)⁻¹]/n` and the eigenvalue
//! density it generates, inside and outside the spectral support.
//!
//! The interior is characterized by a scalar auxiliary function F(λ) > 0
//! solving a self-consistency equation; outside the support F = 0 and G
//! reduces to a holomorphic pole average. The density is
//! `μ = (1/π) ∂_λ̄ G` — evaluated by central differences for the GRU and in
//! closed form (implicit-function derivative of F) for the LSTM.

use crate::error::{Error, Result};
use crate::moments::SampleMoments;
use crate::params::{Arch, GatedNetParams};
use num_complex::Complex64;
use std::f64::consts::PI;

const MIN_DIST_SQ: f64 = 1e-300;

/// GRU resolvent for a frozen reset channel (`a_r = 0`): each site carries a
/// pole at its gate value `z` and a shaping weight
/// `s = r² a_h² (1−z)² φ'(y)² + a_z² z'² (h_prev − φ(y))²`.
///
/// With reset weights active the self-consistency closure couples four
/// auxiliary functions and no longer reduces to one scalar equation; the
/// constructor rejects that regime (use the support curves instead).
#[derive(Clone, Debug)]
pub struct GruResolvent {
    /// (pole `z_i`, shaping `s_i`, weight `w_i`), Σw = 1.
    terms: Vec<(f64, f64, f64)>,
}

impl GruResolvent {
    pub fn from_moments(params: &GatedNetParams, moments: &SampleMoments) -> Result<Self> {
        params.expect_arch(Arch::Gru)?;
        params.validate()?;
        if params.gain.r != 0.0 {
            return Err(Error::UnsupportedRegime(
                "the scalar resolvent closure requires a_r = 0; with reset weights active \
                 the interior equations do not reduce to one auxiliary function"
                    .into(),
            ));
        }
        let samples = moments.gru_samples()?;
        if samples.is_empty() {
            return Err(Error::InvalidParams("empty moment pool".into()));
        }
        let w_total: f64 = samples.iter().map(|s| s.weight).sum();
        if !(w_total > 0.0) || !w_total.is_finite() {
            return Err(Error::InvalidParams(format!(
                "total sample weight {w_total} must be positive and finite"
            )));
        }
        let (a_h, a_z) = (params.gain.h, params.gain.z);
        let mut terms = Vec::with_capacity(samples.len());
        for smp in samples {
            let open = (1.0 - smp.z) * smp.r * a_h * smp.phi_prime_y;
            let dev = a_z * smp.z_prime * (smp.h_prev - smp.phi_y);
            let s = open * open + dev * dev;
            if !s.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite shaping weight from sample (z = {}, h_prev = {})",
                    smp.z, smp.h_prev
                )));
            }
            terms.push((smp.z, s, smp.weight / w_total));
        }
        Ok(GruResolvent { terms })
    }

    /// Support indicator `S(λ) = E[s/|λ−z|²] − 1` (≥ 0 inside).
    pub fn s(&self, lambda: Complex64) -> f64 {
        let mut acc = 0.0;
        for &(z, s, w) in &self.terms {
            if s == 0.0 || w == 0.0 {
                continue;
            }
            let dx = lambda.re - z;
            acc += w * s / (dx * dx + lambda.im * lambda.im).max(MIN_DIST_SQ);
        }
        acc - 1.0
    }

    /// Auxiliary scale F(λ): zero outside the support, otherwise the unique
    /// positive root of `1 = E[s/(|λ−z|² + F s)]`.
    pub fn f_aux(&self, lambda: Complex64) -> f64 {
        if !(self.s(lambda) > 0.0) {
            return 0.0;
        }
        let psi = |f: f64| -> f64 {
            let mut acc = 0.0;
            for &(z, s, w) in &self.terms {
                if s == 0.0 || w == 0.0 {
                    continue;
                }
                let dx = lambda.re - z;
                let d2 = dx * dx + lambda.im * lambda.im;
                acc += w * s / (d2 + f * s);
            }
            acc - 1.0
        };
        bisect_decreasing(&psi)
    }

    /// Trace of the resolvent. The same expression serves both branches:
    /// with F = 0 it is the holomorphic average `E[1/(λ−z)]`.
    pub fn g_trace(&self, lambda: Complex64) -> Complex64 {
        let f = self.f_aux(lambda);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(z, s, w) in &self.terms {
            if w == 0.0 {
                continue;
            }
            let diff = lambda - z;
            acc += w * diff.conj() / (diff.norm_sqr() + f * s).max(MIN_DIST_SQ);
        }
        acc
    }

    /// Absolutely continuous density `μ(λ) = (1/π) ∂_λ̄ G` by central
    /// differences with Wirtinger step `step` (F is re-solved at each of the
    /// four stencil points). Atoms are invisible to this estimate, and it
    /// loses accuracy within ~`step` of the support edge.
    pub fn density(&self, lambda: Complex64, step: f64) -> Result<f64> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParams(format!(
                "finite-difference step {step} must be positive"
            )));
        }
        let dx = Complex64::new(step, 0.0);
        let dy = Complex64::new(0.0, step);
        let gx = self.g_trace(lambda + dx) - self.g_trace(lambda - dx);
        let gy = self.g_trace(lambda + dy) - self.g_trace(lambda - dy);
        Ok(((gx + Complex64::i() * gy) / (4.0 * step)).re / PI)
    }
}

/// LSTM resolvent (any gains). Each site carries the forget pole `f`, the
/// output-gate weight `q = a_o² o'² φ(c)²`, and the interior weight
/// `p = o² φ'(c)² (a_f² c_prev² f'² + a_i² i'² φ(y)² + a_h² i² φ'(y)²)`;
/// the site's combined scale is `Q(λ) = |λ−f|² q + |λ|² p`.
#[derive(Clone, Debug)]
pub struct LstmResolvent {
    /// (pole `f_i`, `q_i`, `p_i`, weight `w_i`), Σw = 1.
    terms: Vec<(f64, f64, f64, f64)>,
}

impl LstmResolvent {
    pub fn from_moments(params: &GatedNetParams, moments: &SampleMoments) -> Result<Self> {
        params.expect_arch(Arch::Lstm)?;
        params.validate()?;
        let samples = moments.lstm_samples()?;
        if samples.is_empty() {
            return Err(Error::InvalidParams("empty moment pool".into()));
        }
        let w_total: f64 = samples.iter().map(|s| s.weight).sum();
        if !(w_total > 0.0) || !w_total.is_finite() {
            return Err(Error::InvalidParams(format!(
                "total sample weight {w_total} must be positive and finite"
            )));
        }
        let mut terms = Vec::with_capacity(samples.len());
        for smp in samples {
            let (q, p) = (smp.q(params), smp.p(params));
            if !q.is_finite() || !p.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite shaping weight from sample (f = {}, c = {})",
                    smp.f, smp.c
                )));
            }
            terms.push((smp.f, q, p, smp.weight / w_total));
        }
        Ok(LstmResolvent { terms })
    }

    /// Support indicator `S(λ) = E[q]/|λ|² + E[p/|λ−f|²] − 1` (≥ 0 inside).
    pub fn s(&self, lambda: Complex64) -> f64 {
        let a2 = lambda.norm_sqr();
        let mut acc = 0.0;
        for &(f, q, p, w) in &self.terms {
            if w == 0.0 {
                continue;
            }
            let dx = lambda.re - f;
            let b2 = dx * dx + lambda.im * lambda.im;
            acc += w * (q / a2.max(MIN_DIST_SQ) + p / b2.max(MIN_DIST_SQ));
        }
        acc - 1.0
    }

    /// Auxiliary scale F(λ): zero outside the support, otherwise the unique
    /// positive root of `1 = E[Q/(|λ|²|λ−f|² + F Q)]`.
    pub fn f_aux(&self, lambda: Complex64) -> f64 {
        if !(self.s(lambda) > 0.0) {
            return 0.0;
        }
        let a2 = lambda.norm_sqr();
        let psi = |fv: f64| -> f64 {
            let mut acc = 0.0;
            for &(f, q, p, w) in &self.terms {
                if w == 0.0 {
                    continue;
                }
                let dx = lambda.re - f;
                let b2 = dx * dx + lambda.im * lambda.im;
                let big_q = b2 * q + a2 * p;
                if big_q == 0.0 {
                    continue;
                }
                acc += w * big_q / (a2 * b2 + fv * big_q);
            }
            acc - 1.0
        };
        bisect_decreasing(&psi)
    }

    /// Trace of the resolvent; with F = 0 it reduces to the holomorphic
    /// average `1/λ + E[1/(λ−f)]`.
    pub fn g_trace(&self, lambda: Complex64) -> Complex64 {
        let f_val = self.f_aux(lambda);
        self.g_trace_at(lambda, f_val)
    }

    fn g_trace_at(&self, lambda: Complex64, f_val: f64) -> Complex64 {
        let a2 = lambda.norm_sqr();
        let lbar = lambda.conj();
        let mut acc = Complex64::new(0.0, 0.0);
        for &(f, q, p, w) in &self.terms {
            if w == 0.0 {
                continue;
            }
            let diff_bar = lbar - f;
            let b2 = diff_bar.norm_sqr();
            let big_q = b2 * q + a2 * p;
            let num = a2 * diff_bar + lbar * b2 + f_val * (diff_bar * q + lbar * p);
            let den = (a2 * b2 + f_val * big_q).max(MIN_DIST_SQ);
            acc += w * num / den;
        }
        acc
    }

    /// Absolutely continuous density inside the support, in closed form: the
    /// implicit-function derivative `∂_λ̄ F` is substituted into
    /// `μ = (1/π) ∂_λ̄ G`. Returns 0 outside the support. The atoms at the
    /// poles are not part of this estimate.
    pub fn density(&self, lambda: Complex64) -> f64 {
        let f_val = self.f_aux(lambda);
        if !(f_val > 0.0) {
            return 0.0;
        }
        let a2 = lambda.norm_sqr();
        let a4 = a2 * a2;
        let lbar = lambda.conj();
        // ∂_λ̄F = −E[(λ b⁴ q + (λ−f) a⁴ p)/D²] / E[Q²/D²]
        let mut d_num = Complex64::new(0.0, 0.0);
        let mut d_den = 0.0;
        for &(f, q, p, w) in &self.terms {
            if w == 0.0 {
                continue;
            }
            let diff = lambda - f;
            let b2 = diff.norm_sqr();
            let b4 = b2 * b2;
            let big_q = b2 * q + a2 * p;
            let d = (a2 * b2 + f_val * big_q).max(MIN_DIST_SQ);
            let d2 = d * d;
            d_num += w * (lambda * (b4 * q) + diff * (a4 * p)) / d2;
            d_den += w * big_q * big_q / d2;
        }
        if !(d_den > 0.0) {
            return 0.0;
        }
        let df = -d_num / d_den;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(f, q, p, w) in &self.terms {
            if w == 0.0 {
                continue;
            }
            let diff = lambda - f;
            let b2 = diff.norm_sqr();
            let b4 = b2 * b2;
            let big_q = b2 * q + a2 * p;
            let d = (a2 * b2 + f_val * big_q).max(MIN_DIST_SQ);
            let d2 = d * d;
            let direct = f_val * (b4 * q + a4 * p) + f_val * f_val * f * f * p * q;
            let chain = lbar * (b4 * q) + (lbar - f) * (a4 * p);
            acc += w * (direct - df * chain) / d2;
        }
        acc.re / PI
    }
}

/// Unique positive root of a continuous strictly decreasing function with
/// `psi(0) > 0` and `psi(F) → −1`: bracket by doubling, then bisect to
/// machine precision.
fn bisect_decreasing(psi: &dyn Fn(f64) -> f64) -> f64 {
    let mut hi = 1.0;
    let mut tries = 0;
    while psi(hi) > 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 600 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if psi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
