//! Spectral-support curves of the instantaneous state-to-state Jacobian.
//!
//! In the large-width limit the eigenvalue density of the Jacobian of a
//! random gated network is supported on `{λ : S(λ) ≥ 0}`, where S is a
//! weighted second moment of inverse squared distances to the gate values:
//! the update (GRU) or forget (LSTM) gate contributes random pole locations
//! inside the unit interval, every other factor contributes nonnegative pole
//! weights. The curves here are built from a pooled sample of per-neuron
//! gate statistics — simulated, Monte-Carlo, or analytic — so one code path
//! serves both the empirical and the theoretical side of a comparison.

use crate::activation::sigmoid;
use crate::error::{Error, Result};
use crate::moments::SampleMoments;
use crate::params::{Arch, GatedNetParams};
use crate::spectral::marching::{self, GridSpec};
use num_complex::Complex64;

/// Distances below this (squared) count as "on a pole"; the curve value
/// there is effectively +∞.
const MIN_DIST_SQ: f64 = 1e-300;

/// Relative offset used to start root brackets just outside the pole range.
const BRACKET_EPS: f64 = 1e-9;

/// Pole-bin budget for contour extraction: pools larger than this are
/// consolidated onto a weight-preserving grid before marching (the induced
/// curve shift is second order in the bin width).
const CONTOUR_TERM_BUDGET: usize = 2048;

/// Which member of the GRU support-curve family to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GruCurveKind {
    /// Full curve: per-sample pole weight
    /// `ρ² (1−z)² + a_z² z'² (h_prev − φ(y))²`.
    Exact,
    /// Outer bounding curve: the squared state deviation is replaced by its
    /// pooled mean ν² = E[(h_prev − φ(y))²], giving weights
    /// `ρ² (1−z)² + a_z² ν² z'²`. Encloses the exact support.
    BoundingOuter,
    /// Inner bounding curve: the gate-derivative term is dropped (ν = 0),
    /// leaving `ρ² (1−z)²`. Contained in the exact support; coincides with
    /// it at fixed points, where h = φ(y) exactly.
    BoundingInner,
}

impl GruCurveKind {
    /// The recommended curve for a parameter set: the exact per-sample curve
    /// when one of the gate gains vanishes (the gate-derivative term is then
    /// zero or the gate statistics decouple from the state), and the pooled
    /// outer bound when both gains are active.
    pub fn preferred(params: &GatedNetParams) -> Self {
        if params.gain.z == 0.0 || params.gain.r == 0.0 {
            GruCurveKind::Exact
        } else {
            GruCurveKind::BoundingOuter
        }
    }
}

/// GRU support curve
/// `S(λ) = Σ_i w_i / |λ − z_i|² − 1` over normalized pole weights `w_i`.
#[derive(Clone, Debug)]
pub struct GruSCurve {
    /// (pole `z_i`, normalized weight `w_i`).
    terms: Vec<(f64, f64)>,
    /// Pole range over *all* samples, including zero-weight ones (those are
    /// exact point eigenvalues of the Jacobian and must stay inside any
    /// radius bracket).
    z_lo: f64,
    z_hi: f64,
    kind: GruCurveKind,
    rho_sq: f64,
}

impl GruSCurve {
    pub fn from_moments(
        params: &GatedNetParams,
        moments: &SampleMoments,
        kind: GruCurveKind,
    ) -> Result<Self> {
        params.expect_arch(Arch::Gru)?;
        params.validate()?;
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
        let rho_sq = gru_rho_sq_from_moments(params, moments)?;
        let nu_sq = match kind {
            GruCurveKind::BoundingOuter => moments.nu_sq()?,
            _ => 0.0,
        };
        let a_z_sq = params.gain.z * params.gain.z;
        let mut terms = Vec::with_capacity(samples.len());
        let (mut z_lo, mut z_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in samples {
            let open = 1.0 - s.z;
            let gate_term = match kind {
                GruCurveKind::Exact => {
                    let dev = s.h_prev - s.phi_y;
                    a_z_sq * s.z_prime * s.z_prime * dev * dev
                }
                GruCurveKind::BoundingOuter => a_z_sq * s.z_prime * s.z_prime * nu_sq,
                GruCurveKind::BoundingInner => 0.0,
            };
            let w = s.weight / w_total * (rho_sq * open * open + gate_term);
            if !w.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite pole weight from sample (z = {}, h_prev = {})",
                    s.z, s.h_prev
                )));
            }
            z_lo = z_lo.min(s.z);
            z_hi = z_hi.max(s.z);
            terms.push((s.z, w));
        }
        Ok(GruSCurve {
            terms,
            z_lo,
            z_hi,
            kind,
            rho_sq,
        })
    }

    /// Analytic curve at a self-consistent fixed point with state variance
    /// `c_h`: the update-gate preactivation is Gaussian with mean `b̄_z` and
    /// variance `a_z² c_h + v_z`, each quadrature node contributes a pole at
    /// `z = σ(·)` with weight `ρ_t² (1 − z)²`, and the gate-derivative term
    /// vanishes because `h = φ(y)` exactly. Nodes whose quadrature weight
    /// underflows are dropped — they are artifacts of the rule's tail, not
    /// point masses of the spectrum.
    pub fn at_fixed_point(params: &GatedNetParams, c_h: f64) -> Result<Self> {
        params.expect_arch(Arch::Gru)?;
        params.validate()?;
        if !(c_h >= 0.0) || !c_h.is_finite() {
            return Err(Error::InvalidParams(format!(
                "state variance c_h = {c_h} must be finite and ≥ 0"
            )));
        }
        let rho_sq = crate::mft::rho_t_sq(params, c_h)?;
        let mean = params.bias_mean.z;
        let var = params.gain.z * params.gain.z * c_h + params.bias_var.z;
        let mut terms = Vec::new();
        let (mut z_lo, mut z_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut push = |arg: f64, w_node: f64| {
            let z = sigmoid(arg);
            // σ(−x) = 1 − σ(x), exact where the subtraction would underflow.
            let open = sigmoid(-arg);
            z_lo = z_lo.min(z);
            z_hi = z_hi.max(z);
            terms.push((z, w_node * rho_sq * open * open));
        };
        if var <= 0.0 {
            push(mean, 1.0);
        } else {
            let rule = crate::mft::GaussHermite::new(403);
            let w_sum: f64 = rule.weights.iter().sum();
            let scale = (2.0 * var).sqrt();
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                if w > 0.0 {
                    push(mean + scale * x, w / w_sum);
                }
            }
        }
        Ok(GruSCurve {
            terms,
            z_lo,
            z_hi,
            kind: GruCurveKind::BoundingInner,
            rho_sq,
        })
    }

    pub fn kind(&self) -> GruCurveKind {
        self.kind
    }

    /// Squared candidate-channel gain ρ² the curve was built with.
    pub fn rho_sq(&self) -> f64 {
        self.rho_sq
    }

    /// Curve value; ≥ 0 inside the predicted support, +∞ on a weighted pole.
    pub fn s(&self, lambda: Complex64) -> f64 {
        eval_terms(&self.terms, lambda.re, lambda.im) - 1.0
    }

    /// Largest |λ| over the predicted support. The poles are real and the
    /// weights nonnegative, so among points of equal modulus S is maximal on
    /// the positive real axis; the radius is therefore the unique zero of S
    /// beyond the largest pole.
    pub fn spectral_radius(&self) -> Result<f64> {
        let terms = &self.terms;
        axis_root(&|x| eval_terms(terms, x, 0.0) - 1.0, self.z_hi, 1.0)
    }

    /// Closed contour(s) of S = 0 bounding the support, extracted by
    /// marching squares on a `grid_n × grid_n` window fitted to the support,
    /// with `refine` bisection steps per crossing.
    pub fn boundary(&self, grid_n: usize, refine: usize) -> Result<Vec<Vec<Complex64>>> {
        let terms = compress_terms(&self.terms, CONTOUR_TERM_BUDGET);
        let sf = move |x: f64, y: f64| eval_terms(&terms, x, y) - 1.0;
        contours_of(&sf, self.z_lo, self.z_hi, grid_n, refine)
    }
}

/// LSTM support curve
/// `S(λ) = E[q]/|λ|² + Σ_i w_i p_i /|λ − f_i|² − 1`, with the output-gate
/// weight `q = a_o² o'² φ(c)²` pooled (its pole sits at the origin for every
/// sample) and the interior weight
/// `p = o² φ'(c)² (a_f² c_prev² f'² + a_i² i'² φ(y)² + a_h² i² φ'(y)²)`
/// carried per sample at the forget-gate pole `f_i`.
#[derive(Clone, Debug)]
pub struct LstmSCurve {
    /// (pole `f_i`, normalized weight `w_i p_i`).
    terms: Vec<(f64, f64)>,
    /// Pooled output-gate weight at the origin pole.
    e_q: f64,
    f_lo: f64,
    f_hi: f64,
}

impl LstmSCurve {
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
        let mut e_q = 0.0;
        let (mut f_lo, mut f_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in samples {
            let w = s.weight / w_total;
            e_q += w * s.q(params);
            let wp = w * s.p(params);
            if !wp.is_finite() || !e_q.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite pole weight from sample (f = {}, c = {})",
                    s.f, s.c
                )));
            }
            f_lo = f_lo.min(s.f);
            f_hi = f_hi.max(s.f);
            terms.push((s.f, wp));
        }
        Ok(LstmSCurve {
            terms,
            e_q,
            f_lo,
            f_hi,
        })
    }

    /// Pooled output-gate weight E[q].
    pub fn e_q(&self) -> f64 {
        self.e_q
    }

    /// Curve value; ≥ 0 inside the predicted support.
    pub fn s(&self, lambda: Complex64) -> f64 {
        let origin = self.e_q / (lambda.norm_sqr()).max(MIN_DIST_SQ);
        origin + eval_terms(&self.terms, lambda.re, lambda.im) - 1.0
    }

    /// Largest |λ| over the predicted support (zero of S beyond the largest
    /// pole on the positive real axis; the origin pole of the output-gate
    /// term is included in the bracket).
    pub fn spectral_radius(&self) -> Result<f64> {
        let pole_hi = self.f_hi.max(0.0);
        axis_root(&|x| self.s(Complex64::new(x, 0.0)), pole_hi, 1.0)
    }

    pub fn boundary(&self, grid_n: usize, refine: usize) -> Result<Vec<Vec<Complex64>>> {
        let terms = compress_terms(&self.terms, CONTOUR_TERM_BUDGET);
        let e_q = self.e_q;
        let sf = move |x: f64, y: f64| {
            let origin = e_q / (x * x + y * y).max(MIN_DIST_SQ);
            origin + eval_terms(&terms, x, y) - 1.0
        };
        contours_of(&sf, self.f_lo.min(0.0), self.f_hi.max(0.0), grid_n, refine)
    }
}

/// Pooled-moment estimate of the squared candidate-channel gain
/// `ρ² = a_h² E[φ'(y)²] (E[r²] + a_r² E[r'²] E[h_prev²])` — the combined
/// weight a perturbation picks up through the candidate branch and the
/// reset-gate side channel in one step.
pub fn gru_rho_sq_from_moments(
    params: &GatedNetParams,
    moments: &SampleMoments,
) -> Result<f64> {
    params.expect_arch(Arch::Gru)?;
    let samples = moments.gru_samples()?;
    let mut w_total = 0.0;
    let (mut c_phip, mut c_r, mut c_rp, mut c_h) = (0.0, 0.0, 0.0, 0.0);
    for s in samples {
        w_total += s.weight;
        c_phip += s.weight * s.phi_prime_y * s.phi_prime_y;
        c_r += s.weight * s.r * s.r;
        c_rp += s.weight * s.r_prime * s.r_prime;
        c_h += s.weight * s.h_prev * s.h_prev;
    }
    if !(w_total > 0.0) {
        return Err(Error::InvalidParams(
            "total sample weight must be positive".into(),
        ));
    }
    let (a_h, a_r) = (params.gain.h, params.gain.r);
    Ok(a_h * a_h * (c_phip / w_total)
        * (c_r / w_total + a_r * a_r * (c_rp / w_total) * (c_h / w_total)))
}

/// Spectral radius when the update gate is frozen at a deterministic bias
/// (`a_z = 0`, `v_z = 0`): the support is the circle
/// `|λ − σ(b_z)| = (1 − σ(b_z)) ρ_t`, so the radius is
/// `σ(b_z) + (1 − σ(b_z)) ρ_t`.
pub fn gru_update_frozen_radius(params: &GatedNetParams, rho_t: f64) -> Result<f64> {
    params.expect_arch(Arch::Gru)?;
    params.validate()?;
    if params.gain.z != 0.0 || params.bias_var.z != 0.0 {
        return Err(Error::InvalidParams(
            "frozen-update radius requires a_z = 0 and a deterministic update bias".into(),
        ));
    }
    if !(rho_t >= 0.0) || !rho_t.is_finite() {
        return Err(Error::InvalidParams(format!(
            "candidate-channel gain ρ_t = {rho_t} must be finite and ≥ 0"
        )));
    }
    let z = sigmoid(params.bias_mean.z);
    Ok(z + (1.0 - z) * rho_t)
}

fn eval_terms(terms: &[(f64, f64)], x: f64, y: f64) -> f64 {
    let mut acc = 0.0;
    for &(pole, w) in terms {
        if w == 0.0 {
            continue;
        }
        let dx = x - pole;
        acc += w / (dx * dx + y * y).max(MIN_DIST_SQ);
    }
    acc
}

/// Weight-preserving consolidation of pole terms onto at most `budget` bins
/// (the bin pole is the weighted mean of its members). Zero-weight terms are
/// dropped — they do not move the curve.
fn compress_terms(terms: &[(f64, f64)], budget: usize) -> Vec<(f64, f64)> {
    let live: Vec<(f64, f64)> = terms.iter().copied().filter(|&(_, w)| w != 0.0).collect();
    if live.len() <= budget {
        return live;
    }
    let lo = live.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
    let hi = live.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-12) {
        let w: f64 = live.iter().map(|t| t.1).sum();
        let zw: f64 = live.iter().map(|t| t.0 * t.1).sum();
        return vec![(zw / w, w)];
    }
    let mut w_bin = vec![0.0; budget];
    let mut zw_bin = vec![0.0; budget];
    for &(z, w) in &live {
        let k = (((z - lo) / (hi - lo) * budget as f64) as usize).min(budget - 1);
        w_bin[k] += w;
        zw_bin[k] += w * z;
    }
    (0..budget)
        .filter(|&k| w_bin[k] > 0.0)
        .map(|k| (zw_bin[k] / w_bin[k], w_bin[k]))
        .collect()
}

/// Root of a curve value along the real axis on one side of the pole range:
/// `dir = +1` walks right from `start`, `dir = -1` walks left. The curve is
/// strictly monotone away from the poles, so the bracketed root is unique.
fn axis_root(s: &dyn Fn(f64) -> f64, start: f64, dir: f64) -> Result<f64> {
    let eps = BRACKET_EPS * start.abs().max(1.0);
    let near = start + dir * eps;
    if !(s(near) > 0.0) {
        return Err(Error::Degenerate(format!(
            "no continuous support beyond the gate poles (curve ≤ 0 at {near:.6e}); \
             the spectrum reduces to the gate values themselves"
        )));
    }
    let mut step = eps.max(1e-6);
    let mut far = near + dir * step;
    let mut tries = 0;
    while s(far) > 0.0 {
        step *= 2.0;
        far = near + dir * step;
        tries += 1;
        if tries > 200 {
            return Err(Error::NonConvergence(
                "support bracket failed to close after 200 doublings".into(),
            ));
        }
    }
    let (mut inside, mut outside) = (near, far);
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if s(mid) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// Largest |y| with curve ≥ 0 on the vertical line through `x`, if any. The
/// curve is strictly decreasing in |y|, so a bracket-and-bisect from the
/// axis is exact.
fn vertical_extent(s: &dyn Fn(f64, f64) -> f64, x: f64) -> Option<f64> {
    if !(s(x, 0.0) > 0.0) {
        return None;
    }
    let mut step = 1e-3;
    let mut hi = step;
    let mut tries = 0;
    while s(x, hi) > 0.0 {
        step *= 2.0;
        hi = step;
        tries += 1;
        if tries > 200 {
            return None;
        }
    }
    let (mut lo, mut up) = (0.0, hi);
    for _ in 0..80 {
        let mid = 0.5 * (lo + up);
        if s(x, mid) > 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    Some(0.5 * (lo + up))
}

/// Fits a window around the support (real-axis extent by bracketing, vertical
/// extent by a 65-point scan) and extracts the zero contours in it.
fn contours_of(
    s: &(dyn Fn(f64, f64) -> f64 + Sync),
    pole_lo: f64,
    pole_hi: f64,
    grid_n: usize,
    refine: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let x_right = axis_root(&|x| s(x, 0.0), pole_hi, 1.0)?;
    let x_left = axis_root(&|x| s(x, 0.0), pole_lo, -1.0)?;
    let mut y_top: f64 = 0.0;
    let scan = 64;
    for k in 0..=scan {
        let x = x_left + (x_right - x_left) * k as f64 / scan as f64;
        if let Some(y) = vertical_extent(&|x, y| s(x, y), x) {
            y_top = y_top.max(y);
        }
    }
    y_top = y_top.max(1e-3 * (x_right - x_left).abs());
    let pad_x = 0.08 * (x_right - x_left).max(1e-6);
    let pad_y = 0.08 * (2.0 * y_top).max(1e-6);
    let grid = GridSpec {
        x0: x_left - pad_x,
        x1: x_right + pad_x,
        y0: -y_top - pad_y,
        y1: y_top + pad_y,
        nx: grid_n.max(8),
        ny: grid_n.max(8),
    };
    let loops = marching::zero_contours(&|x, y| s(x, y), &grid, refine);
    if loops.is_empty() {
        return Err(Error::Numeric(
            "no zero contour found inside the fitted window".into(),
        ));
    }
    Ok(loops
        .into_iter()
        .map(|lp| lp.into_iter().map(|(x, y)| Complex64::new(x, y)).collect())
        .collect())
}
