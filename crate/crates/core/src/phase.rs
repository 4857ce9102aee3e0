//! Fixed-point phase structure of the GRU second-moment map in the
//! (candidate gain, reset gain) plane, and the marginal-stability analysis
//! of nonzero fixed points under a saturating update gate.
//!
//! Classification rests on two facts about fixed points: the origin is a
//! fixed point whenever the candidate channel is centered, and a fixed
//! point's Jacobian support touches the unit circle exactly when its shaping
//! parameter ρ₀ reaches 1 (the update-gate term of the Jacobian vanishes on
//! a fixed point, so the gate gain drops out of the stability question).

use crate::error::{Error, Result};
use crate::mft::{gru_fp_solve, FpBranch};
use crate::params::{Arch, GatedNetParams, Gate};
use crate::spectral::asymptotics::{binary_gate_closed_fraction, pinching_rate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Phase of the autonomous mean-field dynamics at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// The origin is the only fixed point and it is stable: activity decays.
    OriginOnly,
    /// The origin is still stable but a pair of nonzero second-moment roots
    /// coexists with it (the larger root is the stable one).
    Coexistence,
    /// The origin has lost stability; activity is self-sustaining.
    OriginUnstable,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::OriginOnly => "origin-only",
            Region::Coexistence => "coexistence",
            Region::OriginUnstable => "origin-unstable",
        }
    }

    /// Stable small integer for raster CSV output.
    pub fn code(self) -> u8 {
        match self {
            Region::OriginOnly => 0,
            Region::Coexistence => 1,
            Region::OriginUnstable => 2,
        }
    }
}

/// Full fixed-point diagnosis of one parameter point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhasePoint {
    pub a_h: f64,
    pub a_r: f64,
    /// Number of fixed points, the origin included.
    pub n_fixed_points: usize,
    pub zero_stable: bool,
    pub region: Region,
    /// Shaping parameters ρ₀ of the nonzero fixed points, ascending in their
    /// second moment.
    pub rho0: Vec<f64>,
    /// Second moments of the nonzero fixed points, ascending.
    pub c_h: Vec<f64>,
    /// Marginal-stability condition `α ρ₀² < 1` evaluated at the
    /// smaller-ρ₀ nonzero fixed point (false when no nonzero point exists).
    pub marginal: bool,
}

/// Classifies one parameter point from its full fixed-point list. `beta` is
/// the scaled update-gate offset `b_z/a_z` used by the marginal test.
pub fn classify_point(params: &GatedNetParams, beta: f64) -> Result<PhasePoint> {
    let sols = gru_fp_solve(params)?;
    let zero = sols
        .iter()
        .find(|s| s.branch == FpBranch::Zero)
        .ok_or_else(|| {
            Error::UnsupportedRegime(
                "phase classification assumes a centered candidate channel so that the \
                 origin is a fixed point"
                    .into(),
            )
        })?;
    let nonzero: Vec<_> = sols.iter().filter(|s| s.branch != FpBranch::Zero).collect();
    let region = if !zero.stable {
        Region::OriginUnstable
    } else if !nonzero.is_empty() {
        Region::Coexistence
    } else {
        Region::OriginOnly
    };
    let marginal = match nonzero
        .iter()
        .min_by(|a, b| a.rho0.partial_cmp(&b.rho0).expect("finite rho0"))
    {
        Some(s) => {
            let alpha = binary_gate_closed_fraction(beta, s.c_h)?;
            alpha * s.rho0 * s.rho0 < 1.0
        }
        None => false,
    };
    Ok(PhasePoint {
        a_h: params.gain.get(Gate::H),
        a_r: params.gain.get(Gate::R),
        n_fixed_points: sols.len(),
        zero_stable: zero.stable,
        region,
        rho0: nonzero.iter().map(|s| s.rho0).collect(),
        c_h: nonzero.iter().map(|s| s.c_h).collect(),
        marginal,
    })
}

/// Region label alone (marginal test skipped).
pub fn classify(params: &GatedNetParams) -> Result<Region> {
    Ok(classify_point(params, 0.0)?.region)
}

/// Marginal-stability test of the smaller-ρ₀ nonzero fixed point:
/// `ρ₀² < 1/α` with `α = ½ erfc(β/√(2 C_h))`. At β = 0 this reduces to
/// `ρ₀ < √2`. Errors when no nonzero fixed point exists.
pub fn marginal_region(params: &GatedNetParams, beta: f64) -> Result<bool> {
    let point = classify_point(params, beta)?;
    if point.rho0.is_empty() {
        return Err(Error::Degenerate(
            "no nonzero fixed point at this parameter point; the marginal test does not apply"
                .into(),
        ));
    }
    Ok(point.marginal)
}

/// A completed phase-plane sweep: classified nodes plus any per-node
/// failures (the sweep continues past them).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub points: Vec<PhasePoint>,
    /// `(a_h, a_r, error)` triples for nodes whose classification failed.
    pub failures: Vec<(f64, f64, String)>,
}

/// Classifies the cartesian grid `a_h_values × a_r_values` (row-major in
/// `a_h`), reusing `base` for activation and biases.
pub fn phase_sweep(
    base: &GatedNetParams,
    a_h_values: &[f64],
    a_r_values: &[f64],
    beta: f64,
) -> Result<PhaseSweep> {
    base.expect_arch(Arch::Gru)?;
    base.validate()?;
    let cells: Vec<(f64, f64)> = a_h_values
        .iter()
        .flat_map(|&ah| a_r_values.iter().map(move |&ar| (ah, ar)))
        .collect();
    let classified: Vec<(f64, f64, Result<PhasePoint>)> = cells
        .par_iter()
        .map(|&(a_h, a_r)| {
            let params = base.clone().with_gain(Gate::H, a_h).with_gain(Gate::R, a_r);
            (a_h, a_r, classify_point(&params, beta))
        })
        .collect();
    let mut points = Vec::with_capacity(classified.len());
    let mut failures = Vec::new();
    for (a_h, a_r, res) in classified {
        match res {
            Ok(p) => points.push(p),
            Err(e) => failures.push((a_h, a_r, e.to_string())),
        }
    }
    Ok(PhaseSweep { points, failures })
}

/// Candidate gain at which the origin destabilizes, as a function of a
/// deterministic reset bias: `a_h* = 1/σ(b_r) = 1 + e^{−b_r}`. (At the
/// origin the state variance vanishes, so the reset gain does not enter.)
pub fn critical_candidate_gain(b_r: f64) -> f64 {
    1.0 + (-b_r).exp()
}

/// Largest reset gain probed before a fold is declared absent.
const FOLD_SEARCH_CAP: f64 = 1000.0;

/// Traces the fold line bounding the coexistence region: for each candidate
/// gain in (√2, 2), the smallest reset gain at which nonzero fixed points
/// appear, located by bisection to absolute accuracy `tol`. A `None` entry
/// flags a candidate gain whose fold lies beyond reset gain 1000 (the curve
/// leaves the window as `a_h → √2⁺`).
pub fn bifurcation_curve(
    base: &GatedNetParams,
    a_h_values: &[f64],
    tol: f64,
) -> Result<Vec<(f64, Option<f64>)>> {
    base.expect_arch(Arch::Gru)?;
    base.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance {tol} must be positive")));
    }
    let has_nonzero = |a_h: f64, a_r: f64| -> Result<bool> {
        let params = base.clone().with_gain(Gate::H, a_h).with_gain(Gate::R, a_r);
        Ok(gru_fp_solve(&params)?
            .iter()
            .any(|s| s.branch != FpBranch::Zero))
    };
    a_h_values
        .par_iter()
        .map(|&a_h| {
            let sqrt2 = std::f64::consts::SQRT_2;
            if !(a_h > sqrt2) || a_h >= 2.0 {
                return Err(Error::InvalidParams(format!(
                    "the fold line is defined for candidate gains in (√2, 2); got {a_h}"
                )));
            }
            // Nonzero roots need a reset gain of at least √8 ≈ 2.83 at any
            // candidate gain below 2, so a_r = 2 is a safe stable-side start.
            let mut lo = 2.0;
            if has_nonzero(a_h, lo)? {
                return Err(Error::Numeric(format!(
                    "nonzero roots already present at reset gain {lo} for candidate gain {a_h}"
                )));
            }
            let mut hi = 4.0;
            while !has_nonzero(a_h, hi)? {
                hi *= 2.0;
                if hi > FOLD_SEARCH_CAP {
                    return Ok((a_h, None));
                }
            }
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if has_nonzero(a_h, mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok((a_h, Some(0.5 * (lo + hi))))
        })
        .collect()
}

/// Marginal-stability diagnostics of one nonzero fixed point when the update
/// gate saturates (gain → ∞ at fixed offset ratio `beta = b_z/a_z`).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MarginalPoint {
    pub branch: FpBranch,
    pub c_h: f64,
    /// Shaping parameter of the fixed point (local radius at updating sites).
    pub rho0: f64,
    /// Fraction of sites whose gate saturates at z = 0 (fully updating).
    pub alpha: f64,
    /// `α ρ₀² < 1`: the support pinches toward — without crossing — the
    /// unit circle as the gate gain grows.
    pub marginal: bool,
    /// Exponential pinching rate of the gap at λ = 1, where defined
    /// (marginal fixed points with ρ₀ > 1).
    pub pinch_rate: Option<f64>,
}

/// Evaluates the marginal-stability criteria at every nonzero fixed point of
/// `params` (the fixed-point condition itself does not involve the update
/// gate, so `params` may carry any update gain).
pub fn marginal_analysis(params: &GatedNetParams, beta: f64) -> Result<Vec<MarginalPoint>> {
    let sols = gru_fp_solve(params)?;
    sols.iter()
        .filter(|s| s.branch != FpBranch::Zero)
        .map(|s| {
            let alpha = binary_gate_closed_fraction(beta, s.c_h)?;
            let marginal = alpha * s.rho0 * s.rho0 < 1.0;
            let pinch_rate = if marginal && s.rho0 > 1.0 {
                Some(pinching_rate(s.rho0, beta, s.c_h)?)
            } else {
                None
            };
            Ok(MarginalPoint {
                branch: s.branch,
                c_h: s.c_h,
                rho0: s.rho0,
                alpha,
                marginal,
                pinch_rate,
            })
        })
        .collect()
}
