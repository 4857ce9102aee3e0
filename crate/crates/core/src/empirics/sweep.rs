//! Parameter sweeps pairing measured spectral radii with their predicted
//! values, and the log–log fits that extract scaling exponents.

use crate::empirics::eig::EigenCloud;
use crate::error::{Error, Result};
use crate::moments::SampleMoments;
use crate::net::{run_to_steady, sample_network, state_jacobian, RunOpts};
use crate::params::{Arch, GatedNetParams};
use crate::spectral::scurve::{GruCurveKind, GruSCurve, LstmSCurve};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One (parameter value, seed) cell of a radius sweep.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScalingPoint {
    /// Swept parameter value.
    pub value: f64,
    pub seed: u64,
    /// Spectral radius of the sampled Jacobian at the final steady state.
    pub radius_emp: f64,
    /// Radius predicted from the same run's measured gate statistics via the
    /// support curve.
    pub radius_theory: f64,
    /// Empirical steady state variance of the run.
    pub c_h: f64,
    pub stationary: bool,
}

/// Runs one network per (value, seed) cell: simulate to steady state, take
/// the exact Jacobian there, diagonalize, and predict the radius from the
/// pooled gate statistics of the same run. `configure` maps a swept value to
/// the full parameter set.
pub fn radius_scaling_sweep(
    configure: impl Fn(f64) -> GatedNetParams + Sync,
    values: &[f64],
    seeds: &[u64],
    opts: &RunOpts,
) -> Result<Vec<ScalingPoint>> {
    if values.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidParams("sweep needs at least one value and one seed".into()));
    }
    let cells: Vec<(f64, u64)> = values
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(value, seed)| {
            let params = configure(value);
            params.validate()?;
            let net = sample_network(&params, seed)?;
            let run = run_to_steady(&net, seed, opts)?;
            let j = state_jacobian(&net, run.final_state())?;
            let radius_emp = EigenCloud::from_jacobian(params.arch, &j)?.radius();
            let moments = SampleMoments::from_states(&run.snapshots)?;
            let radius_theory = match params.arch {
                Arch::Gru => GruSCurve::from_moments(&params, &moments, GruCurveKind::Exact)?
                    .spectral_radius()?,
                Arch::Lstm => LstmSCurve::from_moments(&params, &moments)?.spectral_radius()?,
                Arch::Vanilla => {
                    return Err(Error::UnsupportedRegime(
                        "radius sweeps cover the gated architectures".into(),
                    ))
                }
            };
            Ok(ScalingPoint {
                value,
                seed,
                radius_emp,
                radius_theory,
                c_h: run.c_h,
                stationary: run.stationary,
            })
        })
        .collect()
}

/// Averages the per-seed radii of a sweep into one (value, mean empirical
/// radius, mean predicted radius) row per swept value, preserving order.
pub fn pool_by_value(points: &[ScalingPoint]) -> Vec<(f64, f64, f64)> {
    let mut rows: Vec<(f64, f64, f64, usize)> = Vec::new();
    for p in points {
        match rows.iter_mut().find(|r| r.0 == p.value) {
            Some(r) => {
                r.1 += p.radius_emp;
                r.2 += p.radius_theory;
                r.3 += 1;
            }
            None => rows.push((p.value, p.radius_emp, p.radius_theory, 1)),
        }
    }
    rows.into_iter()
        .map(|(v, se, st, c)| (v, se / c as f64, st / c as f64))
        .collect()
}

/// Least-squares line through `(ln x, ln y)`: `y ≈ e^intercept · x^slope`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParams(format!(
            "xs ({}) and ys ({}) must align",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParams("need at least 2 points for a line".into()));
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0) || !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidParams(format!(
                "log–log fit needs positive finite data; got ({x}, {y})"
            )));
        }
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|v| (v - my) * (v - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all x values coincide; slope is undefined".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}
