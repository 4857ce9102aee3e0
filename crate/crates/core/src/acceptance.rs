//! The acceptance suite: twelve end-to-end checks, each pinning one of the
//! library's quantitative claims against a fresh simulation at a documented
//! scale and tolerance — closed-form disk laws at the zero fixed point,
//! stability thresholds, support-curve agreement in chaotic steady states,
//! radius scaling exponents, slow-mode accumulation, switch-gate limit
//! densities, the fixed-point phase diagram, marginal-stability pinching,
//! norm-growth (Gelfand) consistency, and the single-site mean-field closure.
//!
//! Every check is deterministic given the seed base, reports a structured
//! verdict with its measured numbers, and is expected to pass at the default
//! width n = 1000. A slow host may fall back to n = 500, which widens every
//! tolerance by 1.5× as documented in the per-check details.

use crate::empirics::{
    cdf_near_one, compare_boundary, compare_disk, fit_loglog, norm_moment_sequence,
    pool_by_value, radius_scaling_sweep, EigenCloud,
};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mft::{
    dmft_steady_residual, gru_fp_perturbative_for, gru_fp_solve, single_site_mc, FpBranch,
    McOpts,
};
use crate::moments::SampleMoments;
use crate::net::{
    jacobian_gru, jacobian_lstm, run_to_steady, sample_network, state_jacobian, step_gru,
    step_lstm, GruState, LstmState, RunOpts,
};
use crate::params::{Activation, Arch, Gate, GatedNetParams};
use crate::phase::{bifurcation_curve, phase_sweep, Region};
use crate::spectral::{
    binary_gate_closed_fraction, fit_cdf_erfc, gelfand_binary_limit, gelfand_frozen_radius,
    gru_binary_update_density, gru_zero_fp_density, lstm_binary_forget_density,
    lstm_zero_fp_density, pinching_rate, GruCurveKind, GruSCurve,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::time::Instant;

/// Default network width of the suite.
pub const DEFAULT_N: usize = 1000;

/// Reduced width used when the host cannot diagonalize the default scale in
/// an acceptable time.
pub const FALLBACK_N: usize = 500;

/// Tolerance widening applied at the fallback width.
pub const FALLBACK_TOL_SCALE: f64 = 1.5;

/// Wall-clock limit on the probe eigensolve before the suite falls back.
const PROBE_LIMIT_SECONDS: f64 = 60.0;

/// Options controlling a suite run.
#[derive(Clone, Debug, Default)]
pub struct AcceptanceOpts {
    /// Network width; `None` probes the host with one representative
    /// eigensolve and picks the default or the fallback.
    pub n: Option<usize>,
    /// Run only checks whose id or name matches one of these patterns
    /// (a pattern is an id like `"3"` or a name substring like `"zero-fp"`).
    pub only: Option<Vec<String>>,
    /// Base value from which every check derives its private seeds.
    pub seed_base: u64,
}

/// Outcome of a single check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    /// One-line human-readable summary of what was measured.
    pub details: String,
    /// Machine-readable measurements backing the verdict.
    pub metrics: serde_json::Value,
    pub seconds: f64,
}

/// Full suite report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcceptanceReport {
    /// Width the suite ran at.
    pub n: usize,
    /// Tolerance multiplier in effect (1 at the default width).
    pub tol_scale: f64,
    pub verdicts: Vec<CriterionVerdict>,
    pub all_pass: bool,
    pub total_seconds: f64,
}

/// Shared run context handed to every check.
struct Ctx {
    n: usize,
    /// Tolerance multiplier (1 or the fallback widening).
    tol: f64,
    seed_base: u64,
}

struct CheckOutcome {
    pass: bool,
    details: String,
    metrics: serde_json::Value,
}

struct Check {
    id: u32,
    name: &'static str,
    /// Wall-clock budget in seconds, where one is stated.
    budget: Option<f64>,
    run: fn(&Ctx) -> Result<CheckOutcome>,
}

const CHECKS: &[Check] = &[
    Check { id: 1, name: "zero-fp-disk-gru", budget: Some(120.0), run: check_zero_fp_disk_gru },
    Check { id: 2, name: "zero-fp-disk-lstm", budget: Some(300.0), run: check_zero_fp_disk_lstm },
    Check { id: 3, name: "stability-thresholds", budget: None, run: check_stability_thresholds },
    Check { id: 4, name: "curve-agreement", budget: Some(900.0), run: check_curve_agreement },
    Check { id: 5, name: "radius-scaling-gru", budget: None, run: check_radius_scaling_gru },
    Check { id: 6, name: "radius-scaling-lstm", budget: None, run: check_radius_scaling_lstm },
    Check { id: 7, name: "unit-accumulation", budget: None, run: check_unit_accumulation },
    Check { id: 8, name: "binary-gate-density", budget: None, run: check_binary_gate_density },
    Check { id: 9, name: "phase-diagram", budget: None, run: check_phase_diagram },
    Check { id: 10, name: "pinching", budget: None, run: check_pinching },
    Check { id: 11, name: "gelfand", budget: None, run: check_gelfand },
    Check { id: 12, name: "mft-cross-validation", budget: None, run: check_mft_cross_validation },
];

/// Runs the suite (or the selected subset) and reports one verdict per
/// check. A check that returns an error is reported as failed, not
/// propagated — the suite always completes.
pub fn run_all(opts: &AcceptanceOpts) -> Result<AcceptanceReport> {
    let t_total = Instant::now();
    let n = match opts.n {
        Some(n) => {
            if n == 0 {
                return Err(Error::InvalidParams("width must be positive".into()));
            }
            n
        }
        None => probe_width(opts.seed_base)?,
    };
    let tol = if n < DEFAULT_N { FALLBACK_TOL_SCALE } else { 1.0 };
    let ctx = Ctx {
        n,
        tol,
        seed_base: opts.seed_base,
    };

    let selected: Vec<&Check> = CHECKS
        .iter()
        .filter(|c| match &opts.only {
            None => true,
            Some(patterns) => patterns.iter().any(|p| {
                p.parse::<u32>().map(|id| id == c.id).unwrap_or(false) || c.name.contains(p.as_str())
            }),
        })
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidParams(
            "no check matches the requested subset".into(),
        ));
    }

    let mut verdicts = Vec::with_capacity(selected.len());
    for check in selected {
        let t = Instant::now();
        let outcome = (check.run)(&ctx);
        let seconds = t.elapsed().as_secs_f64();
        let mut verdict = match outcome {
            Ok(o) => CriterionVerdict {
                id: check.id,
                name: check.name.to_string(),
                pass: o.pass,
                details: o.details,
                metrics: o.metrics,
                seconds,
            },
            Err(e) => CriterionVerdict {
                id: check.id,
                name: check.name.to_string(),
                pass: false,
                details: format!("error: {e}"),
                metrics: json!({ "error": e.to_string() }),
                seconds,
            },
        };
        if let Some(budget) = check.budget {
            if seconds > budget {
                verdict.pass = false;
                verdict.details = format!(
                    "{} [exceeded the {budget:.0} s budget: took {seconds:.1} s]",
                    verdict.details
                );
            }
        }
        verdicts.push(verdict);
    }

    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok(AcceptanceReport {
        n,
        tol_scale: tol,
        verdicts,
        all_pass,
        total_seconds: t_total.elapsed().as_secs_f64(),
    })
}

/// Times the largest eigensolve of the suite (the doubled LSTM Jacobian at
/// the default width) and picks the width accordingly: the default when the
/// host finishes within the probe limit, the fallback otherwise.
pub fn probe_width(seed_base: u64) -> Result<usize> {
    let params = GatedNetParams::lstm(DEFAULT_N, 0.0, 0.0, 0.0, 3.0);
    let net = sample_network(&params, seed_base ^ 0x70b3)?;
    let state = step_lstm(
        &net,
        &LstmState::initial(vec![0.0; DEFAULT_N], vec![0.0; DEFAULT_N]),
    )?;
    let j = jacobian_lstm(&net, &state)?;
    let t = Instant::now();
    let _ = crate::empirics::eig_dense(&j)?;
    if t.elapsed().as_secs_f64() > PROBE_LIMIT_SECONDS {
        Ok(FALLBACK_N)
    } else {
        Ok(DEFAULT_N)
    }
}

// ---------------------------------------------------------------------------
// Check 1: the GRU Jacobian at the zero fixed point with deterministic gates
// fills a uniform disk of center 1/2 and radius 3/4 (a_h = 3).
// ---------------------------------------------------------------------------

fn check_zero_fp_disk_gru(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    let params = GatedNetParams::gru(n, 0.0, 0.0, 3.0);
    let net = sample_network(&params, ctx.seed_base + 101)?;
    let state = step_gru(&net, &GruState::initial(vec![0.0; n]))?;
    let j = jacobian_gru(&net, &state)?;
    let cloud = EigenCloud::from_jacobian(Arch::Gru, &j)?;

    let density = gru_zero_fp_density(&params)?;
    let max_dev = cloud
        .values
        .iter()
        .map(|v| (v - density.center).norm())
        .fold(0.0, f64::max);
    let dc = compare_disk(&cloud, &density, 0.0)?;

    let radius_tol = 0.03 * ctx.tol;
    let ks_tol = 0.03 * ctx.tol;
    let radius_ok = rel_dev(max_dev, density.radius) <= radius_tol;
    let ks_ok = dc.ks_radial < ks_tol;
    Ok(CheckOutcome {
        pass: radius_ok && ks_ok,
        details: format!(
            "max|λ−{}| = {:.4} vs predicted {} (±{:.0}%); radial KS = {:.4} (< {:.3})",
            density.center.re,
            max_dev,
            density.radius,
            100.0 * radius_tol,
            dc.ks_radial,
            ks_tol,
        ),
        metrics: json!({
            "n": n,
            "max_dev": max_dev,
            "radius_theory": density.radius,
            "radius_second_moment": dc.radius_emp,
            "ks_radial": dc.ks_radial,
        }),
    })
}

// ---------------------------------------------------------------------------
// Check 2: the LSTM Jacobian at the zero fixed point has exactly n zero
// eigenvalues (hidden rows proportional to cell rows) and the rest fill a
// disk of center 1/2 and radius 3/4.
// ---------------------------------------------------------------------------

fn check_zero_fp_disk_lstm(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    let params = GatedNetParams::lstm(n, 0.0, 0.0, 0.0, 3.0);
    let net = sample_network(&params, ctx.seed_base + 102)?;
    let state = step_lstm(&net, &LstmState::initial(vec![0.0; n], vec![0.0; n]))?;
    let j = jacobian_lstm(&net, &state)?;
    let cloud = EigenCloud::from_jacobian(Arch::Lstm, &j)?;

    let density = lstm_zero_fp_density(&params)?;
    let zero_count = cloud.values.iter().filter(|v| v.norm() < 1e-8).count();
    let max_dev = cloud
        .values
        .iter()
        .filter(|v| v.norm() >= 1e-8)
        .map(|v| (v - density.center).norm())
        .fold(0.0, f64::max);
    let dc = compare_disk(&cloud, &density, 1e-8)?;

    let radius_tol = 0.03 * ctx.tol;
    let zeros_ok = zero_count == n;
    let radius_ok = rel_dev(max_dev, density.radius) <= radius_tol;
    Ok(CheckOutcome {
        pass: zeros_ok && radius_ok,
        details: format!(
            "{zero_count} of {n} structural zeros at |λ| < 1e-8; nonzero max|λ−{}| = {:.4} \
             vs predicted {} (±{:.0}%)",
            density.center.re,
            max_dev,
            density.radius,
            100.0 * radius_tol,
        ),
        metrics: json!({
            "n": n,
            "zero_count": zero_count,
            "max_dev": max_dev,
            "radius_theory": density.radius,
            "radius_second_moment": dc.radius_emp,
            "ks_radial": dc.ks_radial,
        }),
    })
}

// ---------------------------------------------------------------------------
// Check 3: the zero fixed point of both architectures destabilizes exactly
// at a_h = 2 (deterministic gates at zero bias halve the effective coupling
// twice), and simulated perturbations decay/grow accordingly.
// ---------------------------------------------------------------------------

const PERTURBATION_DELTA: f64 = 1e-4;
const PERTURBATION_STEPS: usize = 400;

fn check_stability_thresholds(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    let decay_max = 1e-2 * ctx.tol;
    let growth_min = 1e2 / ctx.tol;
    let mut rows = Vec::new();
    let mut all_ok = true;

    for (k, &a_h) in [1.8, 1.9, 2.1, 2.2].iter().enumerate() {
        let expect_stable = a_h < 2.0;

        let gru_params = GatedNetParams::gru(n, 1.0, 1.0, a_h);
        let gru_zero = gru_fp_solve(&gru_params)?
            .into_iter()
            .find(|s| s.branch == FpBranch::Zero)
            .ok_or_else(|| Error::Numeric("origin branch missing from solver output".into()))?;
        let gru_ratio = gru_perturbation_ratio(&gru_params, ctx.seed_base + 310 + k as u64)?;

        let lstm_params = GatedNetParams::lstm(n, 1.0, 1.0, 1.0, a_h);
        let lstm_stable = lstm_zero_fp_density(&lstm_params)?.stable;
        let lstm_ratio = lstm_perturbation_ratio(&lstm_params, ctx.seed_base + 320 + k as u64)?;

        let ok = gru_zero.stable == expect_stable
            && lstm_stable == expect_stable
            && if expect_stable {
                gru_ratio < decay_max && lstm_ratio < decay_max
            } else {
                gru_ratio > growth_min && lstm_ratio > growth_min
            };
        all_ok &= ok;
        rows.push(json!({
            "a_h": a_h,
            "expect_stable": expect_stable,
            "gru_theory_stable": gru_zero.stable,
            "lstm_theory_stable": lstm_stable,
            "gru_growth_ratio": gru_ratio,
            "lstm_growth_ratio": lstm_ratio,
            "ok": ok,
        }));
    }

    Ok(CheckOutcome {
        pass: all_ok,
        details: format!(
            "origin stability flips at a_h = 2 for GRU and LSTM; perturbation ratios over \
             {PERTURBATION_STEPS} steps confirm decay (< {decay_max:.0e}) below and growth \
             (> {growth_min:.0e}) above",
        ),
        metrics: json!({ "n": n, "rows": rows }),
    })
}

fn gru_perturbation_ratio(params: &GatedNetParams, seed: u64) -> Result<f64> {
    let net = sample_network(params, seed)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5eed);
    let h0 = gauss_vec(&mut rng, params.n, PERTURBATION_DELTA);
    let norm0 = l2(&h0);
    let mut state = GruState::initial(h0);
    for _ in 0..PERTURBATION_STEPS {
        state = step_gru(&net, &state)?;
    }
    Ok(l2(&state.h) / norm0)
}

fn lstm_perturbation_ratio(params: &GatedNetParams, seed: u64) -> Result<f64> {
    let net = sample_network(params, seed)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5eed);
    let c0 = gauss_vec(&mut rng, params.n, PERTURBATION_DELTA);
    let h0 = gauss_vec(&mut rng, params.n, PERTURBATION_DELTA);
    let norm0 = (l2(&c0).powi(2) + l2(&h0).powi(2)).sqrt();
    let mut state = LstmState::initial(c0, h0);
    for _ in 0..PERTURBATION_STEPS {
        state = step_lstm(&net, &state)?;
    }
    Ok((l2(&state.c).powi(2) + l2(&state.h).powi(2)).sqrt() / norm0)
}

// ---------------------------------------------------------------------------
// Check 4: in the chaotic steady state, the measured eigenvalue cloud of the
// GRU Jacobian sits inside the support curve built from the same run's gate
// statistics, across four (a_z, a_r) regimes at a_h = 3.
// ---------------------------------------------------------------------------

fn check_curve_agreement(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    let regimes = [(1.0, 10.0), (10.0, 10.0), (1.0, 1.0), (10.0, 1.0)];
    let min_inside = 1.0 - 0.03 * ctx.tol;
    let mut rows = Vec::new();
    let mut all_ok = true;

    for (k, &(a_z, a_r)) in regimes.iter().enumerate() {
        let params = GatedNetParams::gru(n, a_z, a_r, 3.0);
        let net = sample_network(&params, ctx.seed_base + 410 + k as u64)?;
        let run = run_to_steady(&net, ctx.seed_base + 410 + k as u64, &RunOpts::default())?;
        let j = state_jacobian(&net, run.final_state())?;
        let cloud = EigenCloud::from_jacobian(Arch::Gru, &j)?;

        let moments = SampleMoments::from_states(&run.snapshots)?;
        let kind = GruCurveKind::preferred(&params);
        let curve = GruSCurve::from_moments(&params, &moments, kind)?;
        let loops = curve.boundary(300, 40)?;
        let pad = 0.02 * cloud.radius();
        let cmp = compare_boundary(&cloud, &loops, pad)?;

        let ok = cmp.inside_fraction >= min_inside;
        all_ok &= ok;
        rows.push(json!({
            "a_z": a_z,
            "a_r": a_r,
            "inside_fraction": cmp.inside_fraction,
            "n_outside": cmp.n_outside,
            "max_outside_gap": cmp.max_outside_gap,
            "pad": pad,
            "stationary": run.stationary,
            "c_h": run.c_h,
            "ok": ok,
        }));
    }

    let fractions: Vec<f64> = rows
        .iter()
        .map(|r| r["inside_fraction"].as_f64().unwrap_or(0.0))
        .collect();
    Ok(CheckOutcome {
        pass: all_ok,
        details: format!(
            "inside fractions {:?} across (a_z, a_r) regimes (each ≥ {:.3})",
            fractions
                .iter()
                .map(|f| (f * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>(),
            min_inside,
        ),
        metrics: json!({ "n": n, "rows": rows }),
    })
}

// ---------------------------------------------------------------------------
// Check 5: with the update gate frozen, the steady-state spectral radius of
// the GRU grows as √a_r, and the support-curve prediction tracks the
// measured radius pointwise.
// ---------------------------------------------------------------------------

fn check_radius_scaling_gru(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    let values = [10.0, 100.0, 1000.0];
    let seeds = [ctx.seed_base + 501, ctx.seed_base + 502, ctx.seed_base + 503];
    let points = radius_scaling_sweep(
        |a_r| GatedNetParams::gru(n, 0.0, a_r, 3.0),
        &values,
        &seeds,
        &RunOpts::default(),
    )?;
    let pooled = pool_by_value(&points);
    let emp: Vec<f64> = pooled.iter().map(|p| p.1).collect();
    let fit = fit_loglog(&values, &emp)?;

    let slope_tol = 0.1 * ctx.tol;
    let point_tol = 0.05 * ctx.tol;
    let slope_ok = (fit.slope - 0.5).abs() <= slope_tol;
    let max_point_err = pooled
        .iter()
        .map(|&(_, e, t)| rel_dev(t, e))
        .fold(0.0, f64::max);
    let points_ok = max_point_err <= point_tol;

    let top = *values.last().unwrap();
    let top_c_h = mean(points.iter().filter(|p| p.value == top).map(|p| p.c_h));
    let layer_units = transition_layer_units(n, top, top_c_h);

    Ok(CheckOutcome {
        pass: slope_ok && points_ok,
        details: format!(
            "radius ∝ a_r^{:.3} (want 0.5 ± {slope_tol:.2}); worst theory/measured deviation \
             {:.1}% (≤ {:.0}%); ≈{layer_units:.1} units in the reset gate's transition layer \
             at a_r = {top}",
            fit.slope,
            100.0 * max_point_err,
            100.0 * point_tol,
        ),
        metrics: json!({
            "n": n,
            "slope": fit.slope,
            "r_squared": fit.r_squared,
            "top_gain_layer_units": layer_units,
            "pooled": pooled.iter().map(|&(v, e, t)| json!({
                "a_r": v, "radius_emp": e, "radius_theory": t,
            })).collect::<Vec<_>>(),
        }),
    })
}

// ---------------------------------------------------------------------------
// Check 6: LSTM analogs — the radius grows as √a_i and √a_o when the other
// gate gains vanish, while sweeping the forget gain produces a markedly
// flatter response (slope at most 0.6).
// ---------------------------------------------------------------------------

fn check_radius_scaling_lstm(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    let seeds = [ctx.seed_base + 601, ctx.seed_base + 602, ctx.seed_base + 603];
    let sqrt_values = [10.0, 100.0, 1000.0];
    let f_values = [1.0, 3.0, 10.0, 30.0];

    let slope_of = |configure: &(dyn Fn(f64) -> GatedNetParams + Sync),
                    values: &[f64]|
     -> Result<(f64, Vec<(f64, f64, f64)>, f64)> {
        let points = radius_scaling_sweep(configure, values, &seeds, &RunOpts::default())?;
        let pooled = pool_by_value(&points);
        let emp: Vec<f64> = pooled.iter().map(|p| p.1).collect();
        let top = *values.last().unwrap();
        let top_c_h = mean(points.iter().filter(|p| p.value == top).map(|p| p.c_h));
        let layer_units = transition_layer_units(n, top, top_c_h);
        Ok((fit_loglog(values, &emp)?.slope, pooled, layer_units))
    };

    let (slope_i, pooled_i, layer_i) = slope_of(
        &|a_i| GatedNetParams::lstm(n, 0.0, a_i, 0.0, 3.0),
        &sqrt_values,
    )?;
    let (slope_o, pooled_o, layer_o) = slope_of(
        &|a_o| GatedNetParams::lstm(n, 0.0, 0.0, a_o, 3.0),
        &sqrt_values,
    )?;
    let (slope_f, pooled_f, _) = slope_of(
        &|a_f| GatedNetParams::lstm(n, a_f, 0.0, 0.0, 3.0),
        &f_values,
    )?;

    let slope_tol = 0.1 * ctx.tol;
    let i_ok = (slope_i - 0.5).abs() <= slope_tol;
    let o_ok = (slope_o - 0.5).abs() <= slope_tol;
    let f_ok = slope_f <= 0.6 * ctx.tol;

    let pooled_json = |pooled: &[(f64, f64, f64)]| -> Vec<serde_json::Value> {
        pooled
            .iter()
            .map(|&(v, e, t)| json!({ "value": v, "radius_emp": e, "radius_theory": t }))
            .collect()
    };
    Ok(CheckOutcome {
        pass: i_ok && o_ok && f_ok,
        details: format!(
            "radius ∝ a_i^{slope_i:.3}, a_o^{slope_o:.3} (want 0.5 ± {slope_tol:.2}); \
             forget sweep slope {slope_f:.3} (≤ {:.2}); transition-layer units at gain 10³: \
             ≈{layer_i:.1} (input), ≈{layer_o:.1} (output)",
            0.6 * ctx.tol,
        ),
        metrics: json!({
            "n": n,
            "slope_i": slope_i,
            "slope_o": slope_o,
            "slope_f": slope_f,
            "top_gain_layer_units_input": layer_i,
            "top_gain_layer_units_output": layer_o,
            "input_sweep": pooled_json(&pooled_i),
            "output_sweep": pooled_json(&pooled_o),
            "forget_sweep": pooled_json(&pooled_f),
        }),
    })
}

// ---------------------------------------------------------------------------
// Check 7: eigenvalues accumulate near λ = 1 as the leak gate's gain grows —
// the mass within 0.05 of 1 rises monotonically and follows a complementary
// error function of the inverse gain, for the GRU update gate and the LSTM
// forget gate alike.
// ---------------------------------------------------------------------------

const ACCUMULATION_WINDOW: f64 = 0.05;

fn check_unit_accumulation(ctx: &Ctx) -> Result<CheckOutcome> {
    let gains = [1.0, 2.0, 4.0, 8.0];
    let r2_min = 1.0 - 0.05 * ctx.tol;

    let gru_cdf = accumulation_series(ctx, &gains, false)?;
    let lstm_cdf = accumulation_series(ctx, &gains, true)?;

    let mut all_ok = true;
    let mut rows = Vec::new();
    let mut briefs = Vec::new();
    for (label, cdf) in [("gru-update", &gru_cdf), ("lstm-forget", &lstm_cdf)] {
        let monotone = cdf.windows(2).all(|w| w[1] >= w[0]);
        let rising = cdf.last().copied().unwrap_or(0.0) > cdf.first().copied().unwrap_or(0.0);
        let fit = fit_cdf_erfc(&gains, cdf)?;
        let fit_ok = fit.r_squared > r2_min;
        all_ok &= monotone && rising && fit_ok;
        briefs.push(format!(
            "{label} cdf {} ({}monotone, R² {:.4})",
            cdf.iter()
                .map(|c| format!("{c:.3}"))
                .collect::<Vec<_>>()
                .join("→"),
            if monotone && rising { "" } else { "NOT " },
            fit.r_squared,
        ));
        rows.push(json!({
            "family": label,
            "gains": gains,
            "cdf": cdf,
            "monotone": monotone,
            "rising": rising,
            "erfc_c1": fit.c1,
            "erfc_c2": fit.c2,
            "r_squared": fit.r_squared,
        }));
    }

    Ok(CheckOutcome {
        pass: all_ok,
        details: format!(
            "mass within {ACCUMULATION_WINDOW} of λ = 1 vs leak gain — {}; R² floor {r2_min:.3}",
            briefs.join("; "),
        ),
        metrics: json!({ "n": ctx.n, "rows": rows }),
    })
}

/// CDF(|λ−1| ≤ window) at each leak-gate gain, pooling the eigenvalues of
/// three steady-state snapshots per gain to tame single-matrix noise.
fn accumulation_series(ctx: &Ctx, gains: &[f64], lstm: bool) -> Result<Vec<f64>> {
    let n = ctx.n;
    let mut out = Vec::with_capacity(gains.len());
    for (k, &gain) in gains.iter().enumerate() {
        let params = if lstm {
            GatedNetParams::lstm(n, gain, 0.0, 0.0, 3.0)
        } else {
            GatedNetParams::gru(n, gain, 0.0, 3.0)
        };
        let seed = ctx.seed_base + if lstm { 751 } else { 701 } + k as u64;
        let net = sample_network(&params, seed)?;
        let run = run_to_steady(&net, seed, &RunOpts::default())?;
        let picks = snapshot_picks(run.snapshots.len());
        let mut cloud: Option<EigenCloud> = None;
        for &idx in &picks {
            let j = state_jacobian(&net, &run.snapshots[idx])?;
            let c = EigenCloud::from_jacobian(params.arch, &j)?;
            match cloud.as_mut() {
                Some(acc) => acc.absorb(&c)?,
                None => cloud = Some(c),
            }
        }
        let cloud = cloud.ok_or_else(|| Error::Numeric("no snapshots collected".into()))?;
        out.push(cdf_near_one(&cloud.values, ACCUMULATION_WINDOW));
    }
    Ok(out)
}

/// Three well-separated snapshot indices (or fewer when the run kept fewer).
fn snapshot_picks(len: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let mut picks = vec![len / 3, (2 * len) / 3, len - 1];
    picks.dedup();
    picks
}

// ---------------------------------------------------------------------------
// Check 8: at switch-like leak gates (gain 10³, hard saturation, centered
// bias) the spectrum matches the closed-form atom-plus-disk law, with the
// unsaturated fraction η measured from the run itself.
// ---------------------------------------------------------------------------

fn check_binary_gate_density(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    let mass_tol = 0.05 * 0.5 * ctx.tol;
    let radius_tol = 0.05 * ctx.tol;
    let mut rows = Vec::new();
    let mut briefs = Vec::new();
    let mut all_ok = true;

    for lstm in [false, true] {
        let params = if lstm {
            GatedNetParams::lstm(n, 1000.0, 0.0, 0.0, 3.0)
        } else {
            GatedNetParams::gru(n, 1000.0, 0.0, 3.0)
        }
        .with_activation(Activation::HardTanh);
        let seed = ctx.seed_base + if lstm { 802 } else { 801 };
        let net = sample_network(&params, seed)?;
        let run = run_to_steady(&net, seed, &RunOpts::default())?;
        let j = state_jacobian(&net, run.final_state())?;
        let cloud = EigenCloud::from_jacobian(params.arch, &j)?;

        let moments = SampleMoments::from_states(&run.snapshots)?;
        // The leak gate and the candidate channel are driven by independent
        // matrices, so the pooled unsaturated fraction estimates the
        // conditional one at either gate value.
        let eta = moments.mean_phi_prime_sq();
        let density = if lstm {
            lstm_binary_forget_density(&params, eta)?
        } else {
            // Even open/closed split of the centered switch gate.
            gru_binary_update_density(&params, 0.5, eta)?
        };
        let dc = compare_disk(&cloud, &density, 0.02)?;

        let unit_atom = dc
            .atoms
            .iter()
            .find(|a| a.location == Complex64::new(1.0, 0.0))
            .ok_or_else(|| Error::Numeric("unit atom missing from the predicted law".into()))?;
        let mass_ok = (unit_atom.mass_emp - unit_atom.mass_theory).abs() <= mass_tol;
        let radius_ok = dc.radius_rel_err <= radius_tol;
        all_ok &= mass_ok && radius_ok;
        briefs.push(format!(
            "{}: unit-atom mass {:.3} vs {:.3}, disk radius {:.4} vs {:.4} ({:.1}% off)",
            if lstm { "lstm-forget" } else { "gru-update" },
            unit_atom.mass_emp,
            unit_atom.mass_theory,
            dc.radius_emp,
            dc.radius_theory,
            100.0 * dc.radius_rel_err,
        ));
        rows.push(json!({
            "family": if lstm { "lstm-forget" } else { "gru-update" },
            "eta": eta,
            "unit_atom_mass_emp": unit_atom.mass_emp,
            "unit_atom_mass_theory": unit_atom.mass_theory,
            "disk_radius_emp": dc.radius_emp,
            "disk_radius_theory": dc.radius_theory,
            "radius_rel_err": dc.radius_rel_err,
            "ks_radial": dc.ks_radial,
            "accounted_fraction": dc.accounted_fraction,
            "ok": mass_ok && radius_ok,
        }));
    }

    Ok(CheckOutcome {
        pass: all_ok,
        details: format!(
            "switch-gate laws (mass tol {mass_tol:.3}, radius tol {:.0}%) — {}",
            100.0 * radius_tol,
            briefs.join("; "),
        ),
        metrics: json!({ "n": n, "rows": rows }),
    })
}

// ---------------------------------------------------------------------------
// Check 9: the fixed-point phase plane has its three regions in the right
// places, the fold line ends at (2, 2√2), every nonzero fixed point is
// unstable, and the perturbative branches match the numeric roots near the
// threshold.
// ---------------------------------------------------------------------------

fn check_phase_diagram(ctx: &Ctx) -> Result<CheckOutcome> {
    let base = GatedNetParams::gru(ctx.n, 1.0, 1.0, 1.5);
    let a_h_grid = linspace(1.0, 3.0, 40);
    let a_r_grid = linspace(0.0, 12.0, 40);
    let sweep = phase_sweep(&base, &a_h_grid, &a_r_grid, 0.0)?;

    let no_failures = sweep.failures.is_empty();
    let mut seen = [false; 3];
    for p in &sweep.points {
        seen[p.region.code() as usize] = true;
    }
    let all_regions = seen.iter().all(|&s| s);

    let sqrt2 = std::f64::consts::SQRT_2;
    let mut origin_boundary_ok = true;
    let mut coexistence_window_ok = true;
    let mut rho0_ok = true;
    for p in &sweep.points {
        origin_boundary_ok &= (p.region == Region::OriginUnstable) == (p.a_h > 2.0);
        if p.region == Region::Coexistence {
            coexistence_window_ok &= p.a_h > sqrt2 && p.a_h < 2.0;
        }
        rho0_ok &= p.rho0.iter().all(|&r| r > 1.0);
    }

    // The reset gate destabilizes monotonically: within each a_h column the
    // coexistence nodes must form one contiguous run at the top of the a_r
    // range, and the a_r = 0 column must have none. (Skipped when any node
    // failed — the raster is then incomplete and the check already fails.)
    let mut contiguous_ok = true;
    let mut zero_column_ok = true;
    if no_failures {
        for (i, &a_h) in a_h_grid.iter().enumerate() {
            let column = &sweep.points[i * a_r_grid.len()..(i + 1) * a_r_grid.len()];
            debug_assert!(column.iter().all(|p| p.a_h == a_h));
            zero_column_ok &= column[0].region != Region::Coexistence;
            if let Some(first) = column.iter().position(|p| p.region == Region::Coexistence) {
                contiguous_ok &= column[first..]
                    .iter()
                    .all(|p| p.region == Region::Coexistence);
            }
        }
    }

    // The fold line's limit at the destabilization threshold, approached to
    // within 10⁻⁵ (the endpoint converges like the square root of the
    // distance to the threshold, so this lands ~0.015 from the limit).
    let fold = bifurcation_curve(&base, &[1.99999], 1e-4)?;
    let endpoint = fold[0]
        .1
        .ok_or_else(|| Error::Numeric("fold line left the search window near a_h = 2".into()))?;
    let endpoint_target = 8.0_f64.sqrt();
    let endpoint_ok = (endpoint - endpoint_target).abs() <= 0.05 * ctx.tol;

    let perturbative = perturbative_match(ctx)?;
    let perturbative_ok = perturbative["max_rel_err"].as_f64().unwrap_or(1.0) <= 0.15 * ctx.tol;

    let pass = no_failures
        && all_regions
        && origin_boundary_ok
        && coexistence_window_ok
        && zero_column_ok
        && contiguous_ok
        && rho0_ok
        && endpoint_ok
        && perturbative_ok;
    Ok(CheckOutcome {
        pass,
        details: format!(
            "40×40 sweep: three regions, origin destabilizes exactly above a_h = 2, \
             coexistence confined to (√2, 2); fold endpoint a_r* = {endpoint:.4} \
             (want 2√2 ± {:.2}); worst perturbative-root deviation {:.1}%",
            0.05 * ctx.tol,
            100.0 * perturbative["max_rel_err"].as_f64().unwrap_or(1.0),
        ),
        metrics: json!({
            "nodes": sweep.points.len(),
            "failures": sweep.failures.len(),
            "all_regions": all_regions,
            "origin_boundary_ok": origin_boundary_ok,
            "coexistence_window_ok": coexistence_window_ok,
            "zero_column_ok": zero_column_ok,
            "contiguous_ok": contiguous_ok,
            "rho0_all_above_one": rho0_ok,
            "fold_endpoint": endpoint,
            "fold_endpoint_target": endpoint_target,
            "perturbative": perturbative,
        }),
    })
}

/// Compares each perturbative fixed-point branch against the numeric root of
/// the same branch label, probing every piece of the expansion inside its
/// own controlled regime: the threshold branch at small and near-tricritical
/// reset gain, the quadratic branch just past the tricritical gain (its
/// truncation error grows with the branch value itself), and the linear
/// subcritical branch at a comfortably large reset gain.
fn perturbative_match(ctx: &Ctx) -> Result<serde_json::Value> {
    let eps = 1e-3;
    let probes: [(f64, f64, FpBranch); 4] = [
        (1.0, eps, FpBranch::NonZeroUpper),
        (2.0, eps, FpBranch::NonZeroUpper),
        (2.95, eps, FpBranch::NonZeroUpper),
        (3.5, -eps, FpBranch::NonZeroLower),
    ];
    let mut rows = Vec::new();
    let mut max_rel_err: f64 = 0.0;
    for &(a_r, delta, branch) in &probes {
        let params = GatedNetParams::gru(ctx.n, 1.0, a_r, 2.0 + delta);
        let numeric = gru_fp_solve(&params)?
            .into_iter()
            .find(|s| s.branch == branch)
            .ok_or_else(|| {
                Error::Numeric(format!(
                    "no numeric {branch:?} root at (a_h, a_r) = ({}, {a_r})",
                    2.0 + delta
                ))
            })?
            .c_h;
        let perturbative = gru_fp_perturbative_for(&params)?
            .into_iter()
            .find(|(b, _)| *b == branch)
            .ok_or_else(|| {
                Error::Numeric(format!(
                    "no perturbative {branch:?} branch at (a_h, a_r) = ({}, {a_r})",
                    2.0 + delta
                ))
            })?
            .1;
        max_rel_err = max_rel_err.max(rel_dev(perturbative, numeric));
        rows.push(json!({
            "a_r": a_r,
            "a_h": 2.0 + delta,
            "branch": format!("{branch:?}"),
            "numeric": numeric,
            "perturbative": perturbative,
        }));
    }
    Ok(json!({ "rows": rows, "max_rel_err": max_rel_err }))
}

// ---------------------------------------------------------------------------
// Check 10: at a marginal fixed point, the support's overshoot past λ = 1
// decays exponentially in the update gain, at the predicted rate.
// ---------------------------------------------------------------------------

fn check_pinching(ctx: &Ctx) -> Result<CheckOutcome> {
    let base = GatedNetParams::gru(ctx.n, 1.0, 1.0, 3.0);
    let sol = gru_fp_solve(&base)?
        .into_iter()
        .find(|s| s.branch != FpBranch::Zero)
        .ok_or_else(|| Error::Numeric("no nonzero fixed point at (a_h, a_r) = (3, 1)".into()))?;
    let alpha = binary_gate_closed_fraction(0.0, sol.c_h)?;
    let rate_c = pinching_rate(sol.rho0, 0.0, sol.c_h)?;
    let decay_per_gain = rate_c * sol.c_h.sqrt();

    // Update gains chosen so the predicted overshoot spans a clean window
    // well above both the bisection floor and double-precision roundoff.
    let products = [4.0, 6.0, 8.0, 10.0, 12.0, 14.0];
    let mut a_z_values = Vec::with_capacity(products.len());
    let mut gaps = Vec::with_capacity(products.len());
    for &p in &products {
        let a_z = p / decay_per_gain;
        let params = base.clone().with_gain(Gate::Z, a_z);
        let curve = GruSCurve::at_fixed_point(&params, sol.c_h)?;
        let gap = curve.spectral_radius()? - 1.0;
        if !(gap > 0.0) {
            return Err(Error::Numeric(format!(
                "support does not overshoot λ = 1 at update gain {a_z:.2} (gap = {gap:.3e})"
            )));
        }
        a_z_values.push(a_z);
        gaps.push(gap);
    }

    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let ln_gaps: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let (slope, _intercept) = linear_fit(&a_z_values, &ln_gaps)?;
    let fitted_c = -slope / sol.c_h.sqrt();
    let rate_ok = rel_dev(fitted_c, rate_c) <= 0.20 * ctx.tol;

    Ok(CheckOutcome {
        pass: monotone && rate_ok,
        details: format!(
            "overshoot beyond λ = 1 shrinks monotonically from {:.2e} to {:.2e}; fitted decay \
             constant {fitted_c:.4} vs predicted {rate_c:.4} ({:.1}% off, ≤ {:.0}%)",
            gaps.first().copied().unwrap_or(f64::NAN),
            gaps.last().copied().unwrap_or(f64::NAN),
            100.0 * rel_dev(fitted_c, rate_c),
            100.0 * 0.20 * ctx.tol,
        ),
        metrics: json!({
            "c_h": sol.c_h,
            "rho0": sol.rho0,
            "alpha": alpha,
            "marginal": alpha * sol.rho0 * sol.rho0 < 1.0,
            "rate_theory": rate_c,
            "rate_fitted": fitted_c,
            "a_z": a_z_values,
            "gaps": gaps,
            "monotone": monotone,
        }),
    })
}

// ---------------------------------------------------------------------------
// Check 11: norm-growth moments of model gate matrices converge to their
// predicted limits — the binary-gate plateau and the constant-gate radius.
// ---------------------------------------------------------------------------

fn check_gelfand(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    // Reuse the shaping gain of the marginal fixed point of check 10 so the
    // binary plateau regime (α ρ² < 1) is the one the pinching analysis
    // lives in.
    let base = GatedNetParams::gru(n, 1.0, 1.0, 3.0);
    let sol = gru_fp_solve(&base)?
        .into_iter()
        .find(|s| s.branch != FpBranch::Zero)
        .ok_or_else(|| Error::Numeric("no nonzero fixed point at (a_h, a_r) = (3, 1)".into()))?;
    let rho_sq = sol.rho0 * sol.rho0;
    let alpha = 0.5;
    let limit = gelfand_binary_limit(alpha, rho_sq)?;

    let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed_base ^ 0x9e1f);
    let gate: Vec<f64> = (0..n)
        .map(|_| if rng.random::<f64>() < alpha { 0.0 } else { 1.0 })
        .collect();
    let j_binary = gated_ginibre(&gate, rho_sq, &mut rng);
    let mu_binary = norm_moment_sequence(&j_binary, 32)?;
    let plateau_tol = 0.05 * ctx.tol;
    let plateau_errs: Vec<f64> = [28, 30, 32]
        .iter()
        .filter_map(|&k| mu_binary.get(k).map(|&m| rel_dev(m, limit)))
        .collect();
    let plateau_ok =
        plateau_errs.len() == 3 && plateau_errs.iter().all(|&e| e <= plateau_tol);

    // Constant-gate model: every gate frozen at 1/2.
    let frozen_params = GatedNetParams::gru(n, 0.0, 0.0, 3.0);
    let radius_theory = gelfand_frozen_radius(&frozen_params, rho_sq)?;
    let gate_half = vec![0.5; n];
    let j_frozen = gated_ginibre(&gate_half, rho_sq, &mut rng);
    let mu_frozen = norm_moment_sequence(&j_frozen, 48)?;
    let rates = crate::empirics::growth_rates(&mu_frozen);
    let rate_48 = rates
        .last()
        .copied()
        .ok_or_else(|| Error::Numeric("norm moment sequence truncated to nothing".into()))?;
    let radius_tol = 0.05 * ctx.tol;
    let radius_ok = rel_dev(rate_48, radius_theory) <= radius_tol;

    Ok(CheckOutcome {
        pass: plateau_ok && radius_ok,
        details: format!(
            "binary-gate norm moments plateau at {:.4} vs predicted {limit:.4} (worst {:.1}% \
             over orders 28–32); constant-gate growth rate {rate_48:.4} vs radius \
             {radius_theory:.4} ({:.1}% off)",
            mu_binary.last().copied().unwrap_or(f64::NAN),
            100.0 * plateau_errs.iter().cloned().fold(0.0, f64::max),
            100.0 * rel_dev(rate_48, radius_theory),
        ),
        metrics: json!({
            "n": n,
            "rho_sq": rho_sq,
            "alpha": alpha,
            "alpha_rho_sq": alpha * rho_sq,
            "binary_limit": limit,
            "binary_mu_tail": &mu_binary[28..],
            "frozen_radius_theory": radius_theory,
            "frozen_rate_48": rate_48,
        }),
    })
}

/// Model Jacobian `diag(z) + diag(1−z)·W` with `W` i.i.d. Gaussian of row
/// variance `rho_sq` — the leak-gate caricature the norm-growth limits are
/// derived for.
fn gated_ginibre(gate: &[f64], rho_sq: f64, rng: &mut ChaCha12Rng) -> DenseMatrix {
    let n = gate.len();
    let sd = (rho_sq / n as f64).sqrt();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let open = 1.0 - gate[i];
        let row = m.row_mut(i);
        for (j, slot) in row.iter_mut().enumerate() {
            let g: f64 = rng.sample(StandardNormal);
            *slot = open * sd * g + if i == j { gate[i] } else { 0.0 };
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Check 12: the single-site mean-field closure reproduces full-network
// statistics — state variance for both architectures, the LSTM shaping
// moments, and the stationary self-consistency relations of the GRU.
// ---------------------------------------------------------------------------

fn check_mft_cross_validation(ctx: &Ctx) -> Result<CheckOutcome> {
    let n = ctx.n;
    let pairs = [(1.0, 10.0), (10.0, 10.0), (1.0, 1.0), (10.0, 1.0)];
    let moment_tol = 0.05 * ctx.tol;
    let mut rows = Vec::new();
    let mut all_ok = true;
    let mut worst_c_h_err = 0.0f64;
    let mut worst_moment_err = 0.0f64;
    let mut worst_sigma = 0.0f64;

    for (k, &(leak_gain, coupling_gain)) in pairs.iter().enumerate() {
        for lstm in [false, true] {
            let params = if lstm {
                GatedNetParams::lstm(n, leak_gain, 1.0, coupling_gain, 3.0)
            } else {
                GatedNetParams::gru(n, leak_gain, coupling_gain, 3.0)
            };
            let seed = ctx.seed_base + 1200 + 2 * k as u64 + lstm as u64;
            let net = sample_network(&params, seed)?;
            let run = run_to_steady(&net, seed, &RunOpts::default())?;

            let mut mc_opts = McOpts::default();
            mc_opts.seed = seed ^ 0x3c5a;
            let mc = single_site_mc(&params, &mc_opts)?;
            let corr = &mc.correlations;

            let c_h_err = rel_dev(corr.c_h, run.c_h);
            worst_c_h_err = worst_c_h_err.max(c_h_err);
            let mut ok = c_h_err <= moment_tol && corr.c_h <= corr.c_phi + 1e-12;
            let mut row = json!({
                "family": if lstm { "lstm" } else { "gru" },
                "leak_gain": leak_gain,
                "coupling_gain": coupling_gain,
                "c_h_network": run.c_h,
                "c_h_mc": corr.c_h,
                "c_h_rel_err": c_h_err,
                "c_h_below_c_phi": corr.c_h <= corr.c_phi + 1e-12,
                "mc_converged": mc.converged,
            });

            if lstm {
                let moments = SampleMoments::from_states(&run.snapshots)?;
                let (q_net, p_net) = lstm_shaping_means(&params, &moments)?;
                let q_mc = corr.lstm_q.ok_or_else(|| {
                    Error::Numeric("single-site result lacks the output-gate moment".into())
                })?;
                let p_mc = corr.lstm_p.ok_or_else(|| {
                    Error::Numeric("single-site result lacks the interior moment".into())
                })?;
                let q_err = rel_dev(q_mc, q_net);
                let p_err = rel_dev(p_mc, p_net);
                worst_moment_err = worst_moment_err.max(q_err).max(p_err);
                ok &= q_err <= moment_tol && p_err <= moment_tol;
                row["q_network"] = json!(q_net);
                row["q_mc"] = json!(q_mc);
                row["q_rel_err"] = json!(q_err);
                row["p_network"] = json!(p_net);
                row["p_mc"] = json!(p_mc);
                row["p_rel_err"] = json!(p_err);
            } else {
                let residuals = dmft_steady_residual(&params, corr)?;
                let ses = residual_standard_errors(&params, &mc)?;
                let point_sigma = residuals
                    .iter()
                    .zip(&ses)
                    .map(|(r, se)| if *se > 0.0 { r.abs() / se } else { f64::INFINITY })
                    .fold(0.0, f64::max);
                worst_sigma = worst_sigma.max(point_sigma);
                ok &= point_sigma <= 3.0 * ctx.tol;
                row["residuals"] = json!(residuals);
                row["residual_ses"] = json!(ses);
                row["worst_residual_sigma"] = json!(point_sigma);
            }

            row["ok"] = json!(ok);
            all_ok &= ok;
            rows.push(row);
        }
    }

    Ok(CheckOutcome {
        pass: all_ok,
        details: format!(
            "single-site closure matches full networks at width {n}: state variances within \
             {:.0}%, LSTM shaping moments within {:.0}%, stationary residuals within \
             {:.1} standard errors, and C_h(0) ≤ C_φ(0) throughout",
            100.0 * moment_tol,
            100.0 * moment_tol,
            3.0 * ctx.tol,
        ),
        metrics: json!({ "n": n, "rows": rows }),
    })
}

/// Pooled means of the LSTM shaping variables over a simulated moment pool.
fn lstm_shaping_means(params: &GatedNetParams, moments: &SampleMoments) -> Result<(f64, f64)> {
    let samples = moments.lstm_samples()?;
    let mut w_total = 0.0;
    let (mut q_acc, mut p_acc) = (0.0, 0.0);
    for s in samples {
        w_total += s.weight;
        q_acc += s.weight * s.q(params);
        p_acc += s.weight * s.p(params);
    }
    if !(w_total > 0.0) {
        return Err(Error::InvalidParams("empty moment pool".into()));
    }
    Ok((q_acc / w_total, p_acc / w_total))
}

/// Standard errors of the stationary residuals, propagated through the
/// nonlinear residual map by re-evaluating it on each path block's lag
/// correlations.
fn residual_standard_errors(
    params: &GatedNetParams,
    mc: &crate::mft::SingleSiteResult,
) -> Result<Vec<f64>> {
    let blocks = &mc.block_c_h_lag;
    if blocks.len() < 2 {
        return Err(Error::InvalidParams(
            "need at least two path blocks for a standard error".into(),
        ));
    }
    let mut per_block: Vec<Vec<f64>> = Vec::with_capacity(blocks.len());
    for lags in blocks {
        let mut corr = mc.correlations.clone();
        corr.c_h_lag = lags.clone();
        corr.c_h = lags[0];
        per_block.push(dmft_steady_residual(params, &corr)?);
    }
    let k_len = per_block[0].len();
    let b = per_block.len() as f64;
    let mut ses = Vec::with_capacity(k_len);
    for k in 0..k_len {
        let mean = per_block.iter().map(|r| r[k]).sum::<f64>() / b;
        let var = per_block.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (b - 1.0);
        ses.push((var / b).sqrt());
    }
    Ok(ses)
}

// ---------------------------------------------------------------------------
// Small numeric helpers.
// ---------------------------------------------------------------------------

/// Effective number of units inside a sigmoid gate's transition layer when
/// the gate reads `a·h` with `h ~ N(0, c_h)`: the participation ratio of the
/// squared gate-derivative weights, `n·E[σ'²]²/E[σ'⁴]`, which for
/// `a√c_h ≫ 1` collapses to `(∫σ'²)²/∫σ'⁴ · φ(0) · n/(a√c_h)
/// ≈ 1.551·n/(a√c_h)`. Single-digit values mean the spectral edge rests on a
/// handful of units, so a finite eigensolve sits well below the
/// infinite-width radius — the radius-scaling checks report this count to
/// make that regime visible in their verdicts.
pub fn transition_layer_units(n: usize, gain: f64, c_h: f64) -> f64 {
    1.551 * n as f64 / (gain * c_h.sqrt())
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for v in values {
        sum += v;
        count += 1;
    }
    sum / count as f64
}

fn rel_dev(x: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if x == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (x - reference).abs() / reference.abs()
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gauss_vec(rng: &mut ChaCha12Rng, len: usize, sd: f64) -> Vec<f64> {
    (0..len)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2, "a grid needs at least two nodes");
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Ordinary least squares line `y ≈ intercept + slope·x`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParams(
            "a line fit needs two aligned samples or more".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
