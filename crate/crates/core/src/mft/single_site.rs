//! Monte Carlo solver for the single-site description of the infinite-width
//! network.
//!
//! At large width each neuron decouples from the rest of the network: its
//! pre-activations become independent Gaussian *processes* whose two-time
//! covariances are functionals of the state correlation `C_h(t,t')`, which
//! must in turn be determined self-consistently. For the GRU the effective
//! process is
//!
//! ```text
//! h_{t+1} = σ(ζ_t) h_t + (1 - σ(ζ_t)) φ(y_t)
//! cov ζ = a_z² C_h + v_z,  cov ξ = a_r² C_h + v_r,
//! cov y = a_h² (C_r ∘ C_h) + v_h   with C_r(t,t') = ⟨σ(ξ_t)σ(ξ_{t'})⟩,
//! ```
//!
//! (the bias variance adds to every pair of times because the bias is frozen
//! along a trajectory). The solver iterates: sample the fields over a finite
//! horizon from the current `C_h`, evolve paths, re-measure `C_h`, and damp.
//! `C_r` is measured from the sampled reset field within each sweep, which
//! keeps `C_r ∘ C_h` a positive-semidefinite Schur product by construction.
//! The LSTM analogue evolves the cell and output pair with four independent
//! fields.
//!
//! The converged steady state yields the lag correlations entering the
//! stationarity conditions ([`dmft_steady_residual`]) and a pool of
//! per-neuron samples ([`SampleMoments`]) from which every spectral
//! expectation can be taken.

use crate::activation::{sigmoid, sigmoid_prime};
use crate::linalg::DenseMatrix;
use crate::mft::quadrature::{bivariate_expect, gauss_expect};
use crate::moments::{GruMomentSample, LstmMomentSample, MomentSource, SampleMoments};
use crate::params::{Arch, GatedNetParams, Gate};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Options for the single-site Monte Carlo.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct McOpts {
    /// Number of independent single-neuron paths per sweep.
    pub paths: usize,
    /// Time horizon of each path; the second half is treated as steady.
    pub horizon: usize,
    /// Maximum number of self-consistency sweeps.
    pub max_sweeps: usize,
    /// Damping of the covariance update, `C ← (1-γ)C + γ Ĉ`.
    pub damping: f64,
    /// Relative tolerance on the steady equal-time moment between sweeps.
    pub tol: f64,
    /// RNG seed; every sweep draws from its own counter-indexed stream.
    pub seed: u64,
    /// Number of lags reported in the steady correlation function.
    pub lag_out: usize,
    /// Number of path blocks used for standard-error estimates.
    pub blocks: usize,
}

impl Default for McOpts {
    fn default() -> Self {
        McOpts {
            paths: 10_000,
            horizon: 64,
            max_sweeps: 60,
            damping: 0.5,
            tol: 1e-3,
            seed: 0,
            lag_out: 16,
            blocks: 16,
        }
    }
}

/// Steady-state correlations measured from the converged single-site
/// process. For the LSTM the gate slots are reused: (`kappa`, `c_z`)
/// describe the forget gate, (`c_r`, `c_rprime`) the input gate, and
/// `nu_sq` is zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationSet {
    /// Steady equal-time second moment `C_h(0)` (equals `c_h_lag[0]`).
    pub c_h: f64,
    /// Steady lag correlations `C_h(k)`, `k = 0..=lag_out`.
    pub c_h_lag: Vec<f64>,
    /// ⟨r²⟩ of the reset (GRU) or input (LSTM) gate.
    pub c_r: f64,
    /// ⟨r'²⟩ of the same gate's derivative.
    pub c_rprime: f64,
    /// ⟨z²⟩ of the update (GRU) or forget (LSTM) gate.
    pub c_z: f64,
    /// ⟨z⟩ of the same gate; `alpha = 1 - kappa` is the mean leak.
    pub kappa: f64,
    /// ⟨y²⟩ of the candidate pre-activation.
    pub c_y: f64,
    /// ⟨φ(y)²⟩.
    pub c_phi: f64,
    /// ⟨φ'(y)²⟩.
    pub c_phiprime: f64,
    /// ⟨(h_{t-1} - φ(y_t))²⟩ — gate-leverage scale (GRU only).
    pub nu_sq: f64,
    /// `1 - kappa`.
    pub alpha: f64,
    /// Fraction of samples with φ'(y) ≠ 0 (1 for tanh).
    pub eta: f64,
    /// ⟨q⟩ of the LSTM output-gate shaping variable, when applicable.
    pub lstm_q: Option<f64>,
    /// ⟨p⟩ of the LSTM interior shaping variable, when applicable.
    pub lstm_p: Option<f64>,
}

/// Converged single-site solution.
#[derive(Clone, Debug)]
pub struct SingleSiteResult {
    pub correlations: CorrelationSet,
    /// Per-path samples of the final transition, for spectral expectations.
    pub moments: SampleMoments,
    /// Standard error of `c_h` across path blocks.
    pub c_h_se: f64,
    /// Standard error of each entry of `c_h_lag`.
    pub c_h_lag_se: Vec<f64>,
    /// Per-block lag correlations (block index → lags), for error
    /// propagation through derived quantities.
    pub block_c_h_lag: Vec<Vec<f64>>,
    /// Number of self-consistency sweeps performed.
    pub sweeps: usize,
    /// Whether the steady moment met `tol` before `max_sweeps`.
    pub converged: bool,
}

fn validate_opts(opts: &McOpts) -> Result<()> {
    if opts.paths < 2 * opts.blocks || opts.blocks < 2 {
        return Err(Error::InvalidParams(
            "need at least two blocks and two paths per block".into(),
        ));
    }
    if opts.horizon < 2 * (opts.lag_out + 8) {
        return Err(Error::InvalidParams(format!(
            "horizon {} too short for lag_out {}: need at least {}",
            opts.horizon,
            opts.lag_out,
            2 * (opts.lag_out + 8)
        )));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidParams("damping must be in (0, 1]".into()));
    }
    Ok(())
}

/// Initial state scale of both the finite networks and the single-site
/// process: states start as `0.5 · N(0,1)`, i.e. variance 1/4.
const INIT_VAR: f64 = 0.25;

/// Cholesky with escalating diagonal jitter; covariance matrices assembled
/// from measured correlations can be semidefinite to rounding.
fn cholesky_jittered(cov: &DenseMatrix) -> Result<DenseMatrix> {
    let scale = (0..cov.rows)
        .map(|i| cov.get(i, i))
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    for jitter_exp in [f64::NEG_INFINITY, -12.0, -10.0, -8.0, -6.0] {
        let jitter = if jitter_exp.is_finite() {
            scale * 10f64.powf(jitter_exp)
        } else {
            0.0
        };
        let mut c = cov.clone();
        if jitter > 0.0 {
            for i in 0..c.rows {
                let v = c.get(i, i) + jitter;
                c.set(i, i, v);
            }
        }
        if let Some(l) = c.cholesky_lower() {
            return Ok(l);
        }
    }
    Err(Error::Numeric(
        "two-time covariance is not positive definite even after jitter".into(),
    ))
}

/// Samples one Gaussian-process path `out = mean + L g` with fresh normals.
fn gp_sample_into(
    l: &DenseMatrix,
    mean: f64,
    rng: &mut ChaCha12Rng,
    g: &mut [f64],
    out: &mut [f64],
) {
    let h = l.rows;
    for gi in g.iter_mut() {
        *gi = rng.sample(StandardNormal);
    }
    for t in 0..h {
        let row = l.row(t);
        let mut acc = mean;
        for (s, gs) in g.iter().enumerate().take(t + 1) {
            acc += row[s] * gs;
        }
        out[t] = acc;
    }
}

fn field_cov(c_h: &DenseMatrix, gain: f64, bias_var: f64) -> DenseMatrix {
    DenseMatrix::from_fn(c_h.rows, c_h.cols, |t, s| {
        gain * gain * c_h.get(t, s) + bias_var
    })
}

/// Mean of the upper-left-symmetric accumulation of `x_t x_s` over paths.
fn measure_second_moment(paths: &[f64], n_paths: usize, h: usize) -> DenseMatrix {
    let mut acc = DenseMatrix::zeros(h, h);
    for p in 0..n_paths {
        let row = &paths[p * h..(p + 1) * h];
        for t in 0..h {
            let xt = row[t];
            let dst = &mut acc.row_mut(t)[..=t];
            for (s, d) in dst.iter_mut().enumerate() {
                *d += xt * row[s];
            }
        }
    }
    let inv = 1.0 / n_paths as f64;
    for t in 0..h {
        for s in 0..t {
            let v = acc.get(t, s) * inv;
            acc.set(t, s, v);
            acc.set(s, t, v);
        }
        let v = acc.get(t, t) * inv;
        acc.set(t, t, v);
    }
    acc
}

struct GruSweepState {
    zeta: Vec<f64>,
    xi: Vec<f64>,
    y: Vec<f64>,
    h: Vec<f64>,
}

/// One GRU sweep: sample fields from `c_mat`, evolve, return the measured
/// state second moment. Field and state paths stay in `st` for measurement.
fn gru_sweep(
    params: &GatedNetParams,
    c_mat: &DenseMatrix,
    opts: &McOpts,
    rng: &mut ChaCha12Rng,
    st: &mut GruSweepState,
) -> Result<DenseMatrix> {
    let (n_paths, h) = (opts.paths, opts.horizon);
    let act = params.activation;
    let mut g = vec![0.0; h];

    let l_zeta = cholesky_jittered(&field_cov(
        c_mat,
        params.gain.get(Gate::Z),
        params.bias_var.get(Gate::Z),
    ))?;
    let m_z = params.bias_mean.get(Gate::Z);
    for p in 0..n_paths {
        gp_sample_into(&l_zeta, m_z, rng, &mut g, &mut st.zeta[p * h..(p + 1) * h]);
    }

    let l_xi = cholesky_jittered(&field_cov(
        c_mat,
        params.gain.get(Gate::R),
        params.bias_var.get(Gate::R),
    ))?;
    let m_r = params.bias_mean.get(Gate::R);
    for p in 0..n_paths {
        gp_sample_into(&l_xi, m_r, rng, &mut g, &mut st.xi[p * h..(p + 1) * h]);
    }

    // Reset-gate correlation measured from this sweep's own field samples.
    let r_vals: Vec<f64> = st.xi.iter().map(|&x| sigmoid(x)).collect();
    let c_r_meas = measure_second_moment(&r_vals, n_paths, h);

    let a_h = params.gain.get(Gate::H);
    let v_h = params.bias_var.get(Gate::H);
    let cov_y = DenseMatrix::from_fn(h, h, |t, s| {
        a_h * a_h * c_r_meas.get(t, s) * c_mat.get(t, s) + v_h
    });
    let l_y = cholesky_jittered(&cov_y)?;
    let m_h = params.bias_mean.get(Gate::H);
    for p in 0..n_paths {
        gp_sample_into(&l_y, m_h, rng, &mut g, &mut st.y[p * h..(p + 1) * h]);
        let init: f64 = rng.sample(StandardNormal);
        let row_h = &mut st.h[p * h..(p + 1) * h];
        row_h[0] = INIT_VAR.sqrt() * init;
        let row_z = &st.zeta[p * h..(p + 1) * h];
        let row_y = &st.y[p * h..(p + 1) * h];
        for t in 0..h - 1 {
            let z = sigmoid(row_z[t]);
            row_h[t + 1] = z * row_h[t] + (1.0 - z) * act.apply(row_y[t]);
        }
    }
    Ok(measure_second_moment(&st.h, n_paths, h))
}

struct LstmSweepState {
    eta_f: Vec<f64>,
    eta_i: Vec<f64>,
    eta_o: Vec<f64>,
    y: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

fn lstm_sweep(
    params: &GatedNetParams,
    c_mat: &DenseMatrix,
    opts: &McOpts,
    rng: &mut ChaCha12Rng,
    st: &mut LstmSweepState,
) -> Result<DenseMatrix> {
    let (n_paths, h) = (opts.paths, opts.horizon);
    let act = params.activation;
    let mut g = vec![0.0; h];

    for (gate, buf) in [
        (Gate::F, &mut st.eta_f),
        (Gate::I, &mut st.eta_i),
        (Gate::O, &mut st.eta_o),
        (Gate::H, &mut st.y),
    ] {
        let l = cholesky_jittered(&field_cov(
            c_mat,
            params.gain.get(gate),
            params.bias_var.get(gate),
        ))?;
        let mean = params.bias_mean.get(gate);
        for p in 0..n_paths {
            gp_sample_into(&l, mean, rng, &mut g, &mut buf[p * h..(p + 1) * h]);
        }
    }

    for p in 0..n_paths {
        let init_c: f64 = rng.sample(StandardNormal);
        let init_h: f64 = rng.sample(StandardNormal);
        let span = p * h..(p + 1) * h;
        let row_f = &st.eta_f[span.clone()];
        let row_i = &st.eta_i[span.clone()];
        let row_o = &st.eta_o[span.clone()];
        let row_y = &st.y[span.clone()];
        st.c[p * h] = INIT_VAR.sqrt() * init_c;
        st.h[p * h] = INIT_VAR.sqrt() * init_h;
        for t in 0..h - 1 {
            let f = sigmoid(row_f[t]);
            let i = sigmoid(row_i[t]);
            let o = sigmoid(row_o[t]);
            let c_next = f * st.c[p * h + t] + i * act.apply(row_y[t]);
            if c_next.abs() > 1e6 {
                return Err(Error::Numeric(format!(
                    "single-site cell state diverged (|c| > 1e6 with mean forget gate {:.3}); \
                     the forget bias keeps the cell integrating",
                    gauss_expect(
                        params.bias_mean.get(Gate::F),
                        params.gain.get(Gate::F).powi(2) * c_mat.get(t, t)
                            + params.bias_var.get(Gate::F),
                        sigmoid
                    )
                )));
            }
            st.c[p * h + t + 1] = c_next;
            st.h[p * h + t + 1] = o * act.apply(c_next);
        }
    }
    Ok(measure_second_moment(&st.h, n_paths, h))
}

/// Steady lag correlations of `series` (paths × horizon), averaged over the
/// trailing window, per block of paths and overall. Returns
/// `(overall, per_block, per_lag_se)`.
fn steady_lags(
    series: &[f64],
    n_paths: usize,
    h: usize,
    lag_out: usize,
    blocks: usize,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let start = h - (lag_out + 8);
    let block_len = n_paths / blocks;
    let mut per_block = vec![vec![0.0; lag_out + 1]; blocks];
    let mut counts = vec![vec![0u64; lag_out + 1]; blocks];
    for p in 0..n_paths {
        let b = (p / block_len).min(blocks - 1);
        let row = &series[p * h..(p + 1) * h];
        for k in 0..=lag_out {
            let mut acc = 0.0;
            for t in start..h - k {
                acc += row[t] * row[t + k];
            }
            per_block[b][k] += acc;
            counts[b][k] += (h - k - start) as u64;
        }
    }
    for (bl, ct) in per_block.iter_mut().zip(&counts) {
        for (v, &c) in bl.iter_mut().zip(ct) {
            *v /= c as f64;
        }
    }
    let mut overall = vec![0.0; lag_out + 1];
    let mut se = vec![0.0; lag_out + 1];
    for k in 0..=lag_out {
        let mean = per_block.iter().map(|b| b[k]).sum::<f64>() / blocks as f64;
        let var = per_block
            .iter()
            .map(|b| (b[k] - mean) * (b[k] - mean))
            .sum::<f64>()
            / (blocks as f64 - 1.0);
        overall[k] = mean;
        se[k] = (var / blocks as f64).sqrt();
    }
    (overall, per_block, se)
}

fn steady_diag_mean(c_mat: &DenseMatrix) -> f64 {
    let h = c_mat.rows;
    let start = 3 * h / 4;
    (start..h).map(|t| c_mat.get(t, t)).sum::<f64>() / (h - start) as f64
}

fn weighted_mean(samples: &[(f64, f64)]) -> f64 {
    let (num, den) = samples
        .iter()
        .fold((0.0, 0.0), |(a, b), &(v, w)| (a + w * v, b + w));
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Runs the damped self-consistency loop and measures the steady state.
pub fn single_site_mc(params: &GatedNetParams, opts: &McOpts) -> Result<SingleSiteResult> {
    params.validate()?;
    validate_opts(opts)?;
    match params.arch {
        Arch::Gru => gru_mc(params, opts),
        Arch::Lstm => lstm_mc(params, opts),
        Arch::Vanilla => Err(Error::UnsupportedRegime(
            "the single-site solver covers the gated architectures".into(),
        )),
    }
}

fn converge<S>(
    opts: &McOpts,
    c_mat: &mut DenseMatrix,
    st: &mut S,
    mut sweep: impl FnMut(&DenseMatrix, &mut ChaCha12Rng, &mut S) -> Result<DenseMatrix>,
) -> Result<(usize, bool)> {
    let mut steady_prev = f64::NAN;
    let mut converged = false;
    let mut sweeps = 0;
    for sweep_idx in 0..opts.max_sweeps {
        let mut rng = stream_rng(opts.seed, Stream::McBlock(sweep_idx as u32));
        let measured = sweep(c_mat, &mut rng, st)?;
        for (c, m) in c_mat.data.iter_mut().zip(&measured.data) {
            *c = (1.0 - opts.damping) * *c + opts.damping * m;
        }
        sweeps = sweep_idx + 1;
        let steady = steady_diag_mean(c_mat);
        if steady_prev.is_finite() && (steady - steady_prev).abs() <= opts.tol * steady.max(1e-6) {
            converged = true;
            break;
        }
        steady_prev = steady;
    }
    Ok((sweeps, converged))
}

fn gru_mc(params: &GatedNetParams, opts: &McOpts) -> Result<SingleSiteResult> {
    let (n_paths, h) = (opts.paths, opts.horizon);
    let mut c_mat = DenseMatrix::zeros(h, h);
    for t in 0..h {
        c_mat.set(t, t, INIT_VAR);
    }
    let mut st = GruSweepState {
        zeta: vec![0.0; n_paths * h],
        xi: vec![0.0; n_paths * h],
        y: vec![0.0; n_paths * h],
        h: vec![0.0; n_paths * h],
    };
    let (sweeps, converged) = converge(opts, &mut c_mat, &mut st, |c, rng, st| {
        gru_sweep(params, c, opts, rng, st)
    })?;

    // Measurement pass over the frozen covariance (fresh stream).
    let mut rng = stream_rng(opts.seed, Stream::McBlock(sweeps as u32));
    gru_sweep(params, &c_mat, opts, &mut rng, &mut st)?;

    let (c_h_lag, block_c_h_lag, c_h_lag_se) =
        steady_lags(&st.h, n_paths, h, opts.lag_out, opts.blocks);

    let act = params.activation;
    let t_field = h - 2;
    let mut samples = Vec::with_capacity(n_paths);
    for p in 0..n_paths {
        let idx = p * h + t_field;
        let y = st.y[idx];
        samples.push(GruMomentSample {
            z: sigmoid(st.zeta[idx]),
            z_prime: sigmoid_prime(st.zeta[idx]),
            r: sigmoid(st.xi[idx]),
            r_prime: sigmoid_prime(st.xi[idx]),
            h_prev: st.h[idx],
            y,
            phi_y: act.apply(y),
            phi_prime_y: act.prime(y),
            weight: 1.0,
        });
    }
    let moments = SampleMoments::Gru {
        samples: samples.clone(),
        source: MomentSource::SingleSiteMc,
    };

    let kappa = weighted_mean(&samples.iter().map(|s| (s.z, s.weight)).collect::<Vec<_>>());
    let correlations = CorrelationSet {
        c_h: c_h_lag[0],
        c_h_lag: c_h_lag.clone(),
        c_r: weighted_mean(&samples.iter().map(|s| (s.r * s.r, 1.0)).collect::<Vec<_>>()),
        c_rprime: weighted_mean(
            &samples
                .iter()
                .map(|s| (s.r_prime * s.r_prime, 1.0))
                .collect::<Vec<_>>(),
        ),
        c_z: weighted_mean(&samples.iter().map(|s| (s.z * s.z, 1.0)).collect::<Vec<_>>()),
        kappa,
        c_y: weighted_mean(&samples.iter().map(|s| (s.y * s.y, 1.0)).collect::<Vec<_>>()),
        c_phi: weighted_mean(
            &samples
                .iter()
                .map(|s| (s.phi_y * s.phi_y, 1.0))
                .collect::<Vec<_>>(),
        ),
        c_phiprime: weighted_mean(
            &samples
                .iter()
                .map(|s| (s.phi_prime_y * s.phi_prime_y, 1.0))
                .collect::<Vec<_>>(),
        ),
        nu_sq: moments.nu_sq()?,
        alpha: 1.0 - kappa,
        eta: weighted_mean(
            &samples
                .iter()
                .map(|s| ((s.phi_prime_y != 0.0) as u8 as f64, 1.0))
                .collect::<Vec<_>>(),
        ),
        lstm_q: None,
        lstm_p: None,
    };

    Ok(SingleSiteResult {
        c_h_se: c_h_lag_se[0],
        correlations,
        moments,
        c_h_lag_se,
        block_c_h_lag,
        sweeps,
        converged,
    })
}

fn lstm_mc(params: &GatedNetParams, opts: &McOpts) -> Result<SingleSiteResult> {
    let (n_paths, h) = (opts.paths, opts.horizon);
    let mut c_mat = DenseMatrix::zeros(h, h);
    for t in 0..h {
        c_mat.set(t, t, INIT_VAR);
    }
    let mut st = LstmSweepState {
        eta_f: vec![0.0; n_paths * h],
        eta_i: vec![0.0; n_paths * h],
        eta_o: vec![0.0; n_paths * h],
        y: vec![0.0; n_paths * h],
        c: vec![0.0; n_paths * h],
        h: vec![0.0; n_paths * h],
    };
    let (sweeps, converged) = converge(opts, &mut c_mat, &mut st, |c, rng, st| {
        lstm_sweep(params, c, opts, rng, st)
    })?;

    let mut rng = stream_rng(opts.seed, Stream::McBlock(sweeps as u32));
    lstm_sweep(params, &c_mat, opts, &mut rng, &mut st)?;

    let (c_h_lag, block_c_h_lag, c_h_lag_se) =
        steady_lags(&st.h, n_paths, h, opts.lag_out, opts.blocks);

    let act = params.activation;
    let t_field = h - 2;
    let mut samples = Vec::with_capacity(n_paths);
    for p in 0..n_paths {
        let idx = p * h + t_field;
        let y = st.y[idx];
        let c_now = st.c[idx + 1];
        samples.push(LstmMomentSample {
            f: sigmoid(st.eta_f[idx]),
            f_prime: sigmoid_prime(st.eta_f[idx]),
            i: sigmoid(st.eta_i[idx]),
            i_prime: sigmoid_prime(st.eta_i[idx]),
            o: sigmoid(st.eta_o[idx]),
            o_prime: sigmoid_prime(st.eta_o[idx]),
            y,
            phi_y: act.apply(y),
            phi_prime_y: act.prime(y),
            c: c_now,
            c_prev: st.c[idx],
            h_prev: st.h[idx],
            phi_c: act.apply(c_now),
            phi_prime_c: act.prime(c_now),
            weight: 1.0,
        });
    }
    let moments = SampleMoments::Lstm {
        samples: samples.clone(),
        source: MomentSource::SingleSiteMc,
    };

    let kappa = weighted_mean(&samples.iter().map(|s| (s.f, 1.0)).collect::<Vec<_>>());
    let correlations = CorrelationSet {
        c_h: c_h_lag[0],
        c_h_lag: c_h_lag.clone(),
        c_r: weighted_mean(&samples.iter().map(|s| (s.i * s.i, 1.0)).collect::<Vec<_>>()),
        c_rprime: weighted_mean(
            &samples
                .iter()
                .map(|s| (s.i_prime * s.i_prime, 1.0))
                .collect::<Vec<_>>(),
        ),
        c_z: weighted_mean(&samples.iter().map(|s| (s.f * s.f, 1.0)).collect::<Vec<_>>()),
        kappa,
        c_y: weighted_mean(&samples.iter().map(|s| (s.y * s.y, 1.0)).collect::<Vec<_>>()),
        c_phi: weighted_mean(
            &samples
                .iter()
                .map(|s| (s.phi_y * s.phi_y, 1.0))
                .collect::<Vec<_>>(),
        ),
        c_phiprime: weighted_mean(
            &samples
                .iter()
                .map(|s| (s.phi_prime_y * s.phi_prime_y, 1.0))
                .collect::<Vec<_>>(),
        ),
        nu_sq: 0.0,
        alpha: 1.0 - kappa,
        eta: weighted_mean(
            &samples
                .iter()
                .map(|s| ((s.phi_prime_y != 0.0) as u8 as f64, 1.0))
                .collect::<Vec<_>>(),
        ),
        lstm_q: Some(weighted_mean(
            &samples
                .iter()
                .map(|s| (s.q(params), 1.0))
                .collect::<Vec<_>>(),
        )),
        lstm_p: Some(weighted_mean(
            &samples
                .iter()
                .map(|s| (s.p(params), 1.0))
                .collect::<Vec<_>>(),
        )),
    };

    Ok(SingleSiteResult {
        c_h_se: c_h_lag_se[0],
        correlations,
        moments,
        c_h_lag_se,
        block_c_h_lag,
        sweeps,
        converged,
    })
}

/// Residuals of the stationary self-consistency conditions of the GRU,
/// evaluated on a measured lag correlation function.
///
/// In a time-translation-invariant steady state the single-site process
/// obeys the second-order difference relations
///
/// ```text
/// k = 0:  C_h(0) + C_z(0) C_h(0) - 2κ C_h(1) = (1 - 2κ + C_z(0)) C_φ(0)
/// k ≥ 1:  C_h(k) - κ[C_h(k-1) + C_h(k+1)] + C_z(k) C_h(k)
///                                          = (1 - 2κ + C_z(k)) C_φ(k)
/// ```
///
/// where `C_z`, `C_φ` are the Gaussian lag kernels of the gate and candidate
/// driven by `C_h` itself. The returned vector holds the left-minus-right
/// residual for `k = 0 .. c_h_lag.len()-2`; a perfect steady state gives
/// zeros, and a fixed point does so identically at every lag.
pub fn dmft_steady_residual(params: &GatedNetParams, corr: &CorrelationSet) -> Result<Vec<f64>> {
    params.expect_arch(Arch::Gru)?;
    let lags = &corr.c_h_lag;
    if lags.len() < 3 {
        return Err(Error::InvalidParams(
            "need at least lags 0..=2 to evaluate the stationary conditions".into(),
        ));
    }
    let c0 = lags[0];
    if lags[1] > c0 {
        return Err(Error::Numeric(format!(
            "lag correlation exceeds the equal-time moment (C_h(1) = {} > C_h(0) = {}); \
             the series is not a steady-state autocorrelation",
            lags[1], c0
        )));
    }

    let a_z = params.gain.get(Gate::Z);
    let v_z = params.bias_var.get(Gate::Z);
    let m_z = params.bias_mean.get(Gate::Z);
    let a_r = params.gain.get(Gate::R);
    let v_r = params.bias_var.get(Gate::R);
    let m_r = params.bias_mean.get(Gate::R);
    let a_h = params.gain.get(Gate::H);
    let v_h = params.bias_var.get(Gate::H);
    let m_h = params.bias_mean.get(Gate::H);
    let act = params.activation;

    let var_zeta = a_z * a_z * c0 + v_z;
    let var_xi = a_r * a_r * c0 + v_r;
    let kappa = gauss_expect(m_z, var_zeta, sigmoid);
    let c_r_of = |c_lag: f64| {
        bivariate_expect(m_r, var_xi, a_r * a_r * c_lag + v_r, |x, y| {
            sigmoid(x) * sigmoid(y)
        })
    };
    let c_r0 = c_r_of(c0);
    let var_y = a_h * a_h * c_r0 * c0 + v_h;

    let c_z_at = |k: usize| {
        bivariate_expect(m_z, var_zeta, a_z * a_z * lags[k] + v_z, |x, y| {
            sigmoid(x) * sigmoid(y)
        })
    };
    let c_phi_at = |k: usize| {
        let cov_y = a_h * a_h * c_r_of(lags[k]) * lags[k] + v_h;
        bivariate_expect(m_h, var_y, cov_y, |x, y| act.apply(x) * act.apply(y))
    };

    let mut res = Vec::with_capacity(lags.len() - 1);
    let (cz0, cphi0) = (c_z_at(0), c_phi_at(0));
    res.push(c0 + cz0 * c0 - 2.0 * kappa * lags[1] - (1.0 - 2.0 * kappa + cz0) * cphi0);
    for k in 1..lags.len() - 1 {
        let (czk, cphik) = (c_z_at(k), c_phi_at(k));
        res.push(
            lags[k] - kappa * (lags[k - 1] + lags[k + 1]) + czk * lags[k]
                - (1.0 - 2.0 * kappa + czk) * cphik,
        );
    }
    Ok(res)
}
