use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::net::{
    jacobian_gru, jacobian_lstm, jacobian_vanilla, step_gru, step_lstm, step_vanilla,
    GruState, LstmState, NetworkRealization, VanillaState,
};
use crate::params::Arch;
use crate::rng::{stream_rng, Stream};
use rand::Rng;
use rand_distr::StandardNormal;

/// Architecture-erased network state.
#[derive(Clone, Debug)]
pub enum NetState {
    Gru(GruState),
    Lstm(LstmState),
    Vanilla(VanillaState),
}

impl NetState {
    pub fn h(&self) -> &[f64] {
        match self {
            NetState::Gru(s) => &s.h,
            NetState::Lstm(s) => &s.h,
            NetState::Vanilla(s) => &s.h,
        }
    }

    pub fn t(&self) -> usize {
        match self {
            NetState::Gru(s) => s.t,
            NetState::Lstm(s) => s.t,
            NetState::Vanilla(s) => s.t,
        }
    }

    pub fn as_gru(&self) -> Result<&GruState> {
        match self {
            NetState::Gru(s) => Ok(s),
            _ => Err(Error::InvalidParams("expected a GRU state".into())),
        }
    }

    pub fn as_lstm(&self) -> Result<&LstmState> {
        match self {
            NetState::Lstm(s) => Ok(s),
            _ => Err(Error::InvalidParams("expected an LSTM state".into())),
        }
    }
}

/// Trajectory options. The defaults (500 burn-in + 500 collected steps) are
/// ample for the parameter ranges studied here, where autocorrelation times
/// are a handful of steps.
#[derive(Clone, Copy, Debug)]
pub struct RunOpts {
    pub burn_in: usize,
    pub collect: usize,
    /// Number of evenly spaced states retained from the collection window
    /// (used for moment harvesting and multi-time Jacobians). The last
    /// collected state is always included.
    pub snapshots: usize,
    /// Relative drift between the first- and second-half means of the
    /// per-step state variance above which the run is flagged
    /// non-stationary.
    pub drift_tol: f64,
}

impl Default for RunOpts {
    fn default() -> Self {
        RunOpts {
            burn_in: 500,
            collect: 500,
            snapshots: 24,
            drift_tol: 0.05,
        }
    }
}

/// A completed steady-state run.
#[derive(Clone, Debug)]
pub struct SteadyRun {
    /// Per collected step: population second moment `⟨h_t²⟩`.
    pub c_h_series: Vec<f64>,
    /// Mean of `c_h_series` (the empirical steady `C_h(0)`).
    pub c_h: f64,
    /// First-half vs second-half drift of `c_h_series` within tolerance.
    pub stationary: bool,
    /// Evenly spaced retained states; the last entry is the final state.
    pub snapshots: Vec<NetState>,
}

impl SteadyRun {
    pub fn final_state(&self) -> &NetState {
        self.snapshots.last().expect("at least one snapshot")
    }
}

fn mean_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

/// Runs the autonomous recursion from `h_0 ~ N(0, 0.25)` i.i.d. (for the
/// LSTM, `c_0` is drawn the same way from the same stream) through a burn-in
/// window, then collects statistics.
///
/// `init_seed` controls only the initial state; the weights are fixed by the
/// realization. Passing the realization's own seed is the common choice.
pub fn run_to_steady(net: &NetworkRealization, init_seed: u64, opts: &RunOpts) -> Result<SteadyRun> {
    if opts.collect == 0 {
        return Err(Error::InvalidParams("collect window must be nonempty".into()));
    }
    let n = net.params.n;
    let mut rng = stream_rng(init_seed, Stream::InitState);
    let mut draw = |count: usize| -> Vec<f64> {
        (0..count)
            .map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };
    let mut state = match net.params.arch {
        Arch::Gru => NetState::Gru(GruState::initial(draw(n))),
        Arch::Lstm => {
            let h0 = draw(n);
            let c0 = draw(n);
            NetState::Lstm(LstmState::initial(c0, h0))
        }
        Arch::Vanilla => NetState::Vanilla(VanillaState::initial(draw(n))),
    };

    let step = |s: &NetState| -> Result<NetState> {
        Ok(match s {
            NetState::Gru(g) => NetState::Gru(step_gru(net, g)?),
            NetState::Lstm(l) => NetState::Lstm(step_lstm(net, l)?),
            NetState::Vanilla(v) => NetState::Vanilla(step_vanilla(net, v)?),
        })
    };

    for _ in 0..opts.burn_in {
        state = step(&state)?;
    }

    let snapshots_wanted = opts.snapshots.clamp(1, opts.collect);
    // Evenly spaced collect-step indices (0-based), always ending at the
    // final collected step.
    let snap_index = |k: usize| -> usize {
        if snapshots_wanted == 1 {
            opts.collect - 1
        } else {
            k * (opts.collect - 1) / (snapshots_wanted - 1)
        }
    };
    let mut snapshots = Vec::with_capacity(snapshots_wanted);
    let mut next_snap = 0usize;

    let mut c_h_series = Vec::with_capacity(opts.collect);
    for t in 0..opts.collect {
        state = step(&state)?;
        c_h_series.push(mean_sq(state.h()));
        while next_snap < snapshots_wanted && snap_index(next_snap) == t {
            snapshots.push(state.clone());
            next_snap += 1;
        }
    }

    let c_h = c_h_series.iter().sum::<f64>() / c_h_series.len() as f64;
    let half = c_h_series.len() / 2;
    let stationary = if half == 0 {
        true
    } else {
        let m1 = c_h_series[..half].iter().sum::<f64>() / half as f64;
        let m2 = c_h_series[half..].iter().sum::<f64>() / (c_h_series.len() - half) as f64;
        (m2 - m1).abs() <= opts.drift_tol * m1.max(m2).max(1e-12)
    };

    Ok(SteadyRun {
        c_h_series,
        c_h,
        stationary,
        snapshots,
    })
}

/// Jacobian at an arbitrary retained state.
pub fn state_jacobian(net: &NetworkRealization, state: &NetState) -> Result<DenseMatrix> {
    match state {
        NetState::Gru(s) => jacobian_gru(net, s),
        NetState::Lstm(s) => jacobian_lstm(net, s),
        NetState::Vanilla(s) => jacobian_vanilla(net, s),
    }
}
