//! Per-neuron joint samples of gate values, derivatives, and states — the
//! empirical measure over which all spectral expectations are taken.
//!
//! The same container is produced by three sources: pooling neurons across
//! retained steps of a full network simulation, pooling paths of the
//! single-site Monte Carlo, or analytically (fixed points, where the measure
//! is an explicit function of one or two Gaussian variables and the
//! "samples" are quadrature nodes carrying weights).

use crate::activation::{sigmoid, sigmoid_prime};
use crate::error::{Error, Result};
use crate::net::{GruState, LstmState, NetState};
use crate::params::GatedNetParams;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentSource {
    /// Neurons of a finite network at steady state.
    NetworkSim,
    /// Paths of the single-site Monte Carlo.
    SingleSiteMc,
    /// The zero fixed point (deterministic gates).
    AnalyticZeroFp,
    /// A nonzero fixed point (gates driven by a frozen Gaussian field;
    /// samples are quadrature nodes with weights).
    AnalyticFp,
}

/// One GRU sample: everything entering the spectral expectations.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GruMomentSample {
    pub z: f64,
    pub z_prime: f64,
    pub r: f64,
    pub r_prime: f64,
    pub h_prev: f64,
    pub y: f64,
    pub phi_y: f64,
    pub phi_prime_y: f64,
    /// Sample weight (1 for simulation/MC samples; quadrature weight for
    /// analytic sources).
    pub weight: f64,
}

/// One LSTM sample.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LstmMomentSample {
    pub f: f64,
    pub f_prime: f64,
    pub i: f64,
    pub i_prime: f64,
    pub o: f64,
    pub o_prime: f64,
    pub y: f64,
    pub phi_y: f64,
    pub phi_prime_y: f64,
    pub c: f64,
    pub c_prev: f64,
    pub h_prev: f64,
    pub phi_c: f64,
    pub phi_prime_c: f64,
    pub weight: f64,
}

impl LstmMomentSample {
    /// Output-gate shaping variable `q = a_o² o'² φ(c)²`.
    pub fn q(&self, params: &GatedNetParams) -> f64 {
        let a_o = params.gain.o;
        a_o * a_o * self.o_prime * self.o_prime * self.phi_c * self.phi_c
    }

    /// Interior shaping variable
    /// `p = o² φ'(c)² (a_f² c_{t-1}² f'² + a_i² i'² φ(y)² + a_h² i² φ'(y)²)`.
    pub fn p(&self, params: &GatedNetParams) -> f64 {
        let (a_f, a_i, a_h) = (params.gain.f, params.gain.i, params.gain.h);
        let inner = a_f * a_f * self.c_prev * self.c_prev * self.f_prime * self.f_prime
            + a_i * a_i * self.i_prime * self.i_prime * self.phi_y * self.phi_y
            + a_h * a_h * self.i * self.i * self.phi_prime_y * self.phi_prime_y;
        self.o * self.o * self.phi_prime_c * self.phi_prime_c * inner
    }
}

/// Architecture-tagged sample pool.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SampleMoments {
    Gru {
        samples: Vec<GruMomentSample>,
        source: MomentSource,
    },
    Lstm {
        samples: Vec<LstmMomentSample>,
        source: MomentSource,
    },
}

impl SampleMoments {
    pub fn len(&self) -> usize {
        match self {
            SampleMoments::Gru { samples, .. } => samples.len(),
            SampleMoments::Lstm { samples, .. } => samples.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn source(&self) -> MomentSource {
        match self {
            SampleMoments::Gru { source, .. } => *source,
            SampleMoments::Lstm { source, .. } => *source,
        }
    }

    pub fn gru_samples(&self) -> Result<&[GruMomentSample]> {
        match self {
            SampleMoments::Gru { samples, .. } => Ok(samples),
            _ => Err(Error::InvalidParams("expected GRU moment samples".into())),
        }
    }

    pub fn lstm_samples(&self) -> Result<&[LstmMomentSample]> {
        match self {
            SampleMoments::Lstm { samples, .. } => Ok(samples),
            _ => Err(Error::InvalidParams("expected LSTM moment samples".into())),
        }
    }

    pub fn total_weight(&self) -> f64 {
        match self {
            SampleMoments::Gru { samples, .. } => samples.iter().map(|s| s.weight).sum(),
            SampleMoments::Lstm { samples, .. } => samples.iter().map(|s| s.weight).sum(),
        }
    }

    /// Weighted mean of `h_{t-1}²` — the empirical steady `C_h` feeding the
    /// quadrature kernels.
    pub fn c_h_prev(&self) -> f64 {
        let (num, den) = match self {
            SampleMoments::Gru { samples, .. } => samples
                .iter()
                .fold((0.0, 0.0), |(a, b), s| {
                    (a + s.weight * s.h_prev * s.h_prev, b + s.weight)
                }),
            SampleMoments::Lstm { samples, .. } => samples
                .iter()
                .fold((0.0, 0.0), |(a, b), s| {
                    (a + s.weight * s.h_prev * s.h_prev, b + s.weight)
                }),
        };
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Weighted mean of `φ'(y)²` over the pool — the candidate-channel
    /// saturation level, and the unsaturated fraction when the nonlinearity
    /// is piecewise linear.
    pub fn mean_phi_prime_sq(&self) -> f64 {
        let (num, den) = match self {
            SampleMoments::Gru { samples, .. } => samples.iter().fold((0.0, 0.0), |(a, b), s| {
                (a + s.weight * s.phi_prime_y * s.phi_prime_y, b + s.weight)
            }),
            SampleMoments::Lstm { samples, .. } => samples.iter().fold((0.0, 0.0), |(a, b), s| {
                (a + s.weight * s.phi_prime_y * s.phi_prime_y, b + s.weight)
            }),
        };
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Weighted mean of `(h_{t-1} - φ(y_t))²` (GRU only): the gate-leverage
    /// scale ν² of the outer bounding curve.
    pub fn nu_sq(&self) -> Result<f64> {
        let samples = self.gru_samples()?;
        let (num, den) = samples.iter().fold((0.0, 0.0), |(a, b), s| {
            let d = s.h_prev - s.phi_y;
            (a + s.weight * d * d, b + s.weight)
        });
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }

    /// Pools per-neuron tuples from stepped GRU states.
    pub fn from_gru_states<'a>(states: impl IntoIterator<Item = &'a GruState>) -> Result<Self> {
        let mut samples = Vec::new();
        for s in states {
            if s.t == 0 {
                return Err(Error::InvalidParams(
                    "cannot harvest moments from an unstepped state".into(),
                ));
            }
            for k in 0..s.h.len() {
                samples.push(GruMomentSample {
                    z: s.z[k],
                    z_prime: s.z_prime[k],
                    r: s.r[k],
                    r_prime: s.r_prime[k],
                    h_prev: s.h_prev[k],
                    y: s.y[k],
                    phi_y: s.phi_y[k],
                    phi_prime_y: s.phi_prime_y[k],
                    weight: 1.0,
                });
            }
        }
        Ok(SampleMoments::Gru {
            samples,
            source: MomentSource::NetworkSim,
        })
    }

    /// Pools per-neuron tuples from stepped LSTM states.
    pub fn from_lstm_states<'a>(states: impl IntoIterator<Item = &'a LstmState>) -> Result<Self> {
        let mut samples = Vec::new();
        for s in states {
            if s.t == 0 {
                return Err(Error::InvalidParams(
                    "cannot harvest moments from an unstepped state".into(),
                ));
            }
            for k in 0..s.h.len() {
                samples.push(LstmMomentSample {
                    f: s.f[k],
                    f_prime: s.f_prime[k],
                    i: s.i[k],
                    i_prime: s.i_prime[k],
                    o: s.o[k],
                    o_prime: s.o_prime[k],
                    y: s.y[k],
                    phi_y: s.phi_y[k],
                    phi_prime_y: s.phi_prime_y[k],
                    c: s.c[k],
                    c_prev: s.c_prev[k],
                    h_prev: s.h_prev[k],
                    phi_c: s.phi_c[k],
                    phi_prime_c: s.phi_prime_c[k],
                    weight: 1.0,
                });
            }
        }
        Ok(SampleMoments::Lstm {
            samples,
            source: MomentSource::NetworkSim,
        })
    }

    /// The one-point measure at the zero fixed point: with centered state
    /// weights and biases the origin is always a fixed point, all
    /// pre-activations vanish, and every gate sits at the sigmoid of its
    /// (deterministic) bias. Requires zero bias variance on the gates so the
    /// measure really is a single atom.
    pub fn zero_fp(params: &GatedNetParams) -> Result<Self> {
        params.validate()?;
        if params.bias_mean.h != 0.0 || params.bias_var.h != 0.0 {
            return Err(Error::UnsupportedRegime(
                "the origin is a fixed point only with a centered state channel \
                 (zero candidate bias mean and variance)"
                    .into(),
            ));
        }
        let deterministic = |v: f64| v == 0.0;
        match params.arch {
            crate::params::Arch::Gru => {
                if !deterministic(params.bias_var.z) || !deterministic(params.bias_var.r) {
                    return Err(Error::UnsupportedRegime(
                        "analytic zero-fixed-point moments need deterministic gate biases".into(),
                    ));
                }
                let sample = GruMomentSample {
                    z: sigmoid(params.bias_mean.z),
                    z_prime: sigmoid_prime(params.bias_mean.z),
                    r: sigmoid(params.bias_mean.r),
                    r_prime: sigmoid_prime(params.bias_mean.r),
                    h_prev: 0.0,
                    y: 0.0,
                    phi_y: 0.0,
                    phi_prime_y: 1.0,
                    weight: 1.0,
                };
                Ok(SampleMoments::Gru {
                    samples: vec![sample],
                    source: MomentSource::AnalyticZeroFp,
                })
            }
            crate::params::Arch::Lstm => {
                if !deterministic(params.bias_var.f)
                    || !deterministic(params.bias_var.i)
                    || !deterministic(params.bias_var.o)
                {
                    return Err(Error::UnsupportedRegime(
                        "analytic zero-fixed-point moments need deterministic gate biases".into(),
                    ));
                }
                let sample = LstmMomentSample {
                    f: sigmoid(params.bias_mean.f),
                    f_prime: sigmoid_prime(params.bias_mean.f),
                    i: sigmoid(params.bias_mean.i),
                    i_prime: sigmoid_prime(params.bias_mean.i),
                    o: sigmoid(params.bias_mean.o),
                    o_prime: sigmoid_prime(params.bias_mean.o),
                    y: 0.0,
                    phi_y: 0.0,
                    phi_prime_y: 1.0,
                    c: 0.0,
                    c_prev: 0.0,
                    h_prev: 0.0,
                    phi_c: 0.0,
                    phi_prime_c: 1.0,
                    weight: 1.0,
                };
                Ok(SampleMoments::Lstm {
                    samples: vec![sample],
                    source: MomentSource::AnalyticZeroFp,
                })
            }
            crate::params::Arch::Vanilla => Err(Error::UnsupportedRegime(
                "spectral moments are defined for gated architectures".into(),
            )),
        }
    }

    /// Pools from architecture-erased states (all must match one arch).
    pub fn from_states(states: &[NetState]) -> Result<Self> {
        match states.first() {
            Some(NetState::Gru(_)) => {
                let grus: Result<Vec<&GruState>> = states.iter().map(|s| s.as_gru()).collect();
                SampleMoments::from_gru_states(grus?)
            }
            Some(NetState::Lstm(_)) => {
                let lstms: Result<Vec<&LstmState>> = states.iter().map(|s| s.as_lstm()).collect();
                SampleMoments::from_lstm_states(lstms?)
            }
            Some(NetState::Vanilla(_)) => Err(Error::UnsupportedRegime(
                "spectral moments are defined for gated architectures".into(),
            )),
            None => Err(Error::InvalidParams("no states to pool".into())),
        }
    }
}
