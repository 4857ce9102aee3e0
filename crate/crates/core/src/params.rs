use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Recurrent architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arch {
    Gru,
    Lstm,
    /// Plain recurrence `h_t = φ(U_h h_{t-1} + b_h)`, kept as a gateless
    /// baseline.
    Vanilla,
}

impl Arch {
    /// Gates that exist in this architecture, in canonical order. The
    /// candidate-activation branch `h` is listed last.
    pub fn gates(self) -> &'static [Gate] {
        match self {
            Arch::Gru => &[Gate::Z, Gate::R, Gate::H],
            Arch::Lstm => &[Gate::F, Gate::I, Gate::O, Gate::H],
            Arch::Vanilla => &[Gate::H],
        }
    }

    /// Dimension of the full state the Jacobian acts on, given `n` hidden
    /// units: LSTM carries `(c, h)`, the others just `h`.
    pub fn state_dim(self, n: usize) -> usize {
        match self {
            Arch::Lstm => 2 * n,
            _ => n,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Arch::Gru => "gru",
            Arch::Lstm => "lstm",
            Arch::Vanilla => "vanilla",
        }
    }
}

/// Gate label. `Z` (update) and `R` (reset) belong to the GRU; `F` (forget),
/// `I` (input) and `O` (output) to the LSTM; `H` is the candidate branch of
/// either architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    Z,
    R,
    F,
    I,
    O,
    H,
}

impl Gate {
    pub fn label(self) -> char {
        match self {
            Gate::Z => 'z',
            Gate::R => 'r',
            Gate::F => 'f',
            Gate::I => 'i',
            Gate::O => 'o',
            Gate::H => 'h',
        }
    }

    fn index(self) -> usize {
        match self {
            Gate::Z => 0,
            Gate::R => 1,
            Gate::F => 2,
            Gate::I => 3,
            Gate::O => 4,
            Gate::H => 5,
        }
    }
}

/// One scalar per gate. Entries for gates absent from the architecture are
/// ignored by every consumer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GateValues {
    #[serde(default)]
    pub z: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub f: f64,
    #[serde(default)]
    pub i: f64,
    #[serde(default)]
    pub o: f64,
    #[serde(default)]
    pub h: f64,
}

impl GateValues {
    pub fn get(&self, gate: Gate) -> f64 {
        [self.z, self.r, self.f, self.i, self.o, self.h][gate.index()]
    }

    pub fn set(&mut self, gate: Gate, value: f64) {
        match gate {
            Gate::Z => self.z = value,
            Gate::R => self.r = value,
            Gate::F => self.f = value,
            Gate::I => self.i = value,
            Gate::O => self.o = value,
            Gate::H => self.h = value,
        }
    }
}

/// Candidate-branch activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Activation {
    #[default]
    Tanh,
    /// `x` clamped to `[-1, 1]`; derivative 1 strictly inside, 0 at and
    /// beyond the saturation points.
    HardTanh,
}

/// Distribution parameters of a random gated network.
///
/// Weights are i.i.d. `(U_k)_ij ~ N(0, a_k²/n)` with one gain `a_k` per gate,
/// biases i.i.d. `(b_k)_i ~ N(bias_mean_k, bias_var_k)`. The network sees no
/// external input: a constant drive is expressed through the bias means.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GatedNetParams {
    pub arch: Arch,
    /// Number of hidden units (≥ 2).
    pub n: usize,
    pub activation: Activation,
    /// Weight gains `a_k`.
    pub gain: GateValues,
    /// Bias means `b_k`.
    pub bias_mean: GateValues,
    /// Bias variances `v_k`.
    pub bias_var: GateValues,
}

impl GatedNetParams {
    /// Zero-bias GRU with gains `(a_z, a_r, a_h)`.
    pub fn gru(n: usize, a_z: f64, a_r: f64, a_h: f64) -> Self {
        let mut gain = GateValues::default();
        gain.z = a_z;
        gain.r = a_r;
        gain.h = a_h;
        GatedNetParams {
            arch: Arch::Gru,
            n,
            activation: Activation::Tanh,
            gain,
            bias_mean: GateValues::default(),
            bias_var: GateValues::default(),
        }
    }

    /// Zero-bias LSTM with gains `(a_f, a_i, a_o, a_h)`.
    pub fn lstm(n: usize, a_f: f64, a_i: f64, a_o: f64, a_h: f64) -> Self {
        let mut gain = GateValues::default();
        gain.f = a_f;
        gain.i = a_i;
        gain.o = a_o;
        gain.h = a_h;
        GatedNetParams {
            arch: Arch::Lstm,
            n,
            activation: Activation::Tanh,
            gain,
            bias_mean: GateValues::default(),
            bias_var: GateValues::default(),
        }
    }

    /// Zero-bias vanilla RNN with candidate gain `a_h`.
    pub fn vanilla(n: usize, a_h: f64) -> Self {
        let mut gain = GateValues::default();
        gain.h = a_h;
        GatedNetParams {
            arch: Arch::Vanilla,
            n,
            activation: Activation::Tanh,
            gain,
            bias_mean: GateValues::default(),
            bias_var: GateValues::default(),
        }
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_gain(mut self, gate: Gate, value: f64) -> Self {
        self.gain.set(gate, value);
        self
    }

    pub fn with_bias_mean(mut self, gate: Gate, value: f64) -> Self {
        self.bias_mean.set(gate, value);
        self
    }

    pub fn with_bias_var(mut self, gate: Gate, value: f64) -> Self {
        self.bias_var.set(gate, value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!(
                "n = {} but at least 2 hidden units are required",
                self.n
            )));
        }
        for &gate in self.arch.gates() {
            let a = self.gain.get(gate);
            let v = self.bias_var.get(gate);
            let b = self.bias_mean.get(gate);
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "gain a_{} = {a} must be finite and ≥ 0",
                    gate.label()
                )));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "bias variance v_{} = {v} must be finite and ≥ 0",
                    gate.label()
                )));
            }
            if !b.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "bias mean b_{} = {b} must be finite",
                    gate.label()
                )));
            }
        }
        Ok(())
    }

    /// Require a specific architecture (GRU-only and LSTM-only entry points
    /// call this first).
    pub fn expect_arch(&self, arch: Arch) -> Result<()> {
        if self.arch != arch {
            return Err(Error::InvalidParams(format!(
                "expected {} parameters, got {}",
                arch.name(),
                self.arch.name()
            )));
        }
        Ok(())
    }

    /// True when every gate bias is deterministic and centered and the
    /// candidate bias is zero — the symmetric setting in which the zero fixed
    /// point exists and the closed-form expansions below apply.
    pub fn zero_bias(&self) -> bool {
        self.arch
            .gates()
            .iter()
            .all(|&g| self.bias_mean.get(g) == 0.0 && self.bias_var.get(g) == 0.0)
    }

    /// Compact deterministic tag used in output file names, e.g.
    /// `gru_n1000_ah3_az1p5_ar0_s17`.
    pub fn slug(&self, seed: u64) -> String {
        fn num(x: f64) -> String {
            let mut s = format!("{x}");
            if s.ends_with(".0") {
                s.truncate(s.len() - 2);
            }
            s.replace('.', "p").replace('-', "m")
        }
        let mut parts = vec![format!("{}_n{}", self.arch.name(), self.n)];
        parts.push(format!("ah{}", num(self.gain.h)));
        for &gate in self.arch.gates() {
            if gate != Gate::H {
                parts.push(format!("a{}{}", gate.label(), num(self.gain.get(gate))));
            }
        }
        parts.push(format!("s{seed}"));
        parts.join("_")
    }
}
