//! Deterministic random-number streams.
//!
//! Everything stochastic in the crate draws from ChaCha12, a counter-based
//! generator whose independent streams make the layout of draws reproducible
//! and order-independent: each (purpose, gate) pair owns its own stream, so
//! e.g. sampling the reset-gate matrix never shifts the draws of the
//! candidate matrix, and adding a gate to an architecture leaves the other
//! gates' realizations untouched.

use crate::params::Gate;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Purpose of a stream, combined with a gate label where applicable.
#[derive(Clone, Copy, Debug)]
pub enum Stream {
    /// Entries of the weight matrix `U_k`.
    Matrix(Gate),
    /// Entries of the bias vector `b_k`.
    Bias(Gate),
    /// Initial hidden state `h_0` (and `c_0` for the LSTM).
    InitState,
    /// Monte Carlo path noise, one stream per path-block index.
    McBlock(u32),
}

fn gate_code(gate: Gate) -> u64 {
    match gate {
        Gate::Z => 0,
        Gate::R => 1,
        Gate::F => 2,
        Gate::I => 3,
        Gate::O => 4,
        Gate::H => 5,
    }
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Matrix(g) => 0x10 + gate_code(g),
            Stream::Bias(g) => 0x20 + gate_code(g),
            Stream::InitState => 0x01,
            Stream::McBlock(i) => 0x1000 + i as u64,
        }
    }
}

/// A fresh generator for `(seed, stream)`, independent of all other streams
/// under the same seed.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
