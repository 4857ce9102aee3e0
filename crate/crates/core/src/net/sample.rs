use crate::error::Result;
use crate::linalg::DenseMatrix;
use crate::net::{NetworkRealization, Weights};
use crate::params::{Arch, Gate, GatedNetParams};
use crate::rng::{stream_rng, Stream};
use rand::Rng;
use rand_distr::StandardNormal;

/// Draws one network: `(U_k)_ij ~ N(0, a_k²/n)` i.i.d., `(b_k)_i ~ N(b_k, v_k)`.
///
/// Each matrix and each bias vector is filled from its own RNG stream keyed
/// by `(seed, gate)`, so realizations of different gates are independent and
/// individually reproducible. A zero gain (or zero bias variance) produces
/// exact zeros (or exact constants) without consuming any randomness.
pub fn sample_network(params: &GatedNetParams, seed: u64) -> Result<NetworkRealization> {
    params.validate()?;
    let weights = match params.arch {
        Arch::Gru => Weights::Gru {
            u_z: sample_matrix(params, Gate::Z, seed),
            u_r: sample_matrix(params, Gate::R, seed),
            u_h: sample_matrix(params, Gate::H, seed),
            b_z: sample_bias(params, Gate::Z, seed),
            b_r: sample_bias(params, Gate::R, seed),
            b_h: sample_bias(params, Gate::H, seed),
        },
        Arch::Lstm => Weights::Lstm {
            u_f: sample_matrix(params, Gate::F, seed),
            u_i: sample_matrix(params, Gate::I, seed),
            u_o: sample_matrix(params, Gate::O, seed),
            u_h: sample_matrix(params, Gate::H, seed),
            b_f: sample_bias(params, Gate::F, seed),
            b_i: sample_bias(params, Gate::I, seed),
            b_o: sample_bias(params, Gate::O, seed),
            b_h: sample_bias(params, Gate::H, seed),
        },
        Arch::Vanilla => Weights::Vanilla {
            u_h: sample_matrix(params, Gate::H, seed),
            b_h: sample_bias(params, Gate::H, seed),
        },
    };
    Ok(NetworkRealization {
        params: *params,
        seed,
        weights,
    })
}

fn sample_matrix(params: &GatedNetParams, gate: Gate, seed: u64) -> DenseMatrix {
    let n = params.n;
    let gain = params.gain.get(gate);
    if gain == 0.0 {
        return DenseMatrix::zeros(n, n);
    }
    let sd = gain / (n as f64).sqrt();
    let mut rng = stream_rng(seed, Stream::Matrix(gate));
    let mut m = DenseMatrix::zeros(n, n);
    for v in m.data.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *v = sd * g;
    }
    m
}

fn sample_bias(params: &GatedNetParams, gate: Gate, seed: u64) -> Vec<f64> {
    let n = params.n;
    let mean = params.bias_mean.get(gate);
    let var = params.bias_var.get(gate);
    if var == 0.0 {
        return vec![mean; n];
    }
    let sd = var.sqrt();
    let mut rng = stream_rng(seed, Stream::Bias(gate));
    (0..n)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            mean + sd * g
        })
        .collect()
}
