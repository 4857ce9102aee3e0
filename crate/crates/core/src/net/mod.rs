//! Finite-size networks: weight sampling, state recursions, Jacobians.
//!
//! The network sees no external input; constant drive enters through the
//! bias means, so the recursion is autonomous and its steady state is the
//! object of study.

mod gru;
mod lstm;
mod run;
mod sample;
mod vanilla;

pub use gru::{extended_jacobian_gru, jacobian_gru, step_gru, GruState};
pub use lstm::{jacobian_lstm, step_lstm, LstmState};
pub use run::{run_to_steady, state_jacobian, NetState, RunOpts, SteadyRun};
pub use sample::sample_network;
pub use vanilla::{jacobian_vanilla, step_vanilla, VanillaState};

use crate::linalg::DenseMatrix;
use crate::params::GatedNetParams;
use serde::{Deserialize, Serialize};

/// One concrete draw of all weight matrices and bias vectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkRealization {
    pub params: GatedNetParams,
    pub seed: u64,
    pub weights: Weights,
}

/// Architecture-specific weight storage. Matrices are `n × n`, biases length
/// `n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Weights {
    Gru {
        u_z: DenseMatrix,
        u_r: DenseMatrix,
        u_h: DenseMatrix,
        b_z: Vec<f64>,
        b_r: Vec<f64>,
        b_h: Vec<f64>,
    },
    Lstm {
        u_f: DenseMatrix,
        u_i: DenseMatrix,
        u_o: DenseMatrix,
        u_h: DenseMatrix,
        b_f: Vec<f64>,
        b_i: Vec<f64>,
        b_o: Vec<f64>,
        b_h: Vec<f64>,
    },
    Vanilla {
        u_h: DenseMatrix,
        b_h: Vec<f64>,
    },
}
