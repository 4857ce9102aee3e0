//! Spectra of state-to-state Jacobians of randomly initialized gated recurrent
//! networks (GRU and LSTM).
//!
//! The crate has three layers that mirror how the quantities relate to each
//! other mathematically:
//!
//! * [`net`] — concrete finite-size networks: weight sampling, state updates,
//!   steady-state trajectories, and exact Jacobian assembly.
//! * [`mft`] — the infinite-width description: Gaussian-integral kernels,
//!   fixed points of the self-consistent second-moment equations, and a
//!   single-site Monte Carlo solver for the full non-Markovian steady state.
//! * [`spectral`] — spectral predictions built on top of the mean-field
//!   moments: support boundary curves, limiting densities via the resolvent,
//!   closed-form densities in solvable regimes, and scaling asymptotics
//!   (radius growth, spectral pinching, Gelfand moments).
//!
//! [`empirics`] measures the same quantities from finite networks (dense
//! eigensolves, radial CDFs, Gelfand moments) and compares them against the
//! predictions; [`phase`] maps out the fixed-point phase diagram; [`io`]
//! holds the deterministic CSV/JSON/SVG writers used by the CLI; and
//! [`acceptance`] bundles the end-to-end verification scenarios.

pub mod acceptance;
pub mod activation;
pub mod empirics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mft;
pub mod moments;
pub mod net;
pub mod params;
pub mod phase;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{Activation, Arch, Gate, GateValues, GatedNetParams};

/// Pin all linear algebra to sequential execution.
///
/// Parallelism in this crate lives at the sweep level (independent seeds,
/// grid nodes, paths), where ordered collection keeps reductions
/// deterministic. Letting the eigensolver also fan out would make its
/// internal reduction order depend on the thread pool, which breaks the
/// byte-identical-rerun guarantee of the CLI.
pub fn init_deterministic() {
    faer::set_global_parallelism(faer::Par::Seq);
}
