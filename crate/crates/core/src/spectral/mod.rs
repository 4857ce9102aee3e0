//! Random-matrix layer: spectral support curves, resolvents and limiting
//! eigenvalue densities for the state-to-state Jacobians of random gated
//! networks, plus closed-form asymptotics in saturated-gate regimes.
//!
//! The central object is a scalar support indicator S(λ) built from gate
//! statistics (pole locations and shaping weights per site): the spectrum
//! concentrates on `{S ≥ 0}`, so its boundary is the zero level set, traced
//! here by marching squares ([`marching`], [`scurve`]). Inside the support a
//! scalar auxiliary function solves a self-consistency equation and yields
//! the trace of the resolvent and the eigenvalue density ([`resolvent`]);
//! in fully saturated or deterministic-gate regimes the density collapses to
//! uniform disks plus point masses known in closed form ([`density`]).
//! [`asymptotics`] covers the extreme-gain limits: gap pinching at λ = 1,
//! accumulation CDFs, and norm-moment sequences for long products.

pub mod asymptotics;
pub mod density;
pub mod marching;
pub mod resolvent;
pub mod scurve;

pub use asymptotics::{
    binary_gate_closed_fraction, fit_cdf_erfc, gelfand_binary_limit, gelfand_frozen_radius,
    gelfand_moment, pinching_rate, ErfcFit, UpdateRegime,
};
pub use density::{
    gru_binary_update_density, gru_zero_fp_density, lstm_binary_forget_density,
    lstm_zero_fp_density, unsaturated_fraction, Atom, LimitingDensity,
};
pub use marching::{distance_to_loops, point_in_loops, zero_contours, GridSpec};
pub use resolvent::{GruResolvent, LstmResolvent};
pub use scurve::{
    gru_rho_sq_from_moments, gru_update_frozen_radius, GruCurveKind, GruSCurve, LstmSCurve,
};
