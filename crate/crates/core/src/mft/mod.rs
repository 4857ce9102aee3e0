//! Infinite-width description of the gated networks: Gaussian-integral
//! kernels, fixed points of the self-consistent second-moment equations, and
//! a single-site Monte Carlo solver for the full non-Markovian steady state.

pub mod fixed_point;
pub mod kernels;
pub mod quadrature;
pub mod single_site;

pub use fixed_point::{
    gru_fp_perturbative, gru_fp_perturbative_for, gru_fp_solve, FixedPointSolution, FpBranch,
};
pub use kernels::{gru_kernels, rho_t_sq, GruKernels};
pub use quadrature::{bivariate_expect, gauss_expect, gauss_expect_checked, GaussHermite};
pub use single_site::{
    dmft_steady_residual, single_site_mc, CorrelationSet, McOpts, SingleSiteResult,
};
