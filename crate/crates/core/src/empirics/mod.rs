//! Empirical side of the theory–experiment comparison: dense eigenvalue
//! clouds of sampled Jacobians, statistics matching them against predicted
//! densities and support boundaries, norm-moment sequences of matrix powers,
//! and parameter sweeps extracting radius scaling laws.

pub mod eig;
pub mod gelfand;
pub mod stats;
pub mod sweep;

pub use eig::{eig_dense, EigenCloud};
pub use gelfand::{growth_rates, norm_moment_sequence};
pub use stats::{
    cdf_near_one, compare_boundary, compare_disk, AtomMatch, BoundaryComparison, DiskComparison,
};
pub use sweep::{fit_loglog, pool_by_value, radius_scaling_sweep, LogLogFit, ScalingPoint};
