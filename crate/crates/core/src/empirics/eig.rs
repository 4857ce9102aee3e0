//! Dense eigenvalue clouds of sampled Jacobians.

use crate::error::{Error, Result};
use crate::linalg::{sort_complex, DenseMatrix};
use crate::params::Arch;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// All eigenvalues of a dense real matrix, in the crate's canonical order.
pub fn eig_dense(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    if m.rows != m.cols {
        return Err(Error::InvalidParams(format!(
            "eigenvalues need a square matrix; got {}×{}",
            m.rows, m.cols
        )));
    }
    let mut values = m
        .to_faer()
        .eigenvalues()
        .map_err(|e| Error::Eig(format!("{e:?} on a {0}×{0} matrix", m.rows)))?;
    sort_complex(&mut values);
    Ok(values)
}

/// Pooled eigenvalues of one or more Jacobians of the same shape, with
/// enough bookkeeping to convert counts into per-unit masses (the LSTM
/// Jacobian acts on the stacked `(c, h)` state, so its `2n` eigenvalues
/// carry total mass 2 per hidden unit).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenCloud {
    pub values: Vec<Complex64>,
    /// Dimension of the state each pooled matrix acts on (n or 2n).
    pub state_dim: usize,
    pub arch: Arch,
    /// How many matrices were pooled.
    pub matrices: usize,
}

impl EigenCloud {
    /// Diagonalizes one Jacobian. `state_dim` must match the architecture's
    /// stacked-state dimension.
    pub fn from_jacobian(arch: Arch, j: &DenseMatrix) -> Result<Self> {
        let values = eig_dense(j)?;
        Ok(EigenCloud {
            values,
            state_dim: j.rows,
            arch,
            matrices: 1,
        })
    }

    /// Pools another realization's eigenvalues into this cloud.
    pub fn absorb(&mut self, other: &EigenCloud) -> Result<()> {
        if other.state_dim != self.state_dim || other.arch != self.arch {
            return Err(Error::InvalidParams(format!(
                "cannot pool a {} cloud of dim {} into a {} cloud of dim {}",
                other.arch.name(),
                other.state_dim,
                self.arch.name(),
                self.state_dim
            )));
        }
        self.values.extend_from_slice(&other.values);
        self.matrices += other.matrices;
        sort_complex(&mut self.values);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvalues per hidden unit per matrix (1 for single-state
    /// architectures, 2 for the stacked LSTM state) — the factor converting
    /// a count fraction into a per-unit mass.
    pub fn mass_per_value_scale(&self) -> f64 {
        match self.arch {
            Arch::Lstm => 2.0,
            _ => 1.0,
        }
    }

    /// Per-unit mass of a subset of `count` eigenvalues.
    pub fn mass_of_count(&self, count: usize) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.mass_per_value_scale() * count as f64 / self.values.len() as f64
        }
    }

    /// Spectral radius: `max |λ|` (0 for an empty cloud).
    pub fn radius(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus among eigenvalues farther than `eps` from `center` —
    /// the bulk radius with a point mass excised.
    pub fn radius_excluding(&self, center: Complex64, eps: f64) -> f64 {
        self.values
            .iter()
            .filter(|v| (*v - center).norm() > eps)
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues within distance `r` of `center`.
    pub fn count_within(&self, center: Complex64, r: f64) -> usize {
        self.values
            .iter()
            .filter(|v| (*v - center).norm() <= r)
            .count()
    }
}
