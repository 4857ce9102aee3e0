//! Quantitative comparisons between empirical eigenvalue clouds and their
//! predicted limits: uniform-disk-plus-atoms densities and support-curve
//! boundaries.

use crate::empirics::eig::EigenCloud;
use crate::error::{Error, Result};
use crate::spectral::density::LimitingDensity;
use crate::spectral::marching::{distance_to_loops, point_in_loops};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Fraction of eigenvalues (per stacked-state dimension) within distance `r`
/// of the point 1 — the accumulation CDF tracked across update-gain sweeps.
pub fn cdf_near_one(values: &[Complex64], r: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let one = Complex64::new(1.0, 0.0);
    values.iter().filter(|v| (*v - one).norm() <= r).count() as f64 / values.len() as f64
}

/// One predicted atom matched against the cloud.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AtomMatch {
    pub location: Complex64,
    pub mass_theory: f64,
    /// Per-unit mass of eigenvalues within the matching radius.
    pub mass_emp: f64,
}

/// Report comparing a cloud to a disk-plus-atoms limiting density.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskComparison {
    pub radius_theory: f64,
    /// Second-moment radius estimate `√(2·mean|λ−c|²)` over bulk-assigned
    /// eigenvalues — insensitive to the `O(n^{-1/2})` edge fuzz that inflates
    /// the raw maximum.
    pub radius_emp: f64,
    pub radius_rel_err: f64,
    /// Raw `max |λ−c|` over bulk-assigned eigenvalues.
    pub radius_max: f64,
    /// Kolmogorov–Smirnov distance between the squared relative radii
    /// `(|λ−c|/R)²` of bulk eigenvalues and the uniform law on [0, 1] — the
    /// radial signature of a uniform disk.
    pub ks_radial: f64,
    pub atoms: Vec<AtomMatch>,
    /// Largest `|mass_emp − mass_theory|` over matched atoms (0 if none).
    pub max_atom_mass_err: f64,
    /// Fraction of all eigenvalues assigned to an atom or lying within
    /// 1.5 R of the disk center.
    pub accounted_fraction: f64,
}

/// Matches a cloud against a closed-form density: eigenvalues within
/// `atom_radius` of a predicted atom are assigned to it; the rest are
/// compared to the uniform disk.
pub fn compare_disk(
    cloud: &EigenCloud,
    density: &LimitingDensity,
    atom_radius: f64,
) -> Result<DiskComparison> {
    if cloud.is_empty() {
        return Err(Error::InvalidParams("empty eigenvalue cloud".into()));
    }
    if !(atom_radius >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "atom matching radius {atom_radius} must be non-negative"
        )));
    }
    let r_theory = density.radius;
    let center = density.center;

    let mut atom_counts = vec![0usize; density.atoms.len()];
    let mut bulk_u = Vec::with_capacity(cloud.values.len());
    let mut accounted = 0usize;
    for v in &cloud.values {
        if let Some(k) = density
            .atoms
            .iter()
            .position(|a| (*v - a.location).norm() <= atom_radius)
        {
            atom_counts[k] += 1;
            accounted += 1;
            continue;
        }
        if r_theory > 0.0 {
            let u = (*v - center).norm_sqr() / (r_theory * r_theory);
            // Keep near-disk eigenvalues (finite-size fuzz spills the edge);
            // strays far outside are excluded from the radial statistics.
            if u <= 2.25 {
                bulk_u.push(u);
                accounted += 1;
            }
        }
    }

    let atoms: Vec<AtomMatch> = density
        .atoms
        .iter()
        .zip(&atom_counts)
        .map(|(a, &c)| AtomMatch {
            location: a.location,
            mass_theory: a.mass,
            mass_emp: cloud.mass_of_count(c),
        })
        .collect();
    let max_atom_mass_err = atoms
        .iter()
        .map(|a| (a.mass_emp - a.mass_theory).abs())
        .fold(0.0, f64::max);

    let (radius_emp, radius_max, ks_radial) = if r_theory > 0.0 && !bulk_u.is_empty() {
        let mean_u = bulk_u.iter().sum::<f64>() / bulk_u.len() as f64;
        let radius_emp = r_theory * (2.0 * mean_u).sqrt();
        let radius_max = r_theory * bulk_u.iter().cloned().fold(0.0, f64::max).sqrt();
        bulk_u.sort_by(|a, b| a.partial_cmp(b).expect("radial statistics must not be NaN"));
        let m = bulk_u.len() as f64;
        let mut ks: f64 = 0.0;
        for (i, &u) in bulk_u.iter().enumerate() {
            let f = u.min(1.0);
            ks = ks.max((f - i as f64 / m).abs()).max((f - (i + 1) as f64 / m).abs());
        }
        (radius_emp, radius_max, ks)
    } else {
        (0.0, 0.0, 0.0)
    };
    let radius_rel_err = if r_theory > 0.0 {
        (radius_emp - r_theory).abs() / r_theory
    } else {
        0.0
    };

    Ok(DiskComparison {
        radius_theory: r_theory,
        radius_emp,
        radius_rel_err,
        radius_max,
        ks_radial,
        atoms,
        max_atom_mass_err,
        accounted_fraction: accounted as f64 / cloud.values.len() as f64,
    })
}

/// Report comparing a cloud to a support-curve boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryComparison {
    /// Fraction of eigenvalues inside the traced loops (points within `pad`
    /// of a loop count as inside).
    pub inside_fraction: f64,
    pub n_outside: usize,
    /// Largest distance from a strictly-outside eigenvalue to the boundary.
    pub max_outside_gap: f64,
    pub mean_outside_gap: f64,
}

/// Counts eigenvalues inside the predicted support boundary. `pad` absorbs
/// contour-discretization error and the finite-size blur of the edge.
pub fn compare_boundary(
    cloud: &EigenCloud,
    loops: &[Vec<Complex64>],
    pad: f64,
) -> Result<BoundaryComparison> {
    if cloud.is_empty() {
        return Err(Error::InvalidParams("empty eigenvalue cloud".into()));
    }
    if loops.is_empty() {
        return Err(Error::InvalidParams("no boundary loops to compare against".into()));
    }
    let loops_xy: Vec<Vec<(f64, f64)>> = loops
        .iter()
        .map(|l| l.iter().map(|p| (p.re, p.im)).collect())
        .collect();
    let mut inside = 0usize;
    let mut gaps = Vec::new();
    for v in &cloud.values {
        let p = (v.re, v.im);
        if point_in_loops(&loops_xy, p) {
            inside += 1;
            continue;
        }
        let d = distance_to_loops(&loops_xy, p);
        if d <= pad {
            inside += 1;
        } else {
            gaps.push(d);
        }
    }
    let n_outside = gaps.len();
    let max_outside_gap = gaps.iter().cloned().fold(0.0, f64::max);
    let mean_outside_gap = if gaps.is_empty() {
        0.0
    } else {
        gaps.iter().sum::<f64>() / gaps.len() as f64
    };
    Ok(BoundaryComparison {
        inside_fraction: inside as f64 / cloud.values.len() as f64,
        n_outside,
        max_outside_gap,
        mean_outside_gap,
    })
}
