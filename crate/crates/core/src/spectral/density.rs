//! Closed-form limiting eigenvalue laws in the exactly solvable regimes:
//! deterministic gates at the zero fixed point, and switch-like (binary)
//! update/forget gates. Each law is a finite set of atoms plus a uniform
//! disk.

use crate::activation::sigmoid;
use crate::error::{Error, Result};
use crate::params::{Arch, GatedNetParams};
use num_complex::Complex64;
use statrs::function::erf::erf;
use std::f64::consts::PI;

/// A point mass of a limiting eigenvalue law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: Complex64,
    pub mass: f64,
}

/// Limiting eigenvalue law of the state-to-state Jacobian: atoms plus a
/// uniform disk. Masses are normalized per hidden unit, so they total 1 for
/// a GRU (n eigenvalues of an n×n Jacobian) and 2 for an LSTM (2n
/// eigenvalues: the Jacobian acts on cell and hidden state together).
#[derive(Clone, Debug)]
pub struct LimitingDensity {
    pub atoms: Vec<Atom>,
    pub center: Complex64,
    pub radius: f64,
    /// Uniform density value on the disk; the disk carries mass
    /// `π · radius² · density`.
    pub density: f64,
    /// Atoms plus disk mass.
    pub total_mass: f64,
    /// True when every atom and the whole disk lie strictly inside the unit
    /// circle.
    pub stable: bool,
}

impl LimitingDensity {
    fn assemble(atoms: Vec<Atom>, center: Complex64, radius: f64, density: f64) -> Self {
        let atoms: Vec<Atom> = atoms.into_iter().filter(|a| a.mass > 0.0).collect();
        let disk_mass = PI * radius * radius * density;
        let total_mass = disk_mass + atoms.iter().map(|a| a.mass).sum::<f64>();
        let support_radius = atoms
            .iter()
            .map(|a| a.location.norm())
            .fold(center.norm() + radius, f64::max);
        LimitingDensity {
            atoms,
            center,
            radius,
            density,
            total_mass,
            stable: support_radius < 1.0,
        }
    }

    /// Supremum of |λ| over the support, atoms included.
    pub fn support_radius(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.location.norm())
            .fold(self.center.norm() + self.radius, f64::max)
    }

    /// Mass of the continuous (disk) part.
    pub fn disk_mass(&self) -> f64 {
        PI * self.radius * self.radius * self.density
    }
}

/// Limiting law at the GRU zero fixed point with deterministic biases.
///
/// With `z = σ(b_z)` and `r = σ(b_r)` constant across neurons and the state
/// at zero, the Jacobian is `z·1 + (1−z) r U_h` with `U_h` i.i.d. of row
/// variance `a_h²/n`: a uniform disk centered at `z` of radius
/// `R = (1−z) r a_h`, density `1/(πR²)`, total mass 1. Stable exactly when
/// `z + R < 1`. Degenerates to a single atom at `z` when `R = 0`.
pub fn gru_zero_fp_density(params: &GatedNetParams) -> Result<LimitingDensity> {
    params.expect_arch(Arch::Gru)?;
    params.validate()?;
    if params.bias_mean.h != 0.0 || params.bias_var.h != 0.0 {
        return Err(Error::UnsupportedRegime(
            "the zero state is a fixed point only when the candidate bias vanishes".into(),
        ));
    }
    if params.bias_var.z != 0.0 || params.bias_var.r != 0.0 {
        return Err(Error::UnsupportedRegime(
            "the closed form requires deterministic gate biases (v_z = v_r = 0)".into(),
        ));
    }
    let z = sigmoid(params.bias_mean.z);
    let r = sigmoid(params.bias_mean.r);
    let radius = (1.0 - z) * r * params.gain.h;
    let center = Complex64::new(z, 0.0);
    if radius > 0.0 {
        Ok(LimitingDensity::assemble(
            Vec::new(),
            center,
            radius,
            1.0 / (PI * radius * radius),
        ))
    } else {
        Ok(LimitingDensity::assemble(
            vec![Atom {
                location: center,
                mass: 1.0,
            }],
            center,
            0.0,
            0.0,
        ))
    }
}

/// Limiting law at the LSTM zero fixed point with deterministic gate biases.
///
/// The hidden rows of the Jacobian are proportional to the cell rows
/// (`h_t = o φ(c_t)` with `o` constant), so n of the 2n eigenvalues vanish
/// exactly — an atom of mass 1 at the origin. The nonzero eigenvalues follow
/// a uniform disk centered at `f = σ(b_f)` of radius
/// `√p = σ(b_o) σ(b_i) a_h`. Total mass 2; stable exactly when `f + √p < 1`.
pub fn lstm_zero_fp_density(params: &GatedNetParams) -> Result<LimitingDensity> {
    params.expect_arch(Arch::Lstm)?;
    params.validate()?;
    if params.bias_mean.h != 0.0 || params.bias_var.h != 0.0 {
        return Err(Error::UnsupportedRegime(
            "the zero state is a fixed point only when the candidate bias vanishes".into(),
        ));
    }
    if params.bias_var.f != 0.0 || params.bias_var.i != 0.0 || params.bias_var.o != 0.0 {
        return Err(Error::UnsupportedRegime(
            "the closed form requires deterministic gate biases (v_f = v_i = v_o = 0)".into(),
        ));
    }
    let f = sigmoid(params.bias_mean.f);
    let i = sigmoid(params.bias_mean.i);
    let o = sigmoid(params.bias_mean.o);
    let radius = o * i * params.gain.h;
    let center = Complex64::new(f, 0.0);
    let mut atoms = vec![Atom {
        location: Complex64::new(0.0, 0.0),
        mass: 1.0,
    }];
    if radius > 0.0 {
        Ok(LimitingDensity::assemble(
            atoms,
            center,
            radius,
            1.0 / (PI * radius * radius),
        ))
    } else {
        atoms.push(Atom {
            location: center,
            mass: 1.0,
        });
        Ok(LimitingDensity::assemble(atoms, center, 0.0, 0.0))
    }
}

/// Limiting law for a switch-like update gate (`a_z → ∞` at fixed
/// `β = b_z/a_z`) with the reset channel frozen (`a_r = 0`, deterministic
/// reset bias).
///
/// `alpha` is the closed-gate fraction P(z = 0) and `eta` the unsaturated
/// fraction E[φ'(y)²] at the operating state. The law is an atom of mass
/// `1 − α` at λ = 1 (gates stuck open copy the state), an atom of mass
/// `α (1 − η)` at the origin (closed gate, saturated activation), and a
/// uniform disk at the origin of radius `√(α η) · r a_h` with density
/// `1/(π r² a_h²)`, `r = σ(b_r)`. Total mass 1.
pub fn gru_binary_update_density(
    params: &GatedNetParams,
    alpha: f64,
    eta: f64,
) -> Result<LimitingDensity> {
    params.expect_arch(Arch::Gru)?;
    params.validate()?;
    if params.gain.r != 0.0 || params.bias_var.r != 0.0 {
        return Err(Error::UnsupportedRegime(
            "the switch-gate law requires a frozen reset channel (a_r = 0, v_r = 0)".into(),
        ));
    }
    check_fraction("alpha", alpha)?;
    check_fraction("eta", eta)?;
    let r = sigmoid(params.bias_mean.r);
    let scale = r * params.gain.h;
    let atoms = vec![
        Atom {
            location: Complex64::new(1.0, 0.0),
            mass: 1.0 - alpha,
        },
        Atom {
            location: Complex64::new(0.0, 0.0),
            mass: alpha * (1.0 - eta),
        },
    ];
    let (radius, density) = if scale > 0.0 {
        ((alpha * eta).sqrt() * scale, 1.0 / (PI * scale * scale))
    } else {
        (0.0, 0.0)
    };
    Ok(LimitingDensity::assemble(
        atoms,
        Complex64::new(0.0, 0.0),
        radius,
        density,
    ))
}

/// Limiting law for a switch-like forget gate (`a_f → ∞`, centered forget
/// bias) with frozen input and output gates (`a_i = a_o = 0`, deterministic
/// biases).
///
/// `eta` is the unsaturated fraction E[φ'(y)²] of the candidate field. The
/// law is an atom of mass `1 + (1−η)/2` at the origin (the structural n zero
/// rows plus the closed-gate saturated sites), an atom of mass `1/2` at
/// λ = 1 (forget gates stuck open), and a uniform disk at the origin of
/// radius `√(η/2) · R` with density `1/(πR²)`, `R = σ(b_o) σ(b_i) a_h`.
/// Total mass 2.
pub fn lstm_binary_forget_density(params: &GatedNetParams, eta: f64) -> Result<LimitingDensity> {
    params.expect_arch(Arch::Lstm)?;
    params.validate()?;
    if params.gain.i != 0.0
        || params.gain.o != 0.0
        || params.bias_var.i != 0.0
        || params.bias_var.o != 0.0
    {
        return Err(Error::UnsupportedRegime(
            "the switch-forget law requires frozen input/output gates (a_i = a_o = 0, \
             deterministic biases)"
                .into(),
        ));
    }
    if params.bias_mean.f != 0.0 {
        return Err(Error::UnsupportedRegime(
            "the even open/closed split of the switch-like forget gate assumes a centered \
             forget bias"
                .into(),
        ));
    }
    check_fraction("eta", eta)?;
    let i = sigmoid(params.bias_mean.i);
    let o = sigmoid(params.bias_mean.o);
    let scale = o * i * params.gain.h;
    let atoms = vec![
        Atom {
            location: Complex64::new(0.0, 0.0),
            mass: 1.0 + 0.5 * (1.0 - eta),
        },
        Atom {
            location: Complex64::new(1.0, 0.0),
            mass: 0.5,
        },
    ];
    let (radius, density) = if scale > 0.0 {
        ((0.5 * eta).sqrt() * scale, 1.0 / (PI * scale * scale))
    } else {
        (0.0, 0.0)
    };
    Ok(LimitingDensity::assemble(
        atoms,
        Complex64::new(0.0, 0.0),
        radius,
        density,
    ))
}

/// Fraction of unsaturated hard-threshold activations for a centered
/// Gaussian pre-activation of variance `var`: `P(|y| < 1) = erf(1/√(2 var))`.
pub fn unsaturated_fraction(var: f64) -> Result<f64> {
    if !var.is_finite() || var < 0.0 {
        return Err(Error::InvalidParams(format!(
            "pre-activation variance {var} must be finite and ≥ 0"
        )));
    }
    if var == 0.0 {
        return Ok(1.0);
    }
    Ok(erf(1.0 / (2.0 * var).sqrt()))
}

fn check_fraction(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParams(format!(
            "{name} = {value} must lie in [0, 1]"
        )));
    }
    Ok(())
}
