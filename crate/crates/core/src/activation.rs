//! Scalar nonlinearities shared by the network simulator and the mean-field
//! kernels.

use crate::params::Activation;

/// Logistic sigmoid, stable in both tails (saturates exactly to 0 and 1 in
/// f64 once the exponential under/overflows).
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Derivative of the logistic sigmoid.
#[inline]
pub fn sigmoid_prime(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 - s)
}

/// `x` clamped to `[-1, 1]`.
#[inline]
pub fn hard_tanh(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Derivative of [`hard_tanh`]: 1 strictly inside the linear region, 0 at
/// `|x| = 1` and beyond (the saturation points are assigned to the flat
/// branch so the derivative is the a.e. derivative from the saturated side).
#[inline]
pub fn hard_tanh_prime(x: f64) -> f64 {
    if x.abs() < 1.0 {
        1.0
    } else {
        0.0
    }
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::HardTanh => hard_tanh(x),
        }
    }

    #[inline]
    pub fn prime(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::HardTanh => hard_tanh_prime(x),
        }
    }
}
