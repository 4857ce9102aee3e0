use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::net::{NetworkRealization, Weights};
use crate::params::Arch;

/// State of the gateless baseline `h_t = φ(U_h h_{t-1} + b_h)`.
#[derive(Clone, Debug)]
pub struct VanillaState {
    pub t: usize,
    pub h: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub y: Vec<f64>,
    pub phi_prime_y: Vec<f64>,
}

impl VanillaState {
    pub fn initial(h0: Vec<f64>) -> Self {
        VanillaState {
            t: 0,
            h: h0,
            h_prev: Vec::new(),
            y: Vec::new(),
            phi_prime_y: Vec::new(),
        }
    }
}

fn vanilla_weights(net: &NetworkRealization) -> Result<(&DenseMatrix, &[f64])> {
    net.params.expect_arch(Arch::Vanilla)?;
    match &net.weights {
        Weights::Vanilla { u_h, b_h } => Ok((u_h, b_h)),
        _ => Err(Error::InvalidParams(
            "weights do not match vanilla arch".into(),
        )),
    }
}

pub fn step_vanilla(net: &NetworkRealization, state: &VanillaState) -> Result<VanillaState> {
    let (u_h, b_h) = vanilla_weights(net)?;
    let act = net.params.activation;
    let mut y = u_h.matvec(&state.h);
    for (v, b) in y.iter_mut().zip(b_h) {
        *v += b;
    }
    let h: Vec<f64> = y.iter().map(|&x| act.apply(x)).collect();
    let phi_prime_y: Vec<f64> = y.iter().map(|&x| act.prime(x)).collect();
    Ok(VanillaState {
        t: state.t + 1,
        h,
        h_prev: state.h.clone(),
        y,
        phi_prime_y,
    })
}

/// `J = φ̂'(y) U_h`.
pub fn jacobian_vanilla(net: &NetworkRealization, state: &VanillaState) -> Result<DenseMatrix> {
    let (u_h, _) = vanilla_weights(net)?;
    if state.t == 0 {
        return Err(Error::InvalidParams(
            "state has not been stepped yet; gate values are undefined".into(),
        ));
    }
    Ok(u_h.scale_rows(&state.phi_prime_y))
}
