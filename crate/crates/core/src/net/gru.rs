use crate::activation::{sigmoid, sigmoid_prime};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::net::{NetworkRealization, Weights};
use crate::params::Arch;

/// State of a GRU after `t` update steps, carrying everything the Jacobian
/// at time `t` needs: the previous hidden state and all gate values and
/// derivatives evaluated during the step that produced `h`.
#[derive(Clone, Debug)]
pub struct GruState {
    /// Number of steps taken; gate fields are populated once `t ≥ 1`.
    pub t: usize,
    /// Hidden state `h_t`.
    pub h: Vec<f64>,
    /// Previous hidden state `h_{t-1}`.
    pub h_prev: Vec<f64>,
    /// Update gate `z_t = σ(U_z h_{t-1} + b_z)` and its derivative `σ'`.
    pub z: Vec<f64>,
    pub z_prime: Vec<f64>,
    /// Reset gate `r_t = σ(U_r h_{t-1} + b_r)` and its derivative.
    pub r: Vec<f64>,
    pub r_prime: Vec<f64>,
    /// Candidate pre-activation `y_t = U_h (r_t ⊙ h_{t-1}) + b_h`, its
    /// activation `φ(y_t)` and derivative `φ'(y_t)`.
    pub y: Vec<f64>,
    pub phi_y: Vec<f64>,
    pub phi_prime_y: Vec<f64>,
}

impl GruState {
    /// State before any update has run.
    pub fn initial(h0: Vec<f64>) -> Self {
        GruState {
            t: 0,
            h: h0,
            h_prev: Vec::new(),
            z: Vec::new(),
            z_prime: Vec::new(),
            r: Vec::new(),
            r_prime: Vec::new(),
            y: Vec::new(),
            phi_y: Vec::new(),
            phi_prime_y: Vec::new(),
        }
    }

    fn require_stepped(&self) -> Result<()> {
        if self.t == 0 {
            return Err(Error::InvalidParams(
                "state has not been stepped yet; gate values are undefined".into(),
            ));
        }
        Ok(())
    }
}

fn gru_weights(net: &NetworkRealization) -> Result<(&DenseMatrix, &DenseMatrix, &DenseMatrix, &[f64], &[f64], &[f64])> {
    net.params.expect_arch(Arch::Gru)?;
    match &net.weights {
        Weights::Gru {
            u_z,
            u_r,
            u_h,
            b_z,
            b_r,
            b_h,
        } => Ok((u_z, u_r, u_h, b_z, b_r, b_h)),
        _ => Err(Error::InvalidParams("weights do not match GRU arch".into())),
    }
}

/// One GRU update:
/// `h_t = z_t ⊙ h_{t-1} + (1 - z_t) ⊙ φ(U_h (r_t ⊙ h_{t-1}) + b_h)`
/// with `z_t = σ(U_z h_{t-1} + b_z)`, `r_t = σ(U_r h_{t-1} + b_r)`.
pub fn step_gru(net: &NetworkRealization, state: &GruState) -> Result<GruState> {
    let (u_z, u_r, u_h, b_z, b_r, b_h) = gru_weights(net)?;
    let n = net.params.n;
    if state.h.len() != n {
        return Err(Error::InvalidParams(format!(
            "state dimension {} does not match n = {n}",
            state.h.len()
        )));
    }
    let act = net.params.activation;
    let h_prev = &state.h;

    let mut zeta = u_z.matvec(h_prev);
    for (v, b) in zeta.iter_mut().zip(b_z) {
        *v += b;
    }
    let mut xi = u_r.matvec(h_prev);
    for (v, b) in xi.iter_mut().zip(b_r) {
        *v += b;
    }
    let z: Vec<f64> = zeta.iter().map(|&x| sigmoid(x)).collect();
    let z_prime: Vec<f64> = zeta.iter().map(|&x| sigmoid_prime(x)).collect();
    let r: Vec<f64> = xi.iter().map(|&x| sigmoid(x)).collect();
    let r_prime: Vec<f64> = xi.iter().map(|&x| sigmoid_prime(x)).collect();

    let rh: Vec<f64> = r.iter().zip(h_prev).map(|(a, b)| a * b).collect();
    let mut y = u_h.matvec(&rh);
    for (v, b) in y.iter_mut().zip(b_h) {
        *v += b;
    }
    let phi_y: Vec<f64> = y.iter().map(|&x| act.apply(x)).collect();
    let phi_prime_y: Vec<f64> = y.iter().map(|&x| act.prime(x)).collect();

    let h: Vec<f64> = (0..n)
        .map(|i| z[i] * h_prev[i] + (1.0 - z[i]) * phi_y[i])
        .collect();

    Ok(GruState {
        t: state.t + 1,
        h,
        h_prev: h_prev.clone(),
        z,
        z_prime,
        r,
        r_prime,
        y,
        phi_y,
        phi_prime_y,
    })
}

/// State-to-state Jacobian `J_ij = ∂h_{t,i} / ∂h_{t-1,j}` at the step that
/// produced `state`:
///
/// `J = ẑ + (1-ẑ) φ̂'(y) U_h (r̂ + ĥ_{t-1} r̂' U_r) + (ĥ_{t-1} - φ̂(y)) ẑ' U_z`
///
/// where hats denote diagonal matrices. The reset-gate term is the only one
/// requiring a matrix product; it is skipped when `a_r = 0` (then `U_r = 0`).
pub fn jacobian_gru(net: &NetworkRealization, state: &GruState) -> Result<DenseMatrix> {
    let (u_z, u_r, u_h, ..) = gru_weights(net)?;
    state.require_stepped()?;
    let n = net.params.n;

    // (1-z) φ'(y), the common row scaling of both U_h terms.
    let a: Vec<f64> = state
        .z
        .iter()
        .zip(&state.phi_prime_y)
        .map(|(z, p)| (1.0 - z) * p)
        .collect();

    // diag(a) U_h diag(r)
    let mut j = u_h.scale_rows_cols(&a, &state.r);

    if net.params.gain.r != 0.0 {
        // diag(a) U_h diag(h_prev ⊙ r') · U_r
        let hr: Vec<f64> = state
            .h_prev
            .iter()
            .zip(&state.r_prime)
            .map(|(h, rp)| h * rp)
            .collect();
        let b = u_h.scale_rows_cols(&a, &hr);
        j.add_assign(&b.matmul(u_r));
    }

    if net.params.gain.z != 0.0 || net.params.bias_var.z != 0.0 {
        // diag((h_prev - φ(y)) ⊙ z') U_z
        let c: Vec<f64> = (0..n)
            .map(|i| (state.h_prev[i] - state.phi_y[i]) * state.z_prime[i])
            .collect();
        j.add_assign(&u_z.scale_rows(&c));
    }

    j.add_diag_assign(&state.z);
    Ok(j)
}

/// Linearized companion form of the GRU Jacobian: a `3n × 3n` matrix `M`
/// whose finite generalized eigenvalues with respect to the block selector
/// `I_λ = bdiag(λ·1_n, 1_n, 1_n)` (i.e. solutions of `M v = I_λ v`) coincide
/// with the eigenvalues of [`jacobian_gru`]. Block rows:
///
/// ```text
/// [ ẑ + (1-ẑ)φ̂'(y) U_h r̂   (1-ẑ)φ̂'(y) U_h ĥ_{t-1}   ĥ_{t-1} - φ̂(y) ]
/// [ r̂' U_r                  0                          0              ]
/// [ ẑ' U_z                  0                          0              ]
/// ```
///
/// Eliminating the last two block rows (`v_2 = r̂' U_r v_1`,
/// `v_3 = ẑ' U_z v_1`) recovers `J v_1 = λ v_1`, which keeps every gate's
/// contribution a separate low-degree factor — the form used to derive the
/// spectral self-consistency equations.
pub fn extended_jacobian_gru(net: &NetworkRealization, state: &GruState) -> Result<DenseMatrix> {
    let (u_z, u_r, u_h, ..) = gru_weights(net)?;
    state.require_stepped()?;
    let n = net.params.n;

    let a: Vec<f64> = state
        .z
        .iter()
        .zip(&state.phi_prime_y)
        .map(|(z, p)| (1.0 - z) * p)
        .collect();

    let mut b11 = u_h.scale_rows_cols(&a, &state.r);
    b11.add_diag_assign(&state.z);
    let b12 = u_h.scale_rows_cols(&a, &state.h_prev);
    let b13: Vec<f64> = (0..n).map(|i| state.h_prev[i] - state.phi_y[i]).collect();
    let b21 = u_r.scale_rows(&state.r_prime);
    let b31 = u_z.scale_rows(&state.z_prime);

    let mut m = DenseMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        m.row_mut(i)[..n].copy_from_slice(b11.row(i));
        m.row_mut(i)[n..2 * n].copy_from_slice(b12.row(i));
        m.set(i, 2 * n + i, b13[i]);
        m.row_mut(n + i)[..n].copy_from_slice(b21.row(i));
        m.row_mut(2 * n + i)[..n].copy_from_slice(b31.row(i));
    }
    Ok(m)
}
