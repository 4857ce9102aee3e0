use crate::activation::{sigmoid, sigmoid_prime};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::net::{NetworkRealization, Weights};
use crate::params::Arch;

/// State of an LSTM after `t` update steps. The Jacobian acts on the stacked
/// state `(c, h)`, so both the previous cell and previous hidden vectors are
/// carried along with all gate values from the step that produced them.
#[derive(Clone, Debug)]
pub struct LstmState {
    pub t: usize,
    /// Cell state `c_t` and hidden state `h_t = o_t ⊙ φ(c_t)`.
    pub c: Vec<f64>,
    pub h: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub h_prev: Vec<f64>,
    /// Gates `k_t = σ(U_k h_{t-1} + b_k)` for k ∈ {f, i, o} and their σ'.
    pub f: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub i: Vec<f64>,
    pub i_prime: Vec<f64>,
    pub o: Vec<f64>,
    pub o_prime: Vec<f64>,
    /// Candidate pre-activation `y_t = U_h h_{t-1} + b_h`, `φ(y_t)`, `φ'(y_t)`.
    pub y: Vec<f64>,
    pub phi_y: Vec<f64>,
    pub phi_prime_y: Vec<f64>,
    /// `φ(c_t)`, `φ'(c_t)`, and the output scaling `m_t = o_t ⊙ φ'(c_t)`.
    pub phi_c: Vec<f64>,
    pub phi_prime_c: Vec<f64>,
    pub m: Vec<f64>,
}

impl LstmState {
    pub fn initial(c0: Vec<f64>, h0: Vec<f64>) -> Self {
        LstmState {
            t: 0,
            c: c0,
            h: h0,
            c_prev: Vec::new(),
            h_prev: Vec::new(),
            f: Vec::new(),
            f_prime: Vec::new(),
            i: Vec::new(),
            i_prime: Vec::new(),
            o: Vec::new(),
            o_prime: Vec::new(),
            y: Vec::new(),
            phi_y: Vec::new(),
            phi_prime_y: Vec::new(),
            phi_c: Vec::new(),
            phi_prime_c: Vec::new(),
            m: Vec::new(),
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

type LstmWeights<'a> = (
    &'a DenseMatrix,
    &'a DenseMatrix,
    &'a DenseMatrix,
    &'a DenseMatrix,
    &'a [f64],
    &'a [f64],
    &'a [f64],
    &'a [f64],
);

fn lstm_weights(net: &NetworkRealization) -> Result<LstmWeights<'_>> {
    net.params.expect_arch(Arch::Lstm)?;
    match &net.weights {
        Weights::Lstm {
            u_f,
            u_i,
            u_o,
            u_h,
            b_f,
            b_i,
            b_o,
            b_h,
        } => Ok((u_f, u_i, u_o, u_h, b_f, b_i, b_o, b_h)),
        _ => Err(Error::InvalidParams("weights do not match LSTM arch".into())),
    }
}

/// One LSTM update (no peepholes, no external input):
/// `c_t = f_t ⊙ c_{t-1} + i_t ⊙ φ(y_t)`, `h_t = o_t ⊙ φ(c_t)` with
/// `y_t = U_h h_{t-1} + b_h` and gates `k_t = σ(U_k h_{t-1} + b_k)`.
pub fn step_lstm(net: &NetworkRealization, state: &LstmState) -> Result<LstmState> {
    let (u_f, u_i, u_o, u_h, b_f, b_i, b_o, b_h) = lstm_weights(net)?;
    let n = net.params.n;
    if state.h.len() != n || state.c.len() != n {
        return Err(Error::InvalidParams(format!(
            "state dimension {} does not match n = {n}",
            state.h.len()
        )));
    }
    let act = net.params.activation;
    let h_prev = &state.h;
    let c_prev = &state.c;

    let gate = |u: &DenseMatrix, b: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut eta = u.matvec(h_prev);
        for (v, b) in eta.iter_mut().zip(b) {
            *v += b;
        }
        let g: Vec<f64> = eta.iter().map(|&x| sigmoid(x)).collect();
        let gp: Vec<f64> = eta.iter().map(|&x| sigmoid_prime(x)).collect();
        (g, gp)
    };
    let (f, f_prime) = gate(u_f, b_f);
    let (i, i_prime) = gate(u_i, b_i);
    let (o, o_prime) = gate(u_o, b_o);

    let mut y = u_h.matvec(h_prev);
    for (v, b) in y.iter_mut().zip(b_h) {
        *v += b;
    }
    let phi_y: Vec<f64> = y.iter().map(|&x| act.apply(x)).collect();
    let phi_prime_y: Vec<f64> = y.iter().map(|&x| act.prime(x)).collect();

    let c: Vec<f64> = (0..n)
        .map(|k| f[k] * c_prev[k] + i[k] * phi_y[k])
        .collect();
    let max_c = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !max_c.is_finite() || max_c > 1e6 {
        let f_mean = f.iter().sum::<f64>() / n as f64;
        return Err(Error::Numeric(format!(
            "cell state diverged (max |c| = {max_c:.3e}, mean forget gate {f_mean:.4})"
        )));
    }
    let phi_c: Vec<f64> = c.iter().map(|&x| act.apply(x)).collect();
    let phi_prime_c: Vec<f64> = c.iter().map(|&x| act.prime(x)).collect();
    let h: Vec<f64> = (0..n).map(|k| o[k] * phi_c[k]).collect();
    let m: Vec<f64> = (0..n).map(|k| o[k] * phi_prime_c[k]).collect();

    Ok(LstmState {
        t: state.t + 1,
        c,
        h,
        c_prev: c_prev.clone(),
        h_prev: h_prev.clone(),
        f,
        f_prime,
        i,
        i_prime,
        o,
        o_prime,
        y,
        phi_y,
        phi_prime_y,
        phi_c,
        phi_prime_c,
        m,
    })
}

/// Jacobian of the stacked state `(c_t, h_t)` with respect to
/// `(c_{t-1}, h_{t-1})` — a `2n × 2n` matrix in block form
///
/// ```text
/// [ f̂        ĝ                    ]        ĝ = f̂' ĉ_{t-1} U_f + î φ̂'(y) U_h + î' φ̂(y) U_i
/// [ m̂ f̂      ô' φ̂(c) U_o + m̂ ĝ  ]        m̂ = ô φ̂'(c)
/// ```
///
/// Every block is a diagonal scaling of a weight matrix, so assembly is
/// O(n²). When `a_o = 0` the bottom rows are `m̂ · (top rows)`, which forces
/// `n` exact zero eigenvalues.
pub fn jacobian_lstm(net: &NetworkRealization, state: &LstmState) -> Result<DenseMatrix> {
    let (u_f, u_i, u_o, u_h, ..) = lstm_weights(net)?;
    state.require_stepped()?;
    let n = net.params.n;

    // g = diag(f' ⊙ c_prev) U_f + diag(i ⊙ φ'(y)) U_h + diag(i' ⊙ φ(y)) U_i
    let s_f: Vec<f64> = (0..n).map(|k| state.f_prime[k] * state.c_prev[k]).collect();
    let s_h: Vec<f64> = (0..n).map(|k| state.i[k] * state.phi_prime_y[k]).collect();
    let s_i: Vec<f64> = (0..n).map(|k| state.i_prime[k] * state.phi_y[k]).collect();
    let mut g = u_h.scale_rows(&s_h);
    if net.params.gain.f != 0.0 || net.params.bias_var.f != 0.0 {
        g.add_assign(&u_f.scale_rows(&s_f));
    }
    if net.params.gain.i != 0.0 || net.params.bias_var.i != 0.0 {
        g.add_assign(&u_i.scale_rows(&s_i));
    }

    let tl = DenseMatrix::diag(&state.f);
    let mf: Vec<f64> = (0..n).map(|k| state.m[k] * state.f[k]).collect();
    let bl = DenseMatrix::diag(&mf);
    let mut br = g.scale_rows(&state.m);
    if net.params.gain.o != 0.0 || net.params.bias_var.o != 0.0 {
        let s_o: Vec<f64> = (0..n).map(|k| state.o_prime[k] * state.phi_c[k]).collect();
        br.add_assign(&u_o.scale_rows(&s_o));
    }
    Ok(DenseMatrix::compose_2x2(&tl, &g, &bl, &br))
}
