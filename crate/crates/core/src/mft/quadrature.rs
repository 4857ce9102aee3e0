//! Gaussian expectations by Gauss–Hermite quadrature.
//!
//! Nodes come from the Golub–Welsch construction (eigenvalues of the
//! symmetric tridiagonal Jacobi matrix of the orthonormal Hermite family);
//! weights come from the Christoffel function `w_i = 1 / Σ_k p_k(x_i)²`
//! evaluated with the orthonormal three-term recurrence. This avoids both
//! eigenvector extraction and the catastrophic underflow of the classical
//! `w_i = √π 2^{n-1} n! / (n² H_{n-1}(x_i)²)` formula at high order.
//!
//! All smooth integrands in this crate are bounded compositions of `tanh`
//! and the logistic function, for which a 201-point rule is far inside its
//! asymptotic regime. Where an integrand may lose smoothness (hard-saturating
//! activations, indicator-like factors), [`gauss_expect_checked`] compares
//! against a doubled-order rule and falls back to composite Gauss–Legendre
//! panels when they disagree.

use std::sync::OnceLock;

/// A Gauss–Hermite rule for weight `e^{-x²}` on the real line.
///
/// `Σ w_i = √π`, and `E_{x~N(μ,σ²)}[f] = (1/√π) Σ w_i f(μ + √2 σ x_i)`.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const PI_NEG_QUARTER: f64 = 0.751_125_544_464_942_9; // π^{-1/4}
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with zero
/// diagonal and the given off-diagonal.
fn tridiagonal_eigenvalues(offdiag: &[f64]) -> Vec<f64> {
    let n = offdiag.len() + 1;
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j + 1 {
            offdiag[j]
        } else if j == i + 1 {
            offdiag[i]
        } else {
            0.0
        }
    });
    m.self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("tridiagonal eigendecomposition cannot fail on finite input")
}

impl GaussHermite {
    /// Builds the `order`-point rule.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        // Jacobi matrix of the orthonormal Hermite family: β_k = √(k/2).
        let offdiag: Vec<f64> = (1..order).map(|k| (k as f64 / 2.0).sqrt()).collect();
        let nodes = if order == 1 {
            vec![0.0]
        } else {
            tridiagonal_eigenvalues(&offdiag)
        };
        let weights = nodes
            .iter()
            .map(|&x| {
                // Christoffel function: 1/Σ p_k(x)² with p_0 = π^{-1/4},
                // p_{k+1} = (x p_k - β_k p_{k-1}) / β_{k+1}.
                let mut p_prev = 0.0_f64;
                let mut p = PI_NEG_QUARTER;
                let mut sum = p * p;
                for k in 0..order - 1 {
                    let beta_next = ((k + 1) as f64 / 2.0).sqrt();
                    let beta = (k as f64 / 2.0).sqrt();
                    let p_next = (x * p - beta * p_prev) / beta_next;
                    if !p_next.is_finite() {
                        // The recurrence overflows only at extreme nodes whose
                        // true weight is far below the subnormal range.
                        sum = f64::INFINITY;
                        break;
                    }
                    sum += p_next * p_next;
                    p_prev = p;
                    p = p_next;
                }
                if sum.is_finite() {
                    1.0 / sum
                } else {
                    0.0
                }
            })
            .collect();
        GaussHermite { nodes, weights }
    }

    /// `E_{x~N(mean,var)}[f(x)]`; `var <= 0` degenerates to `f(mean)`.
    pub fn expect(&self, mean: f64, var: f64, f: impl Fn(f64) -> f64) -> f64 {
        if var <= 0.0 {
            return f(mean);
        }
        let scale = (2.0 * var).sqrt();
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            if w > 0.0 {
                acc += w * f(mean + scale * x);
            }
        }
        acc / SQRT_PI
    }
}

fn rule_201() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(201))
}

fn rule_403() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(403))
}

/// `E_{x~N(mean,var)}[f(x)]` with the cached 201-point rule.
pub fn gauss_expect(mean: f64, var: f64, f: impl Fn(f64) -> f64) -> f64 {
    rule_201().expect(mean, var, f)
}

/// 16-point Gauss–Legendre nodes/weights on [-1, 1], built once by the same
/// Golub–Welsch + Christoffel construction (Jacobi β_k = k/√(4k²-1),
/// p_0 = 1/√2).
fn gauss_legendre_16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let order = 16usize;
        let offdiag: Vec<f64> = (1..order)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        let nodes = tridiagonal_eigenvalues(&offdiag);
        let weights = nodes
            .iter()
            .map(|&x| {
                let mut p_prev = 0.0_f64;
                let mut p = std::f64::consts::FRAC_1_SQRT_2;
                let mut sum = p * p;
                for k in 0..order - 1 {
                    let beta_of = |j: usize| {
                        let j = j as f64;
                        if j == 0.0 {
                            0.0
                        } else {
                            j / (4.0 * j * j - 1.0).sqrt()
                        }
                    };
                    let p_next = (x * p - beta_of(k) * p_prev) / beta_of(k + 1);
                    sum += p_next * p_next;
                    p_prev = p;
                    p = p_next;
                }
                1.0 / sum
            })
            .collect();
        (nodes, weights)
    })
}

/// Composite Gauss–Legendre evaluation of `E_{x~N(mean,var)}[f(x)]` over
/// `panels` equal panels spanning ±`half_width_sigmas` standard deviations.
/// Robust for integrands with kinks or jumps that defeat a global rule.
fn composite_normal_expect(
    mean: f64,
    var: f64,
    half_width_sigmas: f64,
    panels: usize,
    f: &impl Fn(f64) -> f64,
) -> f64 {
    let sd = var.sqrt();
    let lo = mean - half_width_sigmas * sd;
    let hi = mean + half_width_sigmas * sd;
    let h = (hi - lo) / panels as f64;
    let (nodes, weights) = gauss_legendre_16();
    let norm = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let mut acc = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * h;
        let c = a + 0.5 * h;
        for (&x, &w) in nodes.iter().zip(weights) {
            let t = c + 0.5 * h * x;
            let u = (t - mean) / sd;
            acc += w * f(t) * (-0.5 * u * u).exp();
        }
    }
    acc * 0.5 * h * norm
}

/// Like [`gauss_expect`], but validates the result against a doubled-order
/// rule and falls back to composite Gauss–Legendre panels over ±12σ when the
/// two global rules disagree beyond `1e-10` (relative). Use for integrands
/// that may be non-smooth (hard saturation boundaries, indicators).
pub fn gauss_expect_checked(mean: f64, var: f64, f: impl Fn(f64) -> f64) -> f64 {
    if var <= 0.0 {
        return f(mean);
    }
    let coarse = rule_201().expect(mean, var, &f);
    let fine = rule_403().expect(mean, var, &f);
    if (coarse - fine).abs() <= 1e-10 * fine.abs().max(1.0) {
        fine
    } else {
        composite_normal_expect(mean, var, 12.0, 64, &f)
    }
}

/// `E[g(x, y)]` for `(x, y)` jointly Gaussian with common mean `mean`,
/// common variance `var`, and covariance `cov`, via the tensorized 201-point
/// rule. Degenerate correlations (|ρ| within 1e-9 of 1) collapse to the
/// exact univariate integral along the support line.
pub fn bivariate_expect(mean: f64, var: f64, cov: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    if var <= 0.0 {
        return g(mean, mean);
    }
    let rho = (cov / var).clamp(-1.0, 1.0);
    if rho >= 1.0 - 1e-9 {
        return gauss_expect(mean, var, |x| g(x, x));
    }
    if rho <= -(1.0 - 1e-9) {
        return gauss_expect(mean, var, |x| g(x, 2.0 * mean - x));
    }
    let rule = rule_201();
    let scale = (2.0 * var).sqrt();
    let ortho = (1.0 - rho * rho).sqrt();
    let mut acc = 0.0;
    for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
        if wu == 0.0 {
            continue;
        }
        let x = mean + scale * u;
        let mut inner = 0.0;
        for (&v, &wv) in rule.nodes.iter().zip(&rule.weights) {
            if wv == 0.0 {
                continue;
            }
            let y = mean + scale * (rho * u + ortho * v);
            inner += wv * g(x, y);
        }
        acc += wu * inner;
    }
    acc / (SQRT_PI * SQRT_PI)
}
