//! Riesz kernels, their finite differences and the identities they satisfy.
//!
//! Notation: `γ_n(α) = 2^α π^{n/2} Γ(α/2) / Γ((n−α)/2)`, `k_α(x) = |x|^{α−n}/γ_n(α)`
//! and `k_{ℓ,α}(x) = (Δ^ℓ_{e₁} k_α)(x) = Σ_k (−1)^k C(ℓ,k) k_α(x − k e₁)`.

mod calibration;
mod identities;

pub use calibration::{calibrate_d, calibration, d_coefficient, zero_mass_bump, Calibration, CalibrationPoint, DRIFT_LIMIT};
pub use identities::{
    ball_node_integral, cancellation_residual, decay_check, script_k, script_k_bound, whole_space_residual,
    CancellationResult, DecayReport, DEFAULT_QUAD_BUDGET,
};

use crate::error::{Error, Result};
use crate::grid_domain::Point;

/// Validated `(n, α, ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub n: usize,
    pub alpha: f64,
    pub ell: usize,
}

impl KernelParams {
    pub fn new(n: usize, alpha: f64, ell: usize) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::Input(format!("dimension must be 1 or 2, got {n}")));
        }
        if !(alpha > 0.0 && alpha < 1.0_f64.min(n as f64)) {
            return Err(Error::Range(format!("alpha must lie in (0, min(1, n)), got {alpha}")));
        }
        if ell == 0 {
            return Err(Error::Input("difference order must be at least 1".into()));
        }
        Ok(Self { n, alpha, ell })
    }

    /// Calibrated `d_{n,ℓ}(α)`; only `ℓ = 1` is supported.
    pub fn d_coeff(&self) -> Result<f64> {
        if self.ell != 1 {
            return Err(Error::Input("the normalizing constant is calibrated for ℓ = 1 only".into()));
        }
        d_coefficient(self.n, self.alpha)
    }
}

/// `γ_n(α)`.
pub fn gamma_n(n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return Err(Error::Range(format!("gamma_n needs 0 < alpha < n, got alpha = {alpha}, n = {n}")));
    }
    let denom = libm::tgamma((nf - alpha) / 2.0);
    if !denom.is_finite() || denom == 0.0 {
        return Err(Error::Range(format!("gamma_n has a pole at alpha = {alpha}")));
    }
    Ok(2f64.powf(alpha) * std::f64::consts::PI.powf(nf / 2.0) * libm::tgamma(alpha / 2.0) / denom)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn binomial(ell: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (ell - i) as f64 / (i + 1) as f64)
}

/// Coefficients `(−1)^k C(ℓ, k)`, `k = 0..=ℓ`.
pub fn difference_coefficients(ell: usize) -> Vec<f64> {
    (0..=ell).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * binomial(ell, k)).collect()
}

/// `k_α(x)`.
pub fn riesz_kernel(n: usize, alpha: f64, x: &[f64]) -> Result<f64> {
    let r = norm(&x[..n]);
    if r == 0.0 {
        return Err(Error::Singularity("Riesz kernel evaluated at the origin".into()));
    }
    Ok(r.powf(alpha - n as f64) / gamma_n(n, alpha)?)
}

/// `k_{ℓ,α}(x)`, the ℓ-th difference of the Riesz kernel with step `e₁`.
pub fn diff_kernel_e1(n: usize, alpha: f64, ell: usize, x: &[f64]) -> Result<f64> {
    diff_kernel(n, alpha, ell, x, &[1.0, 0.0][..n])
}

/// `(Δ^ℓ_h k_α)(x) = Σ_k (−1)^k C(ℓ,k) k_α(x − k h)`, evaluated directly.
pub fn diff_kernel(n: usize, alpha: f64, ell: usize, x: &[f64], h: &[f64]) -> Result<f64> {
    let gamma = gamma_n(n, alpha)?;
    let coeffs = difference_coefficients(ell);
    let mut terms = Vec::with_capacity(ell + 1);
    for (k, c) in coeffs.iter().enumerate() {
        let shifted: Vec<f64> = (0..n).map(|i| x[i] - k as f64 * h[i]).collect();
        let r = norm(&shifted);
        if r == 0.0 {
            return Err(Error::Singularity(format!("difference kernel evaluated at node {k}")));
        }
        terms.push(c * r.powf(alpha - n as f64));
    }
    Ok(crate::quadrature::compensated_sum(terms) / gamma)
}

/// `(Δ^ℓ_h k_α)(x)` through the rotation form
/// `|h|^{α−n} k_{ℓ,α}((|x|/|h|²) · R_x⁻¹ h)`, where `R_x` turns `e₁` into `x/|x|`.
pub fn diff_kernel_rotated(n: usize, alpha: f64, ell: usize, x: &[f64], h: &[f64]) -> Result<f64> {
    let hn = norm(&h[..n]);
    let xn = norm(&x[..n]);
    if hn == 0.0 || xn == 0.0 {
        return Err(Error::Singularity("rotation form needs x ≠ 0 and h ≠ 0".into()));
    }
    let scale = xn / (hn * hn);
    let arg: Point = if n == 1 {
        [scale * x[0].signum() * h[0], 0.0]
    } else {
        // Rotate h by −angle(x).
        let (c, s) = (x[0] / xn, x[1] / xn);
        [scale * (c * h[0] + s * h[1]), scale * (-s * h[0] + c * h[1])]
    };
    Ok(hn.powf(alpha - n as f64) * diff_kernel_e1(n, alpha, ell, &arg[..n])?)
}
