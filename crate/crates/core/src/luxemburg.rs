//! Modular `ϱ(f) = ∫ |f(x)|^{p(x)} dx` and the Luxemburg norm
//! `‖f‖ = inf{λ > 0 : ϱ(f/λ) ≤ 1}`.

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::grid_domain::GriddedFunction;
use serde::Serialize;

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const MAX_BISECTIONS: usize = 200;

fn check_compatible(f: &GriddedFunction, p: &ExponentField) -> Result<()> {
    if f.grid() != p.grid() {
        return Err(Error::Input("function and exponent live on different grids".into()));
    }
    if let Some(i) = (0..f.grid().len()).find(|&i| f.in_support(i) && !p.function().in_support(i)) {
        return Err(Error::Input(format!("exponent undefined at supported cell {i}")));
    }
    Ok(())
}

fn modular_scaled(f: &GriddedFunction, p: &[f64], inv_lambda: f64) -> f64 {
    f.integrate_with(|i, v| (v * inv_lambda).abs().powf(p[i]))
}

/// `Σ |f|^{p} hⁿ` over the support of `f`.
pub fn modular(f: &GriddedFunction, p: &ExponentField) -> Result<f64> {
    check_compatible(f, p)?;
    Ok(modular_scaled(f, p.values(), 1.0))
}

/// Interval `[lo, hi]` containing the norm with `hi − lo ≤ rel_tol · hi`,
/// where `ϱ(f/hi) ≤ 1 < ϱ(f/lo)`.
pub fn norm_bracket(f: &GriddedFunction, p: &ExponentField, rel_tol: f64) -> Result<(f64, f64)> {
    check_compatible(f, p)?;
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::Input(format!("rel_tol must lie in (0, 1e-3], got {rel_tol}")));
    }
    let sup = f.max_abs();
    if sup == 0.0 {
        return Ok((0.0, 0.0));
    }
    let pv = p.values();
    let rho = |lambda: f64| modular_scaled(f, pv, 1.0 / lambda);
    let measure = f.integrate_with(|_, _| 1.0);
    let mut hi = sup * measure.powf(1.0 / p.p_plus()).max(f64::MIN_POSITIVE);
    let mut lo = hi;
    if rho(hi) > 1.0 {
        while rho(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        while rho(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            if lo < f64::MIN_POSITIVE {
                return Err(Error::Input("norm underflows".into()));
            }
        }
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= rel_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if rho(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Luxemburg norm by bisection on `λ`; the returned value is the upper end of
/// the final bracket, so `ϱ(f/‖f‖) ≤ 1` always holds.
pub fn luxemburg_norm(f: &GriddedFunction, p: &ExponentField, rel_tol: f64) -> Result<f64> {
    norm_bracket(f, p, rel_tol).map(|(_, hi)| hi)
}

/// Outcome of the modular–norm comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModularNormBracket {
    pub norm: f64,
    pub modular: f64,
    pub sigma: f64,
    pub theta: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Checks `‖f‖^σ ≤ ϱ(f) ≤ ‖f‖^θ`, with `(σ, θ) = (p⁻, p⁺)` when `‖f‖ ≥ 1`
/// and `(p⁺, p⁻)` otherwise.
///
/// Both bounds are increasing in the norm, so the lower one is evaluated at
/// the lower end of the certified norm bracket and the upper one at the upper
/// end.
pub fn modular_norm_bracket(f: &GriddedFunction, p: &ExponentField) -> Result<ModularNormBracket> {
    let (lo, hi) = norm_bracket(f, p, DEFAULT_REL_TOL)?;
    let rho = modular(f, p)?;
    let norm = hi;
    let (pm, pp) = (p.p_minus(), p.p_plus());
    let (sigma, theta) = if norm >= 1.0 { (pm, pp) } else { (pp, pm) };
    let (lower, upper) = if lo < 1.0 && 1.0 < hi {
        (lo.powf(pm).min(lo.powf(pp)), hi.powf(pm).max(hi.powf(pp)))
    } else {
        (lo.powf(sigma), hi.powf(theta))
    };
    let slack = 1e-12;
    let holds = lower <= rho * (1.0 + slack) && rho <= upper * (1.0 + slack);
    Ok(ModularNormBracket { norm, modular: rho, sigma, theta, lower, upper, holds })
}
