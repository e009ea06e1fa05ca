//! The splitting of the truncated hypersingular integral of `𝓔_Ω f` into the
//! weighted term `a_Ω f` and the in-domain operator `A_ε`, and the
//! domination of `A_ε` by the maximal operator.

use crate::error::{Error, Result};
use crate::fft::Convolution;
use crate::grid_domain::{DomainSpec, Grid, GriddedFunction};
use crate::quadrature::compensated_sum;
use crate::rng;
use rand::RngExt;
use rayon::prelude::*;
use serde::Serialize;

use super::hypersingular::{check_eps, check_ladder, truncated_weights, TruncatedSum};
use super::maximal::MaximalOperator;
use super::potential::RieszPotential;
use super::weight::{a_omega_with_budget, DEFAULT_WEIGHT_BUDGET};

/// Default width of the boundary band excluded from residual maxima, in cells.
pub const DEFAULT_BAND_CELLS: f64 = 4.0;

/// Relative change of `C_est` tolerated when the ladder gains a rung.
pub const DOMINATION_STABILITY: f64 = 0.10;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Range(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `A_ε` with precomputed weights for one truncation.
struct AEps {
    conv: Convolution,
    mass: Vec<f64>,
}

impl AEps {
    fn new(grid: &Grid, mask: &[bool], alpha: f64, eps: f64) -> Self {
        let conv = truncated_weights(grid, alpha, eps);
        let chi: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        let mass = conv.apply(&chi);
        Self { conv, mass }
    }

    /// `A(x) = f(x) (w ∗ χ)(x) − (w ∗ χf)(x)` on the cells of `Ω`.
    fn apply(&self, f: &[f64], mask: &[bool]) -> Vec<f64> {
        let cf: Vec<f64> = f.iter().zip(mask).map(|(v, &m)| if m { *v } else { 0.0 }).collect();
        let conv = self.conv.apply(&cf);
        (0..f.len()).map(|i| if mask[i] { f[i] * self.mass[i] - conv[i] } else { 0.0 }).collect()
    }
}

/// `A_ε φ(x) = Σ_{y ∈ Ω, |x−y| > ε} (f(x) − f(y)) |x−y|^{−n−α} hⁿ` with
/// `f = I^α φ̃`, by direct double summation over the cells of `Ω`.
pub fn a_eps_apply(phi: &GriddedFunction, domain: &DomainSpec, alpha: f64, eps: f64) -> Result<GriddedFunction> {
    check_alpha(alpha)?;
    let grid = *phi.grid();
    check_eps(&grid, eps)?;
    let mask = domain.chi_mask(&grid)?;
    let f = RieszPotential::new(&grid, alpha)?.apply(&phi.restrict(&mask)?)?;
    let conv = truncated_weights(&grid, alpha, eps);
    let cells: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
    let fv = f.values();
    let idx: Vec<[i64; 2]> = (0..grid.len()).map(|i| grid.unravel(i)).map(|ij| [ij[0] as i64, ij[1] as i64]).collect();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !mask[i] {
                return 0.0;
            }
            compensated_sum(cells.iter().map(|&j| {
                let k = [idx[i][0] - idx[j][0], idx[i][1] - idx[j][1]];
                conv.weight_at(k) * (fv[i] - fv[j])
            }))
        })
        .collect();
    GriddedFunction::masked(grid, out, mask)
}

/// FFT evaluation of [`a_eps_apply`].
pub fn a_eps_apply_fast(phi: &GriddedFunction, domain: &DomainSpec, alpha: f64, eps: f64) -> Result<GriddedFunction> {
    check_alpha(alpha)?;
    let grid = *phi.grid();
    check_eps(&grid, eps)?;
    let mask = domain.chi_mask(&grid)?;
    let f = RieszPotential::new(&grid, alpha)?.apply(&phi.restrict(&mask)?)?;
    let op = AEps::new(&grid, &mask, alpha, eps);
    GriddedFunction::masked(grid, op.apply(f.values(), &mask), mask)
}

/// Residual of `a_Ω f − S_ε(𝓔_Ω f) + A_ε φ = 0` away from the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarchaudResidual {
    /// `max |a_Ω f − S_ε 𝓔_Ω f + A_ε φ|` over cells with `δ ≥ band`.
    pub residual: f64,
    /// `max |a_Ω f|` over the same cells.
    pub scale: f64,
    pub relative: f64,
    pub eps: f64,
    pub band: f64,
    pub cells: usize,
}

/// Checks the decomposition with `f = I^α φ̃`, truncation `eps` on both
/// singular sums and boundary band `band` (clamped below by `eps`, since the
/// identity needs `δ(x) > ε`). Here `S_ε = d D^α_ε`.
pub fn marchaud_decomposition_residual(
    phi: &GriddedFunction,
    domain: &DomainSpec,
    alpha: f64,
    eps: f64,
    band: f64,
) -> Result<MarchaudResidual> {
    check_alpha(alpha)?;
    let grid = *phi.grid();
    check_eps(&grid, eps)?;
    let mask = domain.chi_mask(&grid)?;
    let f = RieszPotential::new(&grid, alpha)?.apply(&phi.restrict(&mask)?)?;
    let ef: Vec<f64> = f.values().iter().zip(&mask).map(|(v, &m)| if m { *v } else { 0.0 }).collect();
    let s = TruncatedSum::new(&grid, alpha, eps)?.apply(&ef);
    let a_eps = AEps::new(&grid, &mask, alpha, eps).apply(f.values(), &mask);
    let weight = a_omega_with_budget(domain, alpha, &grid, DEFAULT_WEIGHT_BUDGET)?;
    let delta = domain.boundary_distance(&grid)?;
    let band = band.max(eps);
    let (mut residual, mut scale, mut cells) = (0.0_f64, 0.0_f64, 0usize);
    for i in 0..grid.len() {
        if !mask[i] || delta.values()[i] < band {
            continue;
        }
        let af = weight.values.values()[i] * ef[i];
        residual = residual.max((af - s[i] + a_eps[i]).abs());
        scale = scale.max(af.abs());
        cells += 1;
    }
    let relative = if scale > 0.0 { residual / scale } else { 0.0 };
    Ok(MarchaudResidual { residual, scale, relative, eps, band, cells })
}

/// Smallest bump width in cells: four times the smallest admissible truncation,
/// so that every probe is resolved along the whole ladder.
pub const MIN_BUMP_CELLS: f64 = 8.0;

/// `n` seeded smooth bumps `± e^{−|x−c|²/(2σ²)}` with centres in `Ω`, restricted
/// to `Ω`. Widths are drawn from `diam · [0.02, 0.2]` and floored at
/// [`MIN_BUMP_CELLS`] cells.
pub fn seeded_bumps(domain: &DomainSpec, grid: &Grid, count: usize, seed: u64) -> Result<Vec<GriddedFunction>> {
    let mask = domain.chi_mask(grid)?;
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
    if inside.is_empty() {
        return Err(Error::Resolution("the domain contains no cell centre".into()));
    }
    let diam = domain.diameter();
    let mut rng = rng::stream(seed, "bumps");
    (0..count)
        .map(|_| {
            let c = grid.center(inside[rng.random_range(0..inside.len())]);
            let sigma = (diam * rng.random_range(0.02..0.2)).max(MIN_BUMP_CELLS * grid.h_max());
            let amp: f64 = if rng.random_bool(0.5) { 1.0 } else { -1.0 } * rng.random_range(0.5..2.0);
            GriddedFunction::from_fn(*grid, |x| {
                let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                amp * (-r2 / (2.0 * sigma * sigma)).exp()
            })?
            .restrict(&mask)
        })
        .collect()
}

/// `C_est = max |A_ε φ| / 𝓜φ` on the base ladder and on the ladder extended
/// by one geometric rung.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub eps: Vec<f64>,
    pub eps_extra: f64,
    pub c_base: f64,
    pub c_extended: f64,
    pub uniform: bool,
}

pub fn domination_check(domain: &DomainSpec, alpha: f64, tests: &[GriddedFunction], eps: &[f64]) -> Result<DominationReport> {
    check_alpha(alpha)?;
    let first = tests.first().ok_or_else(|| Error::Input("empty test set".into()))?;
    let grid = *first.grid();
    if eps.len() < 2 {
        return Err(Error::Input("the ladder needs two rungs to extend".into()));
    }
    check_ladder(&grid, eps)?;
    let k = eps.len();
    let extra = eps[k - 1] * eps[k - 1] / eps[k - 2];
    check_eps(&grid, extra)?;
    let mask = domain.chi_mask(&grid)?;
    let pot = RieszPotential::new(&grid, alpha)?;
    let maximal = MaximalOperator::new(&grid, &mask, domain.diameter())?;
    let ops: Vec<AEps> = eps.iter().chain(std::iter::once(&extra)).map(|&e| AEps::new(&grid, &mask, alpha, e)).collect();
    let mut per_rung = vec![0.0_f64; k + 1];
    for phi in tests {
        if phi.grid() != &grid {
            return Err(Error::Input("test functions use different grids".into()));
        }
        let phi = phi.restrict(&mask)?;
        let f = pot.apply(&phi)?;
        let m = maximal.apply(&phi)?;
        for (r, op) in ops.iter().enumerate() {
            let a = op.apply(f.values(), &mask);
            for i in 0..grid.len() {
                let mv = m.values()[i];
                if mask[i] && mv > 0.0 {
                    per_rung[r] = per_rung[r].max(a[i].abs() / mv);
                }
            }
        }
    }
    let c_base = per_rung[..k].iter().cloned().fold(0.0, f64::max);
    let c_extended = c_base.max(per_rung[k]);
    let uniform = c_base.is_finite() && (c_extended - c_base).abs() <= DOMINATION_STABILITY * c_base;
    Ok(DominationReport { eps: eps.to_vec(), eps_extra: extra, c_base, c_extended, uniform })
}
