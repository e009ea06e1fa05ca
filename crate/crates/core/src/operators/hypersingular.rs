use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::fft::Convolution;
use crate::grid_domain::{Grid, GriddedFunction};
use crate::kernels::d_coefficient;
use crate::luxemburg::{luxemburg_norm, DEFAULT_REL_TOL};
use crate::quadrature::box_exterior_power_integral;
use serde::Serialize;

use super::potential::RieszPotential;

/// Smallest admissible truncation, in units of the largest cell side.
pub const MIN_EPS_CELLS: f64 = 2.0;

pub(crate) fn check_eps(grid: &Grid, eps: f64) -> Result<()> {
    let floor = MIN_EPS_CELLS * grid.h_max();
    if !(eps >= floor * (1.0 - 1e-12)) {
        return Err(Error::Resolution(format!("epsilon {eps} is below the floor 2h = {floor}")));
    }
    Ok(())
}

/// Lattice weights `|y|^{−n−α} hⁿ` for offsets with `|y| > ε`.
pub(crate) fn truncated_weights(grid: &Grid, alpha: f64, eps: f64) -> Convolution {
    let (h0, h1) = (grid.h(0), if grid.dim() == 2 { grid.h(1) } else { 0.0 });
    let vol = grid.cell_volume();
    let p = -(grid.dim() as f64) - alpha;
    Convolution::new(grid.points_per_axis(), grid.dim(), move |k| {
        let y = ((k[0] as f64 * h0).powi(2) + (k[1] as f64 * h1).powi(2)).sqrt();
        if y > eps { y.powf(p) * vol } else { 0.0 }
    })
}

/// The truncated finite-difference integral
/// `S_ε f(x) = Σ_{|y| > ε} (f(x) − f(x − y)) |y|^{−n−α} hⁿ` for `f` extended by
/// zero outside the window, so that `D^α_ε f = S_ε f / d`.
///
/// The `f(x)` part uses the lattice sum over the window offsets plus the exact
/// integral over the exterior of the offset box.
#[derive(Debug)]
pub struct TruncatedSum {
    grid: Grid,
    eps: f64,
    conv: Convolution,
    total: f64,
}

impl TruncatedSum {
    pub fn new(grid: &Grid, alpha: f64, eps: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Range(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        check_eps(grid, eps)?;
        let conv = truncated_weights(grid, alpha, eps);
        let m = grid.points_per_axis() as f64;
        let half: Vec<f64> = (0..grid.dim()).map(|a| (m - 0.5) * grid.h(a)).collect();
        let total = conv.table_sum() + box_exterior_power_integral(&half, alpha);
        Ok(Self { grid: *grid, eps, conv, total })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `∫_{|y| > ε} |y|^{−n−α} dy` as seen by the lattice.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn weights(&self) -> &Convolution {
        &self.conv
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let conv = self.conv.apply(f);
        f.iter().zip(conv).map(|(v, c)| self.total * v - c).collect()
    }

    pub fn apply_fn(&self, f: &GriddedFunction) -> Result<GriddedFunction> {
        if f.grid() != &self.grid {
            return Err(Error::Input("function and operator use different grids".into()));
        }
        GriddedFunction::new(self.grid, self.apply(f.values()))
    }
}

/// `D^α_ε f` with the calibrated normalizing constant.
pub fn hypersingular_truncated(f: &GriddedFunction, alpha: f64, eps: f64) -> Result<GriddedFunction> {
    let d = d_coefficient(f.grid().dim(), alpha)?;
    hypersingular_truncated_with(f, alpha, eps, d)
}

/// `D^α_ε f` with an explicit normalizing constant `d`.
pub fn hypersingular_truncated_with(f: &GriddedFunction, alpha: f64, eps: f64, d: f64) -> Result<GriddedFunction> {
    let raw = TruncatedSum::new(f.grid(), alpha, eps)?.apply_fn(f)?;
    raw.scale(1.0 / d)
}

/// Validates a decreasing truncation ladder above the `2h` floor.
pub fn check_ladder(grid: &Grid, eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Input("empty epsilon ladder".into()));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Input("epsilon ladder must be strictly decreasing".into()));
    }
    check_eps(grid, *eps.last().expect("non-empty"))
}

/// Successive truncations `D^α_ε f` along a ladder.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub eps: Vec<f64>,
    /// `‖D_{ε_{i+1}} f − D_{ε_i} f‖_{p(·)}`.
    pub distances: Vec<f64>,
    /// `false` when the last two distances do not decrease.
    pub converged: bool,
    #[serde(skip)]
    pub limit: Option<GriddedFunction>,
}

/// Evaluates `D^α_ε f` on a ladder of at least three truncations.
pub fn riesz_derivative(f: &GriddedFunction, alpha: f64, eps: &[f64], p: &ExponentField) -> Result<ConvergenceTable> {
    check_ladder(f.grid(), eps)?;
    if eps.len() < 3 {
        return Err(Error::Input("the convergence table needs at least three truncations".into()));
    }
    let d = d_coefficient(f.grid().dim(), alpha)?;
    let mut prev: Option<GriddedFunction> = None;
    let mut distances = Vec::new();
    for &e in eps {
        let cur = hypersingular_truncated_with(f, alpha, e, d)?;
        if let Some(pr) = &prev {
            let diff = GriddedFunction::new(*f.grid(), cur.values().iter().zip(pr.values()).map(|(a, b)| a - b).collect())?;
            distances.push(luxemburg_norm(&diff, p, DEFAULT_REL_TOL)?);
        }
        prev = Some(cur);
    }
    let k = distances.len();
    let converged = distances[k - 1] < distances[k - 2];
    Ok(ConvergenceTable { eps: eps.to_vec(), distances, converged, limit: prev })
}

/// Relative error `‖D_ε I^α φ − φ‖_{p(·)} / ‖φ‖_{p(·)}` on the window for each
/// `ε` of the ladder. Returns zeros for `φ ≡ 0`.
pub fn inversion_error(phi: &GriddedFunction, alpha: f64, p: &ExponentField, eps: &[f64]) -> Result<Vec<f64>> {
    let d = d_coefficient(phi.grid().dim(), alpha)?;
    inversion_error_with(phi, alpha, p, eps, d)
}

/// [`inversion_error`] with an explicit normalizing constant.
pub fn inversion_error_with(phi: &GriddedFunction, alpha: f64, p: &ExponentField, eps: &[f64], d: f64) -> Result<Vec<f64>> {
    check_ladder(phi.grid(), eps)?;
    let phi = phi.extend_by_zero();
    let base = luxemburg_norm(&phi, p, DEFAULT_REL_TOL)?;
    if base == 0.0 {
        return Ok(vec![0.0; eps.len()]);
    }
    let f = RieszPotential::new(phi.grid(), alpha)?.apply(&phi)?;
    eps.iter()
        .map(|&e| {
            let s = TruncatedSum::new(phi.grid(), alpha, e)?.apply(f.values());
            let err: Vec<f64> = s.iter().zip(phi.values()).map(|(v, t)| v / d - t).collect();
            Ok(luxemburg_norm(&GriddedFunction::new(*phi.grid(), err)?, p, DEFAULT_REL_TOL)? / base)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::RngExt;

    #[test]
    fn constants_are_annihilated_away_from_the_window_edge() {
        let g = Grid::interval(-2.0, 2.0, 512).unwrap();
        let s = TruncatedSum::new(&g, 0.5, 4.0 * g.h(0)).unwrap();
        let one = vec![1.0; g.len()];
        let out = s.apply(&one);
        // Interior value equals the exterior-of-window weight only.
        let x = g.len() / 2;
        let c = g.center(x)[0];
        let outside = ((2.0 - c).powf(-0.5) + (2.0 + c).powf(-0.5)) / 0.5;
        assert!((out[x] - outside).abs() < 1e-3 * outside, "{} {}", out[x], outside);
    }

    #[test]
    fn truncated_sum_is_linear() {
        let g = Grid::square(-1.0, 1.0, 32).unwrap();
        let s = TruncatedSum::new(&g, 0.3, 2.0 * g.h_max()).unwrap();
        let mut rng = rng::stream(8, "hs-linear");
        let a: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + 2.0 * y).collect();
        let (sa, sb, sab) = (s.apply(&a), s.apply(&b), s.apply(&ab));
        for i in 0..g.len() {
            assert!((sab[i] - sa[i] - 2.0 * sb[i]).abs() < 1e-9 * s.total_weight());
        }
    }

    #[test]
    fn resolution_floor() {
        let g = Grid::interval(0.0, 1.0, 64).unwrap();
        assert!(matches!(TruncatedSum::new(&g, 0.5, g.h(0)), Err(Error::Resolution(_))));
        assert!(check_ladder(&g, &[0.1, 0.2]).is_err());
        assert!(check_ladder(&g, &[4.0 * g.h(0), 2.0 * g.h(0)]).is_ok());
    }
}
