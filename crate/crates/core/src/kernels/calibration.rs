//! Calibration of the normalizing constant `d_{n,1}(α)` of the truncated
//! hypersingular integral.
//!
//! `d` is chosen so that the discrete `D^α_ε` inverts the discrete `I^α` on a
//! zero-mass Hermite–Gaussian bump: it is the least-squares scalar `d`
//! minimizing `‖S_ε I^α g − d g‖₂`, i.e. `⟨S_ε I^α g, g⟩ / ⟨g, g⟩`. The bump has
//! vanishing integral, so `I^α g` decays fast enough for a bounded window.

use crate::error::{Error, Result};
use crate::grid_domain::{Grid, GriddedFunction};
use crate::operators::{RieszPotential, TruncatedSum};
use crate::quadrature::compensated_sum;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Largest admissible relative spread of the estimates.
pub const DRIFT_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationPoint {
    pub points_per_axis: usize,
    pub eps_cells: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub n: usize,
    pub alpha: f64,
    pub points: Vec<CalibrationPoint>,
    /// Estimate at the finest grid and smallest truncation.
    pub d: f64,
    /// `(max − min) / mean` over the estimates.
    pub drift: f64,
}

/// Zero-mass bump `(1 − r²/(nσ²)) e^{−r²/(2σ²)}` centred at the origin.
pub fn zero_mass_bump(grid: &Grid, sigma: f64) -> Result<GriddedFunction> {
    let n = grid.dim() as f64;
    GriddedFunction::from_fn(*grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        (1.0 - r2 / (n * sigma * sigma)) * (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

struct Protocol {
    half_width: f64,
    sigma: f64,
    resolutions: [usize; 2],
    eps_cells: [f64; 2],
}

fn protocol(n: usize) -> Protocol {
    if n == 1 {
        Protocol { half_width: 2.0, sigma: 0.25, resolutions: [2048, 4096], eps_cells: [4.0, 2.0] }
    } else {
        Protocol { half_width: 2.0, sigma: 0.5, resolutions: [512, 1024], eps_cells: [4.0, 2.0] }
    }
}

fn estimate(grid: &Grid, alpha: f64, sigma: f64, eps_cells: &[f64]) -> Result<Vec<f64>> {
    let g = zero_mass_bump(grid, sigma)?;
    let f = RieszPotential::new(grid, alpha)?.apply(&g)?;
    let gg = compensated_sum(g.values().iter().map(|v| v * v));
    eps_cells
        .iter()
        .map(|&k| {
            let s = TruncatedSum::new(grid, alpha, k * grid.h_max())?.apply(f.values());
            Ok(compensated_sum(s.iter().zip(g.values()).map(|(a, b)| a * b)) / gg)
        })
        .collect()
}

/// Runs the calibration protocol for `(n, α)` without caching.
pub fn calibrate_d(n: usize, alpha: f64) -> Result<Calibration> {
    if !(alpha > 0.0 && alpha < 1.0) || !(1..=2).contains(&n) {
        return Err(Error::Range(format!("calibration needs n ∈ {{1, 2}} and 0 < alpha < 1, got n = {n}, alpha = {alpha}")));
    }
    let pr = protocol(n);
    let mut points = Vec::new();
    for &m in &pr.resolutions {
        let grid = if n == 1 {
            Grid::interval(-pr.half_width, pr.half_width, m)?
        } else {
            Grid::square(-pr.half_width, pr.half_width, m)?
        };
        for (k, d) in pr.eps_cells.iter().zip(estimate(&grid, alpha, pr.sigma, &pr.eps_cells)?) {
            points.push(CalibrationPoint { points_per_axis: m, eps_cells: *k, d });
        }
    }
    let ds: Vec<f64> = points.iter().map(|p| p.d).collect();
    let mean = ds.iter().sum::<f64>() / ds.len() as f64;
    let spread = ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ds.iter().cloned().fold(f64::INFINITY, f64::min);
    let d = points.last().expect("four estimates").d;
    Ok(Calibration { n, alpha, points, d, drift: spread / mean })
}

fn cache() -> &'static Mutex<HashMap<(usize, u64), Calibration>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Calibration>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached calibration; errors if the estimates drift by more than 1%.
pub fn calibration(n: usize, alpha: f64) -> Result<Calibration> {
    let key = (n, alpha.to_bits());
    if let Some(c) = cache().lock().expect("calibration cache").get(&key) {
        return Ok(c.clone());
    }
    let c = calibrate_d(n, alpha)?;
    if c.drift > DRIFT_LIMIT {
        return Err(Error::Calibration { drift: c.drift, limit: DRIFT_LIMIT });
    }
    cache().lock().expect("calibration cache").insert(key, c.clone());
    Ok(c)
}

/// Calibrated `d_{n,1}(α)`.
pub fn d_coefficient(n: usize, alpha: f64) -> Result<f64> {
    calibration(n, alpha).map(|c| c.d)
}
