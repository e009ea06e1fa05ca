use crate::error::{Error, Result};
use crate::grid_domain::{unit, DomainSpec, Grid, GriddedFunction, Point, Shape};
use crate::quadrature::{compensated_sum, composite_gl, sphere_measure};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use super::hypersingular::truncated_weights;

/// Angular Gauss–Legendre nodes per point in two dimensions.
pub const DEFAULT_WEIGHT_BUDGET: usize = 1024;

const ORDER: usize = 8;

/// Slack allowed on the upper bound `a_Ω ≤ (|S^{n−1}|/α) δ^{−α}`.
pub const UPPER_SLACK: f64 = 0.02;

/// `a_Ω` sampled on the cells of `Ω`.
#[derive(Debug, Clone, Serialize)]
pub struct WeightField {
    pub alpha: f64,
    #[serde(skip)]
    pub values: GriddedFunction,
    /// Angular nodes per point (2-D); the radial integral is exact.
    pub budget: usize,
    /// Half-width of the window when the complement of the window is handled
    /// separately; `None` when the whole complement is integrated along rays.
    pub tail_radius: Option<f64>,
}

/// `(1/α) Σ_gaps (s^{−α} − e^{−α})` along the ray `x + t u`, where the gaps are
/// the parts of `t > 0` outside the shape.
fn ray_term(shape: &Shape, x: &Point, u: &Point, alpha: f64) -> f64 {
    let runs = shape.ray_intervals(x, u);
    let mut terms = Vec::with_capacity(runs.len());
    let mut gap_start: Option<f64> = None;
    for (s, e) in runs {
        if let Some(g) = gap_start {
            if s > g {
                terms.push(g.powf(-alpha) - s.powf(-alpha));
            }
        }
        gap_start = Some(e);
    }
    if let Some(g) = gap_start {
        if g.is_finite() {
            terms.push(g.powf(-alpha));
        }
    }
    compensated_sum(terms) / alpha
}

/// `a_Ω(x) = ∫_{Rⁿ∖Ω} |x − y|^{−n−α} dy` at a point of `Ω`, integrating the
/// radial variable exactly along each ray.
pub fn a_omega_at(domain: &DomainSpec, alpha: f64, x: &Point, budget: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Range(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !domain.contains(x) {
        return Err(Error::Domain(format!("a_Ω is evaluated at points of Ω only, got {x:?}")));
    }
    let shape = &domain.shape;
    Ok(if domain.dim() == 1 {
        ray_term(shape, x, &[1.0, 0.0], alpha) + ray_term(shape, x, &[-1.0, 0.0], alpha)
    } else {
        let panels = (budget / ORDER).max(1);
        composite_gl(0.0, 2.0 * PI, panels, ORDER, |t| ray_term(shape, x, &unit(t), alpha))
    })
}

/// `a_Ω` on every cell of `Ω`.
pub fn a_omega(domain: &DomainSpec, alpha: f64, grid: &Grid) -> Result<WeightField> {
    a_omega_with_budget(domain, alpha, grid, DEFAULT_WEIGHT_BUDGET)
}

pub fn a_omega_with_budget(domain: &DomainSpec, alpha: f64, grid: &Grid, budget: usize) -> Result<WeightField> {
    let mask = domain.chi_mask(grid)?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| if mask[i] { a_omega_at(domain, alpha, &grid.center(i), budget) } else { Ok(0.0) })
        .collect::<Result<Vec<f64>>>()?;
    Ok(WeightField { alpha, values: GriddedFunction::masked(*grid, values, mask)?, budget, tail_radius: None })
}

/// Cellwise construction: midpoint sum over the window cells outside `Ω`,
/// plus the exact integral over the complement of the window.
pub fn a_omega_cellwise(domain: &DomainSpec, alpha: f64, grid: &Grid) -> Result<WeightField> {
    let mask = domain.chi_mask(grid)?;
    let conv = truncated_weights(grid, alpha, 0.0);
    let outside: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { 1.0 }).collect();
    let near = conv.apply(&outside);
    let window = DomainSpec::new(Shape::AxisBox {
        lower: grid.origin().to_vec(),
        upper: grid.origin().iter().zip(grid.extent()).map(|(o, e)| o + e).collect(),
    })?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if mask[i] {
                Ok(near[i] + a_omega_at(&window, alpha, &grid.center(i), 4 * DEFAULT_WEIGHT_BUDGET)?)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let tail = grid.extent().iter().fold(f64::INFINITY, |a, e| a.min(0.5 * e));
    Ok(WeightField {
        alpha,
        values: GriddedFunction::masked(*grid, values, mask)?,
        budget: 4 * DEFAULT_WEIGHT_BUDGET,
        tail_radius: Some(tail),
    })
}

/// Outcome of comparing `a_Ω` with `δ^{−α}` cell by cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightCheck {
    /// `|S^{n−1}|/α`.
    pub c1: f64,
    /// `a_Ω ≤ c1 δ^{−α} (1 + 2%)` at every cell.
    pub c1_holds: bool,
    /// `max a_Ω δ^α / c1`.
    pub upper_ratio: f64,
    /// `max δ^{−α} / a_Ω`.
    pub c2_est: f64,
    /// Whether the domain declares the exterior cone property.
    pub cone_declared: bool,
}

pub fn weight_equivalence_check(domain: &DomainSpec, alpha: f64, grid: &Grid) -> Result<WeightCheck> {
    let a = a_omega(domain, alpha, grid)?;
    weight_equivalence_from(domain, &a, grid)
}

pub(crate) fn weight_equivalence_from(domain: &DomainSpec, a: &WeightField, grid: &Grid) -> Result<WeightCheck> {
    let alpha = a.alpha;
    let delta = domain.boundary_distance(grid)?;
    let c1 = sphere_measure(grid.dim()) / alpha;
    let (mut upper, mut c2) = (0.0_f64, 0.0_f64);
    for i in 0..grid.len() {
        if !delta.in_support(i) {
            continue;
        }
        let dm = delta.values()[i].powf(-alpha);
        let av = a.values.values()[i];
        upper = upper.max(av / (c1 * dm));
        c2 = c2.max(dm / av);
    }
    Ok(WeightCheck { c1, c1_holds: upper <= 1.0 + UPPER_SLACK, upper_ratio: upper, c2_est: c2, cone_declared: domain.exterior_cone })
}
