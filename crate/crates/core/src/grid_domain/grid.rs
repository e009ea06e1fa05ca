use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point of R¹ or R²; the second coordinate is 0 in one dimension.
pub type Point = [f64; 2];

pub(crate) fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Uniform cell-centred sampling of the box `origin + [0, extent]`.
///
/// Cells are stored row-major: in two dimensions the flat index of cell
/// `(i, j)` is `i * m + j`, with `i` running along the first axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    origin: Point,
    extent: Point,
    m: usize,
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(origin: &[f64], extent: &[f64], m: usize) -> Result<Self> {
        let dim = origin.len();
        if !(1..=2).contains(&dim) || extent.len() != dim {
            return Err(Error::Input(format!(
                "grid dimension must be 1 or 2 with matching extent (got {} and {})",
                origin.len(),
                extent.len()
            )));
        }
        if m < Self::MIN_POINTS {
            return Err(Error::Input(format!("points_per_axis must be >= {}, got {m}", Self::MIN_POINTS)));
        }
        if extent.iter().any(|e| !(e.is_finite() && *e > 0.0)) || origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Input("grid extent must be positive and finite".into()));
        }
        let mut o = [0.0; 2];
        let mut e = [1.0; 2];
        o[..dim].copy_from_slice(origin);
        e[..dim].copy_from_slice(extent);
        Ok(Self { dim, origin: o, extent: e, m })
    }

    /// `m` cells on `[a, b]`.
    pub fn interval(a: f64, b: f64, m: usize) -> Result<Self> {
        Self::new(&[a], &[b - a], m)
    }

    /// `m × m` cells on `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64, m: usize) -> Result<Self> {
        Self::new(&[lo, lo], &[hi - lo, hi - lo], m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn h(&self, axis: usize) -> f64 {
        self.extent[axis] / self.m as f64
    }

    /// Largest cell side.
    pub fn h_max(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.h(a)).product()
    }

    pub fn cell_half_sides(&self) -> Point {
        let mut p = [0.0; 2];
        for (a, v) in p.iter_mut().enumerate().take(self.dim) {
            *v = 0.5 * self.h(a);
        }
        p
    }

    pub fn unravel(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.m, idx % self.m]
        }
    }

    pub fn ravel(&self, ij: [usize; 2]) -> usize {
        if self.dim == 1 {
            ij[0]
        } else {
            ij[0] * self.m + ij[1]
        }
    }

    pub fn center(&self, idx: usize) -> Point {
        let ij = self.unravel(idx);
        let mut p = [0.0; 2];
        for a in 0..self.dim {
            p[a] = self.origin[a] + (ij[a] as f64 + 0.5) * self.h(a);
        }
        p
    }

    /// All cell centres in storage order.
    pub fn centers(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    /// Centre of the window box.
    pub fn window_center(&self) -> Point {
        let mut p = [0.0; 2];
        for a in 0..self.dim {
            p[a] = self.origin[a] + 0.5 * self.extent[a];
        }
        p
    }

    /// Diagonal of the window.
    pub fn diameter(&self) -> f64 {
        self.extent().iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    /// Same window with `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Self {
        Self { m: self.m * factor, ..*self }
    }

    /// Lower and upper corners of cell `idx`.
    pub fn cell_bounds(&self, idx: usize) -> (Point, Point) {
        let c = self.center(idx);
        let hs = self.cell_half_sides();
        ([c[0] - hs[0], c[1] - hs[1]], [c[0] + hs[0], c[1] + hs[1]])
    }
}
