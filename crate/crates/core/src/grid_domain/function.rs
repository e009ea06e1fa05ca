use super::domain::DomainSpec;
use super::grid::{Grid, Point};
use crate::error::{Error, Result};
use crate::quadrature::compensated_sum;
use std::fmt::Write as _;

/// Real samples at the cell centres of a grid, optionally restricted to a mask.
///
/// Masked functions hold exactly zero at every cell outside the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedFunction {
    grid: Grid,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl GriddedFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite value at cell {i}")));
        }
        Ok(Self { grid, values, mask: None })
    }

    /// Function supported on `mask`; values outside it are replaced by zero.
    pub fn masked(grid: Grid, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::Input(format!("mask has {} cells, grid has {}", mask.len(), grid.len())));
        }
        let mut f = Self::new(grid, values)?;
        for (v, &m) in f.values.iter_mut().zip(&mask) {
            if !m {
                *v = 0.0;
            }
        }
        f.mask = Some(mask);
        Ok(f)
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn<F: Fn(&Point) -> f64>(grid: Grid, f: F) -> Result<Self> {
        Self::new(grid, grid.centers().iter().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()], mask: None }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn in_support(&self, idx: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[idx])
    }

    /// Same function seen on the whole window: zero outside the old mask.
    pub fn extend_by_zero(&self) -> Self {
        Self { grid: self.grid, values: self.values.clone(), mask: None }
    }

    /// Keeps the values on `mask` and drops the rest.
    pub fn restrict(&self, mask: &[bool]) -> Result<Self> {
        Self::masked(self.grid, self.values.clone(), mask.to_vec())
    }

    pub fn restrict_to(&self, domain: &DomainSpec) -> Result<Self> {
        self.restrict(&domain.chi_mask(&self.grid)?)
    }

    /// Pointwise map that keeps the mask.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        match &self.mask {
            Some(m) => Self::masked(self.grid, values, m.clone()),
            None => Self::new(self.grid, values),
        }
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Midpoint rule over the mask, or over the whole window if there is none.
    /// Cells are summed in storage order with compensation.
    pub fn integrate(&self) -> f64 {
        self.integrate_with(|_, v| v)
    }

    /// `Σ g(idx, f(idx)) hⁿ` over the support, in storage order.
    pub fn integrate_with<G: Fn(usize, f64) -> f64>(&self, g: G) -> f64 {
        let vol = self.grid.cell_volume();
        let terms = self.values.iter().enumerate().filter(|(i, _)| self.in_support(*i)).map(|(i, &v)| g(i, v));
        compensated_sum(terms) * vol
    }

    /// CSV with header `x1[,x2],value`, one row per supported cell in storage order.
    pub fn to_csv(&self) -> String {
        let dim = self.grid.dim();
        let mut out = String::new();
        out.push_str(if dim == 1 { "x1,value\n" } else { "x1,x2,value\n" });
        for (i, v) in self.values.iter().enumerate().filter(|(i, _)| self.in_support(*i)) {
            let c = self.grid.center(i);
            for x in &c[..dim] {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(out, "{v}");
        }
        out
    }

    /// Reads `x1[,x2],value` rows and assigns each to the cell containing its
    /// coordinates. Every cell must receive exactly one row.
    pub fn from_csv(grid: Grid, text: &str) -> Result<Self> {
        let dim = grid.dim();
        let mut values = vec![f64::NAN; grid.len()];
        let mut offset = 0usize;
        let mut seen_header = false;
        for line in text.split_inclusive('\n') {
            let start = offset;
            offset += line.len();
            let row = line.trim();
            if row.is_empty() || row.starts_with('#') {
                continue;
            }
            if !seen_header {
                seen_header = true;
                if row.split(',').next().is_some_and(|c| c.trim().parse::<f64>().is_err()) {
                    continue;
                }
            }
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if fields.len() != dim + 1 {
                return Err(Error::Parse(format!(
                    "byte {start}: expected {} columns, found {}",
                    dim + 1,
                    fields.len()
                )));
            }
            let mut nums = [0.0; 3];
            for (k, f) in fields.iter().enumerate() {
                nums[k] = f
                    .parse()
                    .map_err(|_| Error::Parse(format!("byte {start}: cannot read number {f:?}")))?;
            }
            let mut ij = [0usize; 2];
            for k in 0..dim {
                let t = (nums[k] - grid.origin()[k]) / grid.h(k);
                if !(0.0..grid.points_per_axis() as f64).contains(&t) {
                    return Err(Error::Parse(format!("byte {start}: point outside the window")));
                }
                ij[k] = t.floor() as usize;
            }
            let idx = grid.ravel(ij);
            if !values[idx].is_nan() {
                return Err(Error::Parse(format!("byte {start}: cell {idx} given twice")));
            }
            values[idx] = nums[dim];
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::Parse(format!("byte {offset}: no value for cell {i}")));
        }
        Self::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_domain::Shape;
    use proptest::prelude::*;

    fn interval() -> DomainSpec {
        DomainSpec::new(Shape::Interval { a: -1.0, b: 1.0 }).unwrap()
    }

    #[test]
    fn extension_of_one_is_indicator() {
        let g = Grid::interval(-2.0, 2.0, 16).unwrap();
        let d = interval();
        let one = GriddedFunction::from_fn(g, |_| 1.0).unwrap().restrict_to(&d).unwrap();
        let ext = one.extend_by_zero();
        for (i, c) in g.centers().iter().enumerate() {
            assert_eq!(ext.values()[i], if d.contains(c) { 1.0 } else { 0.0 });
        }
        assert_eq!(ext.integrate(), one.integrate());
        assert_eq!(one.integrate(), 2.0);
    }

    #[test]
    fn midpoint_integrals() {
        let d = interval();
        for m in [8, 64, 1000] {
            let g = Grid::interval(-2.0, 2.0, m).unwrap();
            let x = GriddedFunction::from_fn(g, |p| p[0]).unwrap().restrict_to(&d).unwrap();
            assert!(x.integrate().abs() < 1e-15);
        }
        let g = Grid::interval(0.0, 1.0, 1024).unwrap();
        let sq = GriddedFunction::from_fn(g, |p| p[0] * p[0]).unwrap();
        assert!((sq.integrate() - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn midpoint_error_is_second_order() {
        let err = |m: usize| {
            let g = Grid::interval(0.0, 1.0, m).unwrap();
            (GriddedFunction::from_fn(g, |p| p[0].exp()).unwrap().integrate() - (1f64.exp() - 1.0)).abs()
        };
        let ratio = err(64) / err(128);
        assert!(ratio > 3.9, "observed ratio {ratio}");
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::square(-1.0, 1.0, 8).unwrap();
        let f = GriddedFunction::from_fn(g, |p| p[0] * 3.0 - p[1]).unwrap();
        let text = f.to_csv();
        assert!(text.starts_with("x1,x2,value\n"));
        assert_eq!(GriddedFunction::from_csv(g, &text).unwrap(), f);
    }

    #[test]
    fn csv_errors_report_byte_offsets() {
        let g = Grid::interval(0.0, 1.0, 8).unwrap();
        let err = GriddedFunction::from_csv(g, "x1,value\n0.0625,1\n0.1875,oops\n").unwrap_err();
        assert!(err.to_string().contains("byte 18"), "{err}");
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = Grid::interval(0.0, 1.0, 8).unwrap();
        assert!(GriddedFunction::new(g, vec![f64::NAN; 8]).is_err());
    }

    proptest! {
        #[test]
        fn restrict_after_extend_is_identity(vals in prop::collection::vec(-1e3f64..1e3, 32)) {
            let g = Grid::interval(-2.0, 2.0, 32).unwrap();
            let mask = interval().chi_mask(&g).unwrap();
            let f = GriddedFunction::masked(g, vals, mask.clone()).unwrap();
            prop_assert_eq!(f.extend_by_zero().restrict(&mask).unwrap(), f);
        }

        #[test]
        fn integrate_is_linear_and_monotone(
            a in prop::collection::vec(-10f64..10.0, 16),
            b in prop::collection::vec(-10f64..10.0, 16),
            c in -5f64..5.0,
        ) {
            let g = Grid::interval(0.0, 1.0, 16).unwrap();
            let fa = GriddedFunction::new(g, a.clone()).unwrap();
            let fb = GriddedFunction::new(g, b.clone()).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| c * x + y).collect();
            let lin = GriddedFunction::new(g, sum).unwrap().integrate();
            prop_assert!((lin - (c * fa.integrate() + fb.integrate())).abs() < 1e-10);
            let hi: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
            prop_assert!(GriddedFunction::new(g, hi).unwrap().integrate() >= fa.integrate() - 1e-12);
        }
    }
}
