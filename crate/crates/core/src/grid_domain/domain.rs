use super::distance::distance_transform;
use super::function::GriddedFunction;
use super::grid::{Grid, Point};
use super::shape::Shape;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A bounded open set together with its declared regularity flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub shape: Shape,
    /// Declared, never verified: the cone property is a hypothesis.
    #[serde(default)]
    pub exterior_cone: bool,
    #[serde(default, alias = "strichartz_N")]
    pub strichartz_n: Option<usize>,
}

impl DomainSpec {
    pub fn new(shape: Shape) -> Result<Self> {
        shape.validate()?;
        Ok(Self { shape, exterior_cone: false, strichartz_n: None })
    }

    pub fn with_cone(mut self, flag: bool) -> Self {
        self.exterior_cone = flag;
        self
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.shape.contains(p)
    }

    pub fn diameter(&self) -> f64 {
        self.shape.diameter()
    }

    /// Requires `Ω ⊂ window` with a margin of at least `diam(Ω)/4` on every side.
    pub fn check_window(&self, grid: &Grid) -> Result<()> {
        self.shape.validate()?;
        if grid.dim() != self.dim() {
            return Err(Error::Containment(format!(
                "domain is {}-dimensional but the window is {}-dimensional",
                self.dim(),
                grid.dim()
            )));
        }
        let margin = self.diameter() / 4.0;
        let (lo, hi) = self.shape.bbox();
        let tol = 1e-12 * grid.diameter();
        for k in 0..grid.dim() {
            let wlo = grid.origin()[k];
            let whi = wlo + grid.extent()[k];
            if lo[k] - margin < wlo - tol || hi[k] + margin > whi + tol {
                return Err(Error::Containment(format!(
                    "domain extent [{}, {}] on axis {k} needs margin {margin} inside window [{wlo}, {whi}]",
                    lo[k], hi[k]
                )));
            }
        }
        Ok(())
    }

    /// `true` exactly at the cell centres lying in `Ω`.
    pub fn chi_mask(&self, grid: &Grid) -> Result<Vec<bool>> {
        self.check_window(grid)?;
        Ok(grid.centers().iter().map(|c| self.contains(c)).collect())
    }

    /// `δ(x) = dist(x, ∂Ω)` at the cell centres of `Ω`, zero elsewhere.
    ///
    /// Closed forms are used when the shape provides one. Otherwise the exact
    /// distance to the nearest exterior cell centre, minus `h√n/4`, with error
    /// at most `h√n` for domains whose boundary is resolved by the grid.
    pub fn boundary_distance(&self, grid: &Grid) -> Result<GriddedFunction> {
        let mask = self.chi_mask(grid)?;
        let centers = grid.centers();
        let exact: Option<Vec<f64>> = centers
            .iter()
            .zip(&mask)
            .map(|(c, &inside)| if inside { self.shape.exact_boundary_distance(c) } else { Some(0.0) })
            .collect();
        let values = match exact {
            Some(v) => v,
            None => {
                let exterior: Vec<bool> = mask.iter().map(|m| !m).collect();
                let shift = 0.25 * grid.h_max() * (grid.dim() as f64).sqrt();
                distance_transform(grid, &exterior)
                    .into_iter()
                    .zip(&mask)
                    .map(|(d, &inside)| if inside { d - shift } else { 0.0 })
                    .collect()
            }
        };
        GriddedFunction::masked(*grid, values, mask)
    }

    /// Largest number of maximal runs of in-`Ω` cells along any grid line
    /// parallel to `axis`.
    pub fn strichartz_count(&self, grid: &Grid, axis: usize) -> Result<usize> {
        if axis >= grid.dim() {
            return Err(Error::Input(format!("axis {axis} out of range for a {}-D grid", grid.dim())));
        }
        let mask = self.chi_mask(grid)?;
        let m = grid.points_per_axis();
        let lines = if grid.dim() == 1 { 1 } else { m };
        let mut best = 0;
        for line in 0..lines {
            let mut runs = 0;
            let mut prev = false;
            for t in 0..m {
                let ij = if axis == 0 { [t, line] } else { [line, t] };
                let here = mask[grid.ravel(ij)];
                if here && !prev {
                    runs += 1;
                }
                prev = here;
            }
            best = best.max(runs);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_domain::brute_force_distance;
    use crate::grid_domain::LevelSet;

    fn two_balls() -> Shape {
        Shape::Union {
            parts: vec![
                Shape::Ball { center: vec![-0.8, 0.0], radius: 0.5 },
                Shape::Ball { center: vec![0.8, 0.0], radius: 0.5 },
            ],
        }
    }

    #[test]
    fn interval_mask_on_eight_cells() {
        let d = DomainSpec::new(Shape::Interval { a: -1.0, b: 1.0 }).unwrap();
        let g = Grid::interval(-2.0, 2.0, 8).unwrap();
        let mask = d.chi_mask(&g).unwrap();
        assert_eq!(mask, vec![false, false, true, true, true, true, false, false]);
    }

    #[test]
    fn ball_contains_center_cell() {
        let d = DomainSpec::new(Shape::Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap();
        let g = Grid::square(-2.0, 2.0, 9).unwrap();
        let mask = d.chi_mask(&g).unwrap();
        assert!(mask[g.ravel([4, 4])]);
    }

    #[test]
    fn union_mask_is_or_of_parts() {
        let g = Grid::square(-2.0, 2.0, 32).unwrap();
        let u = DomainSpec::new(two_balls()).unwrap().chi_mask(&g).unwrap();
        let Shape::Union { parts } = two_balls() else { unreachable!() };
        let a = DomainSpec::new(parts[0].clone()).unwrap().chi_mask(&g).unwrap();
        let b = DomainSpec::new(parts[1].clone()).unwrap().chi_mask(&g).unwrap();
        for i in 0..g.len() {
            assert_eq!(u[i], a[i] || b[i]);
        }
        let same = DomainSpec::new(Shape::Union { parts: vec![two_balls(), two_balls()] }).unwrap();
        assert_eq!(same.chi_mask(&g).unwrap(), u);
    }

    #[test]
    fn containment_margin_is_enforced() {
        let d = DomainSpec::new(Shape::Interval { a: -1.0, b: 1.0 }).unwrap();
        assert!(matches!(d.chi_mask(&Grid::interval(-1.2, 1.2, 16).unwrap()), Err(Error::Containment(_))));
        assert!(d.chi_mask(&Grid::interval(-1.5, 1.5, 16).unwrap()).is_ok());
    }

    #[test]
    fn exact_distances() {
        let d = DomainSpec::new(Shape::Interval { a: -1.0, b: 1.0 }).unwrap();
        let g = Grid::interval(-2.0, 2.0, 16).unwrap();
        let delta = d.boundary_distance(&g).unwrap();
        // Centre cells at ±0.125.
        assert_eq!(delta.values()[8], 0.875);
        let disk = DomainSpec::new(Shape::Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap();
        let g2 = Grid::square(-2.0, 2.0, 9).unwrap();
        assert_eq!(disk.boundary_distance(&g2).unwrap().values()[g2.ravel([4, 4])], 1.0);
    }

    #[test]
    fn transform_distance_for_overlapping_union() {
        // Overlapping parts have no closed form, so the transform is used.
        let shape = Shape::Union {
            parts: vec![
                Shape::Ball { center: vec![-0.3, 0.0], radius: 0.6 },
                Shape::AxisBox { lower: vec![0.0, -0.4], upper: vec![0.9, 0.4] },
            ],
        };
        let d = DomainSpec::new(shape.clone()).unwrap();
        let g = Grid::square(-2.0, 2.0, 64).unwrap();
        assert!(shape.exact_boundary_distance(&[0.0, 0.0]).is_none());
        let delta = d.boundary_distance(&g).unwrap();
        let mask = delta.mask().unwrap().to_vec();
        let exterior: Vec<bool> = mask.iter().map(|m| !m).collect();
        let brute = brute_force_distance(&g, &exterior);
        let tol = g.h_max() * 2f64.sqrt();
        let centers = g.centers();
        for i in (0..g.len()).filter(|&i| mask[i]) {
            assert!((delta.values()[i] - brute[i]).abs() <= tol);
            assert!(delta.values()[i] >= 0.0);
            // True distance by dense boundary sampling.
            let c = centers[i];
            let mut truth = f64::INFINITY;
            for k in 0..2000 {
                let t = k as f64 / 2000.0;
                let ang = 2.0 * std::f64::consts::PI * t;
                let on_circle = [-0.3 + 0.6 * ang.cos(), 0.6 * ang.sin()];
                let on_box = [
                    [0.9 * t, -0.4],
                    [0.9 * t, 0.4],
                    [0.9, -0.4 + 0.8 * t],
                    [0.0, -0.4 + 0.8 * t],
                ];
                for b in std::iter::once(on_circle).chain(on_box) {
                    if !shape.contains(&b) && shape.signed_distance(&b).abs() < 1e-9 {
                        truth = truth.min(crate::grid_domain::dist(&c, &b));
                    }
                }
            }
            assert!((delta.values()[i] - truth).abs() <= tol, "{c:?}: {} vs {truth}", delta.values()[i]);
        }
    }

    #[test]
    fn strichartz_counts() {
        let g1 = Grid::interval(-2.0, 2.0, 32).unwrap();
        let iv = DomainSpec::new(Shape::Interval { a: -1.0, b: 1.0 }).unwrap();
        assert_eq!(iv.strichartz_count(&g1, 0).unwrap(), 1);
        let g = Grid::square(-2.0, 2.0, 64).unwrap();
        let sq = DomainSpec::new(Shape::AxisBox { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0] }).unwrap();
        assert_eq!(sq.strichartz_count(&g, 1).unwrap(), 1);
        let u = DomainSpec::new(two_balls()).unwrap();
        assert_eq!(u.strichartz_count(&g, 0).unwrap(), 2);
        assert_eq!(u.strichartz_count(&g, 1).unwrap(), 1);
        let ann = DomainSpec::new(Shape::Implicit {
            level_set: LevelSet::Annulus { center: vec![0.0, 0.0], inner: 0.5, outer: 1.0 },
        })
        .unwrap();
        assert_eq!(ann.strichartz_count(&g, 0).unwrap(), 2);
    }

    #[test]
    fn parses_config_form() {
        let d: DomainSpec = serde_json::from_str(
            r#"{"shape":{"kind":"ball","center":[0,0],"radius":1},"exterior_cone":true,"strichartz_N":1}"#,
        )
        .unwrap();
        assert!(d.exterior_cone);
        assert_eq!(d.strichartz_n, Some(1));
    }
}
