use crate::error::{Error, Result};
use crate::fft::Convolution;
use crate::grid_domain::{DomainSpec, Grid, GriddedFunction};
use rayon::prelude::*;

/// Radii `r₀ = h/2, r_{k+1} = √2 r_k` up to and including the first rung
/// at or beyond `diam`. The first rung covers the own cell only.
pub fn radius_ladder(grid: &Grid, diam: f64) -> Vec<f64> {
    let mut r = 0.5 * grid.h_min();
    let mut out = vec![r];
    while r < diam {
        r *= std::f64::consts::SQRT_2;
        out.push(r);
    }
    out
}

/// Discrete maximal function on `Ω`:
/// `𝓜φ(x) = max_r (Σ_{y ∈ Ω, |x−y| ≤ r} |φ(y)|) / #{y ∈ Ω : |x−y| ≤ r}`
/// over [`radius_ladder`]. Zero outside `Ω`.
pub fn maximal(phi: &GriddedFunction, domain: &DomainSpec) -> Result<GriddedFunction> {
    let grid = *phi.grid();
    let mask = domain.chi_mask(&grid)?;
    maximal_on_mask(phi, &mask, domain.diameter())
}

pub(crate) fn maximal_on_mask(phi: &GriddedFunction, mask: &[bool], diam: f64) -> Result<GriddedFunction> {
    let grid = *phi.grid();
    if mask.len() != grid.len() {
        return Err(Error::Input("mask does not match the grid".into()));
    }
    let ladder = radius_ladder(&grid, diam);
    let r_max = *ladder.last().expect("non-empty ladder");
    let (h0, h1) = (grid.h(0), if grid.dim() == 2 { grid.h(1) } else { 0.0 });
    let reach0 = (r_max / h0).ceil() as i64;
    let reach1 = if grid.dim() == 2 { (r_max / h1).ceil() as i64 } else { 0 };
    let mut offsets: Vec<(f64, [i64; 2])> = Vec::new();
    for a in -reach0..=reach0 {
        for b in -reach1..=reach1 {
            let d = ((a as f64 * h0).powi(2) + (b as f64 * h1).powi(2)).sqrt();
            if d <= r_max * (1.0 + 1e-12) {
                offsets.push((d, [a, b]));
            }
        }
    }
    offsets.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let abs: Vec<f64> = phi.values().iter().map(|v| v.abs()).collect();
    let m = grid.points_per_axis() as i64;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !mask[i] {
                return 0.0;
            }
            let ij = grid.unravel(i);
            let (mut sum, mut count) = (0.0_f64, 0usize);
            let mut best = 0.0_f64;
            let mut rung = 0;
            for (d, off) in &offsets {
                while rung < ladder.len() && *d > ladder[rung] * (1.0 + 1e-12) {
                    if count > 0 {
                        best = best.max(sum / count as f64);
                    }
                    rung += 1;
                }
                let (a, b) = (ij[0] as i64 + off[0], ij[1] as i64 + off[1]);
                if a < 0 || a >= m || (grid.dim() == 2 && (b < 0 || b >= m)) {
                    continue;
                }
                let j = grid.ravel([a as usize, b as usize]);
                if mask[j] {
                    sum += abs[j];
                    count += 1;
                }
            }
            if count > 0 {
                best = best.max(sum / count as f64);
            }
            best
        })
        .collect();
    GriddedFunction::masked(grid, values, mask.to_vec())
}

/// [`maximal_on_mask`] evaluated with one FFT convolution per rung. The ball
/// counts depend on the mask only and are computed once, so the operator pays
/// off when applied to many functions on the same domain.
pub struct MaximalOperator {
    grid: Grid,
    mask: Vec<bool>,
    balls: Vec<Convolution>,
    counts: Vec<Vec<f64>>,
}

impl MaximalOperator {
    pub fn new(grid: &Grid, mask: &[bool], diam: f64) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::Input("mask does not match the grid".into()));
        }
        let (h0, h1) = (grid.h(0), if grid.dim() == 2 { grid.h(1) } else { 0.0 });
        let chi: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
        let mut balls = Vec::new();
        let mut counts = Vec::new();
        for r in radius_ladder(grid, diam) {
            let ball = Convolution::new(grid.points_per_axis(), grid.dim(), |k| {
                let d = ((k[0] as f64 * h0).powi(2) + (k[1] as f64 * h1).powi(2)).sqrt();
                if d <= r * (1.0 + 1e-12) { 1.0 } else { 0.0 }
            });
            counts.push(ball.apply(&chi).into_iter().map(f64::round).collect());
            balls.push(ball);
        }
        Ok(Self { grid: *grid, mask: mask.to_vec(), balls, counts })
    }

    pub fn apply(&self, phi: &GriddedFunction) -> Result<GriddedFunction> {
        if phi.grid() != &self.grid {
            return Err(Error::Input("function and operator use different grids".into()));
        }
        let abs: Vec<f64> =
            phi.values().iter().zip(&self.mask).map(|(v, &m)| if m { v.abs() } else { 0.0 }).collect();
        let mut best = vec![0.0_f64; abs.len()];
        for (ball, count) in self.balls.iter().zip(&self.counts) {
            let sums = ball.apply(&abs);
            for i in 0..best.len() {
                if self.mask[i] && count[i] > 0.0 {
                    best[i] = best[i].max(sums[i].max(0.0) / count[i]);
                }
            }
        }
        GriddedFunction::masked(self.grid, best, self.mask.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_domain::Shape;
    use crate::rng;
    use rand::RngExt;

    fn disk() -> DomainSpec {
        DomainSpec::new(Shape::Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap()
    }

    #[test]
    fn constants_are_fixed() {
        let g = Grid::square(-2.0, 2.0, 32).unwrap();
        let c = GriddedFunction::from_fn(g, |_| -2.5).unwrap().restrict_to(&disk()).unwrap();
        let m = maximal(&c, &disk()).unwrap();
        for (i, v) in m.values().iter().enumerate() {
            if c.in_support(i) {
                assert!((v - 2.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dominates_and_is_sublinear() {
        let g = Grid::square(-2.0, 2.0, 24).unwrap();
        let mut rng = rng::stream(12, "maximal");
        for _ in 0..10 {
            let a = GriddedFunction::new(g, (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap().restrict_to(&disk()).unwrap();
            let b = GriddedFunction::new(g, (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap().restrict_to(&disk()).unwrap();
            let ab = GriddedFunction::new(g, a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect()).unwrap();
            let (ma, mb, mab) = (maximal(&a, &disk()).unwrap(), maximal(&b, &disk()).unwrap(), maximal(&ab, &disk()).unwrap());
            for i in 0..g.len() {
                assert!(ma.values()[i] >= a.values()[i].abs());
                assert!(mab.values()[i] <= ma.values()[i] + mb.values()[i] + 1e-14);
            }
        }
    }

    #[test]
    fn fft_operator_matches_direct_sums() {
        let d = disk();
        for g in [Grid::square(-2.0, 2.0, 40).unwrap(), Grid::interval(-2.0, 2.0, 96).unwrap()] {
            let d = if g.dim() == 1 { DomainSpec::new(Shape::Interval { a: -1.0, b: 1.0 }).unwrap() } else { d.clone() };
            let mask = d.chi_mask(&g).unwrap();
            let op = MaximalOperator::new(&g, &mask, d.diameter()).unwrap();
            let mut rng = rng::stream(3, "maximal-fft");
            let phi = GriddedFunction::new(g, (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let (fast, slow) = (op.apply(&phi).unwrap(), maximal(&phi.restrict(&mask).unwrap(), &d).unwrap());
            for (a, b) in fast.values().iter().zip(slow.values()) {
                assert!((a - b).abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn one_dimensional_spike() {
        let g = Grid::interval(-2.0, 2.0, 64).unwrap();
        let d = DomainSpec::new(Shape::Interval { a: -1.0, b: 1.0 }).unwrap();
        let mut v = vec![0.0; 64];
        v[32] = 1.0;
        let m = maximal(&GriddedFunction::new(g, v).unwrap().restrict_to(&d).unwrap(), &d).unwrap();
        assert_eq!(m.values()[32], 1.0);
        // Neighbour: best ball is radius h with three cells.
        assert!((m.values()[33] - 1.0 / 3.0).abs() < 1e-15);
    }
}
