use crate::error::{Error, Result};
use crate::grid_domain::{unit, DomainSpec, Grid, GriddedFunction, Point};
use crate::rng;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

/// Kinds of probe functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    SmoothBumps,
    Slabs,
    BoundarySpikes,
    RandomMixtures,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] =
        [FamilyKind::SmoothBumps, FamilyKind::Slabs, FamilyKind::BoundarySpikes, FamilyKind::RandomMixtures];

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::SmoothBumps => "smooth_bump",
            FamilyKind::Slabs => "slab",
            FamilyKind::BoundarySpikes => "boundary_spike",
            FamilyKind::RandomMixtures => "mixture",
        }
    }
}

/// Seeded set of probe functions; `count` members per kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    #[serde(default = "all_kinds")]
    pub kinds: Vec<FamilyKind>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
}

fn all_kinds() -> Vec<FamilyKind> {
    FamilyKind::ALL.to_vec()
}

fn default_count() -> usize {
    4
}

impl TestFamily {
    pub fn new(kinds: Vec<FamilyKind>, count: usize, seed: u64) -> Self {
        Self { kinds, count, seed }
    }

    pub fn all(count: usize, seed: u64) -> Self {
        Self::new(all_kinds(), count, seed)
    }

    /// Probe descriptors. They depend on the domain only, not on the grid, so
    /// the same members are seen at every resolution.
    pub fn probes(&self, domain: &DomainSpec) -> Result<Vec<Probe>> {
        if self.kinds.is_empty() || self.count == 0 {
            return Err(Error::Input("empty test family".into()));
        }
        let mut out = Vec::new();
        for kind in &self.kinds {
            let mut rng = rng::stream(self.seed, &format!("family-{}", kind.name()));
            for _ in 0..self.count {
                out.push(Probe::random(*kind, domain, &mut rng)?);
            }
        }
        Ok(out)
    }
}

/// Building block of a probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Atom {
    /// `e^{−|x−c|²/(2w²)}`.
    Bump { center: Point, width: f64 },
    /// Indicator of `|(x − c)·u| < w/2`.
    Slab { center: Point, dir: Point, width: f64 },
}

impl Atom {
    fn eval(&self, x: &Point) -> f64 {
        match self {
            Atom::Bump { center, width } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                (-r2 / (2.0 * width * width)).exp()
            }
            Atom::Slab { center, dir, width } => {
                let s = (x[0] - center[0]) * dir[0] + (x[1] - center[1]) * dir[1];
                if s.abs() < 0.5 * width { 1.0 } else { 0.0 }
            }
        }
    }

    fn center(&self) -> Point {
        match self {
            Atom::Bump { center, .. } | Atom::Slab { center, .. } => *center,
        }
    }

    fn width(&self) -> f64 {
        match self {
            Atom::Bump { width, .. } | Atom::Slab { width, .. } => *width,
        }
    }

    fn with(&self, center: Point, width: f64) -> Atom {
        match *self {
            Atom::Bump { .. } => Atom::Bump { center, width },
            Atom::Slab { dir, .. } => Atom::Slab { center, dir, width },
        }
    }
}

/// A probe `φ = Σ cᵢ atomᵢ`, restricted to `Ω` when sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub kind: FamilyKind,
    pub atoms: Vec<(f64, Atom)>,
}

/// Smallest width reachable by sharpening, as a fraction of `diam(Ω)`.
pub const MIN_WIDTH_FRACTION: f64 = 1.0 / 40.0;

fn point_in(domain: &DomainSpec, rng: &mut impl Rng, accept: impl Fn(&Point) -> bool) -> Result<Point> {
    let (lo, hi) = domain.shape.bbox();
    let n = domain.dim();
    for _ in 0..100_000 {
        let mut p = [0.0; 2];
        for k in 0..n {
            p[k] = rng.random_range(lo[k]..hi[k]);
        }
        if domain.contains(&p) && accept(&p) {
            return Ok(p);
        }
    }
    Err(Error::Domain("could not place a probe inside the domain".into()))
}

fn random_dir(n: usize, rng: &mut impl Rng) -> Point {
    if n == 1 {
        [1.0, 0.0]
    } else {
        unit(rng.random_range(0.0..std::f64::consts::PI))
    }
}

fn random_atom(kind: FamilyKind, domain: &DomainSpec, rng: &mut impl Rng) -> Result<Atom> {
    let diam = domain.diameter();
    Ok(match kind {
        FamilyKind::SmoothBumps => {
            let c = point_in(domain, rng, |_| true)?;
            Atom::Bump { center: c, width: diam * rng.random_range(0.05..0.25) }
        }
        FamilyKind::Slabs => {
            let c = point_in(domain, rng, |_| true)?;
            Atom::Slab { center: c, dir: random_dir(domain.dim(), rng), width: diam * rng.random_range(0.05..0.4) }
        }
        _ => {
            let c = point_in(domain, rng, |p| domain.shape.signed_distance(p) > -diam / 8.0)?;
            Atom::Bump { center: c, width: diam * rng.random_range(MIN_WIDTH_FRACTION..0.1) }
        }
    })
}

impl Probe {
    fn random(kind: FamilyKind, domain: &DomainSpec, rng: &mut impl Rng) -> Result<Probe> {
        let atoms = match kind {
            FamilyKind::RandomMixtures => {
                let mut atoms = Vec::new();
                for _ in 0..3 {
                    let k = FamilyKind::ALL[rng.random_range(0..3usize)];
                    let c: f64 = rng.random_range(0.25..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    atoms.push((c, random_atom(k, domain, rng)?));
                }
                atoms
            }
            k => vec![(1.0, random_atom(k, domain, rng)?)],
        };
        Ok(Probe { kind, atoms })
    }

    /// `φ` at the cell centres, zero outside `Ω`.
    pub fn sample(&self, grid: &Grid, mask: &[bool]) -> Result<GriddedFunction> {
        GriddedFunction::from_fn(*grid, |x| self.atoms.iter().map(|(c, a)| c * a.eval(x)).sum())?.restrict(mask)
    }

    /// Moves every atom half-way towards the nearest boundary point.
    pub fn toward_boundary(&self, domain: &DomainSpec) -> Probe {
        let shape = &domain.shape;
        let step = 1e-7 * domain.diameter();
        let atoms = self
            .atoms
            .iter()
            .map(|(c, a)| {
                let x = a.center();
                let sd = shape.signed_distance(&x);
                if sd >= 0.0 {
                    return (*c, *a);
                }
                let mut g = [0.0; 2];
                for k in 0..domain.dim() {
                    let (mut xp, mut xm) = (x, x);
                    xp[k] += step;
                    xm[k] -= step;
                    g[k] = (shape.signed_distance(&xp) - shape.signed_distance(&xm)) / (2.0 * step);
                }
                let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
                if gn == 0.0 {
                    return (*c, *a);
                }
                let t = -0.5 * sd / gn;
                (*c, a.with([x[0] + t * g[0], x[1] + t * g[1]], a.width()))
            })
            .collect();
        Probe { kind: self.kind, atoms }
    }

    /// Halves every width, down to `diam(Ω)/40`.
    pub fn sharpen(&self, domain: &DomainSpec) -> Probe {
        let floor = MIN_WIDTH_FRACTION * domain.diameter();
        let atoms = self.atoms.iter().map(|(c, a)| (*c, a.with(a.center(), (0.5 * a.width()).max(floor)))).collect();
        Probe { kind: self.kind, atoms }
    }

    /// Short textual description for reports.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|(c, a)| {
                let x = a.center();
                match a {
                    Atom::Bump { width, .. } => format!("{c:.3}*bump(c=({:.4},{:.4}),w={width:.4})", x[0], x[1]),
                    Atom::Slab { dir, width, .. } => {
                        format!("{c:.3}*slab(c=({:.4},{:.4}),u=({:.3},{:.3}),w={width:.4})", x[0], x[1], dir[0], dir[1])
                    }
                }
            })
            .collect();
        format!("{}[{}]", self.kind.name(), parts.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_domain::Shape;

    fn disk() -> DomainSpec {
        DomainSpec::new(Shape::Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap()
    }

    #[test]
    fn probes_are_seeded_and_grid_independent() {
        let fam = TestFamily::all(3, 5);
        let a = fam.probes(&disk()).unwrap();
        assert_eq!(a, fam.probes(&disk()).unwrap());
        assert_eq!(a.len(), 12);
        assert_ne!(a, TestFamily::all(3, 6).probes(&disk()).unwrap());
        for p in &a {
            for (_, atom) in &p.atoms {
                assert!(disk().contains(&atom.center()));
            }
        }
        for g in [Grid::square(-2.0, 2.0, 64).unwrap(), Grid::square(-2.0, 2.0, 128).unwrap()] {
            let mask = disk().chi_mask(&g).unwrap();
            for p in &a {
                assert!(p.sample(&g, &mask).unwrap().max_abs() > 0.0, "{}", p.describe());
            }
        }
    }

    #[test]
    fn perturbations_move_towards_the_boundary_and_sharpen() {
        let p = Probe { kind: FamilyKind::SmoothBumps, atoms: vec![(1.0, Atom::Bump { center: [0.2, 0.0], width: 0.4 })] };
        let q = p.toward_boundary(&disk());
        let Atom::Bump { center, width } = q.atoms[0].1 else { panic!() };
        assert!((center[0] - 0.6).abs() < 1e-6 && center[1].abs() < 1e-9 && width == 0.4);
        let mut s = p.clone();
        for _ in 0..10 {
            s = s.sharpen(&disk());
        }
        assert_eq!(s.atoms[0].1.width(), 2.0 / 40.0);
    }

    #[test]
    fn empty_family_is_rejected() {
        assert!(TestFamily::new(vec![], 3, 0).probes(&disk()).is_err());
    }
}
