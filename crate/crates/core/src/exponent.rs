//! Variable exponents `p(x)` sampled on a grid.
//!
//! An [`ExponentField`] stores the cell values together with `p⁻ = min p` and
//! `p⁺ = max p` over its support. The log-Hölder modulus
//! `C = max |p(x) − p(y)| · ln(1/|x − y|)` over pairs with `|x − y| ≤ 1/2` is
//! estimated from a seeded sample of cell pairs.

use crate::error::{Error, Result};
use crate::grid_domain::{dist, DomainSpec, Grid, GriddedFunction, Point};
use crate::rng;
use rand::RngExt;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Configuration form of an exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentSpec {
    Const {
        value: f64,
    },
    /// `offset + gradient · x`, optionally clamped to `[lo, hi]`.
    Affine {
        gradient: Vec<f64>,
        offset: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clamp: Option<[f64; 2]>,
    },
    /// Cell values read from a CSV file with columns `x1[,x2],value`.
    Table {
        csv: String,
    },
}

impl ExponentSpec {
    /// Point evaluation; tables have no point form.
    pub fn value_at(&self, x: &Point) -> Option<f64> {
        match self {
            ExponentSpec::Const { value } => Some(*value),
            ExponentSpec::Affine { gradient, offset, clamp } => {
                let v = offset + gradient.iter().zip(x).map(|(g, xi)| g * xi).sum::<f64>();
                Some(clamp.map_or(v, |[lo, hi]| v.clamp(lo, hi)))
            }
            ExponentSpec::Table { .. } => None,
        }
    }

    /// Samples the exponent at the cell centres of `grid`. Relative table paths
    /// are resolved against `base`.
    pub fn sample(&self, grid: &Grid, base: Option<&Path>) -> Result<ExponentField> {
        match self {
            ExponentSpec::Table { csv } => {
                let path = base.map_or_else(|| Path::new(csv).to_path_buf(), |b| b.join(csv));
                let text = std::fs::read_to_string(&path)?;
                ExponentField::new(GriddedFunction::from_csv(*grid, &text)?)
            }
            ExponentSpec::Affine { gradient, .. } if gradient.len() != grid.dim() => Err(Error::Input(format!(
                "affine gradient has {} entries for a {}-D grid",
                gradient.len(),
                grid.dim()
            ))),
            _ => ExponentField::from_fn(*grid, |x| self.value_at(x).expect("point form")),
        }
    }

    /// Window field equal to `p(π_Ω(x))`, where `π_Ω` is the nearest-point
    /// projection onto the closure of `Ω`.
    pub fn regular_extension(&self, domain: &DomainSpec, grid: &Grid) -> Result<ExponentField> {
        if matches!(self, ExponentSpec::Table { .. }) {
            return Err(Error::Input("table exponents extend through ExponentField::regular_extension".into()));
        }
        ExponentField::from_fn(*grid, |x| self.value_at(&domain.shape.project(x)).expect("point form"))
    }
}

/// Range of an exponent and its membership in the admissible class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassReport {
    pub p_minus: f64,
    pub p_plus: f64,
    pub in_class: bool,
}

/// Sampled log-Hölder modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogConditionReport {
    pub c_est: f64,
    pub pairs: usize,
    pub satisfied: bool,
}

/// Extension together with the growth of the log modulus it caused.
#[derive(Debug, Clone)]
pub struct Extension {
    pub field: ExponentField,
    pub modulus_inside: f64,
    pub modulus_extended: f64,
}

impl Extension {
    /// `C(p*) / C(p)`, or 1 when both vanish.
    pub fn inflation(&self) -> f64 {
        if self.modulus_inside == 0.0 {
            if self.modulus_extended == 0.0 { 1.0 } else { f64::INFINITY }
        } else {
            self.modulus_extended / self.modulus_inside
        }
    }
}

pub const DEFAULT_PAIR_BUDGET: usize = 100_000;

/// Exponent values on a grid (masked to `Ω` or covering the window).
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    values: GriddedFunction,
    p_minus: f64,
    p_plus: f64,
}

impl ExponentField {
    pub fn new(values: GriddedFunction) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &v) in values.values().iter().enumerate() {
            if values.in_support(i) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            return Err(Error::Input("exponent has empty support".into()));
        }
        Ok(Self { values, p_minus: lo, p_plus: hi })
    }

    pub fn from_fn<F: Fn(&Point) -> f64>(grid: Grid, f: F) -> Result<Self> {
        Self::new(GriddedFunction::from_fn(grid, f)?)
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::from_fn(grid, |_| value)
    }

    /// Same exponent seen only on `mask`.
    pub fn restrict(&self, mask: &[bool]) -> Result<Self> {
        Self::new(self.values.restrict(mask)?)
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.values.values()
    }

    pub fn function(&self) -> &GriddedFunction {
        &self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.values.mask()
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn class_p_check(&self) -> ClassReport {
        ClassReport {
            p_minus: self.p_minus,
            p_plus: self.p_plus,
            in_class: self.p_minus > 1.0 && self.p_plus.is_finite(),
        }
    }

    /// Sampled log-Hölder modulus over `budget` distinct supported pairs with
    /// `0 < |x − y| ≤ 1/2`, drawn from the stream `(seed, "log-condition")`.
    pub fn log_condition_check(&self, budget: usize, seed: u64) -> LogConditionReport {
        let grid = *self.grid();
        let support: Vec<usize> = (0..grid.len()).filter(|&i| self.values.in_support(i)).collect();
        let reach: Vec<i64> = (0..grid.dim()).map(|a| (0.5 / grid.h(a)).floor() as i64).collect();
        let m = grid.points_per_axis() as i64;
        let vals = self.values();
        let mut rng = rng::stream(seed, "log-condition");
        let mut c_est = 0.0_f64;
        let mut pairs = 0;
        let mut attempts = 0usize;
        if support.len() > 1 {
            while pairs < budget && attempts < 50 * budget.max(1) {
                attempts += 1;
                let i = support[rng.random_range(0..support.len())];
                let ij = grid.unravel(i);
                let mut kl = [0usize; 2];
                let mut ok = true;
                for a in 0..grid.dim() {
                    let r = reach[a].max(1);
                    let t = ij[a] as i64 + rng.random_range(-r..=r);
                    if !(0..m).contains(&t) {
                        ok = false;
                    }
                    kl[a] = t.max(0) as usize;
                }
                if !ok {
                    continue;
                }
                let j = grid.ravel(kl);
                if j == i || !self.values.in_support(j) {
                    continue;
                }
                let r = dist(&grid.center(i), &grid.center(j));
                if r > 0.5 {
                    continue;
                }
                pairs += 1;
                c_est = c_est.max((vals[i] - vals[j]).abs() * (-r.ln()));
            }
        }
        LogConditionReport { c_est, pairs, satisfied: c_est.is_finite() }
    }

    /// `p' = p/(p − 1)`.
    pub fn conjugate(&self) -> Result<Self> {
        if self.p_minus <= 1.0 {
            return Err(Error::Domain(format!("conjugate needs p > 1, found p⁻ = {}", self.p_minus)));
        }
        Self::new(self.values.map(|p| p / (p - 1.0))?)
    }

    /// `q` with `1/q = 1/p − α/n`.
    pub fn sobolev_exponent(&self, alpha: f64, n: usize) -> Result<Self> {
        let limit = n as f64 / alpha;
        if !(alpha > 0.0) || self.p_plus >= limit {
            return Err(Error::Range(format!("Sobolev exponent needs p⁺ < n/α = {limit}, found {}", self.p_plus)));
        }
        let s = alpha / n as f64;
        Self::new(self.values.map(|p| 1.0 / (1.0 / p - s))?)
    }

    /// Extends a field supported on `Ω` to the whole window: every cell takes
    /// the value of the `Ω` cell nearest to the projection of its centre onto
    /// `Ω̄`. Values (hence `p⁻` and `p⁺`) are drawn from `Ω` cells only.
    pub fn regular_extension(&self, domain: &DomainSpec, budget: usize, seed: u64) -> Result<Extension> {
        let grid = *self.grid();
        let mask = match self.mask() {
            Some(m) => m.to_vec(),
            None => domain.chi_mask(&grid)?,
        };
        let vals = self.values();
        let m = grid.points_per_axis() as i64;
        let dim = grid.dim();
        let mut out = Vec::with_capacity(grid.len());
        for (i, c) in grid.centers().iter().enumerate() {
            if mask[i] {
                out.push(vals[i]);
                continue;
            }
            let q = domain.shape.project(c);
            let mut home = [0i64; 2];
            for a in 0..dim {
                home[a] = (((q[a] - grid.origin()[a]) / grid.h(a)).floor() as i64).clamp(0, m - 1);
            }
            let mut best: Option<(f64, usize)> = None;
            let mut radius = 0i64;
            // Grow the search square until a hit is found, then one more ring
            // so the nearest centre is certain.
            let mut extra = 1;
            while radius < m {
                let lo1 = if dim == 2 { -radius } else { 0 };
                let hi1 = if dim == 2 { radius } else { 0 };
                for di in -radius..=radius {
                    for dj in lo1..=hi1 {
                        if di.abs().max(dj.abs()) != radius {
                            continue;
                        }
                        let (a, b) = (home[0] + di, home[1] + dj);
                        if !(0..m).contains(&a) || (dim == 2 && !(0..m).contains(&b)) {
                            continue;
                        }
                        let j = grid.ravel([a as usize, b as usize]);
                        if mask[j] {
                            let d = dist(&q, &grid.center(j));
                            if best.is_none_or(|(bd, bj)| d < bd || (d == bd && j < bj)) {
                                best = Some((d, j));
                            }
                        }
                    }
                }
                if best.is_some() {
                    if extra == 0 {
                        break;
                    }
                    extra -= 1;
                }
                radius += 1;
            }
            let (_, j) = best.ok_or_else(|| Error::Input("exponent support is empty".into()))?;
            out.push(vals[j]);
        }
        let inside = ExponentField::new(GriddedFunction::masked(grid, vals.to_vec(), mask)?)?;
        let field = ExponentField::new(GriddedFunction::new(grid, out)?)?;
        Ok(Extension {
            modulus_inside: inside.log_condition_check(budget, seed).c_est,
            modulus_extended: field.log_condition_check(budget, seed).c_est,
            field,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_domain::Shape;
    use proptest::prelude::*;

    fn unit_interval(m: usize) -> Grid {
        Grid::interval(0.0, 1.0, m).unwrap()
    }

    #[test]
    fn class_membership() {
        let g = unit_interval(64);
        let r = ExponentField::constant(g, 2.0).unwrap().class_p_check();
        assert_eq!((r.p_minus, r.p_plus, r.in_class), (2.0, 2.0, true));
        let aff = ExponentField::from_fn(g, |x| 2.0 + x[0]).unwrap().class_p_check();
        assert!((aff.p_minus - 2.0).abs() < 1e-2 && (aff.p_plus - 3.0).abs() < 1e-2 && aff.in_class);
        assert!(!ExponentField::constant(g, 1.0).unwrap().class_p_check().in_class);
    }

    #[test]
    fn log_modulus_of_constant_and_affine() {
        let g = unit_interval(512);
        assert_eq!(ExponentField::constant(g, 2.5).unwrap().log_condition_check(10_000, 1).c_est, 0.0);
        let rep = ExponentField::from_fn(g, |x| 2.0 + x[0]).unwrap().log_condition_check(100_000, 1);
        let bound = 1.0 / std::f64::consts::E;
        assert_eq!(rep.pairs, 100_000);
        assert!(rep.c_est <= bound + 1e-12 && rep.c_est > 0.99 * bound, "{}", rep.c_est);
    }

    #[test]
    fn log_modulus_plateaus_for_log_profile() {
        // p(x) = 2 + 1/ln(e/|x - 1/2|) has a finite modulus that the sample
        // estimate should approach as the grid refines.
        let profile = |x: &Point| 2.0 + 1.0 / (std::f64::consts::E / (x[0] - 0.5).abs()).ln();
        let c: Vec<f64> = [256, 1024, 4096]
            .iter()
            .map(|&m| ExponentField::from_fn(unit_interval(m), profile).unwrap().log_condition_check(100_000, 3).c_est)
            .collect();
        assert!(c.iter().all(|v| v.is_finite() && *v > 0.0));
        assert!((c[2] - c[1]).abs() <= (c[1] - c[0]).abs() + 0.02 * c[1], "{c:?}");
        assert!((c[2] / c[1] - 1.0).abs() < 0.1, "{c:?}");
    }

    #[test]
    fn conjugates() {
        let g = unit_interval(16);
        assert!(ExponentField::constant(g, 2.0).unwrap().conjugate().unwrap().values().iter().all(|&v| v == 2.0));
        assert!(ExponentField::constant(g, 3.0).unwrap().conjugate().unwrap().values().iter().all(|&v| v == 1.5));
        assert!(matches!(ExponentField::constant(g, 1.0).unwrap().conjugate(), Err(Error::Domain(_))));
    }

    #[test]
    fn sobolev_exponents() {
        let g = Grid::square(0.0, 1.0, 8).unwrap();
        let q = ExponentField::constant(g, 2.0).unwrap().sobolev_exponent(0.5, 2).unwrap();
        assert!(q.values().iter().all(|&v| (v - 4.0).abs() < 1e-14));
        let q = ExponentField::constant(g, 3.0).unwrap().sobolev_exponent(0.5, 2).unwrap();
        assert!(q.values().iter().all(|&v| (v - 12.0).abs() < 1e-12));
        let q = ExponentField::constant(g, 3.0).unwrap().sobolev_exponent(1e-9, 2).unwrap();
        assert!(q.values().iter().all(|&v| (v - 3.0).abs() < 1e-7));
        assert!(matches!(ExponentField::constant(g, 4.0).unwrap().sobolev_exponent(0.5, 2), Err(Error::Range(_))));
    }

    #[test]
    fn extension_by_projection() {
        let d = DomainSpec::new(Shape::Interval { a: 0.0, b: 1.0 }).unwrap();
        let spec = ExponentSpec::Affine { gradient: vec![1.0], offset: 2.0, clamp: None };
        let win = Grid::interval(-1.0, 2.0, 30).unwrap();
        let p = spec.regular_extension(&d, &win).unwrap();
        // Cells centred at -0.55 and 1.45 sit left and right of Ω.
        assert_eq!(p.values()[4], 2.0);
        assert_eq!(p.values()[24], 3.0);
        assert_eq!(spec.value_at(&d.shape.project(&[-0.5, 0.0])), Some(2.0));
        assert_eq!(spec.value_at(&d.shape.project(&[1.5, 0.0])), Some(3.0));
        let constant = ExponentSpec::Const { value: 2.0 }.regular_extension(&d, &win).unwrap();
        assert!(constant.values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn discrete_extension_preserves_range_for_random_affine() {
        let d = DomainSpec::new(Shape::Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap();
        let g = Grid::square(-2.0, 2.0, 32).unwrap();
        let mask = d.chi_mask(&g).unwrap();
        let mut rng = rng::stream(5, "affine-extension");
        for _ in 0..50 {
            let (a, b, c) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(1.5..3.0));
            let p = ExponentField::from_fn(g, |x| c + a * x[0] + b * x[1]).unwrap().restrict(&mask).unwrap();
            let ext = p.regular_extension(&d, 2_000, 1).unwrap();
            assert_eq!(ext.field.p_plus(), p.p_plus());
            assert_eq!(ext.field.p_minus(), p.p_minus());
            for i in (0..g.len()).filter(|&i| mask[i]) {
                assert_eq!(ext.field.values()[i], p.values()[i]);
            }
            assert!(ext.inflation().is_finite());
        }
    }

    #[test]
    fn parses_config_forms() {
        let c: ExponentSpec = serde_json::from_str(r#"{"kind":"const","value":2.0}"#).unwrap();
        assert_eq!(c, ExponentSpec::Const { value: 2.0 });
        let a: ExponentSpec = serde_json::from_str(r#"{"kind":"affine","gradient":[0.2],"offset":1.5}"#).unwrap();
        assert_eq!(a.value_at(&[1.0, 0.0]), Some(1.7));
        let t: ExponentSpec = serde_json::from_str(r#"{"kind":"table","csv":"p.csv"}"#).unwrap();
        assert!(t.value_at(&[0.0, 0.0]).is_none());
    }

    proptest! {
        #[test]
        fn conjugate_is_involution_and_swaps_range(vals in prop::collection::vec(1.05f64..8.0, 16)) {
            let g = unit_interval(16);
            let p = ExponentField::new(GriddedFunction::new(g, vals).unwrap()).unwrap();
            let pc = p.conjugate().unwrap();
            let back = pc.conjugate().unwrap();
            for (a, b) in p.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() < 1e-14 * a.max(1.0) * 8.0);
            }
            let conj = |t: f64| t / (t - 1.0);
            prop_assert!((pc.p_minus() - conj(p.p_plus())).abs() < 1e-14);
            prop_assert!((pc.p_plus() - conj(p.p_minus())).abs() < 1e-12);
            prop_assert!(pc.class_p_check().in_class);
            for (x, y) in p.values().iter().zip(pc.values()) {
                prop_assert!((1.0 / x + 1.0 / y - 1.0).abs() < 1e-14);
            }
        }

        #[test]
        fn range_bounds_every_value(vals in prop::collection::vec(1.01f64..5.0, 16), alpha in 0.01f64..0.19) {
            let g = unit_interval(16);
            let p = ExponentField::new(GriddedFunction::new(g, vals).unwrap()).unwrap();
            let r = p.class_p_check();
            prop_assert!(p.values().iter().all(|&v| r.p_minus <= v && v <= r.p_plus));
            let q = p.sobolev_exponent(alpha, 1).unwrap();
            prop_assert!(q.values().iter().zip(p.values()).all(|(qv, pv)| qv >= pv));
        }
    }
}
