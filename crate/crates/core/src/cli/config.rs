use crate::error::{Error, Result};
use crate::exponent::{ExponentField, ExponentSpec};
use crate::grid_domain::{DomainSpec, Grid, GriddedFunction};
use crate::hardy::{alpha_admissible_plus, FamilyKind, TestFamily, Weight};
use crate::kernels::{zero_mass_bump, DEFAULT_QUAD_BUDGET};
use crate::luxemburg::DEFAULT_REL_TOL;
use crate::operators::check_ladder;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT: &str = "hardylab-out";

/// Points per axis used when the grid is not given.
pub fn default_points(dim: usize) -> usize {
    if dim == 1 { 1024 } else { 128 }
}

/// Uniform window `[lower, upper]` with `m` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub lower: Option<Vec<f64>>,
    #[serde(default)]
    pub upper: Option<Vec<f64>>,
    #[serde(default)]
    pub m: Option<usize>,
}

/// Density used by the single-function commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    /// `e^{−|x−c|²/(2σ²)}`.
    Bump { center: Vec<f64>, sigma: f64 },
    /// `(1 − |x−c|²/(nσ²)) e^{−|x−c|²/(2σ²)}`, which has zero integral.
    ZeroMassBump { center: Vec<f64>, sigma: f64 },
    /// Cell values from a CSV file with columns `x1[,x2],value`.
    Csv { path: String },
}

/// Test family as written in the config; a missing seed follows the run seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    #[serde(default)]
    kinds: Option<Vec<FamilyKind>>,
    #[serde(default)]
    count: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: DomainSpec,
    #[serde(default)]
    grid: Option<GridSpec>,
    p: ExponentSpec,
    alpha: f64,
    #[serde(default)]
    ell: Option<usize>,
    #[serde(default)]
    epsilons: Option<Vec<f64>>,
    #[serde(default)]
    family: Option<RawFamily>,
    #[serde(default)]
    weight: Option<Weight>,
    #[serde(default)]
    density: Option<DensitySpec>,
    #[serde(default)]
    out: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    rel_tol: Option<f64>,
    #[serde(default)]
    quad_budget: Option<usize>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub grid: Grid,
    pub p: ExponentSpec,
    pub alpha: f64,
    pub ell: usize,
    pub epsilons: Vec<f64>,
    pub family: TestFamily,
    pub weight: Weight,
    pub density: DensitySpec,
    pub out: PathBuf,
    pub seed: u64,
    pub rel_tol: f64,
    pub quad_budget: usize,
    /// Directory against which relative paths are resolved.
    #[serde(skip)]
    pub base: PathBuf,
    /// The family seed was not configured and follows the run seed.
    #[serde(skip)]
    family_follows_seed: bool,
}

/// Byte offset of `(line, column)` (both 1-based) in `text`.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len();
    }
    text.len()
}

/// Reads, resolves and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, &base)
}

/// As [`parse_config`] for in-memory text; `base` resolves relative paths.
pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        let offset = byte_offset(text, e.line(), e.column());
        Error::Parse(format!("byte {offset} (line {}, column {}): {e}", e.line(), e.column()))
    })?;
    resolve(raw, base)
}

fn resolve(raw: RawConfig, base: &Path) -> Result<RunConfig> {
    let domain = raw.domain;
    domain.shape.validate().map_err(|e| Error::Validation(format!("domain: {e}")))?;
    let n = domain.dim();
    let grid = resolve_grid(&domain, raw.grid.as_ref())?;
    domain.check_window(&grid).map_err(|e| Error::Validation(format!("grid: {e}")))?;
    if !raw.alpha.is_finite() {
        return Err(Error::Validation("alpha must be a finite number".into()));
    }
    let p_field = raw.p.sample(&grid, Some(base)).map_err(|e| Error::Validation(format!("p: {e}")))?;
    let mask = domain.chi_mask(&grid)?;
    let p_omega = p_field.restrict(&mask).map_err(|e| Error::Validation(format!("p: {e}")))?;
    if !p_omega.class_p_check().in_class {
        return Err(Error::Validation(format!(
            "p must satisfy 1 < p_minus <= p_plus < inf on the domain, got [{}, {}]",
            p_omega.p_minus(),
            p_omega.p_plus()
        )));
    }
    if !alpha_admissible_plus(p_omega.p_plus(), n, raw.alpha) {
        return Err(Error::Validation(format!(
            "alpha must be < min(1, n/p_plus) = {} and positive, got {}",
            1.0_f64.min(n as f64 / p_omega.p_plus()),
            raw.alpha
        )));
    }
    let ell = raw.ell.unwrap_or(1);
    if ell != 1 {
        return Err(Error::Validation("ell must be 1 (first differences)".into()));
    }
    let h = grid.h_max();
    let epsilons = raw.epsilons.unwrap_or_else(|| vec![8.0 * h, 4.0 * h, 2.0 * h]);
    check_ladder(&grid, &epsilons).map_err(|e| Error::Validation(format!("epsilons: {e}")))?;
    let seed = raw.seed.unwrap_or(DEFAULT_SEED);
    let raw_family = raw.family.unwrap_or(RawFamily { kinds: None, count: None, seed: None });
    let family_follows_seed = raw_family.seed.is_none();
    let family = TestFamily::new(
        raw_family.kinds.unwrap_or_else(|| FamilyKind::ALL.to_vec()),
        raw_family.count.unwrap_or(4),
        raw_family.seed.unwrap_or(seed),
    );
    if family.kinds.is_empty() || family.count == 0 {
        return Err(Error::Validation("family must have at least one kind and a positive count".into()));
    }
    let rel_tol = raw.rel_tol.unwrap_or(DEFAULT_REL_TOL);
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::Validation(format!("rel_tol must lie in (0, 1e-3], got {rel_tol}")));
    }
    let quad_budget = raw.quad_budget.unwrap_or(DEFAULT_QUAD_BUDGET);
    if quad_budget == 0 {
        return Err(Error::Validation("quad_budget must be positive".into()));
    }
    let density = match raw.density {
        Some(d) => d,
        None => {
            let (lo, hi) = domain.shape.bbox();
            let center = (0..n).map(|k| 0.5 * (lo[k] + hi[k])).collect();
            DensitySpec::ZeroMassBump { center, sigma: domain.diameter() / 10.0 }
        }
    };
    match &density {
        DensitySpec::Bump { center, sigma } | DensitySpec::ZeroMassBump { center, sigma } => {
            if center.len() != n || !(*sigma > 0.0) {
                return Err(Error::Validation(format!("density needs a {n}-D center and sigma > 0")));
            }
        }
        DensitySpec::Csv { .. } => {}
    }
    Ok(RunConfig {
        domain,
        grid,
        p: raw.p,
        alpha: raw.alpha,
        ell,
        epsilons,
        family,
        weight: raw.weight.unwrap_or(Weight::Delta),
        density,
        out: PathBuf::from(raw.out.unwrap_or_else(|| DEFAULT_OUT.to_string())),
        seed,
        rel_tol,
        quad_budget,
        base: base.to_path_buf(),
        family_follows_seed,
    })
}

/// Default window: the cube around the bounding box of `Ω` whose half-side
/// exceeds the largest half-extent by `diam(Ω)/2`.
fn resolve_grid(domain: &DomainSpec, spec: Option<&GridSpec>) -> Result<Grid> {
    let n = domain.dim();
    let (lo, hi) = domain.shape.bbox();
    let half = (0..n).map(|k| 0.5 * (hi[k] - lo[k])).fold(0.0, f64::max) + 0.5 * domain.diameter();
    let mid: Vec<f64> = (0..n).map(|k| 0.5 * (lo[k] + hi[k])).collect();
    let spec = spec.cloned().unwrap_or(GridSpec { lower: None, upper: None, m: None });
    let lower = spec.lower.unwrap_or_else(|| mid.iter().map(|c| c - half).collect());
    let upper = spec.upper.unwrap_or_else(|| mid.iter().map(|c| c + half).collect());
    if lower.len() != n || upper.len() != n {
        return Err(Error::Validation(format!("grid bounds must have {n} entries")));
    }
    let extent: Vec<f64> = lower.iter().zip(&upper).map(|(a, b)| b - a).collect();
    Grid::new(&lower, &extent, spec.m.unwrap_or(default_points(n))).map_err(|e| Error::Validation(format!("grid: {e}")))
}

impl RunConfig {
    /// Applies command-line overrides of the seed and output directory.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        if let Some(s) = seed {
            self.seed = s;
            if self.family_follows_seed {
                self.family.seed = s;
            }
        }
        if let Some(o) = out {
            self.out = o;
        }
        Ok(self)
    }

    pub fn exponent(&self) -> Result<ExponentField> {
        self.p.sample(&self.grid, Some(&self.base))
    }

    /// The configured density, restricted to `Ω`.
    pub fn density_function(&self) -> Result<GriddedFunction> {
        let mask = self.domain.chi_mask(&self.grid)?;
        let f = match &self.density {
            DensitySpec::Bump { center, sigma } => GriddedFunction::from_fn(self.grid, |x| {
                let r2: f64 = center.iter().enumerate().map(|(k, c)| (x[k] - c).powi(2)).sum();
                (-r2 / (2.0 * sigma * sigma)).exp()
            })?,
            DensitySpec::ZeroMassBump { center, sigma } => {
                let origin: Vec<f64> = self.grid.origin().iter().zip(center).map(|(o, c)| o - c).collect();
                let shifted = Grid::new(&origin, self.grid.extent(), self.grid.points_per_axis())?;
                GriddedFunction::new(self.grid, zero_mass_bump(&shifted, *sigma)?.into_values())?
            }
            DensitySpec::Csv { path } => {
                let text = std::fs::read_to_string(self.base.join(path))?;
                GriddedFunction::from_csv(self.grid, &text)?
            }
        };
        f.restrict(&mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"domain": {"shape": {"kind": "interval", "a": -1, "b": 1}},
        "p": {"kind": "const", "value": 2}, "alpha": 0.25}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(c.grid.points_per_axis(), 1024);
        assert_eq!(c.grid.origin()[0], -2.0);
        assert_eq!(c.grid.extent()[0], 4.0);
        let h = c.grid.h(0);
        assert_eq!(c.epsilons, vec![8.0 * h, 4.0 * h, 2.0 * h]);
        assert_eq!(c.rel_tol, 1e-10);
        assert_eq!(c.seed, 42);
        assert_eq!(c.ell, 1);
        assert_eq!(c.weight, Weight::Delta);
        assert_eq!(c.family, TestFamily::all(4, 42));
        assert_eq!(c.clone().with_overrides(Some(9), None).unwrap().family.seed, 9);
        let pinned = MINIMAL.replace("0.25}", "0.25, \"family\": {\"seed\": 3}}");
        let c = parse_config_str(&pinned, Path::new(".")).unwrap().with_overrides(Some(9), None).unwrap();
        assert_eq!((c.seed, c.family.seed), (9, 3));
        let disk = r#"{"domain": {"shape": {"kind": "ball", "center": [0, 0], "radius": 1}},
            "p": {"kind": "affine", "gradient": [0.1, 0.1], "offset": 2}, "alpha": 0.5}"#;
        let c = parse_config_str(disk, Path::new(".")).unwrap();
        assert_eq!(c.grid.points_per_axis(), 128);
        assert_eq!(c.grid.origin(), &[-2.0, -2.0]);
    }

    #[test]
    fn validation_cites_the_rule() {
        let bad = MINIMAL.replace("0.25", "1.0");
        match parse_config_str(&bad, Path::new(".")) {
            Err(Error::Validation(msg)) => assert!(msg.contains("alpha must be < min(1, n/p_plus)"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("\"value\": 2", "\"value\": 1");
        assert!(matches!(parse_config_str(&bad, Path::new(".")), Err(Error::Validation(_))));
        let bad = MINIMAL.replace("0.25}", "0.25, \"epsilons\": [0.001]}");
        assert!(matches!(parse_config_str(&bad, Path::new(".")), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_errors_report_offsets_and_fields() {
        let broken = "{\"domain\": {\"shape\": {\"kind\": \"interval\", \"a\": -1, \"b\": 1}},\n \"p\": ]";
        match parse_config_str(broken, Path::new(".")) {
            Err(Error::Parse(msg)) => assert!(msg.starts_with(&format!("byte {}", broken.find(']').unwrap())), "{msg}"),
            other => panic!("{other:?}"),
        }
        let missing = r#"{"domain": {"shape": {"kind": "interval", "a": -1, "b": 1}}, "p": {"kind": "const", "value": 2}}"#;
        match parse_config_str(missing, Path::new(".")) {
            Err(Error::Parse(msg)) => assert!(msg.contains("alpha"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let typo = MINIMAL.replace("\"alpha\"", "\"alpha\": 0.25, \"alpah\"");
        assert!(matches!(parse_config_str(&typo, Path::new(".")), Err(Error::Parse(_))));
    }

    #[test]
    fn density_defaults_to_a_centred_zero_mass_bump() {
        let c = parse_config_str(MINIMAL, Path::new(".")).unwrap();
        let f = c.density_function().unwrap();
        let mid = c.grid.len() / 2;
        assert!(f.values()[mid] > 0.9);
        // Zero mass up to the tail cut off at the boundary, |x| > 5σ.
        assert!(f.integrate().abs() < 1e-4, "{}", f.integrate());
    }
}
