//! The thirteen verification criteria as library functions.
//!
//! Every criterion uses fixed grids and parameters; only the seed comes from
//! the caller. Each returns one [`Outcome`] row.

use crate::error::{Error, Result};
use crate::exponent::{ExponentField, ExponentSpec};
use crate::grid_domain::{DomainSpec, Grid, GriddedFunction, Shape};
use crate::hardy::{co_movement, estimate_hardy_constant, strichartz_corollary_check, TestFamily, Weight, REFINEMENT_STABILITY};
use crate::kernels::{calibration, cancellation_residual, decay_check, zero_mass_bump, DEFAULT_QUAD_BUDGET, DRIFT_LIMIT};
use crate::luxemburg::{luxemburg_norm, modular_norm_bracket, DEFAULT_REL_TOL};
use crate::operators::{
    a_omega_at, domination_check, inversion_error, marchaud_decomposition_residual, seeded_bumps,
    weight_equivalence_check, DEFAULT_BAND_CELLS, DEFAULT_WEIGHT_BUDGET, DOMINATION_STABILITY, UPPER_SLACK,
};
use crate::rng;
use rand::RngExt;
use serde::Serialize;
use serde_json::{json, Value};

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub observed: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: Value,
}

impl Outcome {
    fn new(id: u32, name: &'static str, observed: f64, threshold: f64, pass: bool, detail: Value) -> Self {
        Self { id, name, observed, threshold, pass: pass && observed.is_finite(), detail }
    }
}

/// `id,observed,threshold,pass`.
pub fn summary_csv(rows: &[Outcome]) -> String {
    let mut s = String::from("id,observed,threshold,pass\n");
    for r in rows {
        s.push_str(&format!("{},{:e},{:e},{}\n", r.id, r.observed, r.threshold, r.pass));
    }
    s
}

pub const CRITERIA: u32 = 13;

/// Runs criterion `id` (1 to 13).
pub fn criterion(id: u32, seed: u64) -> Result<Outcome> {
    match id {
        1 => luxemburg_reduction(seed),
        2 => modular_bracket(seed),
        3 => kernel_cancellation(),
        4 => kernel_decay(),
        5 => weight_upper_bound(),
        6 => weight_lower_bound(),
        7 => inversion(),
        8 => calibration_drift(),
        9 => decomposition(),
        10 => domination(seed),
        11 => co_movement_check(seed),
        12 => strichartz(seed),
        13 => determinism(seed),
        _ => Err(Error::Input(format!("no criterion {id}"))),
    }
}

pub fn run_all(seed: u64) -> Result<Vec<Outcome>> {
    (1..=CRITERIA).map(|id| criterion(id, seed)).collect()
}

fn interval() -> DomainSpec {
    DomainSpec::new(Shape::Interval { a: -1.0, b: 1.0 }).expect("valid shape")
}

fn disk() -> DomainSpec {
    DomainSpec::new(Shape::Ball { center: vec![0.0, 0.0], radius: 1.0 }).expect("valid shape")
}

fn square() -> DomainSpec {
    DomainSpec::new(Shape::AxisBox { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0] }).expect("valid shape")
}

fn two_balls() -> DomainSpec {
    DomainSpec::new(Shape::Union {
        parts: vec![
            Shape::Ball { center: vec![-0.8, 0.0], radius: 0.5 },
            Shape::Ball { center: vec![0.8, 0.0], radius: 0.5 },
        ],
    })
    .expect("valid shape")
}

/// Window `(−2, 2)ⁿ` with `m` points per axis.
fn window(n: usize, m: usize) -> Grid {
    if n == 1 { Grid::interval(-2.0, 2.0, m) } else { Grid::square(-2.0, 2.0, m) }.expect("valid grid")
}

fn rel_change(a: f64, b: f64) -> f64 {
    (b - a).abs() / a.abs()
}

fn random_function(grid: Grid, rng: &mut impl rand::Rng) -> Result<GriddedFunction> {
    let values = (0..grid.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
    GriddedFunction::new(grid, values)
}

fn luxemburg_reduction(seed: u64) -> Result<Outcome> {
    let g = Grid::interval(0.0, 1.0, 1024)?;
    let mut rng = rng::stream(seed, "criterion-1");
    let mut worst = 0.0_f64;
    for p in [1.5, 2.0, 3.0] {
        let field = ExponentField::constant(g, p)?;
        for _ in 0..50 {
            let f = random_function(g, &mut rng)?;
            let exact = f.integrate_with(|_, v| v.abs().powf(p)).powf(1.0 / p);
            worst = worst.max(rel_change(exact, luxemburg_norm(&f, &field, DEFAULT_REL_TOL)?));
        }
    }
    Ok(Outcome::new(1, "luxemburg_reduction", worst, 1e-8, worst < 1e-8, json!({"exponents": [1.5, 2.0, 3.0], "functions": 50})))
}

fn modular_bracket(seed: u64) -> Result<Outcome> {
    let g = Grid::interval(0.0, 1.0, 256)?;
    let mut rng = rng::stream(seed, "criterion-2");
    let mut violations = 0usize;
    for _ in 0..100 {
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let f = random_function(g, &mut rng)?.scale(scale)?;
        let (p0, slope, freq) = (rng.random_range(1.1..3.0), rng.random_range(-0.5..2.0), rng.random_range(0.0..6.0));
        let p = ExponentField::from_fn(g, |x| p0 + 0.5 * slope * (1.0 + (freq * x[0]).sin()))?;
        if !modular_norm_bracket(&f, &p)?.holds {
            violations += 1;
        }
    }
    Ok(Outcome::new(2, "modular_norm_bracket", violations as f64, 0.0, violations == 0, json!({"pairs": 100})))
}

fn kernel_cancellation() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut refines = true;
    let mut rows = Vec::new();
    for n in [1, 2] {
        for alpha in [0.25, 0.5, 0.75] {
            for big_n in [2.0, 5.0] {
                let base = cancellation_residual(n, alpha, 1, big_n, DEFAULT_QUAD_BUDGET)?;
                let fine = cancellation_residual(n, alpha, 1, big_n, 4 * DEFAULT_QUAD_BUDGET)?;
                worst = worst.max(base.residual);
                refines &= base.refines_to(&fine);
                rows.push(json!({"n": n, "alpha": alpha, "N": big_n, "residual": base.residual, "refined": fine.residual}));
            }
        }
    }
    Ok(Outcome::new(3, "kernel_cancellation", worst, 1e-3, worst < 1e-3 && refines, json!({"refines": refines, "cases": rows})))
}

fn kernel_decay() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut rows = Vec::new();
    for n in [1, 2] {
        for alpha in [0.25, 0.5, 0.75] {
            let r = decay_check(n, alpha, 1, 2.0, 50.0, 32)?;
            worst = worst.max((r.slope - r.target).abs());
            rows.push(json!({"n": n, "alpha": alpha, "slope": r.slope, "target": r.target}));
        }
    }
    Ok(Outcome::new(4, "kernel_decay", worst, 0.05, worst <= 0.05, json!({"cases": rows})))
}

fn weight_upper_bound() -> Result<Outcome> {
    let alpha = 0.5;
    let mut worst = 0.0_f64;
    let mut holds = true;
    let mut rows = Vec::new();
    for (name, domain, grid) in
        [("interval", interval(), window(1, 1024)), ("disk", disk(), window(2, 128)), ("square", square(), window(2, 128))]
    {
        let c = weight_equivalence_check(&domain, alpha, &grid)?;
        worst = worst.max(c.upper_ratio);
        holds &= c.c1_holds;
        rows.push(json!({"domain": name, "upper_ratio": c.upper_ratio}));
    }
    let mut closed_form = 0.0_f64;
    for x in [-0.5_f64, 0.0, 0.5] {
        let exact = ((1.0 - x).powf(-alpha) + (1.0 + x).powf(-alpha)) / alpha;
        let a = a_omega_at(&interval(), alpha, &[x, 0.0], DEFAULT_WEIGHT_BUDGET)?;
        closed_form = closed_form.max((a - exact).abs());
    }
    let limit = 1.0 + UPPER_SLACK;
    Ok(Outcome::new(
        5,
        "weight_upper_bound",
        worst,
        limit,
        holds && worst <= limit && closed_form < 1e-4,
        json!({"cases": rows, "interval_closed_form_error": closed_form}),
    ))
}

fn weight_lower_bound() -> Result<Outcome> {
    let alpha = 0.5;
    let mut worst = 0.0_f64;
    let mut rows = Vec::new();
    for (name, domain, n, m) in [("interval", interval(), 1, 1024), ("disk", disk(), 2, 128)] {
        let a = weight_equivalence_check(&domain, alpha, &window(n, m))?.c2_est;
        let b = weight_equivalence_check(&domain, alpha, &window(n, 2 * m))?.c2_est;
        worst = worst.max(rel_change(a, b));
        rows.push(json!({"domain": name, "m": m, "c2": [a, b]}));
    }
    Ok(Outcome::new(6, "weight_lower_bound", worst, 0.10, worst <= 0.10, json!({"cases": rows})))
}

fn inversion_case(n: usize, m: usize, sigma: f64, p: ExponentSpec) -> Result<Vec<f64>> {
    let g = window(n, m);
    let h = g.h_max();
    inversion_error(&zero_mass_bump(&g, sigma)?, 0.5, &p.sample(&g, None)?, &[8.0 * h, 4.0 * h, 2.0 * h])
}

fn inversion() -> Result<Outcome> {
    let one = inversion_case(1, 2048, 0.15, ExponentSpec::Affine { gradient: vec![0.2], offset: 1.5, clamp: Some([1.3, 1.7]) })?;
    let two =
        inversion_case(2, 128, 0.25, ExponentSpec::Affine { gradient: vec![0.1, 0.1], offset: 1.5, clamp: Some([1.3, 1.7]) })?;
    let decreasing = one.windows(2).all(|w| w[1] < w[0]);
    let (e1, e2) = (*one.last().expect("ladder"), *two.last().expect("ladder"));
    Ok(Outcome::new(
        7,
        "inversion",
        e1,
        0.05,
        e1 < 0.05 && decreasing && e2 < 0.10,
        json!({"errors_1d": one, "errors_2d": two, "threshold_2d": 0.10, "decreasing_1d": decreasing}),
    ))
}

fn calibration_drift() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut rows = Vec::new();
    for n in [1, 2] {
        for alpha in [0.25, 0.5, 0.75] {
            let c = calibration(n, alpha)?;
            worst = worst.max(c.drift);
            rows.push(json!({"n": n, "alpha": alpha, "d": c.d, "drift": c.drift}));
        }
    }
    Ok(Outcome::new(8, "calibration_drift", worst, DRIFT_LIMIT, worst < DRIFT_LIMIT, json!({"cases": rows})))
}

fn decomposition() -> Result<Outcome> {
    let band = DEFAULT_BAND_CELLS * 4.0 / 2048.0;
    let run = |m: usize| {
        let g = window(1, m);
        let phi = GriddedFunction::from_fn(g, |x| (-x[0] * x[0] / 0.08).exp())?;
        marchaud_decomposition_residual(&phi, &interval(), 0.5, 2.0 * g.h(0), band)
    };
    let (a, b) = (run(2048)?, run(4096)?);
    let halves = b.residual <= 0.5 * a.residual;
    Ok(Outcome::new(
        9,
        "decomposition",
        a.relative,
        1e-2,
        a.relative < 1e-2 && halves,
        json!({"relative": [a.relative, b.relative], "residual": [a.residual, b.residual], "band": band}),
    ))
}

fn domination(seed: u64) -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut rows = Vec::new();
    let mut uniform = true;
    for (name, domain, grid) in [("interval", interval(), window(1, 512)), ("disk", disk(), window(2, 128))] {
        let h = grid.h_max();
        let tests = seeded_bumps(&domain, &grid, 20, seed)?;
        let r = domination_check(&domain, 0.5, &tests, &[16.0 * h, 8.0 * h, 4.0 * h])?;
        worst = worst.max(rel_change(r.c_base, r.c_extended));
        uniform &= r.uniform;
        rows.push(json!({"domain": name, "c_base": r.c_base, "c_extended": r.c_extended, "eps_extra": r.eps_extra}));
    }
    Ok(Outcome::new(10, "domination", worst, DOMINATION_STABILITY, uniform && worst <= DOMINATION_STABILITY, json!({"cases": rows})))
}

fn co_movement_check(seed: u64) -> Result<Outcome> {
    let family = TestFamily::all(4, seed);
    let mut worst = 0.0_f64;
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, domain, n, m) in [("interval", interval(), 1, 1024), ("disk", disk(), 2, 128), ("square", square(), 2, 128)] {
        let gradient = if n == 1 { vec![0.3] } else { vec![0.3, 0.2] };
        let p = ExponentSpec::Affine { gradient, offset: 1.8, clamp: None };
        let c = co_movement(&domain, &window(n, m), &p, 0.25, &family)?;
        worst = worst.max(c.hardy_change).max(c.multiplier_change);
        ok &= c.hardy_stable && c.multiplier_stable && !c.cross_flag;
        rows.push(json!({"domain": name, "report": c}));
    }
    Ok(Outcome::new(11, "co_movement", worst, REFINEMENT_STABILITY, ok, json!({"cases": rows})))
}

fn strichartz(seed: u64) -> Result<Outcome> {
    let family = TestFamily::all(4, seed);
    let mut worst = 0.0_f64;
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, domain, n, m) in [("interval", interval(), 1, 1024), ("two_balls", two_balls(), 2, 128)] {
        let r = strichartz_corollary_check(&domain, &window(n, m), 1.5, 0.5, &family)?;
        worst = worst.max(r.change);
        ok &= r.finite && r.stable;
        rows.push(json!({"domain": name, "report": r}));
    }
    let rejected = matches!(strichartz_corollary_check(&interval(), &window(1, 256), 3.0, 0.5, &family), Err(Error::Range(_)));
    Ok(Outcome::new(
        12,
        "strichartz",
        worst,
        REFINEMENT_STABILITY,
        ok && rejected,
        json!({"cases": rows, "p3_rejected": rejected}),
    ))
}

/// Artifacts recomputed for the determinism check: a Hardy table on the disk
/// and the domination constants on the interval.
pub fn determinism_probe(seed: u64) -> Result<String> {
    let g = window(2, 64);
    let p = ExponentSpec::Affine { gradient: vec![0.3, 0.2], offset: 1.8, clamp: None }.sample(&g, None)?;
    let hardy = estimate_hardy_constant(&disk(), &g, &p, 0.25, &TestFamily::all(2, seed), Weight::AOmega)?;
    let g1 = window(1, 512);
    let h = g1.h(0);
    let tests = seeded_bumps(&interval(), &g1, 20, seed)?;
    let dom = domination_check(&interval(), 0.5, &tests, &[16.0 * h, 8.0 * h, 4.0 * h])?;
    Ok(format!("{}c_base,c_extended\n{:e},{:e}\n", hardy.to_csv(), dom.c_base, dom.c_extended))
}

/// Worker counts 1, 2 and the machine maximum.
pub fn worker_counts() -> Vec<usize> {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut counts = vec![1, 2, max];
    counts.sort_unstable();
    counts.dedup();
    counts
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Input(format!("cannot build a pool of {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn determinism(seed: u64) -> Result<Outcome> {
    let mut outputs = Vec::new();
    for w in worker_counts() {
        for _ in 0..2 {
            outputs.push(with_workers(w, || determinism_probe(seed))??);
        }
    }
    let mismatches = outputs.iter().filter(|o| **o != outputs[0]).count();
    Ok(Outcome::new(
        13,
        "determinism",
        mismatches as f64,
        0.0,
        mismatches == 0,
        json!({"workers": worker_counts(), "runs_per_count": 2, "bytes": outputs[0].len()}),
    ))
}
