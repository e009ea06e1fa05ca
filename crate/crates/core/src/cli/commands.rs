use super::config::RunConfig;
use super::suite;
use crate::error::{Error, Result};
use crate::grid_domain::GriddedFunction;
use crate::hardy::estimate_hardy_constant;
use crate::kernels::{calibration, cancellation_residual, decay_check};
use crate::luxemburg::{luxemburg_norm, modular_norm_bracket};
use crate::operators::{a_omega, inversion_error, maximal, riesz_derivative, riesz_potential, weight_equivalence_check};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};

/// Writes into the output directory and records the file names.
pub struct Sink {
    dir: PathBuf,
    pub written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), body)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let body = serde_json::to_string_pretty(value).map_err(|e| Error::Input(e.to_string()))?;
        self.text(name, &(body + "\n"))
    }

    fn function(&mut self, stem: &str, f: &GriddedFunction, sidecar: serde_json::Value) -> Result<()> {
        self.text(&format!("{stem}.csv"), &f.to_csv())?;
        self.json(&format!("{stem}.json"), &sidecar)
    }
}

pub fn norm(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let f = cfg.density_function()?;
    let p = cfg.exponent()?;
    let norm = luxemburg_norm(&f, &p, cfg.rel_tol)?;
    let bracket = modular_norm_bracket(&f, &p)?;
    let class = p.class_p_check();
    let log = p.log_condition_check(crate::exponent::DEFAULT_PAIR_BUDGET, cfg.seed);
    sink.function("density", &f, json!({"density": cfg.density}))?;
    sink.json("norm.json", &json!({"norm": norm, "rel_tol": cfg.rel_tol, "bracket": bracket, "class": class, "log_condition": log}))?;
    Ok(bracket.holds)
}

pub fn potential(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let f = cfg.density_function()?;
    let u = riesz_potential(&f, cfg.alpha)?;
    sink.function("potential", &u, json!({"alpha": cfg.alpha, "density": cfg.density, "max_abs": u.max_abs()}))?;
    Ok(true)
}

pub fn derivative(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let f = cfg.density_function()?.extend_by_zero();
    let table = riesz_derivative(&f, cfg.alpha, &cfg.epsilons, &cfg.exponent()?)?;
    let limit = table.limit.clone().ok_or_else(|| Error::Input("empty ladder".into()))?;
    sink.function("derivative", &limit, json!({"alpha": cfg.alpha, "table": table}))?;
    Ok(table.converged)
}

pub fn maximal_cmd(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let f = cfg.density_function()?;
    let m = maximal(&f, &cfg.domain)?;
    sink.function("maximal", &m, json!({"density": cfg.density, "max": m.max_abs()}))?;
    Ok(true)
}

pub fn weights(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let a = a_omega(&cfg.domain, cfg.alpha, &cfg.grid)?;
    let check = weight_equivalence_check(&cfg.domain, cfg.alpha, &cfg.grid)?;
    sink.function("a_omega", &a.values, json!({"field": a, "check": check}))?;
    Ok(check.c1_holds)
}

/// Cancellation and decay rows for both dimensions and three orders, plus the
/// calibration of `d` for the configured dimension and order.
pub fn kernels(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let mut csv = String::from("identity,parameters,residual,budget\n");
    let mut ok = true;
    for n in [1, 2] {
        for alpha in [0.25, 0.5, 0.75] {
            for big_n in [2.0, 5.0] {
                for budget in [cfg.quad_budget, 4 * cfg.quad_budget] {
                    let r = cancellation_residual(n, alpha, cfg.ell, big_n, budget)?;
                    csv.push_str(&format!("cancellation,n={n};alpha={alpha};N={big_n},{:e},{budget}\n", r.residual));
                }
            }
            let d = decay_check(n, alpha, cfg.ell, 2.0, 50.0, 32)?;
            ok &= (d.slope - d.target).abs() <= 0.05;
            csv.push_str(&format!("decay,n={n};alpha={alpha};slope={};target={},{:e},32\n", d.slope, d.target, (d.slope - d.target).abs()));
        }
    }
    let n = cfg.domain.dim();
    let cal = calibration(n, cfg.alpha)?;
    for pt in &cal.points {
        csv.push_str(&format!(
            "calibration,n={n};alpha={};m={};eps_cells={};d={},{:e},{}\n",
            cfg.alpha, pt.points_per_axis, pt.eps_cells, pt.d, cal.drift, pt.points_per_axis
        ));
    }
    sink.text("kernels.csv", &csv)?;
    sink.json("kernels.json", &json!({"calibration": cal, "ell": cfg.ell}))?;
    Ok(ok)
}

pub fn invert(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let phi = cfg.density_function()?.extend_by_zero();
    let errors = inversion_error(&phi, cfg.alpha, &cfg.exponent()?, &cfg.epsilons)?;
    let mut csv = String::from("eps,relative_error\n");
    for (e, r) in cfg.epsilons.iter().zip(&errors) {
        csv.push_str(&format!("{e:e},{r:e}\n"));
    }
    sink.text("invert.csv", &csv)?;
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    sink.json("invert.json", &json!({"alpha": cfg.alpha, "eps": cfg.epsilons, "errors": errors, "decreasing": decreasing}))?;
    Ok(decreasing)
}

pub fn hardy(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let p = cfg.exponent()?;
    let report = estimate_hardy_constant(&cfg.domain, &cfg.grid, &p, cfg.alpha, &cfg.family, cfg.weight)?;
    sink.text("hardy.csv", &report.to_csv())?;
    sink.json("hardy.json", &report)?;
    Ok(report.max_ratio.is_finite())
}

/// Full suite; rows are written as they finish so partial runs keep them.
pub fn report_all(cfg: &RunConfig, sink: &mut Sink) -> Result<bool> {
    let mut rows = Vec::new();
    for id in 1..=suite::CRITERIA {
        let row = suite::criterion(id, cfg.seed);
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                sink.text("summary.csv", &suite::summary_csv(&rows))?;
                return Err(e);
            }
        }
    }
    sink.text("summary.csv", &suite::summary_csv(&rows))?;
    sink.json("report.json", &json!({"seed": cfg.seed, "criteria": rows}))?;
    Ok(rows.iter().all(|r| r.pass))
}
