//! Hardy ratios for the weights `δ^{−α}` and `a_Ω`, lower-bound estimation of
//! the Hardy constant, the multiplier-property test and the comparison of the
//! two under grid refinement.
//!
//! All "a constant exists" statements are rendered as stability checks: the
//! reported constants are lower-bound estimates over a probe family.

mod family;

pub use family::{Atom, FamilyKind, Probe, TestFamily, MIN_WIDTH_FRACTION};

use crate::error::{Error, Result};
use crate::exponent::{ExponentField, ExponentSpec};
use crate::grid_domain::{DomainSpec, Grid, GriddedFunction};
use crate::kernels::{d_coefficient, gamma_n};
use crate::luxemburg::{luxemburg_norm, DEFAULT_REL_TOL};
use crate::operators::{a_omega, check_ladder, RieszPotential, TruncatedSum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Perturbation rounds of the greedy search.
pub const GREEDY_ROUNDS: usize = 10;

/// Relative change tolerated between two resolutions.
pub const REFINEMENT_STABILITY: f64 = 0.20;

/// Hardy weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    Delta,
    AOmega,
}

impl Weight {
    pub fn name(&self) -> &'static str {
        match self {
            Weight::Delta => "delta",
            Weight::AOmega => "a_omega",
        }
    }
}

/// `0 < α < min(1, n/p⁺)`.
pub fn alpha_admissible(p: &ExponentField, n: usize, alpha: f64) -> bool {
    alpha_admissible_plus(p.p_plus(), n, alpha)
}

pub fn alpha_admissible_plus(p_plus: f64, n: usize, alpha: f64) -> bool {
    alpha > 0.0 && alpha < 1.0_f64.min(n as f64 / p_plus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Everything about `(Ω, grid, p, α, weight)` that does not depend on `φ`.
pub struct HardyContext {
    domain: DomainSpec,
    grid: Grid,
    mask: Vec<bool>,
    p: ExponentField,
    alpha: f64,
    weight: Weight,
    w: Vec<f64>,
    potential: RieszPotential,
    gamma: f64,
}

impl HardyContext {
    pub fn new(domain: &DomainSpec, grid: &Grid, p: &ExponentField, alpha: f64, weight: Weight) -> Result<Self> {
        let mask = domain.chi_mask(grid)?;
        if p.grid() != grid {
            return Err(Error::Input("exponent and window use different grids".into()));
        }
        let p = p.restrict(&mask)?;
        if !p.class_p_check().in_class {
            return Err(Error::Domain(format!("exponent range [{}, {}] is not inside (1, ∞)", p.p_minus(), p.p_plus())));
        }
        if !alpha_admissible(&p, grid.dim(), alpha) {
            return Err(Error::Range(format!(
                "alpha must be < min(1, n/p_plus) = {}, got {alpha}",
                1.0_f64.min(grid.dim() as f64 / p.p_plus())
            )));
        }
        let w = match weight {
            Weight::Delta => {
                let delta = domain.boundary_distance(grid)?;
                delta.values().iter().zip(&mask).map(|(d, &m)| if m { d.powf(-alpha) } else { 0.0 }).collect()
            }
            Weight::AOmega => a_omega(domain, alpha, grid)?.values.into_values(),
        };
        Ok(Self {
            domain: domain.clone(),
            grid: *grid,
            mask,
            p,
            alpha,
            weight,
            w,
            potential: RieszPotential::new(grid, alpha)?,
            gamma: gamma_n(grid.dim(), alpha)?,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn exponent(&self) -> &ExponentField {
        &self.p
    }

    /// `‖w · ∫_Ω φ(y)|x−y|^{α−n} dy‖_{p(·),Ω} / ‖φ‖_{p(·),Ω}`.
    pub fn ratio(&self, phi: &GriddedFunction) -> Result<HardyRatio> {
        let phi = phi.restrict(&self.mask)?;
        let rhs = luxemburg_norm(&phi, &self.p, DEFAULT_REL_TOL)?;
        if rhs == 0.0 {
            return Err(Error::Input("the density vanishes on Ω".into()));
        }
        let f = self.potential.apply(&phi)?;
        let vals: Vec<f64> = (0..self.grid.len()).map(|i| self.gamma * self.w[i] * f.values()[i]).collect();
        let lhs = luxemburg_norm(&GriddedFunction::masked(self.grid, vals, self.mask.clone())?, &self.p, DEFAULT_REL_TOL)?;
        Ok(HardyRatio { lhs, rhs, ratio: lhs / rhs })
    }
}

/// One-shot Hardy ratio.
pub fn hardy_ratio(
    phi: &GriddedFunction,
    domain: &DomainSpec,
    p: &ExponentField,
    alpha: f64,
    weight: Weight,
) -> Result<HardyRatio> {
    HardyContext::new(domain, phi.grid(), p, alpha, weight)?.ratio(phi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyMember {
    pub member_id: usize,
    pub kind: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub descriptor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyReport {
    pub weight: Weight,
    pub alpha: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub points_per_axis: usize,
    pub members: Vec<HardyMember>,
    pub max_ratio: f64,
    pub argmax: usize,
    pub argmax_descriptor: String,
    pub greedy_rounds: usize,
    pub notes: Vec<String>,
}

impl HardyReport {
    /// `member_id,kind,lhs,rhs,ratio`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("member_id,kind,lhs,rhs,ratio\n");
        for m in &self.members {
            let _ = writeln!(s, "{},{},{},{},{}", m.member_id, m.kind, m.lhs, m.rhs, m.ratio);
        }
        s
    }
}

fn member(id: usize, kind: String, probe: &Probe, r: HardyRatio) -> HardyMember {
    HardyMember { member_id: id, kind, lhs: r.lhs, rhs: r.rhs, ratio: r.ratio, descriptor: probe.describe() }
}

/// Greedy lower envelope of the Hardy constant over `family`.
///
/// Every member is evaluated. For each kind, the member with the largest ratio
/// is then pushed towards the boundary and sharpened for up to
/// [`GREEDY_ROUNDS`] rounds, keeping a move only if it raises the ratio; the
/// refined probes are reported as extra members. Because members and greedy
/// starts are drawn per kind, adding kinds never lowers the estimate.
pub fn estimate_hardy_constant(
    domain: &DomainSpec,
    grid: &Grid,
    p: &ExponentField,
    alpha: f64,
    family: &TestFamily,
    weight: Weight,
) -> Result<HardyReport> {
    let ctx = HardyContext::new(domain, grid, p, alpha, weight)?;
    estimate_with(&ctx, family)
}

pub fn estimate_with(ctx: &HardyContext, family: &TestFamily) -> Result<HardyReport> {
    let probes = family.probes(&ctx.domain)?;
    let evaluate = |probe: &Probe| -> Result<Option<HardyRatio>> {
        let phi = probe.sample(&ctx.grid, &ctx.mask)?;
        if phi.max_abs() == 0.0 {
            return Ok(None);
        }
        ctx.ratio(&phi).map(Some)
    };
    let results = probes.par_iter().map(evaluate).collect::<Result<Vec<_>>>()?;
    let mut members = Vec::new();
    let mut notes = Vec::new();
    let mut seeds: Vec<(FamilyKind, f64, Probe)> = Vec::new();
    for (id, (probe, r)) in probes.iter().zip(results).enumerate() {
        match r {
            Some(r) => {
                match seeds.iter_mut().find(|(k, _, _)| *k == probe.kind) {
                    Some(slot) if r.ratio > slot.1 => *slot = (probe.kind, r.ratio, probe.clone()),
                    Some(_) => {}
                    None => seeds.push((probe.kind, r.ratio, probe.clone())),
                }
                members.push(member(id, probe.kind.name().to_string(), probe, r));
            }
            None => notes.push(format!("member {id} vanishes on the grid and was skipped")),
        }
    }
    if members.is_empty() {
        return Err(Error::Input("every family member vanishes on the grid".into()));
    }
    let mut rounds = 0;
    let mut next_id = probes.len();
    for (kind, ratio, probe) in seeds {
        let (done, refined) = greedy(ctx, &evaluate, ratio, probe)?;
        rounds = rounds.max(done);
        if let Some((p, r)) = refined {
            members.push(member(next_id, format!("greedy_{}", kind.name()), &p, r));
            next_id += 1;
        }
    }
    let (argmax, top) = members
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, m)| if m.ratio > bv { (i, m.ratio) } else { (bi, bv) });
    Ok(HardyReport {
        weight: ctx.weight,
        alpha: ctx.alpha,
        p_minus: ctx.p.p_minus(),
        p_plus: ctx.p.p_plus(),
        points_per_axis: ctx.grid.points_per_axis(),
        max_ratio: top,
        argmax_descriptor: members[argmax].descriptor.clone(),
        argmax: members[argmax].member_id,
        members,
        greedy_rounds: rounds,
        notes,
    })
}

type Evaluated = Option<(Probe, HardyRatio)>;

fn greedy<F>(ctx: &HardyContext, evaluate: &F, start_ratio: f64, start: Probe) -> Result<(usize, Evaluated)>
where
    F: Fn(&Probe) -> Result<Option<HardyRatio>> + Sync,
{
    let (mut best_ratio, mut best) = (start_ratio, start);
    let mut found = None;
    let mut rounds = 0;
    for _ in 0..GREEDY_ROUNDS {
        let moved = best.toward_boundary(&ctx.domain);
        let candidates = [moved.clone(), best.sharpen(&ctx.domain), moved.sharpen(&ctx.domain)];
        let scored = candidates.par_iter().map(evaluate).collect::<Result<Vec<_>>>()?;
        let mut improved = false;
        for (c, r) in candidates.iter().zip(scored) {
            if let Some(r) = r {
                if r.ratio > best_ratio && c != &best {
                    best_ratio = r.ratio;
                    best = c.clone();
                    found = Some(r);
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
        rounds += 1;
    }
    Ok((rounds, found.map(|r| (best, r))))
}

/// Spread of the estimate across family seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedStability {
    pub seeds: Vec<u64>,
    pub estimates: Vec<f64>,
    /// `(max − min) / max`.
    pub spread: f64,
}

pub fn seed_stability(ctx: &HardyContext, family: &TestFamily, seeds: &[u64]) -> Result<SeedStability> {
    let estimates = seeds
        .iter()
        .map(|&s| estimate_with(ctx, &TestFamily { seed: s, ..family.clone() }).map(|r| r.max_ratio))
        .collect::<Result<Vec<_>>>()?;
    let hi = estimates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = estimates.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SeedStability { seeds: seeds.to_vec(), estimates, spread: (hi - lo) / hi })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierMember {
    pub member_id: usize,
    pub kind: String,
    /// Ratio for each truncation of the ladder.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierReport {
    pub eps: Vec<f64>,
    pub members: Vec<MultiplierMember>,
    /// Max ratio per truncation.
    pub c_by_eps: Vec<f64>,
    /// Max ratio at the smallest truncation.
    pub c_est: f64,
    /// Relative change of the max between the last two truncations.
    pub eps_change: f64,
}

/// `‖D^α_ε(χ_Ω I^α 𝓔_Ω φ)‖_{p(·),Ω} / ‖φ‖_{p(·),Ω}` over the family and the ladder.
pub fn multiplier_property_test(
    domain: &DomainSpec,
    grid: &Grid,
    p: &ExponentField,
    alpha: f64,
    family: &TestFamily,
    eps: &[f64],
) -> Result<MultiplierReport> {
    check_ladder(grid, eps)?;
    let ctx = HardyContext::new(domain, grid, p, alpha, Weight::Delta)?;
    let d = d_coefficient(grid.dim(), alpha)?;
    let ops = eps.iter().map(|&e| TruncatedSum::new(grid, alpha, e)).collect::<Result<Vec<_>>>()?;
    let probes = family.probes(domain)?;
    let rows = probes
        .par_iter()
        .map(|probe| -> Result<Option<Vec<f64>>> {
            let phi = probe.sample(grid, &ctx.mask)?;
            let rhs = luxemburg_norm(&phi, &ctx.p, DEFAULT_REL_TOL)?;
            if rhs == 0.0 {
                return Ok(None);
            }
            let f = ctx.potential.apply(&phi)?.restrict(&ctx.mask)?.extend_by_zero();
            ops.iter()
                .map(|op| {
                    let g = GriddedFunction::new(*grid, op.apply(f.values()))?.restrict(&ctx.mask)?.scale(1.0 / d)?;
                    Ok(luxemburg_norm(&g, &ctx.p, DEFAULT_REL_TOL)? / rhs)
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    let members: Vec<MultiplierMember> = probes
        .iter()
        .zip(rows)
        .enumerate()
        .filter_map(|(id, (probe, r))| r.map(|ratios| MultiplierMember { member_id: id, kind: probe.kind.name().into(), ratios }))
        .collect();
    if members.is_empty() {
        return Err(Error::Input("every family member vanishes on the grid".into()));
    }
    let c_by_eps: Vec<f64> =
        (0..eps.len()).map(|k| members.iter().map(|m| m.ratios[k]).fold(0.0, f64::max)).collect();
    let k = c_by_eps.len();
    let c_est = c_by_eps[k - 1];
    let eps_change = if k > 1 { (c_by_eps[k - 1] - c_by_eps[k - 2]).abs() / c_by_eps[k - 1] } else { 0.0 };
    Ok(MultiplierReport { eps: eps.to_vec(), members, c_by_eps, c_est, eps_change })
}

/// The two sides of the equivalence at two resolutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoMovement {
    pub points_per_axis: [usize; 2],
    pub hardy: [f64; 2],
    pub multiplier: [f64; 2],
    pub hardy_change: f64,
    pub multiplier_change: f64,
    pub hardy_stable: bool,
    pub multiplier_stable: bool,
    /// Set when exactly one of the two estimates is stable.
    pub cross_flag: bool,
}

fn rel_change(a: f64, b: f64) -> f64 {
    if a.is_finite() && b.is_finite() && a > 0.0 { (b - a).abs() / a } else { f64::INFINITY }
}

/// Runs the `a_Ω`-weighted Hardy estimate and the multiplier test on `grid`
/// and on its refinement by two, with ladders `{8h, 4h, 2h}`.
pub fn co_movement(
    domain: &DomainSpec,
    grid: &Grid,
    p: &ExponentSpec,
    alpha: f64,
    family: &TestFamily,
) -> Result<CoMovement> {
    let mut hardy = [0.0; 2];
    let mut mult = [0.0; 2];
    let grids = [*grid, grid.refined(2)];
    for (k, g) in grids.iter().enumerate() {
        let pf = p.sample(g, None)?;
        hardy[k] = estimate_hardy_constant(domain, g, &pf, alpha, family, Weight::AOmega)?.max_ratio;
        let h = g.h_max();
        mult[k] = multiplier_property_test(domain, g, &pf, alpha, family, &[8.0 * h, 4.0 * h, 2.0 * h])?.c_est;
    }
    let (hc, mc) = (rel_change(hardy[0], hardy[1]), rel_change(mult[0], mult[1]));
    let (hs, ms) = (hc <= REFINEMENT_STABILITY, mc <= REFINEMENT_STABILITY);
    Ok(CoMovement {
        points_per_axis: [grids[0].points_per_axis(), grids[1].points_per_axis()],
        hardy,
        multiplier: mult,
        hardy_change: hc,
        multiplier_change: mc,
        hardy_stable: hs,
        multiplier_stable: ms,
        cross_flag: hs != ms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrichartzReport {
    pub p: f64,
    pub alpha: f64,
    /// Largest number of runs of `Ω` along grid lines, over all axes.
    pub strichartz_count: usize,
    pub points_per_axis: [usize; 2],
    pub estimates: [f64; 2],
    pub change: f64,
    pub finite: bool,
    pub stable: bool,
}

/// Hardy estimate with weight `δ^{−α}` and constant `p ∈ (1, 1/α)` at `grid`
/// and its refinement by two.
pub fn strichartz_corollary_check(
    domain: &DomainSpec,
    grid: &Grid,
    p: f64,
    alpha: f64,
    family: &TestFamily,
) -> Result<StrichartzReport> {
    if !(alpha > 0.0 && alpha < 1.0) || !(p > 1.0 && p < 1.0 / alpha) {
        return Err(Error::Range(format!("the corollary needs 1 < p < 1/alpha, got p = {p}, alpha = {alpha}")));
    }
    let count = (0..grid.dim()).map(|a| domain.strichartz_count(grid, a)).collect::<Result<Vec<_>>>()?;
    let grids = [*grid, grid.refined(2)];
    let mut estimates = [0.0; 2];
    for (k, g) in grids.iter().enumerate() {
        let pf = ExponentField::constant(*g, p)?;
        estimates[k] = estimate_hardy_constant(domain, g, &pf, alpha, family, Weight::Delta)?.max_ratio;
    }
    let change = rel_change(estimates[0], estimates[1]);
    Ok(StrichartzReport {
        p,
        alpha,
        strichartz_count: count.into_iter().max().unwrap_or(0),
        points_per_axis: [grids[0].points_per_axis(), grids[1].points_per_axis()],
        estimates,
        change,
        finite: estimates.iter().all(|e| e.is_finite()),
        stable: change <= REFINEMENT_STABILITY,
    })
}
