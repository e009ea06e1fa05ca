//! Riesz potential, maximal operator, truncated hypersingular integrals, the
//! boundary weight `a_Ω` and the in-domain operator `A_ε`.
//!
//! Every operator works on a uniform window grid; densities supported in `Ω`
//! are extended by zero to the window before integration.

mod decomposition;
mod hypersingular;
mod maximal;
mod potential;
mod weight;

pub use decomposition::{
    a_eps_apply, a_eps_apply_fast, domination_check, marchaud_decomposition_residual, seeded_bumps, DominationReport,
    MarchaudResidual, DEFAULT_BAND_CELLS, DOMINATION_STABILITY, MIN_BUMP_CELLS,
};
pub use hypersingular::{
    check_ladder, hypersingular_truncated, hypersingular_truncated_with, inversion_error, inversion_error_with,
    riesz_derivative, ConvergenceTable, TruncatedSum, MIN_EPS_CELLS,
};
pub use maximal::{maximal, radius_ladder, MaximalOperator};
pub use potential::{riesz_potential, riesz_potential_direct, RieszPotential};
pub use weight::{
    a_omega, a_omega_at, a_omega_cellwise, a_omega_with_budget, weight_equivalence_check, WeightCheck, WeightField,
    DEFAULT_WEIGHT_BUDGET, UPPER_SLACK,
};


use crate::error::{Error, Result};
use crate::grid_domain::Grid;
use crate::kernels::DEFAULT_QUAD_BUDGET;
use serde::{Deserialize, Serialize};

/// Parameters shared by the truncated operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub alpha: f64,
    #[serde(default = "default_ell")]
    pub ell: usize,
    /// Strictly decreasing truncations, each at least `2h`.
    pub epsilons: Vec<f64>,
    #[serde(default = "default_budget")]
    pub quad_budget: usize,
}

fn default_ell() -> usize {
    1
}

fn default_budget() -> usize {
    DEFAULT_QUAD_BUDGET
}

impl OperatorParams {
    /// Ladder `{8h, 4h, 2h}` for `grid`.
    pub fn default_for(grid: &Grid, alpha: f64) -> Result<Self> {
        let h = grid.h_max();
        let p = Self { alpha, ell: 1, epsilons: vec![8.0 * h, 4.0 * h, 2.0 * h], quad_budget: DEFAULT_QUAD_BUDGET };
        p.validate(grid)?;
        Ok(p)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Range(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.ell != 1 {
            return Err(Error::Input("only first differences (ℓ = 1) are supported by the operators".into()));
        }
        if self.quad_budget == 0 {
            return Err(Error::Input("quadrature budget must be positive".into()));
        }
        check_ladder(grid, &self.epsilons)
    }

    pub fn eps_min(&self) -> f64 {
        *self.epsilons.last().expect("validated ladder")
    }

    pub fn d_coeff(&self, n: usize) -> Result<f64> {
        crate::kernels::d_coefficient(n, self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        let g = Grid::interval(-2.0, 2.0, 64).unwrap();
        let p = OperatorParams::default_for(&g, 0.5).unwrap();
        assert_eq!(p.epsilons.len(), 3);
        assert_eq!(p.eps_min(), 2.0 * g.h(0));
        let mut bad = p.clone();
        bad.epsilons = vec![2.0 * g.h(0), 4.0 * g.h(0)];
        assert!(bad.validate(&g).is_err());
        bad.epsilons = vec![g.h(0)];
        assert!(bad.validate(&g).is_err());
        assert!(OperatorParams::default_for(&g, 1.0).is_err());
        let json: OperatorParams = serde_json::from_str(r#"{"alpha":0.5,"epsilons":[0.5,0.25]}"#).unwrap();
        assert_eq!(json.ell, 1);
        assert!(json.validate(&g).is_ok());
    }
}
