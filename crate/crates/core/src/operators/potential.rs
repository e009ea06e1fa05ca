use crate::error::{Error, Result};
use crate::fft::Convolution;
use crate::grid_domain::{Grid, GriddedFunction};
use crate::kernels::gamma_n;
use crate::quadrature::{interval_power_integral, rectangle_offcenter_integral, rectangle_power_integral};

/// Offsets (in cells, sup-norm) whose cell integral uses a tensor rule in 2-D.
const NEAR_CELLS: i64 = 3;

/// `∫_{cell k} |y|^{α−n} dy / γ_n(α)` for the cell centred at offset `k h`.
fn cell_weight(grid: &Grid, alpha: f64, k: [i64; 2]) -> f64 {
    let s = alpha - grid.dim() as f64;
    let h0 = grid.h(0);
    if grid.dim() == 1 {
        let c = k[0] as f64 * h0;
        return interval_power_integral(c - 0.5 * h0, c + 0.5 * h0, s);
    }
    let h1 = grid.h(1);
    if k == [0, 0] {
        return rectangle_power_integral(0.5 * h0, 0.5 * h1, s);
    }
    let c = [k[0] as f64 * h0, k[1] as f64 * h1];
    if k[0].abs().max(k[1].abs()) <= NEAR_CELLS {
        let lo = [c[0] - 0.5 * h0, c[1] - 0.5 * h1];
        let hi = [c[0] + 0.5 * h0, c[1] + 0.5 * h1];
        return rectangle_offcenter_integral(lo, hi, s, 4);
    }
    (c[0] * c[0] + c[1] * c[1]).powf(0.5 * s) * h0 * h1
}

/// Discrete Riesz potential on a fixed window.
///
/// `I^α φ(x) = Σ_y φ(y) W(x − y)` where `W(k)` is the integral of the kernel
/// over the cell at offset `k` (exact in 1-D and for the singular cell, a
/// tensor Gauss rule next to it, the midpoint rule further out).
#[derive(Debug)]
pub struct RieszPotential {
    grid: Grid,
    conv: Convolution,
}

impl RieszPotential {
    pub fn new(grid: &Grid, alpha: f64) -> Result<Self> {
        let n = grid.dim();
        if !(alpha > 0.0 && alpha < n as f64) {
            return Err(Error::Range(format!("Riesz potential needs 0 < alpha < n, got {alpha}")));
        }
        let gamma = gamma_n(n, alpha)?;
        let g = *grid;
        let conv = Convolution::new(grid.points_per_axis(), n, move |k| cell_weight(&g, alpha, k) / gamma);
        Ok(Self { grid: *grid, conv })
    }

    fn check(&self, phi: &GriddedFunction) -> Result<()> {
        if phi.grid() != &self.grid {
            return Err(Error::Input("density and potential use different grids".into()));
        }
        Ok(())
    }

    /// FFT evaluation on the whole window; `phi` is extended by zero.
    pub fn apply(&self, phi: &GriddedFunction) -> Result<GriddedFunction> {
        self.check(phi)?;
        GriddedFunction::new(self.grid, self.conv.apply(phi.values()))
    }

    /// Direct `O(N²)` evaluation of the same sum.
    pub fn apply_direct(&self, phi: &GriddedFunction) -> Result<GriddedFunction> {
        self.check(phi)?;
        GriddedFunction::new(self.grid, self.conv.apply_direct(phi.values()))
    }
}

/// `I^α φ̃` on the window of `phi`.
pub fn riesz_potential(phi: &GriddedFunction, alpha: f64) -> Result<GriddedFunction> {
    RieszPotential::new(phi.grid(), alpha)?.apply(phi)
}

/// Direct-summation counterpart of [`riesz_potential`].
pub fn riesz_potential_direct(phi: &GriddedFunction, alpha: f64) -> Result<GriddedFunction> {
    RieszPotential::new(phi.grid(), alpha)?.apply_direct(phi)
}
