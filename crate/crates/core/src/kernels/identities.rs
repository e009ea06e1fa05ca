use super::{difference_coefficients, diff_kernel_e1, gamma_n};
use crate::error::{Error, Result};
use crate::grid_domain::Point;
use crate::quadrature::{compensated_sum, composite_gl};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Angular nodes used by the two-dimensional ball integrals.
pub const DEFAULT_QUAD_BUDGET: usize = 256;

const ORDER: usize = 8;

/// `∫_{B(c, R)} |y − p|^{α−n} dy` with `q = p − c`.
///
/// The integral is taken in polar coordinates about the node `p`, where the
/// radial part has the closed form `(t_out^α − t_in^α)/α`; only the angular
/// integral is discretized (`quad_m` Gauss–Legendre nodes in 2-D, exact in 1-D).
pub fn ball_node_integral(n: usize, q: Point, radius: f64, alpha: f64, quad_m: usize) -> f64 {
    let chord = |u: Point| -> f64 {
        let b = q[0] * u[0] + q[1] * u[1];
        let disc = b * b - (q[0] * q[0] + q[1] * q[1]) + radius * radius;
        if disc <= 0.0 {
            return 0.0;
        }
        let s = disc.sqrt();
        let (t_in, t_out) = ((-b - s).max(0.0), (-b + s).max(0.0));
        (t_out.powf(alpha) - t_in.powf(alpha)) / alpha
    };
    if n == 1 {
        return chord([1.0, 0.0]) + chord([-1.0, 0.0]);
    }
    let panels = (quad_m / ORDER).max(1);
    let qn = (q[0] * q[0] + q[1] * q[1]).sqrt();
    if qn <= radius {
        return composite_gl(0.0, 2.0 * PI, panels, ORDER, |t| chord([t.cos(), t.sin()]));
    }
    // Node outside the ball: only the cone of directions towards the ball
    // contributes. The substitution sin(θ − φ₀) = sin β · sin u removes the
    // square-root behaviour at the tangent directions.
    let sin_beta = radius / qn;
    composite_gl(-FRAC_PI_2, FRAC_PI_2, panels, ORDER, |u| {
        let s = sin_beta * u.sin();
        let psi = s.asin();
        let jac = sin_beta * u.cos() / (1.0 - s * s).sqrt();
        let mid = qn * psi.cos();
        let half = radius * u.cos();
        jac * ((mid + half).powf(alpha) - (mid - half).max(0.0).powf(alpha)) / alpha
    })
}

/// Residual of a cancellation identity together with its rounding floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CancellationResult {
    pub residual: f64,
    /// `64 ε Σ_k |term_k|`: residuals below this are rounding noise.
    pub floor: f64,
    pub budget: usize,
}

impl CancellationResult {
    /// `true` if `finer` improves on `self` or both sit at the rounding floor.
    pub fn refines_to(&self, finer: &CancellationResult) -> bool {
        finer.residual < self.residual || finer.residual <= finer.floor.max(self.floor)
    }
}

fn ball_difference(n: usize, alpha: f64, ell: usize, center: f64, radius: f64, quad_m: usize) -> Result<CancellationResult> {
    let gamma = gamma_n(n, alpha)?;
    let terms: Vec<f64> = difference_coefficients(ell)
        .iter()
        .enumerate()
        .map(|(k, c)| c * ball_node_integral(n, [k as f64 - center, 0.0], radius, alpha, quad_m) / gamma)
        .collect();
    let scale = compensated_sum(terms.iter().map(|t| t.abs()));
    Ok(CancellationResult {
        residual: compensated_sum(terms).abs(),
        floor: 64.0 * f64::EPSILON * scale,
        budget: quad_m,
    })
}

/// `|∫_{|y − (ℓ/2)e₁| < N} k_{ℓ,α}(y) dy|` for odd `ℓ`.
pub fn cancellation_residual(n: usize, alpha: f64, ell: usize, big_n: f64, quad_m: usize) -> Result<CancellationResult> {
    if ell % 2 == 0 {
        return Err(Error::Domain("the shifted-ball cancellation holds for odd ℓ only".into()));
    }
    if !(big_n > 0.0) {
        return Err(Error::Input("ball radius must be positive".into()));
    }
    ball_difference(n, alpha, ell, ell as f64 / 2.0, big_n, quad_m)
}

/// `|∫_{|y| < R} k_{ℓ,α}(y) dy|`, which tends to zero as `R → ∞` for every `ℓ`.
pub fn whole_space_residual(n: usize, alpha: f64, ell: usize, radius: f64, quad_m: usize) -> Result<CancellationResult> {
    ball_difference(n, alpha, ell, 0.0, radius, quad_m)
}

/// `𝒦(r) = (1/(d rⁿ)) ∫_{|y| < r} k_{ℓ,α}(y) dy` (signed).
pub fn script_k(n: usize, alpha: f64, ell: usize, r: f64, quad_m: usize, d: f64) -> Result<f64> {
    let gamma = gamma_n(n, alpha)?;
    let terms = difference_coefficients(ell)
        .iter()
        .enumerate()
        .map(|(k, c)| c * ball_node_integral(n, [k as f64, 0.0], r, alpha, quad_m))
        .collect::<Vec<_>>();
    Ok(compensated_sum(terms) / (gamma * d * r.powi(n as i32)))
}

/// `max_r |𝒦(r)| r^{n−α}` over the given radii.
pub fn script_k_bound(n: usize, alpha: f64, ell: usize, radii: &[f64], quad_m: usize, d: f64) -> Result<f64> {
    radii.iter().try_fold(0.0_f64, |acc, &r| {
        Ok(acc.max(script_k(n, alpha, ell, r, quad_m, d)?.abs() * r.powf(n as f64 - alpha)))
    })
}

/// Far-field decay of `k_{ℓ,α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayReport {
    /// Least-squares slope of `log mean_{|x| = r} |k_{ℓ,α}(x)|` against `log r`.
    pub slope: f64,
    pub target: f64,
    /// `max |k_{ℓ,α}(x)| / (1 + |x|)^{α−n−ℓ}` over the samples.
    pub c_fit: f64,
    /// Same with twice as many radii.
    pub c_fit_doubled: f64,
    pub holds: bool,
}

fn directions(n: usize) -> Vec<Point> {
    if n == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        let k = 256;
        (0..k).map(|i| {
            let t = 2.0 * PI * (i as f64 + 0.5) / k as f64;
            [t.cos(), t.sin()]
        })
        .collect()
    }
}

fn radii(r_min: f64, r_max: f64, samples: usize) -> Vec<f64> {
    let s = samples.max(2);
    (0..s).map(|i| r_min * (r_max / r_min).powf(i as f64 / (s - 1) as f64)).collect()
}

/// Checks `|k_{ℓ,α}(x)| ≤ c (1 + |x|)^{α−n−ℓ}` for `r_min ≤ |x| ≤ r_max`.
/// Radii below `ℓ + 1` are refused.
pub fn decay_check(n: usize, alpha: f64, ell: usize, r_min: f64, r_max: f64, samples: usize) -> Result<DecayReport> {
    if r_min < (ell + 1) as f64 || !(r_max > r_min) {
        return Err(Error::Input(format!("decay samples need ℓ + 1 = {} ≤ r_min < r_max", ell + 1)));
    }
    let target = alpha - n as f64 - ell as f64;
    let dirs = directions(n);
    let sweep = |rs: &[f64]| -> Result<(Vec<f64>, f64)> {
        let mut means = Vec::with_capacity(rs.len());
        let mut c = 0.0_f64;
        for &r in rs {
            let mut acc = 0.0;
            for u in &dirs {
                let v = diff_kernel_e1(n, alpha, ell, &[r * u[0], r * u[1]][..n])?.abs();
                acc += v;
                c = c.max(v / (1.0 + r).powf(target));
            }
            means.push(acc / dirs.len() as f64);
        }
        Ok((means, c))
    };
    let rs = radii(r_min, r_max, samples);
    let (means, c_fit) = sweep(&rs)?;
    let (_, c_fit_doubled) = sweep(&radii(r_min, r_max, 2 * samples))?;
    let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let stable = (c_fit_doubled - c_fit).abs() <= 0.05 * c_fit;
    Ok(DecayReport { slope, target, c_fit, c_fit_doubled, holds: c_fit.is_finite() && stable })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_integral_matches_closed_forms() {
        // 1-D node inside: (ρ₊^α + ρ₋^α)/α.
        let v = ball_node_integral(1, [0.5, 0.0], 3.0, 0.5, 0);
        assert!((v - (2.5f64.sqrt() + 3.5f64.sqrt()) / 0.5).abs() < 1e-14);
        // 2-D node at the centre: 2π R^α / α.
        let v = ball_node_integral(2, [0.0, 0.0], 2.0, 0.25, 64);
        assert!((v - 2.0 * PI * 2f64.powf(0.25) / 0.25).abs() < 1e-12);
        // 2-D node far away: ≈ area · |q|^{α−2}.
        let v = ball_node_integral(2, [50.0, 0.0], 0.5, 0.5, 64);
        let approx = PI * 0.25 * 50f64.powf(-1.5);
        assert!((v / approx - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ball_integral_against_brute_force() {
        // Midpoint rule on a fine lattice, node outside the ball so the integrand is smooth.
        let (q, r, a) = ([1.7, 0.4], 1.0, 0.6);
        let steps = 1200;
        let h = 2.0 * r / steps as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                let y = [-r + (i as f64 + 0.5) * h, -r + (j as f64 + 0.5) * h];
                if y[0] * y[0] + y[1] * y[1] < r * r {
                    acc += ((y[0] - q[0]).powi(2) + (y[1] - q[1]).powi(2)).powf((a - 2.0) / 2.0) * h * h;
                }
            }
        }
        let v = ball_node_integral(2, q, r, a, 256);
        assert!((v - acc).abs() / v < 2e-3, "{v} vs {acc}");
    }

    #[test]
    fn shifted_ball_cancellation() {
        let r = cancellation_residual(1, 0.5, 1, 3.0, 1 << 14).unwrap();
        assert!(r.residual < 1e-3);
        for n in [1, 2] {
            for alpha in [0.25, 0.5, 0.75] {
                for big_n in [2.0, 5.0] {
                    let mut prev = cancellation_residual(n, alpha, 1, big_n, 16).unwrap();
                    for b in [64, 256, 1024] {
                        let next = cancellation_residual(n, alpha, 1, big_n, b).unwrap();
                        assert!(prev.refines_to(&next), "{n} {alpha} {big_n}: {prev:?} -> {next:?}");
                        prev = next;
                    }
                    assert!(prev.residual < 1e-10);
                }
            }
        }
        assert!(cancellation_residual(1, 0.5, 2, 3.0, 64).is_err());
    }

    #[test]
    fn whole_space_truncation_decays() {
        for alpha in [0.25, 0.5, 0.75] {
            let g = gamma_n(1, alpha).unwrap();
            let mut last = f64::INFINITY;
            for radius in [4.0_f64, 16.0, 64.0, 256.0] {
                let closed = (2.0 * radius.powf(alpha) - (radius + 1.0).powf(alpha) - (radius - 1.0).powf(alpha)) / (alpha * g);
                let r = whole_space_residual(1, alpha, 1, radius, 0).unwrap();
                assert!((r.residual - closed.abs()).abs() < 1e-12);
                // Tail bound of order R^{α−ℓ−1+n}.
                assert!(r.residual <= radius.powf(alpha - 1.0));
                assert!(r.residual < last);
                last = r.residual;
            }
            let two_d = whole_space_residual(2, alpha, 2, 40.0, 512).unwrap();
            assert!(two_d.residual < whole_space_residual(2, alpha, 2, 10.0, 512).unwrap().residual);
        }
    }

    #[test]
    fn decay_slopes() {
        for n in [1, 2] {
            for alpha in [0.25, 0.5, 0.75] {
                let r = decay_check(n, alpha, 1, 2.0, 50.0, 40).unwrap();
                assert!((r.slope - r.target).abs() < 0.05, "{n} {alpha}: {r:?}");
                assert!(r.holds, "{r:?}");
            }
        }
        assert!(decay_check(1, 0.5, 1, 1.5, 50.0, 10).is_err());
    }

    #[test]
    fn script_k_behaviour() {
        let d = 1.0;
        for n in [1, 2] {
            let radii: Vec<f64> = (0..12).map(|i| 0.05 * 1.3f64.powi(i)).filter(|r| *r <= 1.0).collect();
            let b1 = script_k_bound(n, 0.5, 1, &radii, 512, d).unwrap();
            let more: Vec<f64> = radii.iter().flat_map(|r| [*r, r * 1.15]).filter(|r| *r <= 1.0).collect();
            let b2 = script_k_bound(n, 0.5, 1, &more, 512, d).unwrap();
            assert!(b1.is_finite() && (b2 / b1 - 1.0).abs() < 0.1, "{b1} {b2}");
            let far = script_k(n, 0.5, 1, 200.0, 512, d).unwrap().abs();
            let near = script_k(n, 0.5, 1, 2.0, 512, d).unwrap().abs();
            assert!(far < 1e-3 * near);
            let a = script_k(n, 0.5, 1, 0.7, 256, d).unwrap();
            let b = script_k(n, 0.5, 1, 0.7, 512, d).unwrap();
            assert!((a - b).abs() < 1e-4 * a.abs().max(1.0));
        }
    }
}
