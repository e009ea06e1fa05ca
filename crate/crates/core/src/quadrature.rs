//! Summation and quadrature primitives shared by all modules.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

/// Neumaier-compensated sum over an iterator, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn gauss_legendre(order: usize) -> &'static GaussLegendre {
    static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    let rules = RULES.get_or_init(|| {
        (1..=32)
            .map(|k| GaussLegendre::new(NonZeroUsize::new(k).expect("nonzero")))
            .collect()
    });
    &rules[order.clamp(2, 32) - 1]
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[a, b]`.
pub fn gl_nodes(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.as_node_weight_pairs()
        .iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` points.
pub fn composite_gl<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, order: usize, mut f: F) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let nodes = gl_nodes(order, 0.0, width);
    compensated_sum((0..panels).flat_map(|p| {
        let left = a + p as f64 * width;
        nodes.iter().map(move |(x, w)| (left + x, *w)).collect::<Vec<_>>()
    })
    .map(|(x, w)| w * f(x)))
}

/// `∫_{[-a,a]×[-b,b]} |y|^{s} dy` for `s > -2`, via the polar form over the four
/// quadrant triangles. Exact up to the angular Gauss–Legendre rule, which is
/// applied to a smooth integrand.
pub fn rectangle_power_integral(a: f64, b: f64, s: f64) -> f64 {
    debug_assert!(s > -2.0);
    let q = s + 2.0;
    let corner = (b / a).atan();
    // Triangle bounded by x = a: r runs to a / cos θ for θ ∈ [0, corner].
    let part_a = composite_gl(0.0, corner, 4, 24, |t| (a / t.cos()).powf(q)) / q;
    let part_b = composite_gl(0.0, std::f64::consts::FRAC_PI_2 - corner, 4, 24, |t| (b / t.cos()).powf(q)) / q;
    4.0 * (part_a + part_b)
}

/// `∫_{cell} |y|^{s} dy` over the axis-aligned rectangle `[lo, hi]` (not containing
/// the origin in its interior) by a tensor Gauss–Legendre rule on `split × split` sub-panels.
pub fn rectangle_offcenter_integral(lo: [f64; 2], hi: [f64; 2], s: f64, split: usize) -> f64 {
    let nodes_x: Vec<(f64, f64)> = sub_panels(lo[0], hi[0], split);
    let nodes_y: Vec<(f64, f64)> = sub_panels(lo[1], hi[1], split);
    compensated_sum(nodes_x.iter().flat_map(|(x, wx)| {
        nodes_y.iter().map(move |(y, wy)| wx * wy * (x * x + y * y).powf(0.5 * s))
    }))
}

fn sub_panels(a: f64, b: f64, split: usize) -> Vec<(f64, f64)> {
    let width = (b - a) / split as f64;
    (0..split)
        .flat_map(|p| gl_nodes(12, a + p as f64 * width, a + (p + 1) as f64 * width))
        .collect()
}

/// `∫_a^b |t|^{s} dt` for `s > -1`, exact.
pub fn interval_power_integral(a: f64, b: f64, s: f64) -> f64 {
    let q = s + 1.0;
    let prim = |t: f64| t.signum() * t.abs().powf(q) / q;
    prim(b) - prim(a)
}

/// Surface measure `|S^{n-1}|` of the unit sphere (2 for n = 1, 2π for n = 2).
pub fn sphere_measure(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => {
            let half = n as f64 / 2.0;
            2.0 * std::f64::consts::PI.powf(half) / libm::tgamma(half)
        }
    }
}

/// `∫_{Rⁿ ∖ [-L₁,L₁]×…} |y|^{-n-α} dy` for a box centered at the origin with
/// half-sides `half`.
pub fn box_exterior_power_integral(half: &[f64], alpha: f64) -> f64 {
    match half.len() {
        1 => 2.0 * half[0].powf(-alpha) / alpha,
        2 => {
            // Ray exit distance from the centre of a rectangle.
            let (a, b) = (half[0], half[1]);
            let corner = (b / a).atan();
            let pa = composite_gl(0.0, corner, 4, 24, |t| (a / t.cos()).powf(-alpha));
            let pb = composite_gl(0.0, std::f64::consts::FRAC_PI_2 - corner, 4, 24, |t| (b / t.cos()).powf(-alpha));
            4.0 * (pa + pb) / alpha
        }
        _ => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0e16, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn composite_gl_integrates_polynomials_exactly() {
        let v = composite_gl(0.0, 2.0, 3, 4, |x| x.powi(5));
        assert!((v - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_self_integral_matches_disc_for_s_zero() {
        // s = 0 gives the area.
        let v = rectangle_power_integral(0.5, 0.25, 0.0);
        assert!((v - 0.5).abs() < 1e-13);
    }

    #[test]
    fn rectangle_self_integral_matches_subdivided_midpoint() {
        let s = -1.5;
        let exact = rectangle_power_integral(0.5, 0.5, s);
        // Far-from-origin cells integrated by the tensor rule plus the polar
        // self integral of the inner quarter-size square must agree.
        let inner = rectangle_power_integral(0.25, 0.25, s);
        let mut outer = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let lo = [-0.5 + 0.25 * i as f64, -0.5 + 0.25 * j as f64];
                let hi = [lo[0] + 0.25, lo[1] + 0.25];
                if (1..3).contains(&i) && (1..3).contains(&j) {
                    continue;
                }
                outer += rectangle_offcenter_integral(lo, hi, s, 4);
            }
        }
        assert!(((inner + outer) - exact).abs() / exact < 1e-6, "{} vs {}", inner + outer, exact);
    }

    #[test]
    fn box_exterior_matches_disc_bound() {
        // Exterior of the unit square lies between the exteriors of the inscribed
        // and circumscribed discs.
        let alpha = 0.5;
        let v = box_exterior_power_integral(&[1.0, 1.0], alpha);
        let inscribed = 2.0 * std::f64::consts::PI / alpha;
        let circumscribed = 2.0 * std::f64::consts::PI * 2f64.sqrt().powf(-alpha) / alpha;
        assert!(v < inscribed && v > circumscribed);
    }
}
