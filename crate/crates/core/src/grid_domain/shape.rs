use super::grid::{dist, Point};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Implicit level-set shapes, `{x : ψ(x) < 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSet {
    /// `inner < |x - center| < outer` in the plane.
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
}

/// Geometric description of a bounded open set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Interval {
        a: f64,
        b: f64,
    },
    #[serde(rename = "box")]
    AxisBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Union {
        parts: Vec<Shape>,
    },
    Implicit {
        level_set: LevelSet,
    },
    /// `base` with the closed segment `[from, to]` removed. The removed set has
    /// measure zero, so integrals over the complement do not see it while the
    /// boundary distance does.
    Slit {
        base: Box<Shape>,
        from: Vec<f64>,
        to: Vec<f64>,
    },
}

fn pt(v: &[f64]) -> Point {
    let mut p = [0.0; 2];
    for (dst, src) in p.iter_mut().zip(v) {
        *dst = *src;
    }
    p
}

fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    dist(p, &[a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn bboxes_disjoint(a: &(Point, Point), b: &(Point, Point), dim: usize) -> bool {
    (0..dim).any(|k| a.1[k] <= b.0[k] || b.1[k] <= a.0[k])
}

/// Sorted, merged union of parameter intervals.
fn merge(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.retain(|(s, e)| e > s);
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (s, e) in v {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Interval { .. } => 1,
            Shape::AxisBox { lower, .. } => lower.len(),
            Shape::Ball { center, .. } => center.len(),
            Shape::Union { parts } => parts.first().map_or(0, Shape::dim),
            Shape::Implicit { level_set: LevelSet::Annulus { center, .. } } => center.len(),
            Shape::Slit { base, .. } => base.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(msg));
        match self {
            Shape::Interval { a, b } if !(a < b) => bad(format!("interval needs a < b (got {a}, {b})")),
            Shape::AxisBox { lower, upper }
                if lower.len() != upper.len() || lower.iter().zip(upper).any(|(l, u)| !(l < u)) =>
            {
                bad("box needs lower < upper on every axis".into())
            }
            Shape::Ball { radius, .. } if !(*radius > 0.0) => bad("ball radius must be positive".into()),
            Shape::Union { parts } if parts.is_empty() => bad("union needs at least one part".into()),
            Shape::Union { parts } => {
                let d = parts[0].dim();
                if parts.iter().any(|p| p.dim() != d) {
                    return bad("union parts must share one dimension".into());
                }
                parts.iter().try_for_each(Shape::validate)
            }
            Shape::Implicit { level_set: LevelSet::Annulus { center, inner, outer } }
                if center.len() != 2 || !(0.0 <= *inner && inner < outer) =>
            {
                bad("annulus needs a planar center and 0 <= inner < outer".into())
            }
            Shape::Slit { base, from, to } => {
                if from.len() != base.dim() || to.len() != base.dim() {
                    return bad("slit endpoints must match the base dimension".into());
                }
                base.validate()
            }
            _ => {
                let d = self.dim();
                if (1..=2).contains(&d) {
                    Ok(())
                } else {
                    bad(format!("shape dimension must be 1 or 2, got {d}"))
                }
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Shape::Interval { a, b } => *a < p[0] && p[0] < *b,
            Shape::AxisBox { lower, upper } => {
                lower.iter().zip(upper).enumerate().all(|(k, (l, u))| *l < p[k] && p[k] < *u)
            }
            Shape::Ball { center, radius } => dist(p, &pt(center)) < *radius,
            Shape::Union { parts } => parts.iter().any(|s| s.contains(p)),
            Shape::Implicit { level_set: LevelSet::Annulus { center, inner, outer } } => {
                let r = dist(p, &pt(center));
                *inner < r && r < *outer
            }
            Shape::Slit { base, from, to } => base.contains(p) && segment_distance(p, &pt(from), &pt(to)) > 0.0,
        }
    }

    /// Signed distance to the boundary, negative inside. Exact for the convex
    /// shapes and the annulus; for unions it is exact outside and a lower bound
    /// on the depth inside. The slit is ignored (it has measure zero).
    pub fn signed_distance(&self, p: &Point) -> f64 {
        match self {
            Shape::Interval { a, b } => (a - p[0]).max(p[0] - b),
            Shape::AxisBox { lower, upper } => {
                let mut outside = 0.0_f64;
                let mut inside = f64::NEG_INFINITY;
                for k in 0..lower.len() {
                    let c = 0.5 * (lower[k] + upper[k]);
                    let half = 0.5 * (upper[k] - lower[k]);
                    let q = (p[k] - c).abs() - half;
                    outside += q.max(0.0).powi(2);
                    inside = inside.max(q);
                }
                outside.sqrt() + inside.min(0.0)
            }
            Shape::Ball { center, radius } => dist(p, &pt(center)) - radius,
            Shape::Union { parts } => parts.iter().map(|s| s.signed_distance(p)).fold(f64::INFINITY, f64::min),
            Shape::Implicit { level_set: LevelSet::Annulus { center, inner, outer } } => {
                let r = dist(p, &pt(center));
                (r - outer).max(inner - r)
            }
            Shape::Slit { base, .. } => base.signed_distance(p),
        }
    }

    /// `dist(p, ∂Ω)` for `p ∈ Ω` when a closed form is available.
    pub fn exact_boundary_distance(&self, p: &Point) -> Option<f64> {
        match self {
            Shape::Interval { .. } | Shape::AxisBox { .. } | Shape::Ball { .. } | Shape::Implicit { .. } => {
                Some(-self.signed_distance(p))
            }
            Shape::Slit { base, from, to } => {
                base.exact_boundary_distance(p).map(|d| d.min(segment_distance(p, &pt(from), &pt(to))))
            }
            Shape::Union { parts } => {
                let dim = self.dim();
                let boxes: Vec<_> = parts.iter().map(Shape::bbox).collect();
                for i in 0..boxes.len() {
                    for j in i + 1..boxes.len() {
                        if !bboxes_disjoint(&boxes[i], &boxes[j], dim) {
                            return None;
                        }
                    }
                }
                parts.iter().find(|s| s.contains(p)).and_then(|s| s.exact_boundary_distance(p))
            }
        }
    }

    /// Axis-aligned bounding box.
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            Shape::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Shape::AxisBox { lower, upper } => (pt(lower), pt(upper)),
            Shape::Ball { center, radius } => {
                let c = pt(center);
                let d = center.len();
                let mut lo = c;
                let mut hi = c;
                for k in 0..d {
                    lo[k] -= radius;
                    hi[k] += radius;
                }
                (lo, hi)
            }
            Shape::Implicit { level_set: LevelSet::Annulus { center, outer, .. } } => Shape::Ball {
                center: center.clone(),
                radius: *outer,
            }
            .bbox(),
            Shape::Union { parts } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for s in parts {
                    let (l, h) = s.bbox();
                    for k in 0..2 {
                        lo[k] = lo[k].min(l[k]);
                        hi[k] = hi[k].max(h[k]);
                    }
                }
                (lo, hi)
            }
            Shape::Slit { base, .. } => base.bbox(),
        }
    }

    fn as_ball(&self) -> Option<(Point, f64)> {
        match self {
            Shape::Ball { center, radius } => Some((pt(center), *radius)),
            Shape::Implicit { level_set: LevelSet::Annulus { center, outer, .. } } => Some((pt(center), *outer)),
            _ => None,
        }
    }

    /// Diameter; exact for intervals, boxes, balls and unions of balls, the
    /// bounding-box diagonal otherwise.
    pub fn diameter(&self) -> f64 {
        match self {
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::Implicit { .. } => self.as_ball().map_or(0.0, |(_, r)| 2.0 * r),
            Shape::Slit { base, .. } => base.diameter(),
            Shape::Union { parts } => {
                let mut best = 0.0_f64;
                for (i, a) in parts.iter().enumerate() {
                    best = best.max(a.diameter());
                    for b in &parts[i + 1..] {
                        let d = match (a.as_ball(), b.as_ball()) {
                            (Some((ca, ra)), Some((cb, rb))) => dist(&ca, &cb) + ra + rb,
                            _ => {
                                let (la, ha) = a.bbox();
                                let (lb, hb) = b.bbox();
                                let lo = [la[0].min(lb[0]), la[1].min(lb[1])];
                                let hi = [ha[0].max(hb[0]), ha[1].max(hb[1])];
                                dist(&lo, &hi)
                            }
                        };
                        best = best.max(d);
                    }
                }
                best
            }
            _ => {
                let (lo, hi) = self.bbox();
                dist(&lo, &hi)
            }
        }
    }

    /// Nearest point of the closure `Ω̄`.
    pub fn project(&self, p: &Point) -> Point {
        match self {
            Shape::Interval { a, b } => [p[0].clamp(*a, *b), 0.0],
            Shape::AxisBox { lower, upper } => {
                let mut q = *p;
                for k in 0..lower.len() {
                    q[k] = q[k].clamp(lower[k], upper[k]);
                }
                q
            }
            Shape::Ball { center, radius } => {
                let c = pt(center);
                let d = dist(p, &c);
                if d <= *radius {
                    *p
                } else {
                    let s = radius / d;
                    [c[0] + s * (p[0] - c[0]), c[1] + s * (p[1] - c[1])]
                }
            }
            Shape::Implicit { level_set: LevelSet::Annulus { center, inner, outer } } => {
                let c = pt(center);
                let d = dist(p, &c);
                let (u0, u1) = if d > 0.0 { ((p[0] - c[0]) / d, (p[1] - c[1]) / d) } else { (1.0, 0.0) };
                let r = d.clamp(*inner, *outer);
                [c[0] + r * u0, c[1] + r * u1]
            }
            Shape::Union { parts } => {
                let mut best = *p;
                let mut best_d = f64::INFINITY;
                for s in parts {
                    let q = s.project(p);
                    let d = dist(p, &q);
                    if d < best_d {
                        best_d = d;
                        best = q;
                    }
                }
                best
            }
            Shape::Slit { base, .. } => base.project(p),
        }
    }

    /// Parameter intervals `t ≥ 0` with `p + t·dir ∈ Ω`, sorted and merged.
    /// `dir` must be a unit vector. Measure-zero slits are ignored.
    pub fn ray_intervals(&self, p: &Point, dir: &Point) -> Vec<(f64, f64)> {
        let raw = match self {
            Shape::Interval { a, b } => slab(p[0], dir[0], *a, *b).into_iter().collect(),
            Shape::AxisBox { lower, upper } => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for k in 0..lower.len() {
                    match slab(p[k], dir[k], lower[k], upper[k]) {
                        Some((s, e)) => {
                            lo = lo.max(s);
                            hi = hi.min(e);
                        }
                        None => return Vec::new(),
                    }
                }
                vec![(lo, hi)]
            }
            Shape::Ball { center, radius } => ball_chord(p, dir, &pt(center), *radius).into_iter().collect(),
            Shape::Implicit { level_set: LevelSet::Annulus { center, inner, outer } } => {
                let c = pt(center);
                match ball_chord(p, dir, &c, *outer) {
                    None => Vec::new(),
                    Some((s, e)) => match ball_chord(p, dir, &c, *inner) {
                        Some((si, ei)) if *inner > 0.0 => vec![(s, si.min(e)), (ei.max(s), e)],
                        _ => vec![(s, e)],
                    },
                }
            }
            Shape::Union { parts } => parts.iter().flat_map(|s| s.ray_intervals(p, dir)).collect(),
            Shape::Slit { base, .. } => base.ray_intervals(p, dir),
        };
        merge(
            raw.into_iter()
                .map(|(s, e): (f64, f64)| (s.max(0.0), e))
                .collect(),
        )
    }
}

fn slab(p: f64, d: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if d == 0.0 {
        return if lo < p && p < hi { Some((f64::NEG_INFINITY, f64::INFINITY)) } else { None };
    }
    let t1 = (lo - p) / d;
    let t2 = (hi - p) / d;
    Some((t1.min(t2), t1.max(t2)))
}

fn ball_chord(p: &Point, dir: &Point, c: &Point, r: f64) -> Option<(f64, f64)> {
    let q = [p[0] - c[0], p[1] - c[1]];
    let b = q[0] * dir[0] + q[1] * dir[1];
    let cc = q[0] * q[0] + q[1] * q[1] - r * r;
    let disc = b * b - cc;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((-b - s, -b + s))
}

/// Unit vector at polar angle `angle`.
pub fn unit(angle: f64) -> Point {
    [angle.cos(), angle.sin()]
}
