use super::grid::{dist, Grid};

/// Squared 1-D distance transform (lower envelope of parabolas) for samples at
/// spacing `h`. Infinite entries are not sites.
fn envelope(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n);
    for q in (0..n).filter(|&q| f[q].is_finite()) {
        let xq = q as f64 * h;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let xp = p as f64 * h;
                    let s = ((f[q] + xq * xq) - (f[p] + xp * xp)) / (2.0 * (xq - xp));
                    if s <= *z.last().expect("paired with v") {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        return vec![f64::INFINITY; n];
    }
    let mut k = 0;
    (0..n)
        .map(|q| {
            let xq = q as f64 * h;
            while k + 1 < v.len() && z[k + 1] < xq {
                k += 1;
            }
            let d = xq - v[k] as f64 * h;
            d * d + f[v[k]]
        })
        .collect()
}

/// Exact Euclidean distance from every cell centre to the nearest centre whose
/// `sites` flag is set (separable two-pass transform).
pub fn distance_transform(grid: &Grid, sites: &[bool]) -> Vec<f64> {
    let m = grid.points_per_axis();
    let mut sq: Vec<f64> = sites.iter().map(|&s| if s { 0.0 } else { f64::INFINITY }).collect();
    if grid.dim() == 1 {
        return envelope(&sq, grid.h(0)).into_iter().map(f64::sqrt).collect();
    }
    // Pass along the second axis (contiguous rows).
    for row in sq.chunks_mut(m) {
        let out = envelope(row, grid.h(1));
        row.copy_from_slice(&out);
    }
    // Pass along the first axis (strided columns).
    let mut col = vec![0.0; m];
    for j in 0..m {
        for i in 0..m {
            col[i] = sq[i * m + j];
        }
        let out = envelope(&col, grid.h(0));
        for i in 0..m {
            sq[i * m + j] = out[i];
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Quadratic-cost reference for [`distance_transform`].
pub fn brute_force_distance(grid: &Grid, sites: &[bool]) -> Vec<f64> {
    let centers = grid.centers();
    let site_pts: Vec<_> = centers.iter().zip(sites).filter(|(_, &s)| s).map(|(c, _)| *c).collect();
    centers
        .iter()
        .map(|c| site_pts.iter().map(|s| dist(c, s)).fold(f64::INFINITY, f64::min))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};

    #[test]
    fn matches_brute_force_on_random_sites() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for m in [8, 13, 24] {
            let g = Grid::new(&[0.0, -1.0], &[2.0, 3.0], m).unwrap();
            let sites: Vec<bool> = (0..g.len()).map(|_| rng.random::<f64>() < 0.1).collect();
            let fast = distance_transform(&g, &sites);
            let slow = brute_force_distance(&g, &sites);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12 || (a.is_infinite() && b.is_infinite()));
            }
        }
    }

    #[test]
    fn one_dimensional_distance() {
        let g = Grid::interval(0.0, 8.0, 8).unwrap();
        let mut sites = vec![false; 8];
        sites[0] = true;
        sites[7] = true;
        let d = distance_transform(&g, &sites);
        assert_eq!(d, vec![0.0, 1.0, 2.0, 3.0, 3.0, 2.0, 1.0, 0.0]);
    }
}
