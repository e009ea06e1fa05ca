//! Discrete convolution with a translation-invariant weight on a uniform grid.
//!
//! For `m` points per axis the weight is tabulated at every lattice offset in
//! `[-(m-1), m-1]ⁿ`. Circular FFTs of length `2m` per axis reproduce the
//! linear convolution on the grid exactly (no wrap-around reaches the output
//! cells).

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// `out[x] = Σ_y w(x − y) f[y]` on an `mⁿ` grid.
pub struct Convolution {
    m: usize,
    dim: usize,
    table: Vec<f64>,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Convolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolution").field("m", &self.m).field("dim", &self.dim).finish()
    }
}

impl Convolution {
    /// Tabulates `weight(k)` for every offset `k` (in cells; second entry 0 in 1-D).
    pub fn new<W: Fn([i64; 2]) -> f64 + Sync>(m: usize, dim: usize, weight: W) -> Self {
        let side = 2 * m - 1;
        let half = m as i64 - 1;
        let table: Vec<f64> = match dim {
            1 => (0..side).map(|a| weight([a as i64 - half, 0])).collect(),
            _ => (0..side * side)
                .into_par_iter()
                .map(|t| weight([(t / side) as i64 - half, (t % side) as i64 - half]))
                .collect(),
        };
        let p = 2 * m;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(p);
        let inverse = planner.plan_fft_inverse(p);
        let mut conv = Self { m, dim, table, spectrum: Vec::new(), forward, inverse };
        let mut padded = vec![Complex64::new(0.0, 0.0); p.pow(dim as u32)];
        let wrap = |k: i64| k.rem_euclid(p as i64) as usize;
        if dim == 1 {
            for k in -half..=half {
                padded[wrap(k)].re = conv.weight_at([k, 0]);
            }
        } else {
            for a in -half..=half {
                for b in -half..=half {
                    padded[wrap(a) * p + wrap(b)].re = conv.weight_at([a, b]);
                }
            }
        }
        conv.transform(&mut padded, false);
        conv.spectrum = padded;
        conv
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    /// Tabulated weight at offset `k`, zero outside the table.
    pub fn weight_at(&self, k: [i64; 2]) -> f64 {
        let half = self.m as i64 - 1;
        let side = 2 * self.m - 1;
        if k[0].abs() > half || k[1].abs() > half {
            return 0.0;
        }
        match self.dim {
            1 => self.table[(k[0] + half) as usize],
            _ => self.table[(k[0] + half) as usize * side + (k[1] + half) as usize],
        }
    }

    /// Sum of the whole weight table, in table order with compensation.
    pub fn table_sum(&self) -> f64 {
        crate::quadrature::compensated_sum(self.table.iter().copied())
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let p = 2 * self.m;
        if self.dim == 1 {
            plan.process(data);
            return;
        }
        data.par_chunks_mut(p).for_each(|row| plan.process(row));
        let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
        transpose(data, &mut t, p);
        t.par_chunks_mut(p).for_each(|row| plan.process(row));
        transpose(&t, data, p);
    }

    /// Fast path via FFT.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let m = self.m;
        let p = 2 * m;
        assert_eq!(f.len(), m.pow(self.dim as u32));
        let mut buf = vec![Complex64::new(0.0, 0.0); p.pow(self.dim as u32)];
        if self.dim == 1 {
            for (i, v) in f.iter().enumerate() {
                buf[i].re = *v;
            }
        } else {
            for i in 0..m {
                for j in 0..m {
                    buf[i * p + j].re = f[i * m + j];
                }
            }
        }
        self.transform(&mut buf, false);
        buf.par_iter_mut().zip(self.spectrum.par_iter()).for_each(|(a, b)| *a *= b);
        self.transform(&mut buf, true);
        let scale = 1.0 / buf.len() as f64;
        if self.dim == 1 {
            buf[..m].iter().map(|c| c.re * scale).collect()
        } else {
            (0..m * m).map(|t| buf[(t / m) * p + t % m].re * scale).collect()
        }
    }

    /// Quadratic-cost reference path.
    pub fn apply_direct(&self, f: &[f64]) -> Vec<f64> {
        let m = self.m;
        let n = f.len();
        let coords = |t: usize| -> [i64; 2] {
            if self.dim == 1 { [t as i64, 0] } else { [(t / m) as i64, (t % m) as i64] }
        };
        (0..n)
            .into_par_iter()
            .map(|x| {
                let cx = coords(x);
                crate::quadrature::compensated_sum((0..n).filter(|&y| f[y] != 0.0).map(|y| {
                    let cy = coords(y);
                    self.weight_at([cx[0] - cy[0], cx[1] - cy[1]]) * f[y]
                }))
            })
            .collect()
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], p: usize) {
    dst.par_chunks_mut(p).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = src[i * p + j];
        }
    });
}
