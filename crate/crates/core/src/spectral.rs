//! 2D FFT on square periodic grids, row-column with transposes.
//!
//! Conventions: `forward` computes hat(u)_k = sum_x u(x) e^{-2 pi i k.x/n}
//! (unnormalized), `inverse` divides by n^2 so `inverse(forward(u)) = u`.
//! `synthesize` is the unnormalized inverse used to evaluate trigonometric
//! sums sum_k c_k e^{+2 pi i k.x}.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::exec;

pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn rows(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let scratch = fft.get_inplace_scratch_len();
        exec::for_each_row(data, n, |_, row| {
            let mut scr = vec![Complex64::default(); scratch];
            fft.process_with_scratch(row, &mut scr);
        });
    }

    fn transpose(&self, data: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                data.swap(i * n + j, j * n + i);
            }
        }
    }

    /// Unnormalized forward transform (e^{-i} kernel), in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.rows(data, &self.fwd);
        self.transpose(data);
        self.rows(data, &self.fwd);
        self.transpose(data);
    }

    /// Normalized inverse transform, in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.synthesize(data);
        let s = 1.0 / (self.n * self.n) as f64;
        exec::for_each_row(data, self.n, |_, row| {
            for v in row {
                *v *= s;
            }
        });
    }

    /// Unnormalized e^{+i}-kernel transform: evaluates
    /// sum_k data[k] e^{+2 pi i k.x} on the grid, in place.
    pub fn synthesize(&self, data: &mut [Complex64]) {
        self.rows(data, &self.inv);
        self.transpose(data);
        self.rows(data, &self.inv);
        self.transpose(data);
    }
}

/// Signed integer wavenumber for index `i` on an `n`-grid.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_plane_wave() {
        let n = 32;
        let fft = Fft2::new(n);
        // u = e^{2 pi i (3x + 5y)}
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let ph = std::f64::consts::TAU * (3.0 * i as f64 + 5.0 * j as f64) / n as f64;
                Complex64::new(ph.cos(), ph.sin())
            })
            .collect();
        let orig = data.clone();
        fft.forward(&mut data);
        // single peak at (3, 5) of magnitude n^2
        for idx in 0..n * n {
            let (i, j) = (idx / n, idx % n);
            let want = if (i, j) == (3, 5) { (n * n) as f64 } else { 0.0 };
            assert!((data[idx].norm() - want).abs() < 1e-8, "mode ({i},{j})");
        }
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn wavenumber_convention() {
        assert_eq!(wavenumber(0, 8), 0);
        assert_eq!(wavenumber(3, 8), 3);
        assert_eq!(wavenumber(4, 8), 4);
        assert_eq!(wavenumber(5, 8), -3);
        assert_eq!(wavenumber(7, 8), -1);
    }
}
