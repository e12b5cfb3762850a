//! Centered discrete Fourier transforms on cubic grids x_j = (j − N/2)·h.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{CertError, Result};

/// Cubic grid with `size` points per axis in `dim` dimensions, row-major
/// with the last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub size: usize,
    pub step: f64,
}

impl Grid {
    pub fn new(dim: usize, size: usize, step: f64) -> Result<Self> {
        if dim == 0 || size < 2 || size % 2 != 0 || !(step > 0.0) {
            return Err(CertError::InvalidSpec(format!(
                "grid needs dim >= 1, an even size and a positive step (got {dim}, {size}, {step})"
            )));
        }
        Ok(Grid { dim, size, step })
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The grid conjugate under the transform: step 2π/(N h).
    pub fn dual(&self) -> Grid {
        Grid { dim: self.dim, size: self.size, step: 2.0 * std::f64::consts::PI / (self.size as f64 * self.step) }
    }

    pub fn cell(&self) -> f64 {
        self.step.powi(self.dim as i32)
    }

    pub fn coord(&self, j: usize) -> f64 {
        (j as f64 - (self.size / 2) as f64) * self.step
    }

    /// Coordinates of the flat index `idx`.
    pub fn point(&self, mut idx: usize, out: &mut [f64]) {
        for a in (0..self.dim).rev() {
            out[a] = self.coord(idx % self.size);
            idx /= self.size;
        }
    }

    /// Flat index of the grid origin.
    pub fn origin(&self) -> usize {
        let mut idx = 0;
        for _ in 0..self.dim {
            idx = idx * self.size + self.size / 2;
        }
        idx
    }

    fn parity(&self, mut idx: usize) -> bool {
        let mut odd = false;
        for _ in 0..self.dim {
            odd ^= (idx % self.size) % 2 == 1;
            idx /= self.size;
        }
        odd
    }
}

/// In-place unnormalized FFT along every axis.
pub fn fft_nd(data: &mut [Complex64], dim: usize, size: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(size) } else { planner.plan_fft_forward(size) };
    let total = size.pow(dim as u32);
    let mut line = vec![Complex64::new(0.0, 0.0); size];
    for a in 0..dim {
        let stride = size.pow((dim - 1 - a) as u32);
        for start in 0..total {
            // first element of a line along axis a
            if (start / stride) % size != 0 {
                continue;
            }
            for (i, v) in line.iter_mut().enumerate() {
                *v = data[start + i * stride];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                data[start + i * stride] = *v;
            }
        }
    }
}

/// Samples of ∫ f(x) e^{∓i t·x} dx on the dual grid, times `scale`.
/// `forward` selects the minus sign.
pub fn centered_transform(data: &mut [Complex64], grid: &Grid, forward: bool, scale: f64) {
    assert_eq!(data.len(), grid.len());
    for (i, v) in data.iter_mut().enumerate() {
        if grid.parity(i) {
            *v = -*v;
        }
    }
    fft_nd(data, grid.dim, grid.size, !forward);
    let half_odd = (grid.size / 2) % 2 == 1 && grid.dim % 2 == 1;
    let c = grid.cell() * scale;
    for (i, v) in data.iter_mut().enumerate() {
        let flip = grid.parity(i) ^ half_odd;
        *v *= if flip { -c } else { c };
    }
}

/// Unitary transform (2π)^{−n/2} ∫ f(x) e^{−i t·x} dx.
pub fn unitary_forward(data: &mut [Complex64], grid: &Grid) {
    let s = (2.0 * std::f64::consts::PI).powf(-(grid.dim as f64) / 2.0);
    centered_transform(data, grid, true, s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_is_fixed_by_the_unitary_transform() {
        for dim in 1..=2 {
            let size = if dim == 1 { 256 } else { 64 };
            let g = Grid::new(dim, size, (2.0 * PI / size as f64).sqrt()).unwrap();
            let mut p = vec![0.0; dim];
            let mut data: Vec<Complex64> = (0..g.len())
                .map(|i| {
                    g.point(i, &mut p);
                    Complex64::new((-0.5 * p.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
                })
                .collect();
            let orig = data.clone();
            unitary_forward(&mut data, &g);
            for (a, b) in data.iter().zip(&orig) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn shift_gives_phase() {
        let g = Grid::new(1, 128, 0.25).unwrap();
        let d = g.dual();
        let mut data: Vec<Complex64> = (0..g.len())
            .map(|j| Complex64::new((-(g.coord(j) - 1.0).powi(2)).exp(), 0.0))
            .collect();
        unitary_forward(&mut data, &g);
        for k in 0..g.size {
            let t = d.coord(k);
            let exact = Complex64::from_polar((-t * t / 4.0).exp() / 2f64.sqrt(), -t);
            assert!((data[k] - exact).norm() < 1e-9, "t={t}");
        }
    }
}
