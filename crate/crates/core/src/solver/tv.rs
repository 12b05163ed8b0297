//! Exact solve of `(HᵀH + I) v = b` on a periodic grid.
//!
//! `HᵀH` is block-circulant, so the 2-D DFT diagonalises it with eigenvalue
//! `4 sin²(πk/W) + 4 sin²(πl/H)` at frequency `(k, l)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cube::Grid;
use crate::fft::Fft2;

#[derive(Debug, Clone)]
pub struct TvSolver {
    grid: Grid,
    fft: Fft2,
    // 1 / (eigenvalue + 1) / n, row-major over (l, k)
    inv_diag: Vec<f64>,
    buf: Vec<Complex64>,
}

/// Eigenvalue of `HᵀH` at horizontal frequency `k` and vertical frequency `l`.
pub fn laplacian_eigenvalue(grid: Grid, k: usize, l: usize) -> f64 {
    let sh = (PI * k as f64 / grid.width as f64).sin();
    let sv = (PI * l as f64 / grid.height as f64).sin();
    4.0 * sh * sh + 4.0 * sv * sv
}

impl TvSolver {
    pub fn new(grid: Grid) -> Self {
        let n = grid.len() as f64;
        let mut inv_diag = Vec::with_capacity(grid.len());
        for l in 0..grid.height {
            for k in 0..grid.width {
                inv_diag.push(1.0 / ((laplacian_eigenvalue(grid, k, l) + 1.0) * n));
            }
        }
        TvSolver {
            grid,
            fft: Fft2::new(grid.width, grid.height),
            inv_diag,
            buf: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Solves one plane in place.
    pub fn solve_plane(&mut self, plane: &mut [f64]) {
        assert_eq!(plane.len(), self.grid.len());
        for (c, v) in self.buf.iter_mut().zip(plane.iter()) {
            *c = Complex64::new(*v, 0.0);
        }
        self.fft.forward(&mut self.buf);
        for (c, d) in self.buf.iter_mut().zip(&self.inv_diag) {
            *c *= d;
        }
        self.fft.inverse(&mut self.buf);
        for (v, c) in plane.iter_mut().zip(&self.buf) {
            *v = c.re;
        }
    }

    /// Solves every `n`-sample row of `field` independently, in place.
    pub fn solve(&mut self, field: &mut [f64]) {
        let n = self.grid.len();
        for plane in field.chunks_exact_mut(n) {
            self.solve_plane(plane);
        }
    }
}

/// Convenience wrapper: returns `(HᵀH + I)⁻¹ b` for an `r × n` field.
pub fn tv_solve(b: &[f64], grid: Grid) -> Vec<f64> {
    let mut out = b.to_vec();
    TvSolver::new(grid).solve(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_maps_to_zero() {
        let g = Grid::new(5, 4);
        assert!(tv_solve(&[0.0; 20], g).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constants_are_fixed_points() {
        let g = Grid::new(6, 3);
        let v = tv_solve(&[1.75; 18], g);
        assert!(v.iter().all(|x| (x - 1.75).abs() < 1e-12));
    }
}
