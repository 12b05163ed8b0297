//! Small dense linear algebra on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, Matrix4, Vector4, U4};

use crate::error::{Error, Result};

/// Relative singular-value cutoff used when forming pseudoinverses.
pub const PINV_RCOND: f64 = 1e-12;

/// Moore-Penrose pseudoinverse of a full-rank `rows × cols` matrix given in
/// row-major order. Returns the `cols × rows` result, row-major.
///
/// Fails with [`Error::RankDeficient`] if any singular value falls below
/// `PINV_RCOND · σ_max`.
pub fn pinv(rows: usize, cols: usize, data: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(data.len(), rows * cols);
    let m = DMatrix::from_row_slice(rows, cols, data);
    let svd = m.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if !(smax > 0.0) {
        return Err(Error::RankDeficient);
    }
    let cutoff = PINV_RCOND * smax;
    if svd.singular_values.iter().any(|&s| s <= cutoff) {
        return Err(Error::RankDeficient);
    }
    let p = svd.pseudo_inverse(cutoff).map_err(|_| Error::RankDeficient)?;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..cols {
        for c in 0..rows {
            out.push(p[(r, c)]);
        }
    }
    Ok(out)
}

/// Singular values of a row-major matrix, descending.
pub fn singular_values(rows: usize, cols: usize, data: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(rows, cols, data);
    let mut s: Vec<f64> = m.singular_values().iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// 2-norm condition number of a row-major matrix.
pub fn condition_number(rows: usize, cols: usize, data: &[f64]) -> f64 {
    let s = singular_values(rows, cols, data);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Cholesky factor of a 4×4 symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Spd4(Cholesky<f64, U4>);

impl Spd4 {
    pub fn new(m: [[f64; 4]; 4]) -> Result<Self> {
        let mat = Matrix4::from_fn(|r, c| m[r][c]);
        Cholesky::new(mat).map(Spd4).ok_or(Error::RankDeficient)
    }

    #[inline]
    pub fn solve(&self, rhs: [f64; 4]) -> [f64; 4] {
        let mut v = Vector4::from(rhs);
        self.0.solve_mut(&mut v);
        [v[0], v[1], v[2], v[3]]
    }
}

/// Solves the dense symmetric positive definite system `m x = b` (row-major `m`).
pub fn solve_spd(k: usize, m: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mat = DMatrix::from_row_slice(k, k, m);
    let chol = Cholesky::new(mat)?;
    let x = chol.solve(&nalgebra::DVector::from_column_slice(b));
    Some(x.iter().cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_tall_matrix_is_left_inverse() {
        let a = [1.0, 2.0, 0.0, 1.0, 3.0, -1.0];
        let p = pinv(3, 2, &a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let v: f64 = (0..3).map(|k| p[i * 3 + k] * a[k * 2 + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pinv_rejects_rank_deficient() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert_eq!(pinv(2, 2, &a), Err(Error::RankDeficient));
    }

    #[test]
    fn spd4_solves() {
        let m = [
            [4.0, 1.0, 0.0, 0.0],
            [1.0, 3.0, 0.5, 0.0],
            [0.0, 0.5, 2.0, 0.1],
            [0.0, 0.0, 0.1, 1.0],
        ];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = [0.0; 4];
        for r in 0..4 {
            b[r] = (0..4).map(|c| m[r][c] * x[c]).sum();
        }
        let got = Spd4::new(m).unwrap().solve(b);
        for i in 0..4 {
            assert!((got[i] - x[i]).abs() < 1e-12);
        }
    }
}
