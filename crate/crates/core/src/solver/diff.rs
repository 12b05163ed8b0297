//! Periodic horizontal and vertical first differences.

use crate::cube::Grid;

/// `HX = [H_h X; H_v X]` for an `rows × n` field.
///
/// `out` has `2 · rows · n` entries: the horizontal differences of every row
/// first, then the vertical ones. Each entry is `x_i − x_j` where `j` is the
/// right (resp. lower) neighbour of `i`, wrapping at the border.
pub fn diff_apply(x: &[f64], rows: usize, grid: Grid, out: &mut [f64]) {
    let n = grid.len();
    assert_eq!(x.len(), rows * n);
    assert_eq!(out.len(), 2 * rows * n);
    let (w, h) = (grid.width, grid.height);
    let (horiz, vert) = out.split_at_mut(rows * n);
    for r in 0..rows {
        let plane = &x[r * n..(r + 1) * n];
        let dh = &mut horiz[r * n..(r + 1) * n];
        let dv = &mut vert[r * n..(r + 1) * n];
        for y in 0..h {
            let down = if y + 1 == h { 0 } else { y + 1 };
            for xx in 0..w {
                let right = if xx + 1 == w { 0 } else { xx + 1 };
                let i = y * w + xx;
                dh[i] = plane[i] - plane[y * w + right];
                dv[i] = plane[i] - plane[down * w + xx];
            }
        }
    }
}

/// `HᵀZ` for a `2·rows × n` difference field, written into `out` (`rows × n`).
pub fn diff_adjoint(z: &[f64], rows: usize, grid: Grid, out: &mut [f64]) {
    let n = grid.len();
    assert_eq!(z.len(), 2 * rows * n);
    assert_eq!(out.len(), rows * n);
    let (w, h) = (grid.width, grid.height);
    let (horiz, vert) = z.split_at(rows * n);
    for r in 0..rows {
        let zh = &horiz[r * n..(r + 1) * n];
        let zv = &vert[r * n..(r + 1) * n];
        let dst = &mut out[r * n..(r + 1) * n];
        for y in 0..h {
            let up = if y == 0 { h - 1 } else { y - 1 };
            for xx in 0..w {
                let left = if xx == 0 { w - 1 } else { xx - 1 };
                let i = y * w + xx;
                dst[i] = zh[i] - zh[y * w + left] + zv[i] - zv[up * w + xx];
            }
        }
    }
}

/// Anisotropic total variation `‖HX‖₁,₁`.
pub fn total_variation(x: &[f64], rows: usize, grid: Grid) -> f64 {
    let mut d = alloc::vec![0.0; 2 * x.len()];
    diff_apply(x, rows, grid, &mut d);
    d.iter().map(|v| v.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_plane_has_no_differences() {
        let g = Grid::new(4, 3);
        let x = vec![2.5; 12];
        let mut d = vec![1.0; 24];
        diff_apply(&x, 1, g, &mut d);
        assert!(d.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn two_pixel_row_wraps() {
        let g = Grid::new(2, 1);
        let mut d = vec![0.0; 4];
        diff_apply(&[3.0, 1.0], 1, g, &mut d);
        assert_eq!(&d[..2], &[2.0, -2.0]);
        // Height 1: the vertical neighbour is the pixel itself.
        assert_eq!(&d[2..], &[0.0, 0.0]);
    }

    #[test]
    fn layout_is_horizontal_block_then_vertical_block() {
        let g = Grid::new(2, 2);
        // two rows (dyes), second is 10x the first
        let x = vec![1.0, 2.0, 4.0, 8.0, 10.0, 20.0, 40.0, 80.0];
        let mut d = vec![0.0; 16];
        diff_apply(&x, 2, g, &mut d);
        assert_eq!(&d[0..4], &[-1.0, 1.0, -4.0, 4.0]);
        assert_eq!(&d[4..8], &[-10.0, 10.0, -40.0, 40.0]);
        assert_eq!(&d[8..12], &[-3.0, -6.0, 3.0, 6.0]);
    }
}
