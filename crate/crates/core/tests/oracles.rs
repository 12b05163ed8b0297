use nalgebra::{DMatrix, DVector};
use papsmix_core::analysis::{mann_whitney_u, PValueMethod};
use papsmix_core::calib::calibration_coefficient;
use papsmix_core::solver::{
    diff_adjoint, diff_apply, soft_threshold, tv_solve, AdmmSolver, SolverConfig, WeightMode,
};
use papsmix_core::phantom::spectra::rgb_stain_matrix;
use papsmix_core::stain::ms_unmix;
use papsmix_core::{Grid, Role, SpectralCube, StainMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_diff(grid: Grid) -> DMatrix<f64> {
    let n = grid.len();
    let mut h = DMatrix::zeros(2 * n, n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let mut out = vec![0.0; 2 * n];
        diff_apply(&e, 1, grid, &mut out);
        for (r, v) in out.iter().enumerate() {
            h[(r, i)] = *v;
        }
    }
    h
}

#[test]
fn tv_solve_matches_dense_direct_solve() {
    let grid = Grid::new(8, 8);
    let n = grid.len();
    let h = dense_diff(grid);
    let m = h.transpose() * &h + DMatrix::identity(n, n);
    let lu = m.lu();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let want = lu.solve(&DVector::from_vec(b.clone())).unwrap();
        let got = tv_solve(&b, grid);
        let err = got.iter().zip(want.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }
}

#[test]
fn tv_solve_non_square_grid() {
    let grid = Grid::new(6, 5);
    let n = grid.len();
    let h = dense_diff(grid);
    let m = h.transpose() * &h + DMatrix::identity(n, n);
    let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
    let want = m.lu().solve(&DVector::from_vec(b.clone())).unwrap();
    let got = tv_solve(&b, grid);
    for (a, w) in got.iter().zip(want.iter()) {
        assert!((a - w).abs() < 1e-9);
    }
}

#[test]
fn difference_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..50 {
        let grid = Grid::new(3 + trial % 7, 2 + trial % 5);
        let rows = 1 + trial % 4;
        let n = grid.len();
        let x: Vec<f64> = (0..rows * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z: Vec<f64> = (0..2 * rows * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut hx = vec![0.0; 2 * rows * n];
        diff_apply(&x, rows, grid, &mut hx);
        let mut htz = vec![0.0; rows * n];
        diff_adjoint(&z, rows, grid, &mut htz);
        let lhs: f64 = hx.iter().zip(&z).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&htz).map(|(a, b)| a * b).sum();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((lhs - rhs).abs() < 1e-10 * nx * nz);
    }
}

#[test]
fn soft_threshold_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let v: f64 = rng.random_range(-2.0..2.0);
        let tau: f64 = rng.random_range(0.0..1.0);
        let mut best = (f64::INFINITY, 0.0);
        let steps = (8.0 / 1e-4) as i64;
        for k in 0..=steps {
            let x = -4.0 + k as f64 * 1e-4;
            let f = 0.5 * (x - v) * (x - v) + tau * x.abs();
            if f < best.0 {
                best = (f, x);
            }
        }
        assert!((soft_threshold(v, tau) - best.1).abs() < 2e-4);
    }
}

fn random_stain_matrix(rng: &mut ChaCha8Rng, channels: usize) -> StainMatrix {
    let columns: [Vec<f64>; 4] =
        core::array::from_fn(|_| (0..channels).map(|_| rng.random_range(0.05..1.0)).collect());
    StainMatrix::from_columns(&columns).unwrap()
}

fn pixel_objective(a: &StainMatrix, x: &[f64; 4], y: &[f64]) -> f64 {
    let mut ax = vec![0.0; a.channels()];
    a.apply(x, &mut ax);
    0.5 * ax.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()
}

/// Accelerated projected gradient on one 3-channel pixel.
fn nnls_projected_gradient(a: &StainMatrix, y: &[f64]) -> [f64; 4] {
    let mat = DMatrix::from_row_slice(3, 4, a.coeffs());
    let gram = mat.transpose() * &mat;
    let step = 1.0 / gram.symmetric_eigenvalues().max();
    let g: [[f64; 4]; 4] = core::array::from_fn(|i| core::array::from_fn(|j| gram[(i, j)]));
    let aty: [f64; 4] = core::array::from_fn(|d| (0..3).map(|c| a.coeffs()[c * 4 + d] * y[c]).sum());
    let mut x = [0.0f64; 4];
    let mut z = x;
    let mut t = 1.0f64;
    for _ in 0..50_000 {
        let mut next = [0.0; 4];
        for i in 0..4 {
            let grad: f64 = (0..4).map(|j| g[i][j] * z[j]).sum::<f64>() - aty[i];
            next[i] = (z[i] - step * grad).max(0.0);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        for i in 0..4 {
            z[i] = next[i] + (t - 1.0) / t_next * (next[i] - x[i]);
        }
        x = next;
        t = t_next;
    }
    x
}

#[test]
fn nnls_reduction_matches_projected_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let grid = Grid::new(8, 8);
    let n = grid.len();
    for _ in 0..20 {
        let a = rgb_stain_matrix();
        let mut y = vec![0.0; 3 * n];
        for i in 0..n {
            let x0: [f64; 4] = core::array::from_fn(|_| rng.random_range(-0.3f64..1.0).max(0.0));
            let mut obs = [0.0; 3];
            a.apply(&x0, &mut obs);
            for c in 0..3 {
                y[c * n + i] = obs[c] + rng.random_range(-0.1..0.1);
            }
        }
        let cfg = SolverConfig {
            lambda_sparse: 0.0,
            lambda_tv: 0.0,
            mu: 0.2,
            max_iters: 5_000,
            tol: 1e-10,
            weight_mode: WeightMode::Zero,
        };
        let (field, _) = AdmmSolver::from_slice(&y, grid, &a, cfg).unwrap().run().unwrap();
        let (mut f_admm, mut f_oracle) = (0.0, 0.0);
        for i in 0..n {
            let yi: Vec<f64> = (0..3).map(|c| y[c * n + i]).collect();
            let xi: [f64; 4] = core::array::from_fn(|d| field.data()[d * n + i]);
            f_admm += pixel_objective(&a, &xi, &yi);
            f_oracle += pixel_objective(&a, &nnls_projected_gradient(&a, &yi), &yi);
        }
        assert!((f_admm - f_oracle).abs() <= 1e-6 * f_oracle, "{f_admm} vs {f_oracle}");
    }
}

#[test]
fn ms_unmix_matches_gradient_descent() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let e = random_stain_matrix(&mut rng, 14);
    let grid = Grid::new(4, 3);
    let n = grid.len();
    let y: Vec<f64> = (0..14 * n).map(|_| rng.random_range(0.0..1.0)).collect();
    let cube = SpectralCube::from_planes(grid, 14, Role::OpticalDensity, y.clone()).unwrap();
    let got = ms_unmix(&cube, &e).unwrap();
    let mat = DMatrix::from_row_slice(14, 4, e.coeffs());
    let gram = mat.transpose() * &mat;
    let step = 1.0 / gram.symmetric_eigenvalues().max();
    for i in 0..n {
        let yi = DVector::from_iterator(14, (0..14).map(|c| y[c * n + i]));
        let mut x = DVector::<f64>::zeros(4);
        for _ in 0..200_000 {
            x -= step * (&gram * &x - mat.transpose() * &yi);
        }
        for d in 0..4 {
            assert!((got.data()[d * n + i] - x[d]).abs() < 1e-8);
        }
    }
}

fn choose_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = choose_subsets(n - 1, k);
    for mut s in choose_subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

#[test]
fn mann_whitney_exact_matches_enumeration() {
    let a = [0.3, 1.7, 2.2, 5.0];
    let b = [0.9, 1.1, 3.4, 4.1, 6.2];
    let r = mann_whitney_u(&a, &b).unwrap();
    assert_eq!(r.method, PValueMethod::Exact);
    let total = a.len() + b.len();
    let us: Vec<f64> = choose_subsets(total, a.len())
        .iter()
        .map(|ranks| ranks.iter().map(|r| (r + 1) as f64).sum::<f64>() - 10.0)
        .collect();
    let le = us.iter().filter(|u| **u <= r.u).count() as f64;
    let ge = us.iter().filter(|u| **u >= r.u).count() as f64;
    let want = (2.0 * le.min(ge) / us.len() as f64).min(1.0);
    assert!((r.p_two_sided - want).abs() < 1e-12);
}

#[test]
fn calibration_closed_form_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let s_rgb: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..2.0)).collect();
        let truth = rng.random_range(0.5..15.0);
        let s_ms: Vec<f64> = s_rgb.iter().map(|v| truth * v + rng.random_range(-0.2..0.2)).collect();
        let p = calibration_coefficient(&s_rgb, &s_ms).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=200_000 {
            let cand = k as f64 * 1e-4;
            let f: f64 = s_rgb.iter().zip(&s_ms).map(|(a, b)| (b - cand * a).powi(2)).sum();
            if f < best.0 {
                best = (f, cand);
            }
        }
        assert!((p - best.1).abs() < 1e-4);
    }
}
