//! ADMM for
//!
//! ```text
//! min ½‖V₁ − Y‖² + λ‖W ⊙ V₂‖₁ + λ_TV‖V₄‖₁ + ι₊(V₅)
//! s.t. V₁ = AX, V₂ = X, V₃ = X, V₄ = HV₃, V₅ = X
//! ```
//!
//! Each iteration refreshes the weights from the current H row, solves the
//! 4×4 normal equations `(AᵀA + 3I) X = Aᵀ(V₁+D₁) + (V₂+D₂) + (V₃+D₃) + (V₅+D₅)`
//! pixel by pixel, updates the split variables by their proximal maps and
//! finally ascends the scaled multipliers `D`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::diff::{diff_adjoint, diff_apply};
use super::prox::{soft_threshold, update_weights};
use super::tv::TvSolver;
use super::{check_input, SolverConfig, SolverReport, WeightMode};
use crate::cube::{Grid, SpectralCube};
use crate::error::{Error, Result};
use crate::field::AbundanceField;
use crate::linalg::Spd4;
use crate::stain::{Dye, StainMatrix, DYE_COUNT};

const R: usize = DYE_COUNT;

/// Primal iterate, splitting variables and scaled multipliers.
///
/// `x`, `v2`, `v3`, `v5` and their multipliers are `4 × n`; `v1`/`d1` are
/// `channels × n`; `v4`/`d4` are `8 × n` (horizontal block, then vertical).
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub x: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub v3: Vec<f64>,
    pub v4: Vec<f64>,
    pub v5: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
    pub d5: Vec<f64>,
}

impl SplitState {
    fn zeros(channels: usize, n: usize) -> Self {
        SplitState {
            x: vec![0.0; R * n],
            v1: vec![0.0; channels * n],
            v2: vec![0.0; R * n],
            v3: vec![0.0; R * n],
            v4: vec![0.0; 2 * R * n],
            v5: vec![0.0; R * n],
            d1: vec![0.0; channels * n],
            d2: vec![0.0; R * n],
            d3: vec![0.0; R * n],
            d4: vec![0.0; 2 * R * n],
            d5: vec![0.0; R * n],
        }
    }
}

/// Diagnostics of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// `‖X⁺ − X‖ / ‖X⁺‖`, zero when X did not move.
    pub relative_change: f64,
    pub primal_residual: f64,
    pub split_residuals: [f64; 5],
    pub objective: f64,
}

#[derive(Debug)]
pub struct AdmmSolver<'a> {
    y: &'a [f64],
    a: &'a StainMatrix,
    grid: Grid,
    cfg: SolverConfig,
    normal: Spd4,
    tv: TvSolver,
    state: SplitState,
    weights: Vec<f64>,
    ax: Vec<f64>,
    hv3: Vec<f64>,
    buf4: Vec<f64>,
    buf8: Vec<f64>,
    iteration: usize,
}

impl<'a> AdmmSolver<'a> {
    /// Starts from `X = V = D = 0`.
    pub fn new(y: &'a SpectralCube, a: &'a StainMatrix, cfg: SolverConfig) -> Result<Self> {
        check_input(y, a)?;
        Self::from_slice(y.data(), y.grid(), a, cfg)
    }

    /// `y` is a planar `channels × n` optical density field.
    pub fn from_slice(y: &'a [f64], grid: Grid, a: &'a StainMatrix, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let m = a.channels();
        let n = grid.len();
        if y.len() != m * n {
            return Err(Error::ShapeMismatch(alloc::format!(
                "observation has {} samples, expected {}",
                y.len(),
                m * n
            )));
        }
        if n == 0 {
            return Err(Error::Empty("image"));
        }
        // AᵀA + 3I, factored once.
        let mut normal = [[0.0; R]; R];
        for (i, row) in normal.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..m)
                    .map(|c| a.get(c, Dye::ALL[i]) * a.get(c, Dye::ALL[j]))
                    .sum::<f64>();
                if i == j {
                    *v += 3.0;
                }
            }
        }
        let normal = Spd4::new(normal)?;
        let mut weights = vec![0.0; R * n];
        match cfg.weight_mode {
            WeightMode::NucleusExp | WeightMode::Zero => {}
            WeightMode::UniformOne => {
                let h = Dye::H.index();
                weights[h * n..(h + 1) * n].fill(1.0);
            }
            WeightMode::AllOnes => weights.fill(1.0),
        }
        Ok(AdmmSolver {
            y,
            a,
            grid,
            cfg,
            normal,
            tv: TvSolver::new(grid),
            state: SplitState::zeros(m, n),
            weights,
            ax: vec![0.0; m * n],
            hv3: vec![0.0; 2 * R * n],
            buf4: vec![0.0; R * n],
            buf8: vec![0.0; 2 * R * n],
            iteration: 0,
        })
    }

    pub fn state(&self) -> &SplitState {
        &self.state
    }

    /// Current weight matrix `W` (`4 × n`).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn apply_a(&self, x: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        let m = self.a.channels();
        for c in 0..m {
            let dst = &mut out[c * n..(c + 1) * n];
            dst.fill(0.0);
            for dye in Dye::ALL {
                let w = self.a.get(c, dye);
                let src = &x[dye.index() * n..(dye.index() + 1) * n];
                for (o, v) in dst.iter_mut().zip(src) {
                    *o += w * v;
                }
            }
        }
    }

    /// One full ADMM sweep (weights, X, V, D).
    pub fn step(&mut self) -> Result<StepInfo> {
        let n = self.grid.len();
        let m = self.a.channels();
        let mu = self.cfg.mu;
        self.iteration += 1;

        if self.cfg.weight_mode == WeightMode::NucleusExp {
            let h = Dye::H.index();
            update_weights(
                &self.state.x[h * n..(h + 1) * n],
                &mut self.weights[h * n..(h + 1) * n],
            );
        }

        // X-update.
        let mut change2 = 0.0;
        let mut norm2 = 0.0;
        {
            let s = &mut self.state;
            for i in 0..n {
                let mut rhs = [0.0; R];
                for (d, r) in rhs.iter_mut().enumerate() {
                    let k = d * n + i;
                    let mut acc = 0.0;
                    for c in 0..m {
                        acc += self.a.get(c, Dye::ALL[d]) * (s.v1[c * n + i] + s.d1[c * n + i]);
                    }
                    *r = acc + (s.v2[k] + s.d2[k]) + (s.v3[k] + s.d3[k]) + (s.v5[k] + s.d5[k]);
                }
                let x = self.normal.solve(rhs);
                for (d, xd) in x.iter().enumerate() {
                    let k = d * n + i;
                    let old = s.x[k];
                    change2 += (xd - old) * (xd - old);
                    norm2 += xd * xd;
                    s.x[k] = *xd;
                }
            }
        }
        if self.state.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                iteration: self.iteration,
            });
        }
        let relative_change = if change2 == 0.0 {
            0.0
        } else {
            change2.sqrt() / norm2.sqrt().max(f64::MIN_POSITIVE)
        };

        let mut ax = core::mem::take(&mut self.ax);
        self.apply_a(&self.state.x, &mut ax);
        self.ax = ax;

        let s = &mut self.state;
        // V1: averaging of the data term prox.
        for ((v, y), (ax, d)) in s.v1.iter_mut().zip(self.y).zip(self.ax.iter().zip(&s.d1)) {
            *v = (y + mu * (ax - d)) / (1.0 + mu);
        }
        // V2: weighted soft threshold.
        let scale = self.cfg.lambda_sparse / mu;
        for ((v, w), (x, d)) in s.v2.iter_mut().zip(&self.weights).zip(s.x.iter().zip(&s.d2)) {
            *v = soft_threshold(x - d, scale * w);
        }
        // V3: (HᵀH + I)⁻¹ (X − D3 + Hᵀ(V4 + D4)).
        for (b, (v, d)) in self.buf8.iter_mut().zip(s.v4.iter().zip(&s.d4)) {
            *b = v + d;
        }
        diff_adjoint(&self.buf8, R, self.grid, &mut self.buf4);
        for ((v, g), (x, d)) in s.v3.iter_mut().zip(&self.buf4).zip(s.x.iter().zip(&s.d3)) {
            *v = x - d + g;
        }
        self.tv.solve(&mut s.v3);
        // V4: soft threshold of HV3 − D4.
        diff_apply(&s.v3, R, self.grid, &mut self.hv3);
        let tau = self.cfg.lambda_tv / mu;
        for (v, (h, d)) in s.v4.iter_mut().zip(self.hv3.iter().zip(&s.d4)) {
            *v = soft_threshold(h - d, tau);
        }
        // V5: projection onto the nonnegative orthant.
        for (v, (x, d)) in s.v5.iter_mut().zip(s.x.iter().zip(&s.d5)) {
            *v = (x - d).max(0.0);
        }

        // Multipliers; the increments are the split residuals.
        let mut r2 = [0.0; 5];
        let ascend = |d: &mut [f64], v: &[f64], g: &[f64], acc: &mut f64| {
            for ((d, v), g) in d.iter_mut().zip(v).zip(g) {
                let r = g - v;
                *d -= r;
                *acc += r * r;
            }
        };
        ascend(&mut s.d1, &s.v1, &self.ax, &mut r2[0]);
        ascend(&mut s.d2, &s.v2, &s.x, &mut r2[1]);
        ascend(&mut s.d3, &s.v3, &s.x, &mut r2[2]);
        ascend(&mut s.d4, &s.v4, &self.hv3, &mut r2[3]);
        ascend(&mut s.d5, &s.v5, &s.x, &mut r2[4]);
        let split_residuals = r2.map(|v| v.sqrt());
        let primal_residual = r2.iter().sum::<f64>().sqrt();

        let objective = self.objective();
        Ok(StepInfo {
            relative_change,
            primal_residual,
            split_residuals,
            objective,
        })
    }

    /// Objective at `max(X, 0)` with the current weights.
    pub fn objective(&mut self) -> f64 {
        let n = self.grid.len();
        let m = self.a.channels();
        for (b, x) in self.buf4.iter_mut().zip(&self.state.x) {
            *b = x.max(0.0);
        }
        let xp = core::mem::take(&mut self.buf4);
        let mut ax = vec![0.0; m * n];
        self.apply_a(&xp, &mut ax);
        let fit: f64 = ax.iter().zip(self.y).map(|(a, y)| (a - y) * (a - y)).sum::<f64>() * 0.5;
        let sparse: f64 = xp.iter().zip(&self.weights).map(|(x, w)| (w * x).abs()).sum::<f64>();
        diff_apply(&xp, R, self.grid, &mut self.buf8);
        let tv: f64 = self.buf8.iter().map(|v| v.abs()).sum();
        self.buf4 = xp;
        fit + self.cfg.lambda_sparse * sparse + self.cfg.lambda_tv * tv
    }

    /// Iterates until the relative change drops below `tol` or the cap is hit.
    pub fn run(mut self) -> Result<(AbundanceField, SolverReport)> {
        let mut report = SolverReport::default();
        for _ in 0..self.cfg.max_iters {
            let info = self.step()?;
            report.iterations += 1;
            report.primal_residual_history.push(info.primal_residual);
            report.objective_history.push(info.objective);
            report.split_residuals = info.split_residuals;
            // The first sweep only moves Y into V1; X is still zero.
            if self.iteration > 1 && info.relative_change < self.cfg.tol {
                report.converged = true;
                break;
            }
        }
        report.x_norm = self.state.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut field = AbundanceField::from_planes(self.grid, self.state.x)?;
        field.clamp_nonnegative();
        Ok((field, report))
    }
}

/// Weighted nucleus sparsity + TV + nonnegativity unmixing.
pub fn admm_unmix(
    y: &SpectralCube,
    a: &StainMatrix,
    cfg: &SolverConfig,
) -> Result<(AbundanceField, SolverReport)> {
    AdmmSolver::new(y, a, *cfg)?.run()
}

/// SUnSAL-TV: ℓ1 on every abundance row plus TV and nonnegativity.
pub fn sunsal_tv_unmix(
    y: &SpectralCube,
    a: &StainMatrix,
    cfg: &SolverConfig,
) -> Result<(AbundanceField, SolverReport)> {
    let cfg = SolverConfig {
        weight_mode: WeightMode::AllOnes,
        ..*cfg
    };
    admm_unmix(y, a, &cfg)
}

/// Sparse nonnegative least squares: SUnSAL-TV with the TV weight forced to zero.
pub fn sunsal_unmix(
    y: &SpectralCube,
    a: &StainMatrix,
    cfg: &SolverConfig,
) -> Result<(AbundanceField, SolverReport)> {
    let cfg = SolverConfig {
        lambda_tv: 0.0,
        ..*cfg
    };
    sunsal_tv_unmix(y, a, &cfg)
}
