//! RGB stain unmixing: the weighted nucleus sparsity + TV ADMM solver and
//! the baselines it is compared against.

mod admm;
mod cd;
pub mod diff;
pub mod prox;
pub mod tv;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use admm::{admm_unmix, sunsal_tv_unmix, sunsal_unmix, AdmmSolver, SplitState, StepInfo};
pub use cd::{cd_unmix, cd_unmix_unclamped};
pub use diff::{diff_adjoint, diff_apply, total_variation};
pub use prox::{soft_threshold, update_weights};
pub use tv::{tv_solve, TvSolver};

use crate::cube::{Role, SpectralCube};
use crate::error::{Error, Result};
use crate::field::AbundanceField;
use crate::stain::StainMatrix;

/// Which entries of `X` the weighted ℓ1 term acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WeightMode {
    /// H row reweighted to `exp(−x_H)` every iteration, other rows zero.
    NucleusExp,
    /// H row fixed at one, other rows zero (plain ℓ1 on hematoxylin).
    UniformOne,
    /// No sparsity term.
    Zero,
    /// Every row at one: ℓ1 on the whole abundance matrix.
    AllOnes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    pub lambda_sparse: f64,
    pub lambda_tv: f64,
    pub mu: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub weight_mode: WeightMode,
}

impl SolverConfig {
    pub const DEFAULT_MU: f64 = 0.05;
    pub const DEFAULT_MAX_ITERS: usize = 500;
    pub const DEFAULT_TOL: f64 = 1e-5;

    /// Tuned parameters of the proposed method: λ = 2e-6, λ_TV = 1e-3.
    pub fn proposed() -> Self {
        SolverConfig {
            lambda_sparse: 2e-6,
            lambda_tv: 1e-3,
            mu: Self::DEFAULT_MU,
            max_iters: Self::DEFAULT_MAX_ITERS,
            tol: Self::DEFAULT_TOL,
            weight_mode: WeightMode::NucleusExp,
        }
    }

    /// SUnSAL-TV baseline: λ = 2e-4, λ_TV = 2e-2 with ℓ1 on every row.
    pub fn sunsal_tv() -> Self {
        SolverConfig {
            lambda_sparse: 2e-4,
            lambda_tv: 2e-2,
            weight_mode: WeightMode::AllOnes,
            ..Self::proposed()
        }
    }

    /// Sparse nonnegative least squares (no TV), λ = 3e-3.
    pub fn sunsal() -> Self {
        SolverConfig {
            lambda_sparse: 3e-3,
            lambda_tv: 0.0,
            weight_mode: WeightMode::AllOnes,
            ..Self::proposed()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::param("mu", "must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        if !(self.lambda_sparse >= 0.0) || !self.lambda_sparse.is_finite() {
            return Err(Error::param("lambda_sparse", "must be nonnegative"));
        }
        if !(self.lambda_tv >= 0.0) || !self.lambda_tv.is_finite() {
            return Err(Error::param("lambda_tv", "must be nonnegative"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::proposed()
    }
}

/// Iteration record of an ADMM run.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverReport {
    pub iterations: usize,
    pub primal_residual_history: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub converged: bool,
    /// `‖AX−V₁‖, ‖X−V₂‖, ‖X−V₃‖, ‖HV₃−V₄‖, ‖X−V₅‖` at termination.
    pub split_residuals: [f64; 5],
    /// `‖X‖_F` at termination.
    pub x_norm: f64,
}

/// Unmixing methods available for RGB images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Cd,
    Sunsal,
    SunsalTv,
    Proposed,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Cd, Method::Sunsal, Method::SunsalTv, Method::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cd => "cd",
            Method::Sunsal => "sunsal",
            Method::SunsalTv => "sunsal_tv",
            Method::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(alloc::format!("unknown method `{s}`")))
    }
}

/// Parameters for each iterative method.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct MethodConfigs {
    pub proposed: SolverConfig,
    pub sunsal: SolverConfig,
    pub sunsal_tv: SolverConfig,
}

impl Default for MethodConfigs {
    fn default() -> Self {
        MethodConfigs {
            proposed: SolverConfig::proposed(),
            sunsal: SolverConfig::sunsal(),
            sunsal_tv: SolverConfig::sunsal_tv(),
        }
    }
}

impl MethodConfigs {
    /// Same μ, iteration cap and tolerance for every method.
    pub fn with_schedule(mut self, mu: f64, max_iters: usize, tol: f64) -> Self {
        for cfg in [&mut self.proposed, &mut self.sunsal, &mut self.sunsal_tv] {
            cfg.mu = mu;
            cfg.max_iters = max_iters;
            cfg.tol = tol;
        }
        self
    }
}

pub(crate) fn check_input(y: &SpectralCube, a: &StainMatrix) -> Result<()> {
    if y.role() != Role::OpticalDensity {
        return Err(Error::InvalidInput("unmixing needs an optical density cube".into()));
    }
    if y.channels() != a.channels() {
        return Err(Error::ChannelMismatch {
            expected: a.channels(),
            found: y.channels(),
        });
    }
    Ok(())
}

/// Runs `method` on an optical density image.
pub fn unmix(
    method: Method,
    y: &SpectralCube,
    a: &StainMatrix,
    configs: &MethodConfigs,
) -> Result<(AbundanceField, Option<SolverReport>)> {
    match method {
        Method::Cd => cd_unmix(y, a).map(|f| (f, None)),
        Method::Sunsal => sunsal_unmix(y, a, &configs.sunsal).map(|(f, r)| (f, Some(r))),
        Method::SunsalTv => sunsal_tv_unmix(y, a, &configs.sunsal_tv).map(|(f, r)| (f, Some(r))),
        Method::Proposed => admm_unmix(y, a, &configs.proposed).map(|(f, r)| (f, Some(r))),
    }
}
