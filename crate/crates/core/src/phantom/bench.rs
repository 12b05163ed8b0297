use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{generate, observe, PhantomSpec, PhantomTruth};
use crate::calib::{calibration_coefficient, normalize_abundance, robust_max, single_dye_abundance, DEFAULT_TOP_PERCENT};
use crate::cube::Grid;
use crate::error::Result;
use crate::field::AbundanceField;
use crate::metrics::{evaluate, EvalResult};
use crate::solver::{admm_unmix, unmix, Method, MethodConfigs, SolverConfig, WeightMode};
use crate::stain::{ms_unmix, Dye, DYE_COUNT};

/// Concentrations of the simulated single-stain calibration slides.
const CALIBRATION_LEVELS: usize = 32;
const CALIBRATION_SEED_OFFSET: u64 = 0x5eed_ca11;
/// Ground-truth robust maxima at or below this leave the plane unscaled.
const ABSENT_DYE_LEVEL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BenchmarkRow {
    pub seed: u64,
    pub method: Method,
    pub eval: EvalResult,
    /// Normalised H abundance summed over pixels outside the nucleus mask.
    pub h_false_positive: f64,
    /// `None` for non-iterative methods.
    pub iterations: Option<usize>,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub lambda: f64,
    pub lambda_tv: f64,
    pub sre_db: f64,
    pub rmse: f64,
}

/// ADMM schedule and regularisation weights tuned on the default phantom.
///
/// The phantom's abundances and noise level differ in scale from clinical
/// slides, so the clinical defaults of [`SolverConfig::proposed`] are far too
/// weak here.
pub fn phantom_method_configs() -> MethodConfigs {
    let schedule = SolverConfig {
        mu: 0.02,
        max_iters: SolverConfig::DEFAULT_MAX_ITERS,
        tol: SolverConfig::DEFAULT_TOL,
        ..SolverConfig::proposed()
    };
    MethodConfigs {
        proposed: SolverConfig {
            lambda_sparse: 1e-4,
            lambda_tv: 5e-5,
            weight_mode: WeightMode::NucleusExp,
            ..schedule
        },
        sunsal: SolverConfig {
            lambda_sparse: 1e-4,
            lambda_tv: 0.0,
            weight_mode: WeightMode::AllOnes,
            ..schedule
        },
        sunsal_tv: SolverConfig {
            lambda_sparse: 1e-4,
            lambda_tv: 5e-5,
            weight_mode: WeightMode::AllOnes,
            ..schedule
        },
    }
}

/// Sum of positive H abundance outside `nucleus`.
pub fn h_false_positive_mass(field: &AbundanceField, nucleus: &[bool]) -> f64 {
    field
        .plane(Dye::H)
        .iter()
        .zip(nucleus)
        .filter(|(_, inside)| !**inside)
        .map(|(v, _)| v.max(0.0))
        .sum()
}

/// Per-dye ratios `p` measured on simulated single-stain slides observed
/// at the phantom's noise level.
pub fn calibration_from_single_stains(truth: &PhantomTruth, spec: &PhantomSpec) -> Result<[f64; DYE_COUNT]> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(CALIBRATION_SEED_OFFSET));
    let grid = Grid::new(CALIBRATION_LEVELS, 1);
    let mut p = [0.0; DYE_COUNT];
    for dye in Dye::ALL {
        let mut field = AbundanceField::zeros(grid);
        for (k, v) in field.plane_mut(dye).iter_mut().enumerate() {
            *v = 1.5 * (k + 1) as f64 / CALIBRATION_LEVELS as f64;
        }
        let ms = observe(truth.ms_matrix.render(&field), spec, &mut rng)?;
        let rgb = observe(truth.rgb_matrix.render(&field), spec, &mut rng)?;
        let s_ms = single_dye_abundance(&ms, &truth.ms_matrix.column(dye))?;
        let s_rgb = single_dye_abundance(&rgb, &truth.rgb_matrix.column(dye))?;
        p[dye.index()] = calibration_coefficient(&s_rgb, &s_ms)?;
    }
    Ok(p)
}

/// One phantom prepared for scoring: normalised MS ground truth and the
/// calibration that maps RGB estimates onto it.
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub spec: PhantomSpec,
    pub truth: PhantomTruth,
    /// MS pseudoinverse abundances divided by `q`.
    pub ground_truth: AbundanceField,
    pub p: [f64; DYE_COUNT],
    pub q: [f64; DYE_COUNT],
    nucleus: Vec<bool>,
}

impl BenchmarkCase {
    pub fn new(spec: &PhantomSpec) -> Result<Self> {
        let truth = generate(spec)?;
        let gt = ms_unmix(&truth.ms_od, &truth.ms_matrix)?;
        let p = calibration_from_single_stains(&truth, spec)?;
        let mut q = [0.0; DYE_COUNT];
        for dye in Dye::ALL {
            let top = robust_max(gt.plane(dye), DEFAULT_TOP_PERCENT)?;
            q[dye.index()] = if top > ABSENT_DYE_LEVEL { top } else { 1.0 };
        }
        let ground_truth = normalize_abundance(&gt, &q)?;
        let nucleus = truth.nucleus_mask();
        Ok(BenchmarkCase {
            spec: *spec,
            truth,
            ground_truth,
            p,
            q,
            nucleus,
        })
    }

    /// Calibrates and normalises a raw RGB estimate.
    pub fn normalise(&self, est: &AbundanceField) -> Result<AbundanceField> {
        normalize_abundance(&est.scale_planes(&self.p), &self.q)
    }

    pub fn score(&self, method: Method, configs: &MethodConfigs) -> Result<BenchmarkRow> {
        let (est, report) = unmix(method, &self.truth.rgb_od, &self.truth.rgb_matrix, configs)?;
        let est = self.normalise(&est)?;
        Ok(BenchmarkRow {
            seed: self.spec.seed,
            method,
            eval: evaluate(&self.ground_truth, &est)?,
            h_false_positive: h_false_positive_mass(&est, &self.nucleus),
            iterations: report.as_ref().map(|r| r.iterations),
            converged: report.is_none_or(|r| r.converged),
        })
    }

    /// Scores the ADMM solver with an explicit configuration.
    pub fn score_config(&self, cfg: &SolverConfig) -> Result<EvalResult> {
        let (est, _) = admm_unmix(&self.truth.rgb_od, &self.truth.rgb_matrix, cfg)?;
        evaluate(&self.ground_truth, &self.normalise(&est)?)
    }
}

/// Scores every method on the phantom generated from `spec`.
pub fn benchmark_seed(spec: &PhantomSpec, methods: &[Method], configs: &MethodConfigs) -> Result<Vec<BenchmarkRow>> {
    let case = BenchmarkCase::new(spec)?;
    methods.iter().map(|m| case.score(*m, configs)).collect()
}

/// SRE of the ADMM solver over a `(λ, λ_TV)` grid, `λ` varying slowest.
pub fn sweep_seed(
    spec: &PhantomSpec,
    lambdas: &[f64],
    lambda_tvs: &[f64],
    base: &SolverConfig,
) -> Result<Vec<SweepRow>> {
    let case = BenchmarkCase::new(spec)?;
    let mut rows = Vec::with_capacity(lambdas.len() * lambda_tvs.len());
    for &lambda in lambdas {
        for &lambda_tv in lambda_tvs {
            let cfg = SolverConfig {
                lambda_sparse: lambda,
                lambda_tv,
                ..*base
            };
            let eval = case.score_config(&cfg)?;
            rows.push(SweepRow {
                lambda,
                lambda_tv,
                sre_db: eval.sre_db,
                rmse: eval.rmse,
            });
        }
    }
    Ok(rows)
}
