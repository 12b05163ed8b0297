use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::Label;
use crate::error::{Error, Result};
use crate::linalg;

/// Linear discriminant `D(x) = w·x + bias`; `D(x) ≥ 0` means LEGH.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LdaModel {
    pub features: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LdaModel {
    /// The published discriminant on relative (EY, OG) abundance.
    pub fn reported() -> Self {
        LdaModel {
            features: vec!["EY".into(), "OG".into()],
            weights: vec![57.96, -65.84],
            bias: -6.99,
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "model has {} features, sample {}",
                self.weights.len(),
                x.len()
            )));
        }
        Ok(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaOptions {
    /// Add `1e-8 · trace(Σ)/k` to the pooled covariance when it is near-singular.
    pub ridge: bool,
    /// Prior probability of LEGH; the bias gains `ln(π_LEGH / π_EC)`.
    pub prior_legh: f64,
}

impl Default for LdaOptions {
    fn default() -> Self {
        LdaOptions {
            ridge: true,
            prior_legh: 0.5,
        }
    }
}

const RIDGE_SCALE: f64 = 1e-8;
const RCOND_LIMIT: f64 = 1e-12;

/// Two-class Fisher LDA with pooled within-class covariance.
pub fn lda_train(
    samples: &[(Label, Vec<f64>)],
    feature_names: Vec<String>,
    opts: LdaOptions,
) -> Result<LdaModel> {
    let k = feature_names.len();
    if k == 0 {
        return Err(Error::Empty("features"));
    }
    if samples.iter().any(|(_, x)| x.len() != k) {
        return Err(Error::ShapeMismatch("sample length differs from feature count".into()));
    }
    if !(opts.prior_legh > 0.0 && opts.prior_legh < 1.0) {
        return Err(Error::param("prior_legh", "must lie in (0, 1)"));
    }
    let class_stats = |label: Label| {
        let xs: Vec<&Vec<f64>> = samples.iter().filter(|(l, _)| *l == label).map(|(_, x)| x).collect();
        let mut mean = vec![0.0; k];
        for x in &xs {
            for (m, v) in mean.iter_mut().zip(x.iter()) {
                *m += v;
            }
        }
        let n = xs.len();
        mean.iter_mut().for_each(|m| *m /= n.max(1) as f64);
        let mut scatter = vec![0.0; k * k];
        for x in &xs {
            for i in 0..k {
                for j in 0..k {
                    scatter[i * k + j] += (x[i] - mean[i]) * (x[j] - mean[j]);
                }
            }
        }
        (n, mean, scatter)
    };
    let (n0, mean0, s0) = class_stats(Label::Ec);
    let (n1, mean1, s1) = class_stats(Label::Legh);
    if n0 < 2 {
        return Err(Error::EmptyClass("EC"));
    }
    if n1 < 2 {
        return Err(Error::EmptyClass("LEGH"));
    }
    let dof = (n0 + n1 - 2) as f64;
    let mut cov: Vec<f64> = s0.iter().zip(&s1).map(|(a, b)| (a + b) / dof).collect();

    let trace: f64 = (0..k).map(|i| cov[i * k + i]).sum();
    let near_singular = linalg::condition_number(k, k, &cov) * RCOND_LIMIT > 1.0;
    if near_singular {
        if !opts.ridge || !(trace > 0.0) {
            return Err(Error::SingularCovariance);
        }
        let eps = RIDGE_SCALE * trace / k as f64;
        for i in 0..k {
            cov[i * k + i] += eps;
        }
    }
    let delta: Vec<f64> = mean1.iter().zip(&mean0).map(|(a, b)| a - b).collect();
    let weights = linalg::solve_spd(k, &cov, &delta).ok_or(Error::SingularCovariance)?;
    let midpoint: f64 = weights
        .iter()
        .zip(mean0.iter().zip(&mean1))
        .map(|(w, (a, b))| w * 0.5 * (a + b))
        .sum();
    let bias = -midpoint + (opts.prior_legh / (1.0 - opts.prior_legh)).ln();
    Ok(LdaModel {
        features: feature_names,
        weights,
        bias,
    })
}

/// Label and score; a score of exactly zero is LEGH.
pub fn lda_predict(model: &LdaModel, x: &[f64]) -> Result<(Label, f64)> {
    let score = model.score(x)?;
    let label = if score >= 0.0 { Label::Legh } else { Label::Ec };
    Ok((label, score))
}
