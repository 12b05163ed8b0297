//! Signal-to-reconstruction error and RMSE between abundance fields.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::AbundanceField;
use crate::stain::{Dye, DYE_COUNT};

/// Overall and per-dye scores of an estimate against ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalResult {
    pub sre_db: f64,
    pub rmse: f64,
    /// `NaN` for a dye whose ground-truth plane is identically zero.
    pub per_dye_sre_db: [f64; DYE_COUNT],
    pub per_dye_rmse: [f64; DYE_COUNT],
}

fn energies(gt: &[f64], est: &[f64]) -> (f64, f64) {
    gt.iter().zip(est).fold((0.0, 0.0), |(s, e), (g, x)| {
        (s + g * g, e + (g - x) * (g - x))
    })
}

fn check_shapes(gt: &[f64], est: &[f64]) -> Result<()> {
    if gt.len() != est.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "ground truth has {} samples, estimate {}",
            gt.len(),
            est.len()
        )));
    }
    Ok(())
}

/// `10 log10(‖gt‖² / ‖gt − est‖²)` in dB; `+∞` for an exact estimate.
pub fn sre(gt: &[f64], est: &[f64]) -> Result<f64> {
    check_shapes(gt, est)?;
    let (signal, error) = energies(gt, est);
    if signal == 0.0 {
        return Err(Error::InvalidInput("ground truth has zero energy".into()));
    }
    if error == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / error).log10())
}

/// `sqrt(‖gt − est‖² / n)` with `n` counting every sample.
pub fn rmse(gt: &[f64], est: &[f64]) -> Result<f64> {
    check_shapes(gt, est)?;
    if gt.is_empty() {
        return Ok(0.0);
    }
    let (_, error) = energies(gt, est);
    Ok((error / gt.len() as f64).sqrt())
}

pub fn evaluate(gt: &AbundanceField, est: &AbundanceField) -> Result<EvalResult> {
    if gt.grid() != est.grid() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "ground truth is {}x{}, estimate {}x{}",
            gt.grid().width,
            gt.grid().height,
            est.grid().width,
            est.grid().height
        )));
    }
    let mut per_dye_sre_db = [0.0; DYE_COUNT];
    let mut per_dye_rmse = [0.0; DYE_COUNT];
    for dye in Dye::ALL {
        let (g, e) = (gt.plane(dye), est.plane(dye));
        per_dye_sre_db[dye.index()] = sre(g, e).unwrap_or(f64::NAN);
        per_dye_rmse[dye.index()] = rmse(g, e)?;
    }
    Ok(EvalResult {
        sre_db: sre(gt.data(), est.data())?,
        rmse: rmse(gt.data(), est.data())?,
        per_dye_sre_db,
        per_dye_rmse,
    })
}
