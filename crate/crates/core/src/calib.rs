//! Calibration between multispectral and RGB abundance scales, and
//! reference-value normalisation.

use alloc::vec::Vec;

use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::field::AbundanceField;
use crate::stain::DYE_COUNT;

/// Top-percent used for the robust maximum unless stated otherwise.
pub const DEFAULT_TOP_PERCENT: f64 = 1.0;

/// Per-dye MS/RGB ratios `p` and reference values `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationSet {
    pub p: [f64; DYE_COUNT],
    pub q: [f64; DYE_COUNT],
}

impl CalibrationSet {
    pub fn new(p: [f64; DYE_COUNT], q: [f64; DYE_COUNT]) -> Result<Self> {
        let set = CalibrationSet { p, q };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::param("p", "calibration ratios must be positive"));
        }
        if self.q.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::param("q", "reference values must be positive"));
        }
        Ok(())
    }

    /// Values measured on the clinical single-stain slides; a format fixture.
    pub fn reported() -> Self {
        CalibrationSet {
            p: [7.51, 13.13, 12.36, 5.79],
            q: [3.20, 6.87, 5.78, 2.97],
        }
    }

    /// Scales RGB abundances onto the MS scale.
    pub fn apply_p(&self, field: &AbundanceField) -> AbundanceField {
        field.scale_planes(&self.p)
    }
}

/// Least-squares ratio `p = (s_rgb · s_ms) / (s_rgb · s_rgb)`.
pub fn calibration_coefficient(s_rgb: &[f64], s_ms: &[f64]) -> Result<f64> {
    if s_rgb.len() != s_ms.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "calibration vectors differ in length ({} vs {})",
            s_rgb.len(),
            s_ms.len()
        )));
    }
    let num: f64 = s_rgb.iter().zip(s_ms).map(|(a, b)| a * b).sum();
    let den: f64 = s_rgb.iter().map(|a| a * a).sum();
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// Single-dye least-squares abundance `s = (eᵀy)/(eᵀe)` for every pixel.
pub fn single_dye_abundance(od: &SpectralCube, column: &[f64]) -> Result<Vec<f64>> {
    if column.len() != od.channels() {
        return Err(Error::ChannelMismatch {
            expected: od.channels(),
            found: column.len(),
        });
    }
    let ee: f64 = column.iter().map(|v| v * v).sum();
    if ee == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let n = od.pixels();
    let mut out = alloc::vec![0.0; n];
    for (c, e) in column.iter().enumerate() {
        for (o, y) in out.iter_mut().zip(od.plane(c)) {
            *o += e * y;
        }
    }
    out.iter_mut().for_each(|v| *v /= ee);
    Ok(out)
}

/// The `(100 − top_percent)`-th percentile, linearly interpolated between
/// order statistics.
pub fn robust_max(plane: &[f64], top_percent: f64) -> Result<f64> {
    if plane.is_empty() {
        return Err(Error::Empty("plane"));
    }
    if !(top_percent > 0.0 && top_percent < 100.0) {
        return Err(Error::param("percentile", "must lie in (0, 100)"));
    }
    let mut sorted = plane.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (sorted.len() - 1) as f64 * (100.0 - top_percent) / 100.0;
    let lo = rank as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Divides plane `i` by `q[i]`.
pub fn normalize_abundance(field: &AbundanceField, q: &[f64; DYE_COUNT]) -> Result<AbundanceField> {
    if q.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::param("q", "reference values must be positive"));
    }
    Ok(field.scale_planes(&q.map(|v| 1.0 / v)))
}
