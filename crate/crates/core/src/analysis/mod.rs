//! Patch statistics and two-class classification of cytoplasm patches.

mod lda;
mod mwu;
mod report;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use lda::{lda_predict, lda_train, LdaModel, LdaOptions};
pub use mwu::{mann_whitney_exact_p, mann_whitney_normal_p, mann_whitney_u, MannWhitney, PValueMethod};
pub use report::{classification_report, ClassificationReport};

use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::field::AbundanceField;
use crate::stain::{Dye, DYE_COUNT};

/// Side length of the square patches used for classification.
pub const PATCH_SIZE: usize = 5;

/// Endocervical cells versus lobular endocervical glandular hyperplasia.
/// LEGH is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Label {
    #[cfg_attr(feature = "serde", serde(rename = "EC"))]
    Ec,
    #[cfg_attr(feature = "serde", serde(rename = "LEGH"))]
    Legh,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Ec => "EC",
            Label::Legh => "LEGH",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EC" => Ok(Label::Ec),
            "LEGH" => Ok(Label::Legh),
            _ => Err(Error::InvalidInput(alloc::format!("unknown label `{s}`"))),
        }
    }
}

/// Mean and relative dye abundance of one patch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatchFeatures {
    pub mean_abundance: [f64; DYE_COUNT],
    pub relative_abundance: [f64; DYE_COUNT],
}

impl PatchFeatures {
    pub fn relative(&self, dye: Dye) -> f64 {
        self.relative_abundance[dye.index()]
    }
}

/// A labelled patch feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchSample {
    pub label: Label,
    pub features: PatchFeatures,
}

fn window(width: usize, height: usize, cx: usize, cy: usize, size: usize) -> Result<(usize, usize)> {
    let half = size / 2;
    let oob = Error::OutOfBounds { cx, cy, size };
    if size == 0 || cx < half || cy < half {
        return Err(oob);
    }
    let (x0, y0) = (cx - half, cy - half);
    if x0 + size > width || y0 + size > height {
        return Err(oob);
    }
    Ok((x0, y0))
}

/// Per-channel mean over the `size × size` window centred on `(cx, cy)`.
pub fn patch_mean(cube: &SpectralCube, cx: usize, cy: usize, size: usize) -> Result<Vec<f64>> {
    let (x0, y0) = window(cube.width(), cube.height(), cx, cy, size)?;
    let grid = cube.grid();
    let count = (size * size) as f64;
    Ok((0..cube.channels())
        .map(|c| {
            let plane = cube.plane(c);
            let mut sum = 0.0;
            for y in y0..y0 + size {
                for x in x0..x0 + size {
                    sum += plane[grid.index(x, y)];
                }
            }
            sum / count
        })
        .collect())
}

/// Mean abundance over the patch and its share of the total.
pub fn extract_patch_features(
    field: &AbundanceField,
    cx: usize,
    cy: usize,
    size: usize,
) -> Result<PatchFeatures> {
    let grid = field.grid();
    let (x0, y0) = window(grid.width, grid.height, cx, cy, size)?;
    let count = (size * size) as f64;
    let mut mean = [0.0; DYE_COUNT];
    for dye in Dye::ALL {
        let plane = field.plane(dye);
        let mut sum = 0.0;
        for y in y0..y0 + size {
            for x in x0..x0 + size {
                sum += plane[grid.index(x, y)];
            }
        }
        mean[dye.index()] = sum / count;
    }
    if mean.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidInput("patch has negative mean abundance".into()));
    }
    let total: f64 = mean.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroPatch);
    }
    Ok(PatchFeatures {
        mean_abundance: mean,
        relative_abundance: mean.map(|m| m / total),
    })
}
