//! Color deconvolution with the pseudoinverse of the stain matrix.

use crate::cube::SpectralCube;
use crate::error::Result;
use crate::field::AbundanceField;
use crate::stain::{pinv_unmix, StainMatrix};

use super::check_input;

/// Minimum-norm `pinv(A)·y` per pixel, clamped at zero.
pub fn cd_unmix(y: &SpectralCube, a: &StainMatrix) -> Result<AbundanceField> {
    let mut field = cd_unmix_unclamped(y, a)?;
    field.clamp_nonnegative();
    Ok(field)
}

/// `pinv(A)·y` per pixel without clamping.
pub fn cd_unmix_unclamped(y: &SpectralCube, a: &StainMatrix) -> Result<AbundanceField> {
    check_input(y, a)?;
    pinv_unmix(y, a)
}
