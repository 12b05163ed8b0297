//! Dye absorption spectra and stain matrices used by the phantom.
//!
//! The four profiles are smooth Gaussian bumps placed where the dyes absorb
//! (EY near 520 nm, H near 565 nm, LG near 630 nm, OG near 480 nm). They
//! are shaped after published Papanicolaou dye spectra but are not measured
//! values.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::color::{SrgbRenderer, BANDS_NM, BAND_COUNT};
use crate::stain::{Dye, StainMatrix, DYE_COUNT};

/// `(peak nm, width nm, baseline)` per dye in canonical order.
pub const DYE_BUMPS: [(f64, f64, f64); DYE_COUNT] = [
    (522.0, 22.0, 0.02),
    (565.0, 35.0, 0.04),
    (632.0, 34.0, 0.02),
    (478.0, 26.0, 0.02),
];

/// Concentration of the single-dye transmittance used to derive RGB columns.
pub const RGB_DERIVATION_CONCENTRATION: f64 = 1.0;

/// Unnormalised absorption of `dye` at each band centre.
pub fn absorption(dye: Dye) -> [f64; BAND_COUNT] {
    let (peak, width, base) = DYE_BUMPS[dye.index()];
    BANDS_NM.map(|wl| {
        let t = (wl - peak) / width;
        base + (-0.5 * t * t).exp()
    })
}

/// Unit-sum 14-band absorption spectrum of `dye`.
pub fn ms_column(dye: Dye) -> [f64; BAND_COUNT] {
    let raw = absorption(dye);
    let sum: f64 = raw.iter().sum();
    raw.map(|v| v / sum)
}

/// The 14 × 4 multispectral stain matrix.
pub fn ms_stain_matrix() -> StainMatrix {
    let columns = Dye::ALL.map(|d| ms_column(d).to_vec());
    StainMatrix::from_columns(&columns).expect("shipped spectra are positive")
}

/// sRGB of a single-dye layer with transmittance `10^(−c·e)`.
pub fn single_dye_srgb(dye: Dye, concentration: f64) -> [f64; 3] {
    let e = ms_column(dye);
    let t = e.map(|v| 10f64.powf(-concentration * v));
    SrgbRenderer::new().transmittance_to_srgb(&t)
}

/// The 3 × 4 RGB stain matrix: optical density of each rendered single-dye
/// layer, scaled to unit column sum.
pub fn rgb_stain_matrix() -> StainMatrix {
    let columns = Dye::ALL.map(|d| {
        single_dye_srgb(d, RGB_DERIVATION_CONCENTRATION)
            .iter()
            .map(|v| v.max(crate::od::DEFAULT_FLOOR_FRACTION).recip().log10())
            .collect::<Vec<f64>>()
    });
    StainMatrix::from_columns(&columns).expect("rendered dye layers absorb in every channel")
}
