//! Rendering 14-band transmittance spectra to sRGB, and sRGB to CIELAB.
//!
//! The colour-matching functions (CIE 1931 2°) and illuminant D65 are
//! tabulated at the fourteen band centres 440, 460, …, 700 nm as arithmetic
//! means of the 1 nm tables over ±10 nm. The bands only span 430 to 710 nm,
//! so the sampled white is not exactly D65; X and Z are normalised per
//! channel to land flat transmittance on the D65 white point. Y keeps the
//! usual `N = Σ ȳ I` normalisation.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cube::{IncidentLight, Role, SpectralCube};
use crate::error::{Error, Result};
use crate::od::{srgb_decode, srgb_encode};

pub const BAND_COUNT: usize = 14;

/// Band centres in nanometres.
pub const BANDS_NM: [f64; BAND_COUNT] = [
    440.0, 460.0, 480.0, 500.0, 520.0, 540.0, 560.0, 580.0, 600.0, 620.0, 640.0, 660.0, 680.0,
    700.0,
];

// (x̄, ȳ, z̄, D65) per band.
const TABLE: [[f64; 4]; BAND_COUNT] = [
    [0.333981, 0.023585, 1.683947, 103.2830],
    [0.281635, 0.061542, 1.618080, 116.8284],
    [0.102215, 0.142457, 0.836413, 113.7822],
    [0.010488, 0.335932, 0.286973, 108.8052],
    [0.072192, 0.698494, 0.086766, 106.3380],
    [0.293762, 0.944617, 0.022216, 105.1710],
    [0.595660, 0.986922, 0.004440, 100.0996],
    [0.908060, 0.864153, 0.001607, 94.0709],
    [1.045087, 0.630679, 0.000777, 89.5537],
    [0.841757, 0.381700, 0.000179, 87.0414],
    [0.453183, 0.178925, 0.000021, 82.6298],
    [0.172365, 0.064088, 0.000000, 80.7058],
    [0.049457, 0.018010, 0.000000, 77.0875],
    [0.012354, 0.004464, 0.000000, 71.8323],
];

/// D65 reference white in XYZ (Y = 1).
pub const D65_WHITE: [f64; 3] = [0.950_47, 1.0, 1.088_83];

const XYZ_TO_LINEAR_SRGB: [[f64; 3]; 3] = [
    [3.240_454_2, -1.537_138_5, -0.498_531_4],
    [-0.969_266_0, 1.876_010_8, 0.041_556_0],
    [0.055_643_4, -0.204_025_9, 1.057_225_2],
];

const LINEAR_SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

/// The band centres, 440..=700 nm step 20.
pub fn band_wavelengths() -> [f64; BAND_COUNT] {
    BANDS_NM
}

/// Precomputed weights `c̄_k I_k / N_c` for each XYZ channel.
#[derive(Debug, Clone)]
pub struct SrgbRenderer {
    weights: [[f64; BAND_COUNT]; 3],
}

impl Default for SrgbRenderer {
    fn default() -> Self {
        Self::new()
    }
}

impl SrgbRenderer {
    pub fn new() -> Self {
        let mut weights = [[0.0; BAND_COUNT]; 3];
        for (c, row) in weights.iter_mut().enumerate() {
            let mut norm = 0.0;
            for (k, w) in row.iter_mut().enumerate() {
                let t = TABLE[k];
                *w = t[c] * t[3];
                norm += *w;
            }
            let scale = D65_WHITE[c] / norm;
            row.iter_mut().for_each(|w| *w *= scale);
        }
        SrgbRenderer { weights }
    }

    pub fn transmittance_to_xyz(&self, transmittance: &[f64; BAND_COUNT]) -> [f64; 3] {
        let mut xyz = [0.0; 3];
        for (c, v) in xyz.iter_mut().enumerate() {
            *v = self.weights[c]
                .iter()
                .zip(transmittance)
                .map(|(w, s)| w * s)
                .sum();
        }
        xyz
    }

    /// Gamma-encoded sRGB in `[0, 1]³`.
    pub fn transmittance_to_srgb(&self, transmittance: &[f64; BAND_COUNT]) -> [f64; 3] {
        let xyz = self.transmittance_to_xyz(transmittance);
        let lin = mat3_mul(&XYZ_TO_LINEAR_SRGB, &xyz);
        lin.map(|o| srgb_encode(o.clamp(0.0, 1.0)).clamp(0.0, 1.0))
    }
}

fn mat3_mul(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

fn check_band_grid(wavelengths: Option<&[f64]>) -> Result<()> {
    let wl = wavelengths.ok_or(Error::WavelengthGrid)?;
    let expected = band_wavelengths();
    if wl.len() != BAND_COUNT || wl.iter().zip(&expected).any(|(a, b)| (a - b).abs() > 1e-6) {
        return Err(Error::WavelengthGrid);
    }
    Ok(())
}

/// Renders a 14-band intensity cube to a 3-channel sRGB intensity cube.
///
/// Transmittance per band is `sample / light`.
pub fn render_srgb(spec: &SpectralCube, light: &IncidentLight) -> Result<SpectralCube> {
    if spec.role() != Role::Intensity {
        return Err(Error::InvalidInput("sRGB rendering needs an intensity cube".into()));
    }
    check_band_grid(spec.wavelengths_nm())?;
    if light.channels() != BAND_COUNT {
        return Err(Error::ChannelMismatch {
            expected: BAND_COUNT,
            found: light.channels(),
        });
    }
    let renderer = SrgbRenderer::new();
    let n = spec.pixels();
    let mut data = alloc::vec![0.0; 3 * n];
    let mut t = [0.0; BAND_COUNT];
    for i in 0..n {
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = spec.plane(k)[i] / light.values()[k];
        }
        let rgb = renderer.transmittance_to_srgb(&t);
        for c in 0..3 {
            data[c * n + i] = rgb[c];
        }
    }
    SpectralCube::from_planes(spec.grid(), 3, Role::Intensity, data)
}

/// Converts gamma-encoded sRGB (`[0, 1]`) to CIELAB under D65.
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_decode);
    let xyz = mat3_mul(&LINEAR_SRGB_TO_XYZ, &lin);
    let f = |t: f64| {
        const DELTA: f64 = 6.0 / 29.0;
        if t > DELTA * DELTA * DELTA {
            t.cbrt()
        } else {
            t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
        }
    };
    let fx = f(xyz[0] / D65_WHITE[0]);
    let fy = f(xyz[1] / D65_WHITE[1]);
    let fz = f(xyz[2] / D65_WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Converts a 3-channel sRGB intensity cube to a 3-channel CIELAB cube.
pub fn lab_cube(rgb: &SpectralCube) -> Result<SpectralCube> {
    if rgb.channels() != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            found: rgb.channels(),
        });
    }
    let n = rgb.pixels();
    let mut data: Vec<f64> = alloc::vec![0.0; 3 * n];
    let mut px = [0.0; 3];
    for i in 0..n {
        rgb.pixel_into(i, &mut px);
        let lab = srgb_to_lab(px);
        for c in 0..3 {
            data[c * n + i] = lab[c];
        }
    }
    // Lab channels can be negative, so the cube is not tagged as intensity.
    SpectralCube::from_planes(rgb.grid(), 3, Role::Abundance, data)
}
