//! Beer-Lambert optical density conversion and sRGB transfer curves.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cube::{IncidentLight, Role, SpectralCube};
use crate::error::{Error, Result};

/// Darkest transmitted intensity considered, as a fraction of the incident value.
pub const DEFAULT_FLOOR_FRACTION: f64 = 1.0 / 65535.0;

/// Converts transmitted intensities to optical density with the default floor.
pub fn to_optical_density(img: &SpectralCube, light: &IncidentLight) -> Result<SpectralCube> {
    to_optical_density_with_floor(img, light, DEFAULT_FLOOR_FRACTION)
}

/// `od = max(log10(I0 / max(I, floor * I0)), 0)` per channel.
///
/// Pixels brighter than the glass reference clamp to zero density.
pub fn to_optical_density_with_floor(
    img: &SpectralCube,
    light: &IncidentLight,
    floor_fraction: f64,
) -> Result<SpectralCube> {
    if img.role() != Role::Intensity {
        return Err(Error::InvalidInput(
            "optical density needs an intensity cube".into(),
        ));
    }
    if light.channels() != img.channels() {
        return Err(Error::ChannelMismatch {
            expected: img.channels(),
            found: light.channels(),
        });
    }
    if !(floor_fraction > 0.0 && floor_fraction < 1.0) {
        return Err(Error::param("floor_fraction", "must lie in (0, 1)"));
    }
    let n = img.pixels();
    let mut data = Vec::with_capacity(n * img.channels());
    for (c, &i0) in light.values().iter().enumerate() {
        let floor = floor_fraction * i0;
        data.extend(img.plane(c).iter().map(|&s| {
            let od = (i0 / s.max(floor)).log10();
            od.max(0.0)
        }));
    }
    let mut out = SpectralCube::from_planes(img.grid(), img.channels(), Role::OpticalDensity, data)?;
    if let Some(wl) = img.wavelengths_nm() {
        out = out.with_wavelengths(wl.into())?;
    }
    Ok(out)
}

/// Inverse of [`to_optical_density`]: `I = I0 · 10^(−od)`.
pub fn od_to_intensity(od: &SpectralCube, light: &IncidentLight) -> Result<SpectralCube> {
    if light.channels() != od.channels() {
        return Err(Error::ChannelMismatch {
            expected: od.channels(),
            found: light.channels(),
        });
    }
    let mut data = Vec::with_capacity(od.data().len());
    for (c, &i0) in light.values().iter().enumerate() {
        data.extend(od.plane(c).iter().map(|&v| i0 * 10f64.powf(-v)));
    }
    let mut out = SpectralCube::from_planes(od.grid(), od.channels(), Role::Intensity, data)?;
    if let Some(wl) = od.wavelengths_nm() {
        out = out.with_wavelengths(wl.into())?;
    }
    Ok(out)
}

/// sRGB gamma encoding of a linear channel value; exact at 0 and 1.
#[inline]
pub fn srgb_encode(linear: f64) -> f64 {
    if linear <= 0.003_130_8 {
        12.92 * linear
    } else if linear == 1.0 {
        1.0
    } else {
        1.055 * linear.powf(1.0 / 2.4) - 0.055
    }
}

/// Inverse of [`srgb_encode`].
#[inline]
pub fn srgb_decode(encoded: f64) -> f64 {
    if encoded <= 0.040_45 {
        encoded / 12.92
    } else {
        ((encoded + 0.055) / 1.055).powf(2.4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Grid;
    use alloc::vec;

    fn cube(vals: Vec<f64>, channels: usize) -> SpectralCube {
        let n = vals.len() / channels;
        SpectralCube::from_planes(Grid::new(n, 1), channels, Role::Intensity, vals).unwrap()
    }

    #[test]
    fn glass_pixel_has_zero_density() {
        let light = IncidentLight::new(vec![0.8]).unwrap();
        let od = to_optical_density(&cube(vec![0.8], 1), &light).unwrap();
        assert_eq!(od.data()[0], 0.0);
    }

    #[test]
    fn tenth_of_incident_is_unit_density() {
        let light = IncidentLight::new(vec![0.8]).unwrap();
        let od = to_optical_density(&cube(vec![0.08], 1), &light).unwrap();
        assert!((od.data()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brighter_than_glass_clamps_to_zero() {
        let light = IncidentLight::new(vec![0.5]).unwrap();
        let od = to_optical_density(&cube(vec![0.6], 1), &light).unwrap();
        assert_eq!(od.data()[0], 0.0);
    }

    #[test]
    fn black_pixel_hits_floor() {
        let light = IncidentLight::white(1);
        let od = to_optical_density(&cube(vec![0.0], 1), &light).unwrap();
        assert!((od.data()[0] - 65535f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn channel_mismatch_is_an_error() {
        let light = IncidentLight::white(2);
        let err = to_optical_density(&cube(vec![0.1, 0.2, 0.3], 3), &light);
        assert!(matches!(err, Err(Error::ChannelMismatch { .. })));
    }

    #[test]
    fn gamma_roundtrip() {
        for i in 0..=100 {
            let v = f64::from(i) / 100.0;
            assert!((srgb_decode(srgb_encode(v)) - v).abs() < 1e-12);
        }
    }
}
