//! `.msc` cubes: little-endian `f32` samples, band-sequential, row-major
//! within each plane, described by a JSON sidecar stored next to the data
//! file as `<name>.msc.json`.

use std::path::{Path, PathBuf};

use papsmix_core::{Grid, Role, SpectralCube};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, read_text, Error, Result};
use crate::raster;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub wavelengths_nm: Option<Vec<f64>>,
    pub role: Role,
    pub labels: Option<Vec<String>>,
}

impl Sidecar {
    pub fn of(cube: &SpectralCube) -> Self {
        Sidecar {
            width: cube.width(),
            height: cube.height(),
            channels: cube.channels(),
            wavelengths_nm: cube.wavelengths_nm().map(<[f64]>::to_vec),
            role: cube.role(),
            labels: cube.labels().map(<[String]>::to_vec),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

/// Sample bytes and pretty-printed sidecar of `cube`. Samples are rounded
/// to `f32`.
pub fn encode_msc(cube: &SpectralCube) -> (Vec<u8>, Vec<u8>) {
    let mut bytes = Vec::with_capacity(cube.data().len() * 4);
    for v in cube.data() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    let mut json = serde_json::to_vec_pretty(&Sidecar::of(cube)).expect("sidecar serialises");
    json.push(b'\n');
    (bytes, json)
}

pub fn decode_msc(bytes: &[u8], sidecar: &Sidecar, path: &Path) -> Result<SpectralCube> {
    let planes = sidecar.width * sidecar.height * 4;
    if sidecar.width == 0 || sidecar.height == 0 || sidecar.channels == 0 {
        return Err(Error::format(path, "sidecar declares an empty cube"));
    }
    if !bytes.len().is_multiple_of(planes) || bytes.len() / planes != sidecar.channels {
        return Err(Error::format(
            path,
            format!(
                "sidecar declares {} planes of {}x{}, file holds {} bytes ({} planes)",
                sidecar.channels,
                sidecar.width,
                sidecar.height,
                bytes.len(),
                bytes.len() as f64 / planes as f64
            ),
        ));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    let grid = Grid::new(sidecar.width, sidecar.height);
    let mut cube = SpectralCube::from_planes(grid, sidecar.channels, sidecar.role, data)
        .map_err(|e| Error::format(path, e.to_string()))?;
    if let Some(w) = &sidecar.wavelengths_nm {
        cube = cube
            .with_wavelengths(w.clone())
            .map_err(|e| Error::format(path, format!("wavelengths_nm: {e}")))?;
    }
    if let Some(l) = &sidecar.labels {
        cube = cube
            .with_labels(l.clone())
            .map_err(|e| Error::format(path, format!("labels: {e}")))?;
    }
    Ok(cube)
}

pub fn read_msc(path: &Path) -> Result<SpectralCube> {
    let side = sidecar_path(path);
    let sidecar: Sidecar = serde_json::from_str(&read_text(&side)?)
        .map_err(|e| Error::format(&side, format!("malformed header: {e}")))?;
    decode_msc(&read_file(path)?, &sidecar, path)
}

/// Loads an `.msc` cube, or an 8-bit RGB PNG as intensity in `[0, 1]`.
pub fn load_cube(path: &Path) -> Result<SpectralCube> {
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        raster::read_png(path)
    } else {
        read_msc(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> SpectralCube {
        let data = (0..24).map(|i| i as f64 * 0.25).collect();
        SpectralCube::from_planes(Grid::new(4, 2), 3, Role::OpticalDensity, data)
            .unwrap()
            .with_labels(vec!["r".into(), "g".into(), "b".into()])
            .unwrap()
    }

    #[test]
    fn round_trip() {
        let c = cube();
        let (bytes, json) = encode_msc(&c);
        assert_eq!(bytes.len(), 24 * 4);
        let side: Sidecar = serde_json::from_slice(&json).unwrap();
        assert_eq!(side.role, Role::OpticalDensity);
        assert_eq!(decode_msc(&bytes, &side, Path::new("x")).unwrap(), c);
    }

    #[test]
    fn plane_count_mismatch() {
        let c = cube();
        let (bytes, json) = encode_msc(&c);
        let mut side: Sidecar = serde_json::from_slice(&json).unwrap();
        side.channels = 4;
        side.labels = None;
        let err = decode_msc(&bytes, &side, Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("4 planes"), "{err}");
        assert!(decode_msc(&bytes[..bytes.len() - 2], &Sidecar::of(&c), Path::new("x")).is_err());
    }

    #[test]
    fn sidecar_sits_next_to_data() {
        assert_eq!(sidecar_path(Path::new("out/a.msc")), PathBuf::from("out/a.msc.json"));
    }
}
