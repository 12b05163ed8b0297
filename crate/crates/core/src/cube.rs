//! Multi-channel raster containers.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Raster dimensions. Pixels are stored row-major, index `y * width + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
}

impl Grid {
    pub fn new(width: usize, height: usize) -> Self {
        Grid { width, height }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }
}

/// What the samples of a cube mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Role {
    Intensity,
    OpticalDensity,
    Abundance,
}

/// A W×H raster with `channels` planes stored band-sequentially.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCube {
    grid: Grid,
    channels: usize,
    wavelengths_nm: Option<Vec<f64>>,
    labels: Option<Vec<String>>,
    role: Role,
    data: Vec<f64>,
}

impl SpectralCube {
    pub fn zeros(grid: Grid, channels: usize, role: Role) -> Self {
        SpectralCube {
            grid,
            channels,
            wavelengths_nm: None,
            labels: None,
            role,
            data: vec![0.0; grid.len() * channels],
        }
    }

    /// Builds a cube from planar data (`channels` consecutive planes).
    pub fn from_planes(grid: Grid, channels: usize, role: Role, data: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Empty("cube channels"));
        }
        if data.len() != grid.len() * channels {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for {}x{}x{}",
                data.len(),
                grid.width,
                grid.height,
                channels
            )));
        }
        let cube = SpectralCube {
            grid,
            channels,
            wavelengths_nm: None,
            labels: None,
            role,
            data,
        };
        cube.check_role()?;
        Ok(cube)
    }

    fn check_role(&self) -> Result<()> {
        match self.role {
            Role::Intensity => {
                if self.data.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::InvalidInput(
                        "intensity samples must be nonnegative".into(),
                    ));
                }
            }
            Role::OpticalDensity => {
                if self.data.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput(
                        "optical density samples must be finite".into(),
                    ));
                }
            }
            Role::Abundance => {}
        }
        Ok(())
    }

    pub fn with_wavelengths(mut self, wavelengths_nm: Vec<f64>) -> Result<Self> {
        if wavelengths_nm.len() != self.channels {
            return Err(Error::ChannelMismatch {
                expected: self.channels,
                found: wavelengths_nm.len(),
            });
        }
        self.wavelengths_nm = Some(wavelengths_nm);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.channels {
            return Err(Error::ChannelMismatch {
                expected: self.channels,
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> usize {
        self.grid.len()
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn wavelengths_nm(&self) -> Option<&[f64]> {
        self.wavelengths_nm.as_deref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// All samples, plane after plane.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[channel * n..(channel + 1) * n]
    }

    pub fn plane_mut(&mut self, channel: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[channel * n..(channel + 1) * n]
    }

    pub fn sample(&self, channel: usize, x: usize, y: usize) -> f64 {
        self.data[channel * self.grid.len() + self.grid.index(x, y)]
    }

    /// Copies the channel vector of pixel `index` into `out`.
    pub fn pixel_into(&self, index: usize, out: &mut [f64]) {
        let n = self.grid.len();
        for (c, o) in out.iter_mut().enumerate().take(self.channels) {
            *o = self.data[c * n + index];
        }
    }

    /// Extracts the rectangle `(x, y, w, h)` as a new cube with the same metadata.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<Self> {
        if w == 0 || h == 0 || x + w > self.grid.width || y + h > self.grid.height {
            return Err(Error::InvalidInput(format!(
                "rectangle ({x}, {y}, {w}, {h}) outside {}x{} image",
                self.grid.width, self.grid.height
            )));
        }
        let grid = Grid::new(w, h);
        let mut data = Vec::with_capacity(grid.len() * self.channels);
        for c in 0..self.channels {
            let plane = self.plane(c);
            for row in y..y + h {
                let start = self.grid.index(x, row);
                data.extend_from_slice(&plane[start..start + w]);
            }
        }
        Ok(SpectralCube {
            grid,
            channels: self.channels,
            wavelengths_nm: self.wavelengths_nm.clone(),
            labels: self.labels.clone(),
            role: self.role,
            data,
        })
    }
}

/// Per-channel intensity of the incident light, measured on glass pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidentLight(Vec<f64>);

impl IncidentLight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("incident light"));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::param("incident light", "values must be positive"));
        }
        Ok(IncidentLight(values))
    }

    /// Unit incident intensity on every channel.
    pub fn white(channels: usize) -> Self {
        IncidentLight(vec![1.0; channels])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn channels(&self) -> usize {
        self.0.len()
    }
}
