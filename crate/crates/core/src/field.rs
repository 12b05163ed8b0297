use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::cube::{Grid, Role, SpectralCube};
use crate::error::{Error, Result};
use crate::stain::{Dye, DYE_COUNT};

/// Per-pixel dye amounts, one plane per dye in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct AbundanceField {
    grid: Grid,
    data: Vec<f64>,
}

impl AbundanceField {
    pub fn zeros(grid: Grid) -> Self {
        AbundanceField {
            grid,
            data: vec![0.0; DYE_COUNT * grid.len()],
        }
    }

    pub fn from_planes(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != DYE_COUNT * grid.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "abundance field needs {} samples, got {}",
                DYE_COUNT * grid.len(),
                data.len()
            )));
        }
        Ok(AbundanceField { grid, data })
    }

    /// Reads a 4-channel cube; the sample order must already be canonical.
    pub fn from_cube(cube: &SpectralCube) -> Result<Self> {
        if cube.channels() != DYE_COUNT {
            return Err(Error::ChannelMismatch {
                expected: DYE_COUNT,
                found: cube.channels(),
            });
        }
        if let Some(labels) = cube.labels() {
            for (label, dye) in labels.iter().zip(Dye::ALL) {
                if label != dye.label() {
                    return Err(Error::InvalidInput(alloc::format!(
                        "abundance planes must be ordered EY,H,LG,OG (found {label} for {dye})"
                    )));
                }
            }
        }
        Self::from_planes(cube.grid(), cube.data().to_vec())
    }

    pub fn to_cube(&self) -> SpectralCube {
        SpectralCube::from_planes(self.grid, DYE_COUNT, Role::Abundance, self.data.clone())
            .and_then(|c| c.with_labels(Dye::ALL.iter().map(|d| d.label().to_string()).collect()))
            .expect("abundance field shape is valid by construction")
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn pixels(&self) -> usize {
        self.grid.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, dye: Dye) -> &[f64] {
        let n = self.grid.len();
        let i = dye.index();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn plane_mut(&mut self, dye: Dye) -> &mut [f64] {
        let n = self.grid.len();
        let i = dye.index();
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn clamp_nonnegative(&mut self) {
        self.data.iter_mut().for_each(|v| *v = v.max(0.0));
    }

    /// Multiplies plane `i` by `factors[i]`.
    pub fn scale_planes(&self, factors: &[f64; DYE_COUNT]) -> Self {
        let n = self.grid.len();
        let mut out = self.clone();
        for (i, f) in factors.iter().enumerate() {
            out.data[i * n..(i + 1) * n].iter_mut().for_each(|v| *v *= f);
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}
