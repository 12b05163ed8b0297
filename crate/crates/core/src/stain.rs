//! Stain absorption matrices and overdetermined multispectral unmixing.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::cube::{Role, SpectralCube};
use crate::error::{Error, Result};
use crate::field::AbundanceField;
use crate::linalg;

pub const DYE_COUNT: usize = 4;

/// Tolerance on the unit column-sum invariant.
pub const COLUMN_SUM_TOL: f64 = 1e-9;

/// Papanicolaou dyes, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Dye {
    #[cfg_attr(feature = "serde", serde(rename = "EY"))]
    Ey,
    #[cfg_attr(feature = "serde", serde(rename = "H"))]
    H,
    #[cfg_attr(feature = "serde", serde(rename = "LG"))]
    Lg,
    #[cfg_attr(feature = "serde", serde(rename = "OG"))]
    Og,
}

impl Dye {
    pub const ALL: [Dye; DYE_COUNT] = [Dye::Ey, Dye::H, Dye::Lg, Dye::Og];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Dye::Ey => "EY",
            Dye::H => "H",
            Dye::Lg => "LG",
            Dye::Og => "OG",
        }
    }
}

impl fmt::Display for Dye {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Dye {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EY" => Ok(Dye::Ey),
            "H" => Ok(Dye::H),
            "LG" => Ok(Dye::Lg),
            "OG" => Ok(Dye::Og),
            _ => Err(Error::InvalidInput(alloc::format!("unknown dye `{s}`"))),
        }
    }
}

/// `channels × 4` absorption coefficients with unit column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StainMatrix {
    channels: usize,
    // row-major: coeffs[ch * 4 + dye]
    coeffs: Vec<f64>,
}

impl StainMatrix {
    /// Validates nonnegativity and unit column sums of a row-major matrix.
    pub fn new(channels: usize, coeffs: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Empty("stain matrix channels"));
        }
        if coeffs.len() != channels * DYE_COUNT {
            return Err(Error::ShapeMismatch(alloc::format!(
                "stain matrix needs {} entries, got {}",
                channels * DYE_COUNT,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "stain coefficients must be finite and nonnegative".into(),
            ));
        }
        for d in 0..DYE_COUNT {
            let sum: f64 = (0..channels).map(|c| coeffs[c * DYE_COUNT + d]).sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::InvalidInput(alloc::format!(
                    "column {} sums to {sum}, expected 1",
                    Dye::ALL[d]
                )));
            }
        }
        Ok(StainMatrix { channels, coeffs })
    }

    /// Builds from canonical-order columns, normalising each to unit sum.
    pub fn from_columns(columns: &[Vec<f64>; DYE_COUNT]) -> Result<Self> {
        let channels = columns[0].len();
        if columns.iter().any(|c| c.len() != channels) {
            return Err(Error::ShapeMismatch("stain columns differ in length".into()));
        }
        let mut coeffs = vec![0.0; channels * DYE_COUNT];
        for (d, col) in columns.iter().enumerate() {
            let sum: f64 = col.iter().sum();
            if !(sum > 0.0) {
                return Err(Error::Unstained);
            }
            for (c, v) in col.iter().enumerate() {
                coeffs[c * DYE_COUNT + d] = v / sum;
            }
        }
        Self::new(channels, coeffs)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dyes(&self) -> [Dye; DYE_COUNT] {
        Dye::ALL
    }

    #[inline]
    pub fn get(&self, channel: usize, dye: Dye) -> f64 {
        self.coeffs[channel * DYE_COUNT + dye.index()]
    }

    /// Row-major coefficients.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn column(&self, dye: Dye) -> Vec<f64> {
        (0..self.channels).map(|c| self.get(c, dye)).collect()
    }

    /// `A·x` for one pixel.
    pub fn apply(&self, x: &[f64; DYE_COUNT], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate().take(self.channels) {
            let row = &self.coeffs[c * DYE_COUNT..(c + 1) * DYE_COUNT];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Renders `A·X` for a whole abundance field.
    pub fn render(&self, field: &AbundanceField) -> SpectralCube {
        let n = field.pixels();
        let mut data = vec![0.0; self.channels * n];
        for c in 0..self.channels {
            let out = &mut data[c * n..(c + 1) * n];
            for dye in Dye::ALL {
                let a = self.get(c, dye);
                for (o, x) in out.iter_mut().zip(field.plane(dye)) {
                    *o += a * x;
                }
            }
        }
        SpectralCube::from_planes(field.grid(), self.channels, Role::OpticalDensity, data)
            .expect("finite abundance renders to finite density")
    }

    /// Row-major `4 × channels` pseudoinverse.
    pub fn pinv(&self) -> Result<Vec<f64>> {
        linalg::pinv(self.channels, DYE_COUNT, &self.coeffs)
    }
}

/// Mean optical density over every pixel of every region, scaled to unit sum.
///
/// Negative means are clamped to zero (with a warning) before normalising.
pub fn estimate_stain_vector(od_regions: &[SpectralCube]) -> Result<Vec<f64>> {
    let first = od_regions.first().ok_or(Error::Empty("stain regions"))?;
    let m = first.channels();
    let mut sums = vec![0.0; m];
    let mut count = 0usize;
    for region in od_regions {
        if region.channels() != m {
            return Err(Error::ChannelMismatch {
                expected: m,
                found: region.channels(),
            });
        }
        if region.role() != Role::OpticalDensity {
            return Err(Error::InvalidInput("stain regions must be optical density".into()));
        }
        for (c, s) in sums.iter_mut().enumerate() {
            *s += region.plane(c).iter().sum::<f64>();
        }
        count += region.pixels();
    }
    if count == 0 {
        return Err(Error::Empty("stain region pixels"));
    }
    let mut mean: Vec<f64> = sums.iter().map(|s| s / count as f64).collect();
    if mean.iter().any(|v| *v < 0.0) {
        log::warn!("negative mean optical density in stain vector clamped to zero");
        mean.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    let total: f64 = mean.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Unstained);
    }
    Ok(mean.iter().map(|v| v / total).collect())
}

/// Assembles labelled stain vectors into a canonical-order matrix.
pub fn build_stain_matrix(vectors: &[(Dye, Vec<f64>)]) -> Result<StainMatrix> {
    if vectors.len() != DYE_COUNT {
        return Err(Error::DyeCount(vectors.len()));
    }
    let mut slots: [Option<&Vec<f64>>; DYE_COUNT] = [None; DYE_COUNT];
    for (dye, v) in vectors {
        if slots[dye.index()].replace(v).is_some() {
            return Err(Error::DuplicateDye(*dye));
        }
    }
    let mut columns: [Vec<f64>; DYE_COUNT] = Default::default();
    for dye in Dye::ALL {
        columns[dye.index()] = slots[dye.index()].ok_or(Error::MissingDye(dye))?.clone();
    }
    StainMatrix::from_columns(&columns)
}

/// Per-pixel `pinv(E)·y` with no nonnegativity constraint.
pub fn pinv_unmix(od: &SpectralCube, e: &StainMatrix) -> Result<AbundanceField> {
    if od.channels() != e.channels() {
        return Err(Error::ChannelMismatch {
            expected: e.channels(),
            found: od.channels(),
        });
    }
    let m = e.channels();
    let p = e.pinv()?;
    let n = od.pixels();
    let mut out = vec![0.0; DYE_COUNT * n];
    for d in 0..DYE_COUNT {
        let dst = &mut out[d * n..(d + 1) * n];
        for c in 0..m {
            let w = p[d * m + c];
            for (o, y) in dst.iter_mut().zip(od.plane(c)) {
                *o += w * y;
            }
        }
    }
    AbundanceField::from_planes(od.grid(), out)
}

/// Multispectral unmixing (more channels than dyes) by pseudoinverse.
pub fn ms_unmix(od: &SpectralCube, e: &StainMatrix) -> Result<AbundanceField> {
    if e.channels() <= DYE_COUNT {
        return Err(Error::InvalidInput(alloc::format!(
            "multispectral unmixing needs more than {DYE_COUNT} channels, got {}",
            e.channels()
        )));
    }
    pinv_unmix(od, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::Grid;

    fn uniform_od(values: &[f64], pixels: usize) -> SpectralCube {
        let mut data = Vec::new();
        for v in values {
            data.extend(core::iter::repeat_n(*v, pixels));
        }
        SpectralCube::from_planes(Grid::new(pixels, 1), values.len(), Role::OpticalDensity, data)
            .unwrap()
    }

    #[test]
    fn stain_vector_already_unit_sum() {
        let v = estimate_stain_vector(&[uniform_od(&[0.2, 0.3, 0.5], 4)]).unwrap();
        for (a, b) in v.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stain_vector_normalises() {
        let v = estimate_stain_vector(&[uniform_od(&[1.0, 1.0, 2.0], 3)]).unwrap();
        assert_eq!(v, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn stain_vector_pools_pixels_unweighted() {
        // Means v = (1, 2) over 1 pixel and 3v over 1 pixel: pooled (2, 4) -> (1/3, 2/3).
        let a = uniform_od(&[1.0, 2.0], 1);
        let b = uniform_od(&[3.0, 6.0], 1);
        let v = estimate_stain_vector(&[a, b]).unwrap();
        assert!((v[0] - 1.0 / 3.0).abs() < 1e-12 && (v[1] - 2.0 / 3.0).abs() < 1e-12);
        // Unequal sizes weight by pixel count: (1,0) x1 and (0,1) x3 -> (0.25, 0.75).
        let c = uniform_od(&[1.0, 0.0], 1);
        let d = uniform_od(&[0.0, 1.0], 3);
        let v = estimate_stain_vector(&[c, d]).unwrap();
        assert!((v[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn stain_vector_errors() {
        assert_eq!(estimate_stain_vector(&[]), Err(Error::Empty("stain regions")));
        assert_eq!(
            estimate_stain_vector(&[uniform_od(&[0.0, 0.0], 2)]),
            Err(Error::Unstained)
        );
    }

    #[test]
    fn negative_mean_is_clamped() {
        let v = estimate_stain_vector(&[uniform_od(&[-0.1, 0.4], 2)]).unwrap();
        assert_eq!(v, vec![0.0, 1.0]);
    }

    #[test]
    fn build_reorders_to_canonical() {
        let vecs = vec![
            (Dye::Og, vec![0.0, 0.0, 1.0]),
            (Dye::Lg, vec![1.0, 0.0, 0.0]),
            (Dye::Ey, vec![0.0, 2.0, 0.0]),
            (Dye::H, vec![1.0, 1.0, 1.0]),
        ];
        let m = build_stain_matrix(&vecs).unwrap();
        assert_eq!(m.column(Dye::Ey), vec![0.0, 1.0, 0.0]);
        assert_eq!(m.column(Dye::Lg), vec![1.0, 0.0, 0.0]);
        assert_eq!(m.column(Dye::Og), vec![0.0, 0.0, 1.0]);
        for dye in Dye::ALL {
            let s: f64 = m.column(dye).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn build_rejects_duplicates_and_wrong_count() {
        let v = vec![1.0, 1.0, 1.0];
        let dup = vec![
            (Dye::Ey, v.clone()),
            (Dye::Ey, v.clone()),
            (Dye::Lg, v.clone()),
            (Dye::Og, v.clone()),
        ];
        assert_eq!(build_stain_matrix(&dup), Err(Error::DuplicateDye(Dye::Ey)));
        assert_eq!(build_stain_matrix(&dup[..3]), Err(Error::DyeCount(3)));
    }

    #[test]
    fn dye_parse() {
        assert_eq!("og".parse::<Dye>().unwrap(), Dye::Og);
        assert!("BY".parse::<Dye>().is_err());
    }

    #[test]
    fn ms_unmix_needs_overdetermined_matrix() {
        let m = StainMatrix::new(
            3,
            vec![0.5, 0.2, 0.3, 0.1, 0.25, 0.4, 0.3, 0.2, 0.25, 0.4, 0.4, 0.7],
        )
        .unwrap();
        let od = uniform_od(&[0.1, 0.1, 0.1], 1);
        assert!(matches!(ms_unmix(&od, &m), Err(Error::InvalidInput(_))));
    }
}
