//! Seeded synthetic specimens with known abundances, plus the benchmark
//! harness that scores the unmixing methods against them.

mod bench;
pub mod spectra;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub use bench::{
    benchmark_seed, calibration_from_single_stains, h_false_positive_mass, phantom_method_configs,
    sweep_seed, BenchmarkCase, BenchmarkRow, SweepRow,
};

use crate::analysis::Label;
use crate::cube::{Grid, Role, SpectralCube};
use crate::error::{Error, Result};
use crate::field::AbundanceField;
use crate::od::DEFAULT_FLOOR_FRACTION;
use crate::stain::{Dye, StainMatrix, DYE_COUNT};

const PLACEMENT_RESTARTS: usize = 50;
const PLACEMENT_TRIES: usize = 400;
/// Gap kept between neighbouring cytoplasm discs, in pixels.
const CELL_GAP: f64 = 1.5;

/// Mean abundance vectors per region class.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyeProfiles {
    pub nucleus: [f64; DYE_COUNT],
    pub ec_cytoplasm: [f64; DYE_COUNT],
    pub legh_cytoplasm: [f64; DYE_COUNT],
}

impl Default for DyeProfiles {
    fn default() -> Self {
        DyeProfiles {
            nucleus: [0.05, 1.2, 0.05, 0.0],
            ec_cytoplasm: [0.6, 0.0, 0.3, 0.15],
            legh_cytoplasm: [0.3, 0.0, 0.25, 0.5],
        }
    }
}

impl DyeProfiles {
    /// Only H in nuclei and only EY in cytoplasm.
    pub fn single_dye() -> Self {
        DyeProfiles {
            nucleus: [0.0, 1.2, 0.0, 0.0],
            ec_cytoplasm: [0.6, 0.0, 0.0, 0.0],
            legh_cytoplasm: [0.6, 0.0, 0.0, 0.0],
        }
    }

    fn cytoplasm(&self, label: Label) -> [f64; DYE_COUNT] {
        match label {
            Label::Ec => self.ec_cytoplasm,
            Label::Legh => self.legh_cytoplasm,
        }
    }
}

/// Where observation noise is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NoiseDomain {
    #[default]
    OpticalDensity,
    /// Noise on transmitted intensity `10^(−od)`, converted back to density.
    Intensity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub n_cells: usize,
    /// Inclusive `[min, max]` radius in pixels.
    pub nucleus_radius_px: [f64; 2],
    pub cytoplasm_radius_px: [f64; 2],
    /// Fraction of cells given the LEGH cytoplasm profile.
    pub legh_fraction: f64,
    pub dye_profiles: DyeProfiles,
    /// Relative per-cell scatter of the profile amounts.
    pub profile_jitter: f64,
    /// Amplitude of the smooth multiplicative modulation inside each cell.
    pub modulation: f64,
    /// `None` for noiseless observations.
    pub noise_snr_db: Option<f64>,
    pub noise_domain: NoiseDomain,
    pub ms_bands: usize,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            width: 64,
            height: 64,
            seed: 0,
            n_cells: 5,
            nucleus_radius_px: [2.5, 3.5],
            cytoplasm_radius_px: [9.0, 11.0],
            legh_fraction: 0.5,
            dye_profiles: DyeProfiles::default(),
            profile_jitter: 0.1,
            modulation: 0.1,
            noise_snr_db: Some(30.0),
            noise_domain: NoiseDomain::OpticalDensity,
            ms_bands: crate::color::BAND_COUNT,
        }
    }
}

fn check_range(name: &'static str, r: [f64; 2]) -> Result<()> {
    if !(r[0] > 0.0) || !(r[1] >= r[0]) || !r[1].is_finite() {
        return Err(Error::param(name, "needs 0 < min <= max"));
    }
    Ok(())
}

impl PhantomSpec {
    pub fn with_seed(self, seed: u64) -> Self {
        PhantomSpec { seed, ..self }
    }

    pub fn noiseless(self) -> Self {
        PhantomSpec {
            noise_snr_db: None,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 8 || self.height < 8 {
            return Err(Error::param("width/height", "must be at least 8 pixels"));
        }
        if self.n_cells == 0 {
            return Err(Error::param("n_cells", "must be at least 1"));
        }
        check_range("nucleus_radius_px", self.nucleus_radius_px)?;
        check_range("cytoplasm_radius_px", self.cytoplasm_radius_px)?;
        if self.cytoplasm_radius_px[0] <= self.nucleus_radius_px[1] {
            return Err(Error::param(
                "cytoplasm_radius_px",
                "must exceed the largest nucleus radius",
            ));
        }
        if 2.0 * self.cytoplasm_radius_px[1] + 2.0 > self.width.min(self.height) as f64 {
            return Err(Error::param("cytoplasm_radius_px", "cells do not fit in the image"));
        }
        let p = &self.dye_profiles;
        for v in p.nucleus.iter().chain(&p.ec_cytoplasm).chain(&p.legh_cytoplasm) {
            if !(*v >= 0.0) || !v.is_finite() {
                return Err(Error::param("dye_profiles", "abundances must be finite and nonnegative"));
            }
        }
        let h = Dye::H.index();
        if p.ec_cytoplasm[h] != 0.0 || p.legh_cytoplasm[h] != 0.0 {
            return Err(Error::param("dye_profiles", "cytoplasm must not contain H"));
        }
        if !(0.0..=1.0).contains(&self.legh_fraction) {
            return Err(Error::param("legh_fraction", "must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.profile_jitter) {
            return Err(Error::param("profile_jitter", "must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.modulation) {
            return Err(Error::param("modulation", "must lie in [0, 1)"));
        }
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return Err(Error::param("noise_snr_db", "must be finite; omit it for no noise"));
            }
        }
        if self.ms_bands != crate::color::BAND_COUNT {
            return Err(Error::param("ms_bands", "only the 14-band grid is supported"));
        }
        Ok(())
    }
}

/// Region class of a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Region {
    Background = 0,
    Nucleus = 1,
    EcCytoplasm = 2,
    LeghCytoplasm = 3,
}

impl Region {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Region::Background),
            1 => Some(Region::Nucleus),
            2 => Some(Region::EcCytoplasm),
            3 => Some(Region::LeghCytoplasm),
            _ => None,
        }
    }
}

/// A placed cell: concentric nucleus and cytoplasm discs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub cx: f64,
    pub cy: f64,
    pub nucleus_radius: f64,
    pub cytoplasm_radius: f64,
    pub label: Label,
    /// Jittered per-cell profiles.
    pub nucleus_profile: [f64; DYE_COUNT],
    pub cytoplasm_profile: [f64; DYE_COUNT],
}

impl Cell {
    /// A pixel midway through the cytoplasm ring, for patch sampling.
    pub fn cytoplasm_point(&self, grid: Grid) -> (usize, usize) {
        let d = 0.5 * (self.nucleus_radius + self.cytoplasm_radius);
        let candidates = [(d, 0.0), (-d, 0.0), (0.0, d), (0.0, -d)];
        for (dx, dy) in candidates {
            let x = (self.cx + dx).round();
            let y = (self.cy + dy).round();
            if x >= 0.0 && y >= 0.0 && (x as usize) < grid.width && (y as usize) < grid.height {
                return (x as usize, y as usize);
            }
        }
        (self.cx.round() as usize, self.cy.round() as usize)
    }
}

/// Generated specimen together with its exact abundances.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomTruth {
    pub abundance: AbundanceField,
    pub ms_od: SpectralCube,
    pub rgb_od: SpectralCube,
    /// Row-major [`Region`] codes.
    pub labels_mask: Vec<u8>,
    pub cells: Vec<Cell>,
    pub ms_matrix: StainMatrix,
    pub rgb_matrix: StainMatrix,
}

impl PhantomTruth {
    pub fn grid(&self) -> Grid {
        self.abundance.grid()
    }

    pub fn nucleus_mask(&self) -> Vec<bool> {
        self.labels_mask
            .iter()
            .map(|c| *c == Region::Nucleus.code())
            .collect()
    }
}

/// Disc membership with a one-pixel cosine ramp centred on the edge.
fn ramp(dist: f64, radius: f64) -> f64 {
    let d = radius - dist;
    if d >= 0.5 {
        1.0
    } else if d <= -0.5 {
        0.0
    } else {
        0.5 - 0.5 * (PI * (d + 0.5)).cos()
    }
}

fn place_cells(spec: &PhantomSpec, rng: &mut ChaCha8Rng) -> Result<Vec<(f64, f64, f64, f64)>> {
    let (w, h) = (spec.width as f64, spec.height as f64);
    let mut best = 0;
    for _ in 0..PLACEMENT_RESTARTS {
        let mut placed: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(spec.n_cells);
        'cell: for _ in 0..spec.n_cells {
            let rn = rng.random_range(spec.nucleus_radius_px[0]..=spec.nucleus_radius_px[1]);
            let rc = rng.random_range(spec.cytoplasm_radius_px[0]..=spec.cytoplasm_radius_px[1]);
            let margin = rc + 1.0;
            for _ in 0..PLACEMENT_TRIES {
                let cx = rng.random_range(margin..=(w - 1.0 - margin));
                let cy = rng.random_range(margin..=(h - 1.0 - margin));
                let clear = placed.iter().all(|(ox, oy, _, orc)| {
                    let dx = cx - ox;
                    let dy = cy - oy;
                    (dx * dx + dy * dy).sqrt() >= rc + orc + CELL_GAP
                });
                if clear {
                    placed.push((cx, cy, rn, rc));
                    continue 'cell;
                }
            }
            break;
        }
        if placed.len() == spec.n_cells {
            return Ok(placed);
        }
        best = best.max(placed.len());
    }
    Err(Error::Placement {
        placed: best,
        requested: spec.n_cells,
    })
}

fn jitter(profile: [f64; DYE_COUNT], amount: f64, rng: &mut ChaCha8Rng) -> [f64; DYE_COUNT] {
    profile.map(|v| {
        let u: f64 = rng.random_range(-1.0..=1.0);
        v * (1.0 + amount * u)
    })
}

/// Adds white Gaussian noise at `snr_db` relative to the mean signal power.
fn add_noise(data: &mut [f64], snr_db: f64, rng: &mut ChaCha8Rng) {
    let power = data.iter().map(|v| v * v).sum::<f64>() / data.len() as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    if !(sigma > 0.0) {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
    for v in data.iter_mut() {
        *v += normal.sample(rng);
    }
}

fn observe(clean: SpectralCube, spec: &PhantomSpec, rng: &mut ChaCha8Rng) -> Result<SpectralCube> {
    let Some(snr) = spec.noise_snr_db else {
        return Ok(clean);
    };
    let grid = clean.grid();
    let channels = clean.channels();
    let mut data = clean.into_data();
    match spec.noise_domain {
        NoiseDomain::OpticalDensity => add_noise(&mut data, snr, rng),
        NoiseDomain::Intensity => {
            data.iter_mut().for_each(|v| *v = 10f64.powf(-*v));
            add_noise(&mut data, snr, rng);
            data.iter_mut()
                .for_each(|v| *v = v.max(DEFAULT_FLOOR_FRACTION).recip().log10().max(0.0));
        }
    }
    SpectralCube::from_planes(grid, channels, Role::OpticalDensity, data)
}

/// Builds a phantom; every random draw comes from `spec.seed`.
///
/// Draw order: cell geometry, labels and profiles, modulation phases, then
/// MS noise followed by RGB noise.
pub fn generate(spec: &PhantomSpec) -> Result<PhantomTruth> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let grid = Grid::new(spec.width, spec.height);
    let geometry = place_cells(spec, &mut rng)?;

    let n_legh = (spec.legh_fraction * spec.n_cells as f64).round() as usize;
    let mut cells = Vec::with_capacity(spec.n_cells);
    for (i, (cx, cy, rn, rc)) in geometry.into_iter().enumerate() {
        let label = if i < n_legh { Label::Legh } else { Label::Ec };
        cells.push(Cell {
            cx,
            cy,
            nucleus_radius: rn,
            cytoplasm_radius: rc,
            label,
            nucleus_profile: jitter(spec.dye_profiles.nucleus, spec.profile_jitter, &mut rng),
            cytoplasm_profile: jitter(spec.dye_profiles.cytoplasm(label), spec.profile_jitter, &mut rng),
        });
    }
    let phases: Vec<[f64; 4]> = cells
        .iter()
        .map(|_| {
            [
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.6..1.4),
                rng.random_range(0.6..1.4),
            ]
        })
        .collect();

    let n = grid.len();
    let mut abundance = AbundanceField::zeros(grid);
    let mut mask = vec![Region::Background.code(); n];
    for (cell, ph) in cells.iter().zip(&phases) {
        let reach = cell.cytoplasm_radius + 1.0;
        let x0 = (cell.cx - reach).floor().max(0.0) as usize;
        let y0 = (cell.cy - reach).floor().max(0.0) as usize;
        let x1 = ((cell.cx + reach).ceil() as usize).min(grid.width - 1);
        let y1 = ((cell.cy + reach).ceil() as usize).min(grid.height - 1);
        let kx = ph[2] * 2.0 * PI / cell.cytoplasm_radius / 2.0;
        let ky = ph[3] * 2.0 * PI / cell.cytoplasm_radius / 2.0;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - cell.cx;
                let dy = y as f64 - cell.cy;
                let dist = (dx * dx + dy * dy).sqrt();
                let wc = ramp(dist, cell.cytoplasm_radius);
                if wc == 0.0 {
                    continue;
                }
                let wn = ramp(dist, cell.nucleus_radius);
                let m = 1.0 + spec.modulation * (kx * dx + ph[0]).sin() * (ky * dy + ph[1]).cos();
                let i = grid.index(x, y);
                for dye in Dye::ALL {
                    let d = dye.index();
                    let v = m * (wn * cell.nucleus_profile[d] + (wc - wn) * cell.cytoplasm_profile[d]);
                    abundance.plane_mut(dye)[i] += v;
                }
                mask[i] = if dist <= cell.nucleus_radius {
                    Region::Nucleus.code()
                } else if dist <= cell.cytoplasm_radius {
                    match cell.label {
                        Label::Ec => Region::EcCytoplasm.code(),
                        Label::Legh => Region::LeghCytoplasm.code(),
                    }
                } else {
                    mask[i]
                };
            }
        }
    }

    let ms_matrix = spectra::ms_stain_matrix();
    let rgb_matrix = spectra::rgb_stain_matrix();
    let wavelengths = crate::color::band_wavelengths().to_vec();
    let ms_od = observe(ms_matrix.render(&abundance), spec, &mut rng)?.with_wavelengths(wavelengths)?;
    let rgb_od = observe(rgb_matrix.render(&abundance), spec, &mut rng)?;
    Ok(PhantomTruth {
        abundance,
        ms_od,
        rgb_od,
        labels_mask: mask,
        cells,
        ms_matrix,
        rgb_matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = PhantomSpec::default().with_seed(7);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn noiseless_rgb_is_exact_render() {
        let t = generate(&PhantomSpec::default().noiseless()).unwrap();
        assert_eq!(t.rgb_matrix.render(&t.abundance), t.rgb_od);
    }

    #[test]
    fn h_confined_to_nuclei() {
        let t = generate(&PhantomSpec::default()).unwrap();
        let grid = t.grid();
        let h = t.abundance.plane(Dye::H);
        for (i, v) in h.iter().enumerate() {
            if *v > 0.0 {
                let (x, y) = ((i % grid.width) as f64, (i / grid.width) as f64);
                let near = t.cells.iter().any(|c| {
                    ((x - c.cx).powi(2) + (y - c.cy).powi(2)).sqrt() < c.nucleus_radius + 0.5
                });
                assert!(near);
            }
        }
        assert!(t.abundance.min() >= 0.0);
    }

    #[test]
    fn crowded_spec_fails_placement() {
        let spec = PhantomSpec {
            n_cells: 40,
            ..PhantomSpec::default()
        };
        assert!(matches!(generate(&spec), Err(Error::Placement { .. })));
    }

    #[test]
    fn rejects_h_in_cytoplasm() {
        let mut spec = PhantomSpec::default();
        spec.dye_profiles.ec_cytoplasm[Dye::H.index()] = 0.1;
        assert!(spec.validate().is_err());
    }
}
