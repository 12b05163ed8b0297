use std::path::{Path, PathBuf};

use papsmix_core::calib::{
    calibration_coefficient, normalize_abundance, robust_max, single_dye_abundance, CalibrationSet,
};
use papsmix_core::color::render_srgb as spectral_to_srgb;
use papsmix_core::metrics::evaluate as score;
use papsmix_core::od::od_to_intensity;
use papsmix_core::stain::{build_stain_matrix, estimate_stain_vector, DYE_COUNT};
use papsmix_core::{AbundanceField, Dye, IncidentLight, Role, SpectralCube};

use super::{file_stem, light_for, optical_density, Context};
use crate::cli::DensityArgs;
use crate::cube_io::load_cube;
use crate::error::{read_json, Error, Result};
use crate::output::{config_hash, to_json, OutputSet};
use crate::raster::encode_rgb;
use crate::tables::{encode_report, encode_stain_csv, read_regions, read_stain_csv, RegionRect};

fn check_region(r: &RegionRect, images: usize, path: &Path) -> Result<()> {
    if r.image >= images {
        return Err(Error::format(
            path,
            format!("region for {} refers to image {} but only {images} were given", r.dye, r.image),
        ));
    }
    Ok(())
}

fn crop(cube: &SpectralCube, r: &RegionRect, path: &Path) -> Result<SpectralCube> {
    cube.crop(r.x, r.y, r.w, r.h)
        .map_err(|e| Error::format(path, format!("region {} at ({}, {}): {e}", r.dye, r.x, r.y)))
}

pub fn estimate_matrix(
    ctx: &Context,
    images: &[PathBuf],
    regions_path: &Path,
    density: &DensityArgs,
    out_path: &Path,
) -> Result<Vec<PathBuf>> {
    let regions = read_regions(regions_path)?;
    for r in &regions {
        check_region(r, images.len(), regions_path)?;
    }
    for dye in Dye::ALL {
        if !regions.iter().any(|r| r.dye == dye) {
            return Err(Error::format(regions_path, format!("no region given for dye {dye}")));
        }
    }
    let ods = ctx.map(images, |p| optical_density(load_cube(p)?, density))?;
    let mut vectors = Vec::with_capacity(DYE_COUNT);
    for dye in Dye::ALL {
        let crops = regions
            .iter()
            .filter(|r| r.dye == dye)
            .map(|r| crop(&ods[r.image], r, regions_path))
            .collect::<Result<Vec<_>>>()?;
        vectors.push((dye, estimate_stain_vector(&crops)?));
    }
    let matrix = build_stain_matrix(&vectors)?;

    let (mut out, name) = OutputSet::for_file(out_path)?;
    out.write(&name, &encode_stain_csv(&matrix))?;
    let mut inputs: Vec<&Path> = images.iter().map(PathBuf::as_path).collect();
    inputs.push(regions_path);
    out.commit("estimate-matrix", &inputs, config_hash(&(&density.light, density.linearize, &regions)))
}

#[derive(Debug)]
pub struct CalibrateArgs<'a> {
    pub ms_images: &'a [PathBuf],
    pub rgb_images: &'a [PathBuf],
    pub ms_matrix: &'a Path,
    pub rgb_matrix: &'a Path,
    pub regions: &'a Path,
    pub reference: Option<&'a Path>,
    pub top_percent: f64,
    pub ms_density: DensityArgs,
    pub rgb_density: DensityArgs,
    pub out: &'a Path,
}

pub fn calibrate(ctx: &Context, args: &CalibrateArgs) -> Result<Vec<PathBuf>> {
    if args.ms_images.len() != args.rgb_images.len() {
        return Err(Error::Usage(format!(
            "{} MS images but {} RGB images; they are paired by position",
            args.ms_images.len(),
            args.rgb_images.len()
        )));
    }
    let regions = read_regions(args.regions)?;
    for r in &regions {
        check_region(r, args.ms_images.len(), args.regions)?;
    }
    let e = read_stain_csv(args.ms_matrix)?;
    let a = read_stain_csv(args.rgb_matrix)?;
    let ms = ctx.map(args.ms_images, |p| optical_density(load_cube(p)?, &args.ms_density))?;
    let rgb = ctx.map(args.rgb_images, |p| optical_density(load_cube(p)?, &args.rgb_density))?;
    let reference = match args.reference {
        Some(path) => Some(AbundanceField::from_cube(&load_cube(path)?)?),
        None => None,
    };

    let mut p = [0.0; DYE_COUNT];
    let mut q = [0.0; DYE_COUNT];
    for dye in Dye::ALL {
        let mut s_ms = Vec::new();
        let mut s_rgb = Vec::new();
        for r in regions.iter().filter(|r| r.dye == dye) {
            s_ms.extend(single_dye_abundance(&crop(&ms[r.image], r, args.regions)?, &e.column(dye))?);
            s_rgb.extend(single_dye_abundance(&crop(&rgb[r.image], r, args.regions)?, &a.column(dye))?);
        }
        if s_ms.is_empty() {
            return Err(Error::format(args.regions, format!("no region given for dye {dye}")));
        }
        p[dye.index()] = calibration_coefficient(&s_rgb, &s_ms)?;
        q[dye.index()] = match &reference {
            Some(field) => robust_max(field.plane(dye), args.top_percent)?,
            None => robust_max(&s_ms, args.top_percent)?,
        };
    }
    let set = CalibrationSet::new(p, q)?;

    let (mut out, name) = OutputSet::for_file(args.out)?;
    out.write(&name, &to_json(&set))?;
    let mut inputs: Vec<&Path> = args.ms_images.iter().chain(args.rgb_images).map(PathBuf::as_path).collect();
    inputs.extend([args.ms_matrix, args.rgb_matrix, args.regions]);
    inputs.extend(args.reference);
    let hash = config_hash(&(
        args.top_percent,
        &args.ms_density.light,
        &args.rgb_density.light,
        args.rgb_density.linearize,
        &regions,
    ));
    out.commit("calibrate", &inputs, hash)
}

pub fn evaluate(
    gt_path: &Path,
    est_path: &Path,
    calibration: Option<&Path>,
    image_name: Option<String>,
    method: Option<String>,
    out_path: &Path,
) -> Result<Vec<PathBuf>> {
    let mut gt = AbundanceField::from_cube(&load_cube(gt_path)?)?;
    let mut est = AbundanceField::from_cube(&load_cube(est_path)?)?;
    let cal = match calibration {
        Some(path) => {
            let cal: CalibrationSet = read_json(path)?;
            cal.validate()?;
            gt = normalize_abundance(&gt, &cal.q)?;
            est = normalize_abundance(&cal.apply_p(&est), &cal.q)?;
            Some(cal)
        }
        None => None,
    };
    let result = score(&gt, &est)?;
    let image = match image_name {
        Some(s) => s,
        None => file_stem(gt_path)?,
    };
    let method = match method {
        Some(s) => s,
        None => file_stem(est_path)?,
    };

    let (mut out, name) = OutputSet::for_file(out_path)?;
    out.write(&name, &encode_report(&[(image.clone(), method.clone(), result)]))?;
    let mut inputs = vec![gt_path, est_path];
    inputs.extend(calibration);
    out.commit("evaluate", &inputs, config_hash(&(cal, image, method)))
}

pub fn render_srgb(image: &Path, light: Option<Vec<f64>>, out_path: &Path) -> Result<Vec<PathBuf>> {
    let cube = load_cube(image)?;
    let light: IncidentLight = light_for(&light, cube.channels())?;
    let intensity = match cube.role() {
        Role::Intensity => cube,
        Role::OpticalDensity => od_to_intensity(&cube, &light)?,
        Role::Abundance => {
            return Err(papsmix_core::Error::InvalidInput(
                "cannot render an abundance cube; render its optical density instead".into(),
            )
            .into())
        }
    };
    let rgb = spectral_to_srgb(&intensity, &light)?;
    let (mut out, name) = OutputSet::for_file(out_path)?;
    out.write(&name, &encode_rgb(&rgb)?)?;
    out.commit("render-srgb", &[image], config_hash(&light.values()))
}

