use std::path::{Path, PathBuf};

use papsmix_core::calib::{robust_max, CalibrationSet, DEFAULT_TOP_PERCENT};
use papsmix_core::solver::{unmix as run_method, Method, MethodConfigs, SolverConfig, SolverReport, WeightMode};
use papsmix_core::stain::ms_unmix as pinv_ms_unmix;
use papsmix_core::{AbundanceField, Dye, StainMatrix};
use serde::Serialize;

use super::{optical_density, unique_stems, Context};
use crate::cli::DensityArgs;
use crate::cube_io::load_cube;
use crate::error::{read_json, Result};
use crate::output::{config_hash, to_json, OutputSet};
use crate::raster::{encode_gray, heatmap};
use crate::tables::read_stain_csv;

#[derive(Debug)]
pub struct UnmixArgs<'a> {
    pub images: &'a [PathBuf],
    pub matrix: &'a Path,
    pub config: Option<&'a Path>,
    pub method: Method,
    pub calibration: Option<&'a Path>,
    pub density: &'a DensityArgs,
    pub out: &'a Path,
}

/// Per-image summary written next to the abundance cube.
#[derive(Debug, Serialize)]
struct UnmixSummary<'a> {
    image: String,
    method: Method,
    /// Configuration the solver actually ran with; absent for `cd`.
    config: Option<SolverConfig>,
    report: Option<&'a SolverReport>,
}

/// The configuration after the method's structural overrides.
fn effective_config(method: Method, configs: &MethodConfigs) -> Option<SolverConfig> {
    match method {
        Method::Cd => None,
        Method::Proposed => Some(configs.proposed),
        Method::SunsalTv => Some(SolverConfig {
            weight_mode: WeightMode::AllOnes,
            ..configs.sunsal_tv
        }),
        Method::Sunsal => Some(SolverConfig {
            weight_mode: WeightMode::AllOnes,
            lambda_tv: 0.0,
            ..configs.sunsal
        }),
    }
}

/// Reference values for display: calibrated `q` when given, otherwise the
/// robust maximum of each plane.
fn display_scale(field: &AbundanceField, calibration: Option<&CalibrationSet>) -> Result<AbundanceField> {
    if let Some(cal) = calibration {
        return Ok(cal.apply_p(field).scale_planes(&cal.q.map(|q| 1.0 / q)));
    }
    let mut q = [1.0; 4];
    for dye in Dye::ALL {
        let top = robust_max(field.plane(dye), DEFAULT_TOP_PERCENT)?;
        if top > 1e-12 {
            q[dye.index()] = top;
        }
    }
    Ok(field.scale_planes(&q.map(|v| 1.0 / v)))
}

fn write_heatmaps(out: &mut OutputSet, stem: &str, scaled: &AbundanceField) -> Result<()> {
    for dye in Dye::ALL {
        let png = encode_gray(scaled.grid(), &heatmap(scaled.plane(dye), 1.0));
        out.write(&format!("{stem}_{}.png", dye.label()), &png)?;
    }
    Ok(())
}

pub fn unmix(ctx: &Context, args: &UnmixArgs) -> Result<Vec<PathBuf>> {
    let stems = unique_stems(args.images)?;
    let a = read_stain_csv(args.matrix)?;
    let mut configs = MethodConfigs::default();
    if let Some(path) = args.config {
        let cfg: SolverConfig = read_json(path)?;
        match args.method {
            Method::Cd => log::warn!("`cd` takes no solver configuration; {} ignored", path.display()),
            Method::Proposed => configs.proposed = cfg,
            Method::Sunsal => configs.sunsal = cfg,
            Method::SunsalTv => configs.sunsal_tv = cfg,
        }
    }
    let effective = effective_config(args.method, &configs);
    if let Some(cfg) = &effective {
        cfg.validate()?;
    }
    let calibration = match args.calibration {
        Some(path) => {
            let cal: CalibrationSet = read_json(path)?;
            cal.validate()?;
            Some(cal)
        }
        None => None,
    };

    let results = ctx.map(args.images, |path| {
        let od = optical_density(load_cube(path)?, args.density)?;
        Ok(run_method(args.method, &od, &a, &configs)?)
    })?;

    let mut out = OutputSet::in_dir(args.out)?;
    for (stem, (field, report)) in stems.iter().zip(&results) {
        out.write_msc(&format!("{stem}.msc"), &field.to_cube())?;
        write_heatmaps(&mut out, stem, &display_scale(field, calibration.as_ref())?)?;
        let summary = UnmixSummary {
            image: stem.clone(),
            method: args.method,
            config: effective,
            report: report.as_ref(),
        };
        out.write(&format!("{stem}_report.json"), &to_json(&summary))?;
    }
    let mut inputs: Vec<&Path> = args.images.iter().map(PathBuf::as_path).collect();
    inputs.push(args.matrix);
    inputs.extend(args.config);
    inputs.extend(args.calibration);
    out.commit("unmix", &inputs, config_hash(&(
        args.method,
        effective,
        calibration,
        &args.density.light,
        args.density.linearize,
    )))
}

pub fn ms_unmix(
    ctx: &Context,
    images: &[PathBuf],
    matrix: &Path,
    density: &DensityArgs,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let stems = unique_stems(images)?;
    let e: StainMatrix = read_stain_csv(matrix)?;
    let fields = ctx.map(images, |path| {
        let od = optical_density(load_cube(path)?, density)?;
        Ok(pinv_ms_unmix(&od, &e)?)
    })?;
    let mut out = OutputSet::in_dir(out_dir)?;
    for (stem, field) in stems.iter().zip(&fields) {
        out.write_msc(&format!("{stem}.msc"), &field.to_cube())?;
        let mut shown = field.clone();
        shown.clamp_nonnegative();
        write_heatmaps(&mut out, stem, &display_scale(&shown, None)?)?;
    }
    let mut inputs: Vec<&Path> = images.iter().map(PathBuf::as_path).collect();
    inputs.push(matrix);
    out.commit("ms-unmix", &inputs, config_hash(&(&density.light, density.linearize)))
}
