//! Implementations of the subcommands.

mod classify;
mod matrix;
mod simulate;
mod unmix;

use std::path::{Path, PathBuf};

use papsmix_core::od::{srgb_decode, to_optical_density};
use papsmix_core::{IncidentLight, Role, SpectralCube};
use rayon::prelude::*;

use crate::cli::{Cli, ClassifyCommand, Command, DensityArgs};
use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "PAPSMIX_THREADS";

/// Runs one command line; returns the files written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let ctx = Context::new(cli.jobs, cli.seed)?;
    match cli.command {
        Command::EstimateMatrix { images, regions, density, out } => {
            matrix::estimate_matrix(&ctx, &images, &regions, &density, &out)
        }
        Command::Unmix { images, matrix, config, method, calibration, density, out } => unmix::unmix(
            &ctx,
            &unmix::UnmixArgs {
                images: &images,
                matrix: &matrix,
                config: config.as_deref(),
                method: method.into(),
                calibration: calibration.as_deref(),
                density: &density,
                out: &out,
            },
        ),
        Command::MsUnmix { images, matrix, density, out } => {
            unmix::ms_unmix(&ctx, &images, &matrix, &density, &out)
        }
        Command::Calibrate {
            ms_images,
            rgb_images,
            ms_matrix,
            rgb_matrix,
            regions,
            reference,
            top_percent,
            ms_light,
            rgb_light,
            linearize,
            out,
        } => matrix::calibrate(
            &ctx,
            &matrix::CalibrateArgs {
                ms_images: &ms_images,
                rgb_images: &rgb_images,
                ms_matrix: &ms_matrix,
                rgb_matrix: &rgb_matrix,
                regions: &regions,
                reference: reference.as_deref(),
                top_percent,
                ms_density: DensityArgs { light: ms_light, linearize: false },
                rgb_density: DensityArgs { light: rgb_light, linearize },
                out: &out,
            },
        ),
        Command::Evaluate { gt, est, calibration, image_name, method, out } => matrix::evaluate(
            &gt,
            &est,
            calibration.as_deref(),
            image_name,
            method,
            &out,
        ),
        Command::Phantom { spec, out } => simulate::phantom(&ctx, spec.as_deref(), &out),
        Command::Benchmark { spec, seeds, methods, config, out } => simulate::benchmark(
            &ctx,
            spec.as_deref(),
            seeds,
            methods.map(|m| m.into_iter().map(Into::into).collect()),
            config.as_deref(),
            &out,
        ),
        Command::Sweep { spec, lambdas, lambda_tvs, config, out } => {
            simulate::sweep(&ctx, spec.as_deref(), lambdas, lambda_tvs, config.as_deref(), &out)
        }
        Command::RenderSrgb { image, light, out } => matrix::render_srgb(&image, light, &out),
        Command::Classify(ClassifyCommand::Train { manifest, root, features, dyes, density, out }) => {
            classify::train(&ctx, &manifest, root.as_deref(), features, &dyes, &density, &out)
        }
        Command::Classify(ClassifyCommand::Predict { model, manifest, root, density, out }) => {
            classify::predict(&ctx, &model, &manifest, root.as_deref(), &density, &out)
        }
    }
}

/// Thread pool and seed shared by every command.
#[derive(Debug)]
pub struct Context {
    pool: rayon::ThreadPool,
    seed: Option<u64>,
}

impl Context {
    fn new(jobs: usize, seed: Option<u64>) -> Result<Self> {
        let threads = thread_count(jobs, std::env::var(THREADS_ENV).ok().as_deref())?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {threads} worker threads: {e}")))?;
        Ok(Context { pool, seed })
    }

    /// Maps `f` over `items` on the pool, keeping input order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(f).collect())
    }
}

fn thread_count(jobs: usize, cap: Option<&str>) -> Result<usize> {
    if jobs == 0 {
        return Err(Error::Usage("--jobs must be at least 1".into()));
    }
    let cap = match cap {
        None => usize::MAX,
        Some(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{s}`")))?,
    };
    Ok(jobs.min(cap))
}

fn light_for(values: &Option<Vec<f64>>, channels: usize) -> Result<IncidentLight> {
    match values {
        None => Ok(IncidentLight::white(channels)),
        Some(v) => Ok(IncidentLight::new(v.clone())?),
    }
}

/// Optical density of `cube`, converting intensity inputs with `density`.
pub fn optical_density(cube: SpectralCube, density: &DensityArgs) -> Result<SpectralCube> {
    match cube.role() {
        Role::OpticalDensity => Ok(cube),
        Role::Intensity => {
            let light = light_for(&density.light, cube.channels())?;
            let cube = if density.linearize { linearized(cube)? } else { cube };
            Ok(to_optical_density(&cube, &light)?)
        }
        Role::Abundance => Err(papsmix_core::Error::InvalidInput(
            "expected an intensity or optical density image, found an abundance cube".into(),
        )
        .into()),
    }
}

fn linearized(cube: SpectralCube) -> Result<SpectralCube> {
    let grid = cube.grid();
    let channels = cube.channels();
    let wavelengths = cube.wavelengths_nm().map(<[f64]>::to_vec);
    let data = cube.into_data().into_iter().map(srgb_decode).collect();
    let mut out = SpectralCube::from_planes(grid, channels, Role::Intensity, data)?;
    if let Some(w) = wavelengths {
        out = out.with_wavelengths(w)?;
    }
    Ok(out)
}

pub fn file_stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Usage(format!("`{}` has no file name", path.display())))
}

/// Stems of `paths`, rejecting duplicates that would overwrite each other.
pub fn unique_stems(paths: &[PathBuf]) -> Result<Vec<String>> {
    let stems = paths.iter().map(|p| file_stem(p)).collect::<Result<Vec<_>>>()?;
    for (i, s) in stems.iter().enumerate() {
        if stems[..i].contains(s) {
            return Err(Error::Usage(format!("two inputs share the file stem `{s}`")));
        }
    }
    Ok(stems)
}
