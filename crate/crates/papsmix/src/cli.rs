//! Argument definitions for the `papsmix` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use papsmix_core::solver::Method;

#[derive(Debug, Parser)]
#[command(name = "papsmix", version, about = "Stain unmixing for Papanicolaou-stained cytology images")]
pub struct Cli {
    /// Worker threads for commands that process several images or seeds.
    /// `PAPSMIX_THREADS` caps the value.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Seed for every random draw; overrides the seed of a phantom spec.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cd,
    Sunsal,
    #[value(name = "sunsal_tv")]
    SunsalTv,
    Proposed,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cd => Method::Cd,
            MethodArg::Sunsal => Method::Sunsal,
            MethodArg::SunsalTv => Method::SunsalTv,
            MethodArg::Proposed => Method::Proposed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureKind {
    /// Mean RGB intensity.
    Rgb,
    /// Mean optical density per channel.
    Od,
    /// CIELAB of the sRGB image.
    Lab,
    /// Relative dye abundance of an abundance cube.
    Abundance,
}

/// Conversion of intensity inputs to optical density.
#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    /// Incident light per channel, comma separated; defaults to 1 everywhere.
    #[arg(long, value_delimiter = ',')]
    pub light: Option<Vec<f64>>,
    /// Undo the sRGB transfer curve of intensity inputs before conversion.
    #[arg(long)]
    pub linearize: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a stain matrix from single-stain regions.
    EstimateMatrix {
        /// Images referenced by the `image` index of each region.
        #[arg(long, num_args = 1.., required = true)]
        images: Vec<PathBuf>,
        #[arg(long)]
        regions: PathBuf,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unmix RGB images into dye abundances.
    Unmix {
        #[arg(long = "image", num_args = 1.., required = true)]
        images: Vec<PathBuf>,
        #[arg(long)]
        matrix: PathBuf,
        /// Solver configuration JSON for the chosen method.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Proposed)]
        method: MethodArg,
        /// Calibration used to scale the heatmaps.
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unmix multispectral images by pseudoinverse.
    MsUnmix {
        #[arg(long = "image", num_args = 1.., required = true)]
        images: Vec<PathBuf>,
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive per-dye calibration ratios and reference values from
    /// registered single-stain MS/RGB image pairs.
    Calibrate {
        #[arg(long = "ms", num_args = 1.., required = true)]
        ms_images: Vec<PathBuf>,
        #[arg(long = "rgb", num_args = 1.., required = true)]
        rgb_images: Vec<PathBuf>,
        #[arg(long)]
        ms_matrix: PathBuf,
        #[arg(long)]
        rgb_matrix: PathBuf,
        /// Single-stain regions; `image` indexes the image pairs.
        #[arg(long)]
        regions: PathBuf,
        /// MS abundance cube whose robust maxima become the reference values.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = papsmix_core::calib::DEFAULT_TOP_PERCENT)]
        top_percent: f64,
        #[arg(long, value_delimiter = ',')]
        ms_light: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        rgb_light: Option<Vec<f64>>,
        #[arg(long)]
        linearize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score an abundance estimate against ground truth.
    Evaluate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        est: PathBuf,
        /// Scale the estimate by `p`, then divide both fields by `q`.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Value of the `image` column; defaults to the ground-truth file stem.
        #[arg(long)]
        image_name: Option<String>,
        /// Value of the `method` column; defaults to the estimate file stem.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic specimen with known abundances.
    Phantom {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score unmixing methods on a series of phantoms.
    Benchmark {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Number of consecutive seeds starting at the base seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, value_enum, value_delimiter = ',')]
        methods: Option<Vec<MethodArg>>,
        /// Per-method solver configurations JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Linear discriminant classification of cytoplasm patches.
    #[command(subcommand)]
    Classify(ClassifyCommand),
    /// SRE over a grid of regularisation weights on one phantom.
    Sweep {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        lambda_tvs: Option<Vec<f64>>,
        /// Base solver configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a 14-band spectral image to sRGB.
    RenderSrgb {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_delimiter = ',')]
        light: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ClassifyCommand {
    /// Fit a discriminant on a labelled patch manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory that manifest image paths are relative to; defaults
        /// to the manifest's own directory.
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FeatureKind::Abundance)]
        features: FeatureKind,
        /// Dyes whose relative abundance forms the feature vector.
        #[arg(long, value_delimiter = ',', default_value = "EY,OG")]
        dyes: Vec<String>,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a discriminant to a patch manifest.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        root: Option<PathBuf>,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long)]
        out: PathBuf,
    },
}
