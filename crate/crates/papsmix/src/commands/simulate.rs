use std::path::{Path, PathBuf};

use papsmix_core::analysis::PATCH_SIZE;
use papsmix_core::color::render_srgb;
use papsmix_core::metrics::EvalResult;
use papsmix_core::od::od_to_intensity;
use papsmix_core::phantom::{
    benchmark_seed, phantom_method_configs, BenchmarkCase, BenchmarkRow, PhantomSpec, SweepRow,
};
use papsmix_core::solver::{Method, MethodConfigs, SolverConfig};
use papsmix_core::stain::{ms_unmix, DYE_COUNT};
use papsmix_core::{Dye, IncidentLight};
use serde::Serialize;

use super::Context;
use crate::error::{read_json, Result};
use crate::output::{config_hash, to_json, OutputSet};
use crate::raster::{encode_gray, encode_rgb};
use crate::tables::{encode_benchmark, encode_manifest, encode_stain_csv, encode_sweep, PatchEntry};

/// Default `λ` and `λ_TV` axes of the sweep grid.
pub const SWEEP_LAMBDAS: [f64; 5] = [0.0, 3e-5, 1e-4, 3e-4, 1e-3];
pub const SWEEP_LAMBDA_TVS: [f64; 5] = [0.0, 2e-5, 5e-5, 1e-4, 3e-4];

/// Grey level per region code in `mask.png`.
const MASK_STEP: u8 = 85;

fn load_spec(ctx: &Context, path: Option<&Path>) -> Result<PhantomSpec> {
    let mut spec = match path {
        Some(p) => read_json(p)?,
        None => PhantomSpec::default(),
    };
    if let Some(seed) = ctx.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn phantom(ctx: &Context, spec_path: Option<&Path>, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let spec = load_spec(ctx, spec_path)?;
    let case = BenchmarkCase::new(&spec)?;
    let truth = &case.truth;
    let grid = truth.grid();

    let mut out = OutputSet::in_dir(out_dir)?;
    out.write("phantom.json", &to_json(&spec))?;
    out.write_msc("truth.msc", &truth.abundance.to_cube())?;
    out.write_msc("ms_od.msc", &truth.ms_od)?;
    out.write_msc("rgb_od.msc", &truth.rgb_od)?;
    out.write_msc("ms_gt.msc", &ms_unmix(&truth.ms_od, &truth.ms_matrix)?.to_cube())?;
    let mask: Vec<u8> = truth.labels_mask.iter().map(|c| c * MASK_STEP).collect();
    out.write("mask.png", &encode_gray(grid, &mask))?;
    out.write("ms_matrix.csv", &encode_stain_csv(&truth.ms_matrix))?;
    out.write("rgb_matrix.csv", &encode_stain_csv(&truth.rgb_matrix))?;
    out.write(
        "calibration.json",
        &to_json(&papsmix_core::calib::CalibrationSet { p: case.p, q: case.q }),
    )?;
    let white = IncidentLight::white(truth.ms_od.channels());
    let srgb = render_srgb(&od_to_intensity(&truth.ms_od, &white)?, &white)?;
    out.write("rgb.png", &encode_rgb(&srgb)?)?;
    let half = PATCH_SIZE / 2;
    let patches: Vec<PatchEntry> = truth
        .cells
        .iter()
        .map(|cell| (cell, cell.cytoplasm_point(grid)))
        .filter(|(_, (x, y))| {
            *x >= half && *y >= half && x + half < grid.width && y + half < grid.height
        })
        .map(|(cell, (cx, cy))| PatchEntry {
            image: "truth.msc".into(),
            label: Some(cell.label),
            cx,
            cy,
        })
        .collect();
    out.write("patches.csv", &encode_manifest(&patches))?;
    let inputs: Vec<&Path> = spec_path.into_iter().collect();
    out.commit("phantom", &inputs, config_hash(&spec))
}

#[derive(Debug, Serialize)]
struct MethodSummary {
    method: Method,
    seeds: usize,
    mean_sre_db: f64,
    mean_rmse: f64,
    mean_per_dye_sre_db: [f64; DYE_COUNT],
    mean_per_dye_rmse: [f64; DYE_COUNT],
    mean_h_false_positive: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn summarise(rows: &[BenchmarkRow], methods: &[Method]) -> Vec<MethodSummary> {
    methods
        .iter()
        .map(|&method| {
            let of: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.method == method).collect();
            let evals: Vec<&EvalResult> = of.iter().map(|r| &r.eval).collect();
            MethodSummary {
                method,
                seeds: of.len(),
                mean_sre_db: mean(evals.iter().map(|e| e.sre_db)),
                mean_rmse: mean(evals.iter().map(|e| e.rmse)),
                mean_per_dye_sre_db: Dye::ALL.map(|d| mean(evals.iter().map(|e| e.per_dye_sre_db[d.index()]))),
                mean_per_dye_rmse: Dye::ALL.map(|d| mean(evals.iter().map(|e| e.per_dye_rmse[d.index()]))),
                mean_h_false_positive: mean(of.iter().map(|r| r.h_false_positive)),
            }
        })
        .collect()
}

fn encode_summary(summary: &[MethodSummary]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["method".to_string(), "seeds".into(), "mean_sre_db".into(), "mean_rmse".into()];
    header.extend(Dye::ALL.iter().map(|d| format!("mean_sre_{d}")));
    header.extend(Dye::ALL.iter().map(|d| format!("mean_rmse_{d}")));
    header.push("mean_h_false_positive".into());
    w.write_record(&header).expect("in-memory CSV");
    for s in summary {
        let mut row = vec![
            s.method.name().to_string(),
            s.seeds.to_string(),
            s.mean_sre_db.to_string(),
            s.mean_rmse.to_string(),
        ];
        row.extend(s.mean_per_dye_sre_db.iter().map(f64::to_string));
        row.extend(s.mean_per_dye_rmse.iter().map(f64::to_string));
        row.push(s.mean_h_false_positive.to_string());
        w.write_record(&row).expect("in-memory CSV");
    }
    w.into_inner().expect("in-memory CSV")
}

pub fn benchmark(
    ctx: &Context,
    spec_path: Option<&Path>,
    seeds: u64,
    requested: Option<Vec<Method>>,
    config: Option<&Path>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let spec = load_spec(ctx, spec_path)?;
    let mut methods: Vec<Method> = Vec::new();
    for m in requested.unwrap_or_else(|| Method::ALL.to_vec()) {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let configs: MethodConfigs = match config {
        Some(p) => read_json(p)?,
        None => phantom_method_configs(),
    };
    let specs: Vec<PhantomSpec> = (0..seeds).map(|k| spec.with_seed(spec.seed + k)).collect();
    let per_seed = ctx.map(&specs, |s| Ok(benchmark_seed(s, &methods, &configs)?))?;
    let rows: Vec<BenchmarkRow> = per_seed.into_iter().flatten().collect();
    let summary = summarise(&rows, &methods);

    let mut out = OutputSet::in_dir(out_dir)?;
    out.write("benchmark.csv", &encode_benchmark(&rows))?;
    out.write("summary.csv", &encode_summary(&summary))?;
    out.write("summary.json", &to_json(&summary))?;
    let mut inputs: Vec<&Path> = spec_path.into_iter().collect();
    inputs.extend(config);
    out.commit("benchmark", &inputs, config_hash(&(spec, seeds, &methods, configs)))
}

pub fn sweep(
    ctx: &Context,
    spec_path: Option<&Path>,
    lambdas: Option<Vec<f64>>,
    lambda_tvs: Option<Vec<f64>>,
    config: Option<&Path>,
    out_path: &Path,
) -> Result<Vec<PathBuf>> {
    let spec = load_spec(ctx, spec_path)?;
    let base: SolverConfig = match config {
        Some(p) => read_json(p)?,
        None => phantom_method_configs().proposed,
    };
    base.validate()?;
    let lambdas = lambdas.unwrap_or_else(|| SWEEP_LAMBDAS.to_vec());
    let lambda_tvs = lambda_tvs.unwrap_or_else(|| SWEEP_LAMBDA_TVS.to_vec());
    let grid: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|l| lambda_tvs.iter().map(move |t| (*l, *t)))
        .collect();
    let case = BenchmarkCase::new(&spec)?;
    let rows = ctx.map(&grid, |&(lambda, lambda_tv)| {
        let cfg = SolverConfig { lambda_sparse: lambda, lambda_tv, ..base };
        let eval = case.score_config(&cfg)?;
        Ok(SweepRow { lambda, lambda_tv, sre_db: eval.sre_db, rmse: eval.rmse })
    })?;

    let (mut out, name) = OutputSet::for_file(out_path)?;
    out.write(&name, &encode_sweep(&rows))?;
    let mut inputs: Vec<&Path> = spec_path.into_iter().collect();
    inputs.extend(config);
    out.commit("sweep", &inputs, config_hash(&(spec, base, &lambdas, &lambda_tvs)))
}
