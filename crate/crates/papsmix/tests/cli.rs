use std::path::Path;
use std::process::{Command, Output};

use papsmix::cube_io::{encode_msc, sidecar_path};
use papsmix::raster::encode_rgb;
use papsmix::read_msc;
use papsmix_core::metrics::evaluate;
use papsmix_core::od::od_to_intensity;
use papsmix_core::phantom::spectra::rgb_stain_matrix;
use papsmix_core::{AbundanceField, Dye, Grid, IncidentLight, SpectralCube};
use serde_json::Value;
use tempfile::TempDir;

fn papsmix(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_papsmix"))
        .current_dir(dir)
        .env_remove("PAPSMIX_THREADS")
        .args(args)
        .output()
        .expect("spawn papsmix")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = papsmix(dir, args);
    assert!(
        out.status.success(),
        "`{}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_msc(path: &Path, cube: &SpectralCube) {
    let (data, side) = encode_msc(cube);
    std::fs::write(path, data).unwrap();
    std::fs::write(sidecar_path(path), side).unwrap();
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// Single-dye PNGs and a regions file covering `dyes`.
fn single_stain_inputs(dir: &Path, dyes: &[Dye]) -> Vec<String> {
    let grid = Grid::new(12, 12);
    let a = rgb_stain_matrix();
    let mut regions = Vec::new();
    let mut names = Vec::new();
    for (k, dye) in Dye::ALL.into_iter().enumerate() {
        let mut field = AbundanceField::zeros(grid);
        for (i, v) in field.plane_mut(dye).iter_mut().enumerate() {
            *v = 0.3 + 0.6 * ((i * 13) % 29) as f64 / 28.0;
        }
        let intensity = od_to_intensity(&a.render(&field), &IncidentLight::white(3)).unwrap();
        let name = format!("{}.png", dye.label());
        std::fs::write(dir.join(&name), encode_rgb(&intensity).unwrap()).unwrap();
        names.push(name);
        if dyes.contains(&dye) {
            regions.push(serde_json::json!({"dye": dye.label(), "x": 1, "y": 1, "w": 10, "h": 10, "image": k}));
        }
    }
    std::fs::write(dir.join("regions.json"), serde_json::to_vec(&regions).unwrap()).unwrap();
    names
}

#[test]
fn estimate_matrix_gives_unit_columns() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let images = single_stain_inputs(dir, &Dye::ALL);
    let mut args = vec!["estimate-matrix", "--regions", "regions.json", "--out", "m.csv", "--images"];
    args.extend(images.iter().map(String::as_str));
    ok(dir, &args);
    let rows = csv_rows(&dir.join("m.csv"));
    assert_eq!(rows.len(), 3);
    for col in 1..=4 {
        let sum: f64 = rows.iter().map(|r| r[col].parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9, "column {col} sums to {sum}");
    }
    assert!(dir.join("m.csv.manifest.json").exists());
}

#[test]
fn estimate_matrix_names_missing_dye() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let images = single_stain_inputs(dir, &[Dye::Ey, Dye::H, Dye::Og]);
    let mut args = vec!["estimate-matrix", "--regions", "regions.json", "--out", "m.csv", "--images"];
    args.extend(images.iter().map(String::as_str));
    let out = papsmix(dir, &args);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("LG"), "{}", stderr(&out));
    assert!(!dir.join("m.csv").exists());
}

#[test]
fn unmix_methods_and_default_config() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["phantom", "--out", "ph"]);
    ok(dir, &["unmix", "--image", "ph/rgb_od.msc", "--matrix", "ph/rgb_matrix.csv", "--method", "cd", "--out", "cd"]);
    assert!(dir.join("cd/rgb_od.msc").exists());
    for dye in Dye::ALL {
        assert!(dir.join(format!("cd/rgb_od_{}.png", dye.label())).exists());
    }
    assert!(json(&dir.join("cd/rgb_od_report.json"))["config"].is_null());

    ok(dir, &["unmix", "--image", "ph/rgb_od.msc", "--matrix", "ph/rgb_matrix.csv", "--out", "prop"]);
    let report = json(&dir.join("prop/rgb_od_report.json"));
    assert_eq!(report["method"], "proposed");
    assert_eq!(report["config"]["lambda_sparse"].as_f64(), Some(2e-6));
    assert_eq!(report["config"]["lambda_tv"].as_f64(), Some(1e-3));
    assert!(report["report"]["iterations"].as_u64().unwrap() >= 1);
    let field = AbundanceField::from_cube(&read_msc(&dir.join("prop/rgb_od.msc")).unwrap()).unwrap();
    assert!(field.data().iter().all(|v| *v >= 0.0));
}

#[test]
fn missing_matrix_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["phantom", "--out", "ph"]);
    let out = papsmix(dir, &["unmix", "--image", "ph/rgb_od.msc", "--matrix", "nope.csv", "--out", "u"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.starts_with("papsmix: ") && msg.contains("nope.csv"), "{msg}");
    assert!(!dir.join("u").exists());
}

#[test]
fn evaluate_matches_metrics() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["phantom", "--out", "ph"]);
    ok(dir, &["evaluate", "--gt", "ph/ms_gt.msc", "--est", "ph/ms_gt.msc", "--out", "self.csv"]);
    let rows = csv_rows(&dir.join("self.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "ms_gt");
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 0.0);

    ok(dir, &["evaluate", "--gt", "ph/ms_gt.msc", "--est", "ph/truth.msc", "--method", "truth", "--out", "e.csv"]);
    let gt = AbundanceField::from_cube(&read_msc(&dir.join("ph/ms_gt.msc")).unwrap()).unwrap();
    let est = AbundanceField::from_cube(&read_msc(&dir.join("ph/truth.msc")).unwrap()).unwrap();
    let want = evaluate(&gt, &est).unwrap();
    let row = &csv_rows(&dir.join("e.csv"))[0];
    assert_eq!(&row[1], "truth");
    assert_eq!(row[2].parse::<f64>().unwrap(), want.sre_db);
    assert_eq!(row[3].parse::<f64>().unwrap(), want.rmse);
    for k in 0..4 {
        assert_eq!(row[8 + k].parse::<f64>().unwrap(), want.per_dye_rmse[k]);
    }
}

#[test]
fn evaluate_rejects_shape_mismatch() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["phantom", "--out", "ph"]);
    write_msc(&dir.join("small.msc"), &AbundanceField::zeros(Grid::new(4, 4)).to_cube());
    let out = papsmix(dir, &["evaluate", "--gt", "ph/ms_gt.msc", "--est", "small.msc", "--out", "e.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("4x4"), "{}", stderr(&out));
    assert!(!dir.join("e.csv").exists());
}

#[test]
fn default_sweep_covers_grid() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("spec.json"), r#"{"width": 32, "height": 32, "n_cells": 2, "cytoplasm_radius_px": [6.0, 7.0]}"#).unwrap();
    ok(dir, &["--jobs", "4", "sweep", "--spec", "spec.json", "--out", "sweep.csv"]);
    assert_eq!(csv_rows(&dir.join("sweep.csv")).len(), 25);
}

#[test]
fn benchmark_rows_per_method_and_seed() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("spec.json"), r#"{"width": 32, "height": 32, "n_cells": 2, "cytoplasm_radius_px": [6.0, 7.0]}"#).unwrap();
    ok(
        dir,
        &["--jobs", "2", "benchmark", "--spec", "spec.json", "--seeds", "3", "--methods", "cd,sunsal,cd", "--out", "b"],
    );
    let rows = csv_rows(&dir.join("b/benchmark.csv"));
    assert_eq!(rows.len(), 6);
    assert_eq!(&rows[0][1], "cd");
    assert_eq!(&rows[1][1], "sunsal");
    assert!(dir.join("b/summary.csv").exists());
    assert!(dir.join("b/manifest.json").exists());
}

#[test]
fn classify_separates_phantom_cells() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("spec.json"),
        r#"{"width": 128, "height": 128, "n_cells": 16, "noise_snr_db": null}"#,
    )
    .unwrap();
    ok(dir, &["--seed", "1", "phantom", "--spec", "spec.json", "--out", "train"]);
    ok(dir, &["--seed", "2", "phantom", "--spec", "spec.json", "--out", "test"]);
    ok(dir, &["classify", "train", "--manifest", "train/patches.csv", "--out", "model.json"]);
    ok(dir, &["classify", "predict", "--model", "model.json", "--manifest", "test/patches.csv", "--out", "pred"]);
    let report = json(&dir.join("pred/report.json"));
    assert!(report["n"].as_u64().unwrap() >= 4);
    assert_eq!(report["accuracy"].as_f64(), Some(1.0));
    assert_eq!(
        csv_rows(&dir.join("pred/predictions.csv")).len() as u64,
        report["n"].as_u64().unwrap()
    );
}

#[test]
fn failed_run_leaves_no_output() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("spec.json"), r#"{"width": 0}"#).unwrap();
    let out = papsmix(dir, &["phantom", "--spec", "spec.json", "--out", "ph"]);
    assert!(!out.status.success());
    assert!(!dir.join("ph").exists());
    let leftovers: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers, vec![std::ffi::OsString::from("spec.json")]);
}

#[test]
fn invalid_thread_cap_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_papsmix"))
        .current_dir(tmp.path())
        .env("PAPSMIX_THREADS", "many")
        .args(["phantom", "--out", "ph"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("PAPSMIX_THREADS"), "{}", stderr(&out));
}
