//! CSV and JSON tables: stain matrices, region lists, evaluation reports,
//! patch manifests and sweep grids.

use std::path::Path;

use papsmix_core::analysis::Label;
use papsmix_core::metrics::EvalResult;
use papsmix_core::phantom::{BenchmarkRow, SweepRow};
use papsmix_core::stain::DYE_COUNT;
use papsmix_core::{Dye, StainMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, read_json, Error, Result};

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory CSV")
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn encode_stain_csv(m: &StainMatrix) -> Vec<u8> {
    let mut w = csv_writer();
    let mut header = vec!["dye".to_string()];
    header.extend(Dye::ALL.iter().map(|d| d.label().to_string()));
    w.write_record(&header).expect("in-memory CSV");
    for c in 0..m.channels() {
        let mut row = vec![format!("ch{c}")];
        row.extend(Dye::ALL.iter().map(|d| num(m.get(c, *d))));
        w.write_record(&row).expect("in-memory CSV");
    }
    finish(w)
}

/// Reads `dye,EY,H,LG,OG` / `ch<k>,...`; dye columns may come in any order.
pub fn read_stain_csv(path: &Path) -> Result<StainMatrix> {
    let bytes = read_file(path)?;
    let bad = |msg: String| Error::format(path, msg);
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes.as_slice());
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() != DYE_COUNT + 1 || header.get(0) != Some("dye") {
        return Err(bad("stain matrix header must be `dye,EY,H,LG,OG`".into()));
    }
    let mut order = [0usize; DYE_COUNT];
    let mut seen = [false; DYE_COUNT];
    for (k, label) in header.iter().skip(1).enumerate() {
        let dye: Dye = label.parse().map_err(|e: papsmix_core::Error| bad(e.to_string()))?;
        if std::mem::replace(&mut seen[dye.index()], true) {
            return Err(bad(format!("dye {dye} appears twice in the header")));
        }
        order[k] = dye.index();
    }
    let mut coeffs = Vec::new();
    let mut channels = 0;
    for record in r.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let expected = format!("ch{channels}");
        if record.get(0) != Some(expected.as_str()) {
            return Err(bad(format!("row {} must be labelled `{expected}`", channels + 1)));
        }
        let mut row = [0.0; DYE_COUNT];
        for (k, field) in record.iter().skip(1).enumerate() {
            row[order[k]] = field
                .parse()
                .map_err(|_| bad(format!("`{field}` in row {expected} is not a number")))?;
        }
        coeffs.extend_from_slice(&row);
        channels += 1;
    }
    StainMatrix::new(channels, coeffs).map_err(|e| bad(e.to_string()))
}

/// A rectangle of single-stained pixels in image `image` of a list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionRect {
    pub dye: Dye,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    #[serde(default)]
    pub image: usize,
}

pub fn read_regions(path: &Path) -> Result<Vec<RegionRect>> {
    let regions: Vec<RegionRect> = read_json(path)?;
    if regions.is_empty() {
        return Err(Error::format(path, "region list is empty"));
    }
    Ok(regions)
}

pub const REPORT_HEADER: [&str; 12] = [
    "image", "method", "sre_db", "rmse", "sre_EY", "sre_H", "sre_LG", "sre_OG", "rmse_EY", "rmse_H",
    "rmse_LG", "rmse_OG",
];

fn report_fields(image: &str, method: &str, e: &EvalResult) -> Vec<String> {
    let mut row = vec![image.to_string(), method.to_string(), num(e.sre_db), num(e.rmse)];
    row.extend(e.per_dye_sre_db.iter().map(|v| num(*v)));
    row.extend(e.per_dye_rmse.iter().map(|v| num(*v)));
    row
}

pub fn encode_report(rows: &[(String, String, EvalResult)]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(REPORT_HEADER).expect("in-memory CSV");
    for (image, method, e) in rows {
        w.write_record(report_fields(image, method, e)).expect("in-memory CSV");
    }
    finish(w)
}

/// Report columns followed by `h_false_positive,iterations,converged`.
pub fn encode_benchmark(rows: &[BenchmarkRow]) -> Vec<u8> {
    let mut w = csv_writer();
    let mut header: Vec<&str> = REPORT_HEADER.to_vec();
    header.extend(["h_false_positive", "iterations", "converged"]);
    w.write_record(&header).expect("in-memory CSV");
    for r in rows {
        let mut row = report_fields(&format!("seed{}", r.seed), r.method.name(), &r.eval);
        row.push(num(r.h_false_positive));
        row.push(r.iterations.map(|i| i.to_string()).unwrap_or_default());
        row.push(r.converged.to_string());
        w.write_record(&row).expect("in-memory CSV");
    }
    finish(w)
}

pub fn encode_sweep(rows: &[SweepRow]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(["lambda", "lambda_tv", "sre_db", "rmse"]).expect("in-memory CSV");
    for r in rows {
        w.write_record([num(r.lambda), num(r.lambda_tv), num(r.sre_db), num(r.rmse)])
            .expect("in-memory CSV");
    }
    finish(w)
}

/// One row of a patch manifest. `label` may be empty for unlabelled patches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchEntry {
    pub image: String,
    #[serde(with = "label_field")]
    pub label: Option<Label>,
    pub cx: usize,
    pub cy: usize,
}

mod label_field {
    use papsmix_core::analysis::Label;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(label: &Option<Label>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(label.map_or("", Label::name))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Label>, D::Error> {
        let s = String::deserialize(d)?;
        if s.trim().is_empty() {
            return Ok(None);
        }
        s.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

pub fn encode_manifest(entries: &[PatchEntry]) -> Vec<u8> {
    let mut w = csv_writer();
    for e in entries {
        w.serialize(e).expect("in-memory CSV");
    }
    finish(w)
}

pub fn read_manifest(path: &Path) -> Result<Vec<PatchEntry>> {
    let bytes = read_file(path)?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes.as_slice());
    let entries = r
        .deserialize()
        .collect::<std::result::Result<Vec<PatchEntry>, _>>()
        .map_err(|e| Error::format(path, e.to_string()))?;
    if entries.is_empty() {
        return Err(Error::format(path, "patch manifest has no rows"));
    }
    Ok(entries)
}
