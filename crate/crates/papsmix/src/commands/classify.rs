use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use papsmix_core::analysis::{
    classification_report, extract_patch_features, lda_predict, lda_train, mann_whitney_u, patch_mean,
    Label, LdaModel, LdaOptions, MannWhitney, PATCH_SIZE,
};
use papsmix_core::color::lab_cube;
use papsmix_core::{AbundanceField, Dye, Role, SpectralCube};
use serde::Serialize;

use super::{optical_density, Context};
use crate::cli::{DensityArgs, FeatureKind};
use crate::cube_io::load_cube;
use crate::error::{read_json, Error, Result};
use crate::output::{config_hash, to_json, OutputSet};
use crate::tables::{read_manifest, PatchEntry};

const RGB_NAMES: [&str; 3] = ["R", "G", "B"];
const LAB_NAMES: [&str; 3] = ["L*", "a*", "b*"];
const OD_PREFIX: &str = "OD_ch";

/// A feature set: how images are prepared and which values are read.
#[derive(Debug, Clone, PartialEq)]
enum Features {
    Rgb,
    Od(usize),
    Lab,
    Abundance(Vec<Dye>),
}

impl Features {
    fn names(&self) -> Vec<String> {
        match self {
            Features::Rgb => RGB_NAMES.map(String::from).to_vec(),
            Features::Lab => LAB_NAMES.map(String::from).to_vec(),
            Features::Od(channels) => (0..*channels).map(|c| format!("{OD_PREFIX}{c}")).collect(),
            Features::Abundance(dyes) => dyes.iter().map(|d| d.label().to_string()).collect(),
        }
    }

    /// Recovers the feature set from a model's feature names.
    fn from_names(names: &[String]) -> Result<Self> {
        if names == RGB_NAMES {
            return Ok(Features::Rgb);
        }
        if names == LAB_NAMES {
            return Ok(Features::Lab);
        }
        let od: Vec<String> = (0..names.len()).map(|c| format!("{OD_PREFIX}{c}")).collect();
        if !names.is_empty() && names == od.as_slice() {
            return Ok(Features::Od(names.len()));
        }
        let dyes = names
            .iter()
            .map(|n| n.parse::<Dye>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Error::Usage(format!("unrecognised model features {names:?}")))?;
        Ok(Features::Abundance(dyes))
    }

    fn prepare(&self, cube: SpectralCube, density: &DensityArgs) -> Result<Prepared> {
        let need_intensity = |cube: &SpectralCube| -> Result<()> {
            if cube.role() != Role::Intensity || cube.channels() != 3 {
                return Err(Error::Usage("RGB and CIELAB features need a 3-channel intensity image".into()));
            }
            Ok(())
        };
        Ok(match self {
            Features::Rgb => {
                need_intensity(&cube)?;
                Prepared::Cube(cube)
            }
            Features::Lab => {
                need_intensity(&cube)?;
                Prepared::Cube(lab_cube(&cube)?)
            }
            Features::Od(channels) => {
                let od = optical_density(cube, density)?;
                if od.channels() != *channels {
                    return Err(papsmix_core::Error::ChannelMismatch {
                        expected: *channels,
                        found: od.channels(),
                    }
                    .into());
                }
                Prepared::Cube(od)
            }
            Features::Abundance(_) => Prepared::Field(AbundanceField::from_cube(&cube)?),
        })
    }

    fn extract(&self, image: &Prepared, cx: usize, cy: usize) -> Result<Vec<f64>> {
        match (self, image) {
            (Features::Abundance(dyes), Prepared::Field(field)) => {
                let f = extract_patch_features(field, cx, cy, PATCH_SIZE)?;
                Ok(dyes.iter().map(|d| f.relative(*d)).collect())
            }
            (_, Prepared::Cube(cube)) => Ok(patch_mean(cube, cx, cy, PATCH_SIZE)?),
            _ => unreachable!("images are prepared for their feature set"),
        }
    }
}

#[derive(Debug)]
enum Prepared {
    Cube(SpectralCube),
    Field(AbundanceField),
}

fn image_root(manifest: &Path, root: Option<&Path>) -> PathBuf {
    match root {
        Some(r) => r.to_path_buf(),
        None => manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    }
}

/// Feature vector of every manifest entry, loading each image once.
fn feature_rows(
    ctx: &Context,
    entries: &[PatchEntry],
    root: &Path,
    features: &Features,
    density: &DensityArgs,
) -> Result<Vec<Vec<f64>>> {
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for e in entries {
        let next = index.len();
        index.entry(e.image.as_str()).or_insert(next);
    }
    let mut paths = vec![PathBuf::new(); index.len()];
    for (name, i) in &index {
        paths[*i] = root.join(name);
    }
    let images = ctx.map(&paths, |p| features.prepare(load_cube(p)?, density))?;
    entries
        .iter()
        .map(|e| {
            features
                .extract(&images[index[e.image.as_str()]], e.cx, e.cy)
                .map_err(|err| Error::Usage(format!("patch at ({}, {}) of {}: {err}", e.cx, e.cy, e.image)))
        })
        .collect()
}

pub fn train(
    ctx: &Context,
    manifest: &Path,
    root: Option<&Path>,
    kind: FeatureKind,
    dyes: &[String],
    density: &DensityArgs,
    out_path: &Path,
) -> Result<Vec<PathBuf>> {
    let entries = read_manifest(manifest)?;
    let root = image_root(manifest, root);
    let features = match kind {
        FeatureKind::Rgb => Features::Rgb,
        FeatureKind::Lab => Features::Lab,
        FeatureKind::Od => {
            let first = load_cube(&root.join(&entries[0].image))?;
            Features::Od(first.channels())
        }
        FeatureKind::Abundance => Features::Abundance(
            dyes.iter().map(|d| d.parse()).collect::<Result<Vec<Dye>, _>>()?,
        ),
    };
    let rows = feature_rows(ctx, &entries, &root, &features, density)?;
    let samples = entries
        .iter()
        .zip(rows)
        .map(|(e, x)| {
            e.label
                .map(|l| (l, x))
                .ok_or_else(|| Error::format(manifest, format!("training patch of {} has no label", e.image)))
        })
        .collect::<Result<Vec<_>>>()?;
    let model = lda_train(&samples, features.names(), LdaOptions::default())?;

    let (mut out, name) = OutputSet::for_file(out_path)?;
    out.write(&name, &to_json(&model))?;
    let hash = config_hash(&(features.names(), &density.light, density.linearize));
    out.commit("classify train", &[manifest], hash)
}

#[derive(Debug, Serialize)]
struct FeatureTest {
    feature: String,
    mean_ec: f64,
    mean_legh: f64,
    #[serde(flatten)]
    test: MannWhitney,
}

fn feature_tests(names: &[String], rows: &[Vec<f64>], labels: &[Label]) -> Result<Vec<FeatureTest>> {
    names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let of = |label: Label| -> Vec<f64> {
                rows.iter().zip(labels).filter(|(_, l)| **l == label).map(|(x, _)| x[k]).collect()
            };
            let (ec, legh) = (of(Label::Ec), of(Label::Legh));
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            Ok(FeatureTest {
                feature: name.clone(),
                mean_ec: mean(&ec),
                mean_legh: mean(&legh),
                test: mann_whitney_u(&legh, &ec)?,
            })
        })
        .collect()
}

pub fn predict(
    ctx: &Context,
    model_path: &Path,
    manifest: &Path,
    root: Option<&Path>,
    density: &DensityArgs,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let model: LdaModel = read_json(model_path)?;
    if model.features.len() != model.weights.len() {
        return Err(Error::format(model_path, "feature and weight counts differ"));
    }
    let features = Features::from_names(&model.features)?;
    let entries = read_manifest(manifest)?;
    let rows = feature_rows(ctx, &entries, &image_root(manifest, root), &features, density)?;
    let predictions = rows
        .iter()
        .map(|x| lda_predict(&model, x))
        .collect::<Result<Vec<_>, _>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["image", "cx", "cy", "label", "predicted", "score"]).expect("in-memory CSV");
    for (e, (label, score)) in entries.iter().zip(&predictions) {
        w.write_record([
            e.image.clone(),
            e.cx.to_string(),
            e.cy.to_string(),
            e.label.map_or(String::new(), |l| l.to_string()),
            label.to_string(),
            score.to_string(),
        ])
        .expect("in-memory CSV");
    }
    let mut out = OutputSet::in_dir(out_dir)?;
    out.write("predictions.csv", &w.into_inner().expect("in-memory CSV"))?;

    let truths: Option<Vec<Label>> = entries.iter().map(|e| e.label).collect();
    if let Some(truths) = truths {
        let predicted: Vec<Label> = predictions.iter().map(|(l, _)| *l).collect();
        out.write("report.json", &to_json(&classification_report(&predicted, &truths)?))?;
        let both = truths.contains(&Label::Ec) && truths.contains(&Label::Legh);
        if both {
            out.write("stats.json", &to_json(&feature_tests(&model.features, &rows, &truths)?))?;
        }
    } else {
        log::info!("manifest has unlabelled patches; no report written");
    }
    let hash = config_hash(&(&model, &density.light, density.linearize));
    out.commit("classify predict", &[model_path, manifest], hash)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_names_round_trip() {
        for f in [
            Features::Rgb,
            Features::Lab,
            Features::Od(3),
            Features::Abundance(vec![Dye::Ey, Dye::Og]),
            Features::Abundance(vec![Dye::Ey, Dye::H, Dye::Og]),
        ] {
            assert_eq!(Features::from_names(&f.names()).unwrap(), f);
        }
        assert_eq!(
            Features::from_names(&LdaModel::reported().features).unwrap(),
            Features::Abundance(vec![Dye::Ey, Dye::Og])
        );
        assert!(Features::from_names(&["x".to_string()]).is_err());
    }
}
