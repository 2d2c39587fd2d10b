use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hybridaug::hybrid::augment_batch;
use hybridaug::io::{
    list_images, load_config, load_error_table, load_image, load_labels, load_predictions,
    load_scores, save_image, save_labels, write_json, PredictionRecord,
};
use hybridaug::metrics::{
    accuracy, auroc, corruption_error, mce_over, CorruptionErrorTable, ScoreSet, SEVERITIES,
};
use hybridaug::spectral::{decompose as split_bands, GaussianKernel};
use hybridaug::toytrain::{run_experiment_with, DatasetParams, ExperimentReport, TrainConfig};
use hybridaug::{AugmentConfig, Error, LabeledBatch};
use serde_json::{json, Map, Value};

use crate::{AugmentArgs, AurocArgs, DecomposeArgs, MceArgs, ToyTrainArgs};

pub fn decompose(a: &DecomposeArgs) -> Result<()> {
    let kernel = GaussianKernel::new(a.kernel_size, a.sigma)?;
    let x = load_image(&a.input)?;
    let parts = split_bands(&x, &kernel);
    save_image(&parts.lf, &a.out_lf, 0.0)?;
    save_image(&parts.hf, &a.out_hf, 0.5)?;
    println!("hf_l2_norm {}", parts.hf.l2_norm());
    Ok(())
}

fn augment_config(a: &AugmentArgs) -> Result<AugmentConfig> {
    let mut cfg = match &a.config {
        Some(path) => load_config(path)?,
        None => AugmentConfig::default(),
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.p_paired {
        cfg.p_paired = v;
    }
    if let Some(v) = a.p_single {
        cfg.p_single = v;
    }
    if let Some(v) = a.p_inner {
        cfg.p_inner_apr = v;
    }
    if let Some(v) = a.kernel_size {
        cfg.kernel_size = v;
    }
    if let Some(v) = a.sigma {
        cfg.sigma = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn file_name(path: &Path) -> Result<&str> {
    path.file_name()
        .and_then(|n| n.to_str())
        .with_context(|| format!("{}: file name is not valid UTF-8", path.display()))
}

fn file_stem(path: &Path) -> Result<&str> {
    path.file_stem()
        .and_then(|n| n.to_str())
        .with_context(|| format!("{}: file name is not valid UTF-8", path.display()))
}

pub fn augment(a: &AugmentArgs) -> Result<()> {
    let cfg = augment_config(a)?;
    let labels = load_labels(&a.labels)?;
    let files = list_images(&a.input_dir)?;
    if files.is_empty() {
        bail!("{}: no .png or .hat images found", a.input_dir.display());
    }

    let out = &a.output_dir;
    let reuse_empty = out.is_dir();
    if reuse_empty && fs::read_dir(out)?.next().is_some() {
        bail!("{}: output directory is not empty", out.display());
    }
    if out.exists() && !reuse_empty {
        bail!("{}: exists and is not a directory", out.display());
    }
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = tempfile::Builder::new()
        .prefix(".hybridaug-staging-")
        .tempdir_in(parent)
        .with_context(|| format!("creating a staging directory in {}", parent.display()))?;

    let mut out_labels: BTreeMap<String, i64> = BTreeMap::new();
    for (index, chunk) in files.chunks(a.batch as usize).enumerate() {
        let mut images = Vec::with_capacity(chunk.len());
        let mut batch_labels = Vec::with_capacity(chunk.len());
        for path in chunk {
            let stem = file_stem(path)?;
            let label = labels.get(stem).copied().ok_or_else(|| {
                Error::MissingData(format!("{}: no label for image_id '{stem}'", a.labels.display()))
            })?;
            images.push(load_image(path)?);
            batch_labels.push(label);
        }
        let batch = LabeledBatch::new(images, batch_labels)
            .with_context(|| format!("batch {index} starting at {}", chunk[0].display()))?;
        let augmented = augment_batch(&batch, &a.mode, &cfg, index as u64)?;
        for ((path, image), &label) in chunk
            .iter()
            .zip(augmented.images())
            .zip(augmented.labels())
        {
            save_image(image, &staging.path().join(format!("aug_{}", file_name(path)?)), 0.0)?;
            let id = format!("aug_{}", file_stem(path)?);
            if out_labels.insert(id.clone(), label).is_some() {
                bail!("two input images share the image_id '{}'", &id[4..]);
            }
        }
    }
    save_labels(
        out_labels.iter().map(|(id, &l)| (id.as_str(), l)),
        &staging.path().join("labels.csv"),
    )?;

    if reuse_empty {
        fs::remove_dir(out).with_context(|| format!("replacing {}", out.display()))?;
    }
    let staged = staging.keep();
    if let Err(e) = fs::rename(&staged, out) {
        let _ = fs::remove_dir_all(&staged);
        return Err(e).with_context(|| format!("moving output into {}", out.display()));
    }
    println!("augmented {} images into {}", files.len(), out.display());
    Ok(())
}

fn error_rate(
    records: &[PredictionRecord],
    truth: &BTreeMap<String, i64>,
    path: &Path,
) -> Result<f64> {
    let mut seen = BTreeSet::new();
    let mut predicted = Vec::with_capacity(records.len());
    let mut expected = Vec::with_capacity(records.len());
    for r in records {
        let Some(&label) = truth.get(&r.image_id) else {
            return Err(Error::Format(format!(
                "{}: image_id '{}' is not in the truth file",
                path.display(),
                r.image_id
            ))
            .into());
        };
        if r.true_label != label {
            return Err(Error::Format(format!(
                "{}: '{}' has true_label {} but the truth file says {label}",
                path.display(),
                r.image_id,
                r.true_label
            ))
            .into());
        }
        if !seen.insert(r.image_id.as_str()) {
            return Err(Error::Format(format!(
                "{}: duplicate image_id '{}'",
                path.display(),
                r.image_id
            ))
            .into());
        }
        predicted.push(r.pred_label);
        expected.push(label);
    }
    if seen.len() != truth.len() {
        return Err(Error::MissingData(format!(
            "{}: predictions for {} of {} images",
            path.display(),
            seen.len(),
            truth.len()
        ))
        .into());
    }
    Ok(1.0 - accuracy(&predicted, &expected)?)
}

pub fn metrics_mce(a: &MceArgs) -> Result<()> {
    let truth = load_labels(&a.truth)?;
    if truth.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: no labels", a.truth.display())).into());
    }
    let reference = load_error_table(&a.reference)?;
    let corruptions = reference.corruptions();
    if corruptions.is_empty() {
        return Err(Error::InvalidArgument(format!("{}: empty reference table", a.reference.display())).into());
    }

    let mut model = CorruptionErrorTable::new();
    let mut missing = Vec::new();
    for &c in &corruptions {
        for s in SEVERITIES {
            let path = a.pred_dir.join(c).join(format!("{s}.csv"));
            if !path.is_file() {
                missing.push(format!("{c}/{s}.csv"));
                continue;
            }
            let rate = error_rate(&load_predictions(&path)?, &truth, &path)?;
            model.insert(c, s, rate)?;
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingData(format!(
            "{}: prediction files missing: {}",
            a.pred_dir.display(),
            missing.join(", ")
        ))
        .into());
    }

    let mut per_corruption = Map::new();
    for &c in &corruptions {
        let ce = corruption_error(&model, &reference, c)?;
        println!("{c} CE {:.1}", 100.0 * ce);
        per_corruption.insert(c.to_owned(), json!(ce));
    }
    let mce = mce_over(&model, &reference, &corruptions)?;
    println!("mCE {:.1}", 100.0 * mce);

    let errors: Vec<Value> = model
        .iter()
        .map(|(c, s, e)| json!({"corruption": c, "severity": s, "error": e}))
        .collect();
    let report = json!({
        "corruption_errors": per_corruption,
        "mce": mce,
        "model_errors": errors,
    });
    write_json(&report, &a.report)?;
    Ok(())
}

pub fn metrics_auroc(a: &AurocArgs) -> Result<()> {
    let scores = ScoreSet::new(load_scores(&a.id_scores)?, load_scores(&a.ood_scores)?)?;
    println!("AUROC {:.1}", 100.0 * auroc(&scores));
    Ok(())
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

pub fn toy_train(a: &ToyTrainArgs) -> Result<()> {
    let mode = a.augment.mode();
    let seeds: Vec<u64> = (0..a.seeds).collect();
    let runs = seeds
        .iter()
        .map(|&seed| {
            run_experiment_with(
                seed,
                mode,
                &TrainConfig::default(),
                &AugmentConfig::default(),
                &DatasetParams::default(),
            )
        })
        .collect::<hybridaug::Result<Vec<ExperimentReport>>>()?;

    let mut means = vec![
        ("clean_acc_baseline", mean(runs.iter().map(|r| r.clean_acc_baseline))),
        ("shifted_acc_baseline", mean(runs.iter().map(|r| r.shifted_acc_baseline))),
    ];
    if mode.is_some() {
        means.push(("clean_acc_ha", mean(runs.iter().filter_map(|r| r.clean_acc_ha))));
        means.push(("shifted_acc_ha", mean(runs.iter().filter_map(|r| r.shifted_acc_ha))));
    }

    let mut report = Map::new();
    report.insert("augment".into(), json!(mode.unwrap_or("none")));
    report.insert("seeds".into(), json!(seeds));
    for (name, value) in &means {
        println!("mean_{name} {value:.4}");
        report.insert(format!("mean_{name}"), json!(value));
    }
    report.insert("runs".into(), serde_json::to_value(&runs)?);
    write_json(&Value::Object(report), &a.report)?;
    Ok(())
}
