use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hybrid::{AugmentConfig, LabeledBatch, Registry};
use crate::image::ImageTensor;
use crate::rng::{stream, BatchStreams};

use super::dataset::{generate_dataset, DatasetParams};
use super::model::TinyClassifier;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.05,
            batch_size: 32,
            n_train: 512,
            n_test: 512,
            hidden: 64,
        }
    }
}

fn flatten(x: &ImageTensor) -> Vec<f64> {
    x.data().iter().map(|&v| f64::from(v)).collect()
}

fn class_index(label: i64, classes: usize) -> Result<usize> {
    usize::try_from(label)
        .ok()
        .filter(|&l| l < classes)
        .ok_or_else(|| Error::invalid(format!("label {label} outside 0..{classes}")))
}

fn inputs_and_labels(batch: &LabeledBatch, classes: usize) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let inputs = batch.images().iter().map(flatten).collect();
    let labels = batch
        .labels()
        .iter()
        .map(|&l| class_index(l, classes))
        .collect::<Result<_>>()?;
    Ok((inputs, labels))
}

/// Minibatch gradient descent on cross-entropy.
///
/// With an augmentation mode, every step minimizes the mean of the loss on
/// the original minibatch and on its augmented copy. Minibatch order comes
/// from `seed`; augmentation draws come from `(aug_cfg.seed, step)`.
pub fn train(
    mut model: TinyClassifier,
    data: &LabeledBatch,
    augment: Option<&str>,
    aug_cfg: &AugmentConfig,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TinyClassifier> {
    let registry = Registry::with_builtins();
    let strategy = augment.map(|name| registry.get(name)).transpose()?;
    if strategy.is_some() {
        aug_cfg.validate()?;
    }
    if cfg.batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle_rng = stream(seed, 0, 0);
    let mut step = 0u64;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for chunk in order.chunks(cfg.batch_size) {
            let images = chunk.iter().map(|&i| data.images()[i].clone()).collect();
            let labels = chunk.iter().map(|&i| data.labels()[i]).collect();
            let mini = LabeledBatch::new(images, labels)?;
            let (inputs, targets) = inputs_and_labels(&mini, model.classes())?;
            let (mut loss, mut grads) = model.loss_and_gradients(&inputs, &targets);

            if let Some(strategy) = strategy {
                let augmented = strategy.augment(&mini, aug_cfg, BatchStreams::new(aug_cfg.seed, step))?;
                let (aug_inputs, aug_targets) = inputs_and_labels(&augmented, model.classes())?;
                let (aug_loss, aug_grads) = model.loss_and_gradients(&aug_inputs, &aug_targets);
                loss = 0.5 * (loss + aug_loss);
                grads.scale(0.5);
                grads.add_scaled(&aug_grads, 0.5);
            }
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch, loss });
            }
            model.step(&grads, cfg.lr);
            step += 1;
        }
    }
    Ok(model)
}

/// Classification accuracy of `model` on `batch`.
pub fn evaluate(model: &TinyClassifier, batch: &LabeledBatch) -> Result<f64> {
    let (inputs, labels) = inputs_and_labels(batch, model.classes())?;
    let hits = inputs
        .iter()
        .zip(&labels)
        .filter(|(x, &l)| model.predict(x) == l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub clean_acc_baseline: f64,
    pub shifted_acc_baseline: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clean_acc_ha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifted_acc_ha: Option<f64>,
    pub augment: Option<String>,
    pub train: TrainConfig,
    pub augment_config: AugmentConfig,
    pub dataset: DatasetParams,
}

/// Trains a baseline and, when `augment` is given, an augmented model from
/// the same initialization, and scores both on the clean and shifted test sets.
pub fn run_experiment_with(
    seed: u64,
    augment: Option<&str>,
    cfg: &TrainConfig,
    aug_cfg: &AugmentConfig,
    params: &DatasetParams,
) -> Result<ExperimentReport> {
    let data = generate_dataset(seed, cfg.n_train, cfg.n_test, params)?;
    let input = params.image_side * params.image_side;
    let init = TinyClassifier::new(input, cfg.hidden, data.n_classes, &mut stream(seed, 1, 0));
    let aug_cfg = AugmentConfig {
        seed,
        ..aug_cfg.clone()
    };

    let baseline = train(init.clone(), &data.train, None, &aug_cfg, cfg, seed)?;
    let (clean_acc_ha, shifted_acc_ha) = match augment {
        Some(mode) => {
            let model = train(init, &data.train, Some(mode), &aug_cfg, cfg, seed)?;
            (
                Some(evaluate(&model, &data.test_clean)?),
                Some(evaluate(&model, &data.test_hf_corrupt)?),
            )
        }
        None => (None, None),
    };
    Ok(ExperimentReport {
        seed,
        clean_acc_baseline: evaluate(&baseline, &data.test_clean)?,
        shifted_acc_baseline: evaluate(&baseline, &data.test_hf_corrupt)?,
        clean_acc_ha,
        shifted_acc_ha,
        augment: augment.map(str::to_owned),
        train: cfg.clone(),
        augment_config: aug_cfg,
        dataset: params.clone(),
    })
}

/// Default configuration, baseline versus paired band swapping.
pub fn run_experiment(seed: u64) -> Result<ExperimentReport> {
    run_experiment_with(
        seed,
        Some("ha_p"),
        &TrainConfig::default(),
        &AugmentConfig::default(),
        &DatasetParams::default(),
    )
}
