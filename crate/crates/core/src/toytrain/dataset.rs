use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hybrid::LabeledBatch;
use crate::image::ImageTensor;
use crate::rng::{coin, stream, AugRng};
use crate::spectral::{low_pass, GaussianKernel};

/// Knobs of the synthetic two-class dataset.
///
/// Class 0 images are a ramp along x, class 1 a ramp along y, with random
/// amplitude, direction and brightness offset plus white pixel noise. On top
/// sits `±texture_amplitude` times a checkerboard; its sign matches the class
/// with probability `texture_agreement` in the training and clean test sets,
/// and is a fair coin in the shifted test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetParams {
    pub image_side: usize,
    pub ramp_amplitude: (f64, f64),
    pub offset_range: f64,
    pub pixel_noise: f64,
    pub texture_amplitude: f64,
    pub texture_agreement: f64,
}

impl Default for DatasetParams {
    fn default() -> Self {
        Self {
            image_side: 16,
            ramp_amplitude: (0.1, 0.2),
            offset_range: 0.1,
            pixel_noise: 0.03,
            texture_amplitude: 0.25,
            texture_agreement: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticShiftDataset {
    pub train: LabeledBatch,
    pub test_clean: LabeledBatch,
    /// `test_clean` with the texture sign redrawn independently of the label.
    pub test_hf_corrupt: LabeledBatch,
    pub image_side: usize,
    pub n_classes: usize,
}

const N_CLASSES: usize = 2;

struct Sample {
    base: Vec<f32>,
    label: i64,
}

fn checker(y: usize, x: usize) -> f32 {
    if (x + y).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn draw_base(p: &DatasetParams, rng: &mut AugRng) -> Sample {
    let side = p.image_side;
    let label = rng.random_range(0..N_CLASSES as i64);
    let amp = rng.random_range(p.ramp_amplitude.0..=p.ramp_amplitude.1);
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let offset = rng.random_range(-p.offset_range..=p.offset_range);
    let mut base = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let along = if label == 0 { x } else { y };
            let t = along as f64 / (side - 1) as f64 - 0.5;
            let noise = rng.random_range(-p.pixel_noise..=p.pixel_noise);
            base.push((0.5 + offset + sign * amp * t + noise) as f32);
        }
    }
    Sample { base, label }
}

fn textured(p: &DatasetParams, s: &Sample, texture_sign: f32) -> ImageTensor {
    let side = p.image_side;
    let amp = p.texture_amplitude as f32;
    let data = s
        .base
        .iter()
        .enumerate()
        .map(|(i, v)| v + texture_sign * amp * checker(i / side, i % side))
        .collect();
    ImageTensor::new(side, side, 1, data).expect("finite synthetic image")
}

fn class_sign(label: i64) -> f32 {
    if label == 0 {
        1.0
    } else {
        -1.0
    }
}

fn correlated_split(p: &DatasetParams, n: usize, rng: &mut AugRng) -> (Vec<Sample>, Vec<ImageTensor>) {
    let samples: Vec<Sample> = (0..n).map(|_| draw_base(p, rng)).collect();
    let images = samples
        .iter()
        .map(|s| {
            let agree = coin(rng, p.texture_agreement);
            let sign = class_sign(s.label) * if agree { 1.0 } else { -1.0 };
            textured(p, s, sign)
        })
        .collect();
    (samples, images)
}

fn batch(images: Vec<ImageTensor>, samples: &[Sample]) -> LabeledBatch {
    LabeledBatch::new(images, samples.iter().map(|s| s.label).collect()).expect("nonempty batch")
}

/// Deterministic in `(seed, n_train, n_test, params)`.
pub fn generate_dataset(
    seed: u64,
    n_train: usize,
    n_test: usize,
    params: &DatasetParams,
) -> Result<SyntheticShiftDataset> {
    if n_train < 2 || n_test < 2 {
        return Err(Error::invalid("need at least 2 training and 2 test images"));
    }
    if params.image_side < 2 {
        return Err(Error::invalid("image side must be at least 2"));
    }
    let mut train_rng = stream(seed, 0, 0);
    let (train_samples, train_images) = correlated_split(params, n_train, &mut train_rng);

    let mut test_rng = stream(seed, 0, 1);
    let (test_samples, clean_images) = correlated_split(params, n_test, &mut test_rng);
    let mut shift_rng = stream(seed, 0, 2);
    let shifted_images = test_samples
        .iter()
        .map(|s| {
            let sign = if shift_rng.random::<bool>() { 1.0 } else { -1.0 };
            textured(params, s, sign)
        })
        .collect();

    Ok(SyntheticShiftDataset {
        train: batch(train_images, &train_samples),
        test_clean: batch(clean_images, &test_samples),
        test_hf_corrupt: batch(shifted_images, &test_samples),
        image_side: params.image_side,
        n_classes: N_CLASSES,
    })
}

/// Class read off the low-frequency band: the blurred image is projected
/// onto centered ramps along x and along y, and the larger magnitude wins
/// (0 for x, 1 for y).
pub fn lf_orientation(x: &ImageTensor, kernel: &GaussianKernel) -> i64 {
    let lf = low_pass(x, kernel);
    let (h, w, _) = lf.shape();
    let centered = |i: usize, n: usize| i as f64 - (n as f64 - 1.0) / 2.0;
    let mut along_x = 0.0;
    let mut along_y = 0.0;
    for y in 0..h {
        for x in 0..w {
            let v = f64::from(lf.get(y, x, 0));
            along_x += v * centered(x, w);
            along_y += v * centered(y, h);
        }
    }
    if along_x.abs() > along_y.abs() {
        0
    } else {
        1
    }
}
