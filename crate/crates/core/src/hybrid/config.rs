use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::spectral::GaussianKernel;

/// Kernel parameters, gate probabilities and seed for every variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub kernel_size: usize,
    pub sigma: f64,
    /// Gate of the paired variants.
    pub p_paired: f64,
    /// Gate of the single variants, reused for the final LF/HF source pick.
    pub p_single: f64,
    /// Chance that HA++ swaps the amplitude of an LF component.
    pub p_inner_apr: f64,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            kernel_size: 3,
            sigma: 0.5,
            p_paired: 0.6,
            p_single: 0.5,
            p_inner_apr: 0.6,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_paired", self.p_paired),
            ("p_single", self.p_single),
            ("p_inner_apr", self.p_inner_apr),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        self.kernel().map(|_| ())
    }

    pub fn kernel(&self) -> Result<GaussianKernel> {
        GaussianKernel::new(self.kernel_size, self.sigma)
    }

    /// A configuration whose gates never fire.
    pub fn disabled() -> Self {
        Self {
            p_paired: 0.0,
            p_single: 0.0,
            p_inner_apr: 0.0,
            ..Self::default()
        }
    }
}

/// A nonempty mini-batch of same-shape images with one label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch {
    images: Vec<ImageTensor>,
    labels: Vec<i64>,
}

impl LabeledBatch {
    pub fn new(images: Vec<ImageTensor>, labels: Vec<i64>) -> Result<Self> {
        let Some(first) = images.first() else {
            return Err(Error::invalid("batch must hold at least one image"));
        };
        if labels.len() != images.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} images",
                labels.len(),
                images.len()
            )));
        }
        if let Some(i) = images.iter().position(|img| !img.same_shape(first)) {
            return Err(Error::invalid(format!(
                "image {i} has shape {:?}, expected {:?}",
                images[i].shape(),
                first.shape()
            )));
        }
        Ok(Self { images, labels })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[ImageTensor] {
        &self.images
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.images[0].shape()
    }

    pub fn into_parts(self) -> (Vec<ImageTensor>, Vec<i64>) {
        (self.images, self.labels)
    }

    /// Same labels, new images. The caller keeps the shape invariant.
    pub(crate) fn with_images(&self, images: Vec<ImageTensor>) -> LabeledBatch {
        debug_assert_eq!(images.len(), self.labels.len());
        LabeledBatch {
            images,
            labels: self.labels.clone(),
        }
    }
}
