//! Frequency-spectrum image augmentation.
//!
//! The crate splits images into low- and high-frequency bands with a small
//! Gaussian blur, swaps bands between images (or between augmented views of
//! one image), and optionally recombines the amplitude of one spectrum with
//! the phase of another. Around that core it carries the evaluation
//! arithmetic used to judge robustness (corruption error, AUROC), file
//! formats, and a small training harness that exercises the mechanism end
//! to end.
//!
//! Augmentation variants are strategies behind the [`hybrid::Augmentation`]
//! trait and are looked up by name in a [`hybrid::Registry`].

pub mod error;
pub mod hybrid;
pub mod image;
pub mod io;
pub mod metrics;
pub mod ops;
pub mod rng;
pub mod spectral;
pub mod toytrain;

pub use error::{Error, Result};
pub use hybrid::{AugmentConfig, Augmentation, LabeledBatch, Registry};
pub use image::ImageTensor;
