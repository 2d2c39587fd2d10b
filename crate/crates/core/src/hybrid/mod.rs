//! Band-swapping and amplitude/phase-swapping augmentations.
//!
//! Each variant first samples a *plan* (every random decision it will make,
//! drawn in a fixed order) and then executes it deterministically. Tests and
//! oracles build plans by hand to force permutations, chains and gates.
//!
//! | name       | donors                         | gate       |
//! |------------|--------------------------------|------------|
//! | `apr_p`    | amplitude from another image   | `p_paired` |
//! | `apr_s`    | amplitude from another view    | `p_single` |
//! | `ha_p`     | HF from another image          | `p_paired` |
//! | `ha_s`     | HF from another view           | `p_single` |
//! | `ha_pp_p`  | `ha_p` + LF amplitude swap     | `p_paired` |
//! | `ha_pp_s`  | `ha_s` + LF amplitude swap     | `p_single` |
//!
//! The `*_ps` names run the paired variant over the batch and then the
//! single variant over every image. Labels always stay with the image that
//! donates the low frequencies (and the phase).

mod apr;
mod config;
mod paired;
mod registry;
mod single;

pub use apr::{apr_p, apr_s, AprPlan};
pub use config::{AugmentConfig, LabeledBatch};
pub use paired::{apr_p_batch, ha_p, ha_pp_p, PairedPlan};
pub use registry::{augment_batch, Augmentation, Registry, Tandem};
pub use single::{ha_pp_s, ha_s, SinglePlan};
