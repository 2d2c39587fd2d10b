use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::rng::BatchStreams;

use super::apr::apr_s;
use super::config::{AugmentConfig, LabeledBatch};
use super::paired::{apr_p_batch, ha_p, ha_pp_p};
use super::single::{ha_pp_s, ha_s};

/// A batch augmentation strategy.
///
/// Batch-level draws come from `streams.batch_rng()` and per-image draws from
/// `streams.image_rng(i)`, so the output is a pure function of
/// `(batch, cfg, streams)`.
pub trait Augmentation: Send + Sync {
    fn name(&self) -> &str;

    fn augment(
        &self,
        batch: &LabeledBatch,
        cfg: &AugmentConfig,
        streams: BatchStreams,
    ) -> Result<LabeledBatch>;
}

impl fmt::Debug for dyn Augmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Augmentation({})", self.name())
    }
}

type PairedFn = fn(&LabeledBatch, &AugmentConfig, &mut crate::rng::AugRng) -> Result<LabeledBatch>;
type SingleFn = fn(&ImageTensor, &AugmentConfig, &mut crate::rng::AugRng) -> Result<ImageTensor>;

struct Paired {
    name: &'static str,
    run: PairedFn,
}

impl Augmentation for Paired {
    fn name(&self) -> &str {
        self.name
    }

    fn augment(
        &self,
        batch: &LabeledBatch,
        cfg: &AugmentConfig,
        streams: BatchStreams,
    ) -> Result<LabeledBatch> {
        (self.run)(batch, cfg, &mut streams.batch_rng())
    }
}

struct Single {
    name: &'static str,
    run: SingleFn,
}

impl Augmentation for Single {
    fn name(&self) -> &str {
        self.name
    }

    fn augment(
        &self,
        batch: &LabeledBatch,
        cfg: &AugmentConfig,
        streams: BatchStreams,
    ) -> Result<LabeledBatch> {
        let images = batch
            .images()
            .iter()
            .enumerate()
            .map(|(i, x)| (self.run)(x, cfg, &mut streams.image_rng(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(batch.with_images(images))
    }
}

fn gated_apr_s(
    x: &ImageTensor,
    cfg: &AugmentConfig,
    rng: &mut crate::rng::AugRng,
) -> Result<ImageTensor> {
    if crate::rng::coin(rng, cfg.p_single) {
        Ok(apr_s(x, rng))
    } else {
        Ok(x.clone())
    }
}

/// Runs a paired strategy over the batch, then a single strategy over its output.
pub struct Tandem {
    name: String,
    paired: Box<dyn Augmentation>,
    single: Box<dyn Augmentation>,
}

impl Tandem {
    pub fn new(
        name: impl Into<String>,
        paired: Box<dyn Augmentation>,
        single: Box<dyn Augmentation>,
    ) -> Self {
        Self {
            name: name.into(),
            paired,
            single,
        }
    }
}

impl Augmentation for Tandem {
    fn name(&self) -> &str {
        &self.name
    }

    fn augment(
        &self,
        batch: &LabeledBatch,
        cfg: &AugmentConfig,
        streams: BatchStreams,
    ) -> Result<LabeledBatch> {
        let mixed = self.paired.augment(batch, cfg, streams)?;
        self.single.augment(&mixed, cfg, streams)
    }
}

/// Strategies by name.
pub struct Registry {
    entries: BTreeMap<String, Box<dyn Augmentation>>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// `apr_p`, `apr_s`, `ha_p`, `ha_s`, `ha_pp_p`, `ha_pp_s` and the tandem
    /// modes `apr_ps`, `ha_ps`, `ha_pp_ps`.
    pub fn with_builtins() -> Self {
        let paired = |name, run: PairedFn| Box::new(Paired { name, run }) as Box<dyn Augmentation>;
        let single = |name, run: SingleFn| Box::new(Single { name, run }) as Box<dyn Augmentation>;

        let mut reg = Self::empty();
        reg.register(paired("apr_p", apr_p_batch));
        reg.register(single("apr_s", gated_apr_s));
        reg.register(paired("ha_p", ha_p));
        reg.register(single("ha_s", ha_s));
        reg.register(paired("ha_pp_p", ha_pp_p));
        reg.register(single("ha_pp_s", ha_pp_s));
        reg.register(Box::new(Tandem::new(
            "apr_ps",
            paired("apr_p", apr_p_batch),
            single("apr_s", gated_apr_s),
        )));
        reg.register(Box::new(Tandem::new(
            "ha_ps",
            paired("ha_p", ha_p),
            single("ha_s", ha_s),
        )));
        reg.register(Box::new(Tandem::new(
            "ha_pp_ps",
            paired("ha_pp_p", ha_pp_p),
            single("ha_pp_s", ha_pp_s),
        )));
        reg
    }

    /// Adds a strategy, replacing any previous one with the same name.
    pub fn register(&mut self, strategy: Box<dyn Augmentation>) {
        self.entries.insert(strategy.name().to_owned(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Augmentation> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            Error::invalid(format!(
                "unknown augmentation mode '{name}' (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Looks `mode` up among the built-in strategies and applies it to batch
/// number `batch_index` under `cfg.seed`.
pub fn augment_batch(
    batch: &LabeledBatch,
    mode: &str,
    cfg: &AugmentConfig,
    batch_index: u64,
) -> Result<LabeledBatch> {
    cfg.validate()?;
    let registry = Registry::with_builtins();
    registry
        .get(mode)?
        .augment(batch, cfg, BatchStreams::new(cfg.seed, batch_index))
}
