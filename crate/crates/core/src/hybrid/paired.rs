use rand::RngCore;

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::rng::{coin, permutation};
use crate::spectral::{decompose, FrequencyDecomposition, GaussianKernel};

use super::apr::apr_p;
use super::config::{AugmentConfig, LabeledBatch};

/// Random decisions of one paired HA / HA++ application.
///
/// Output `i` takes its LF from image `i` and its HF from image
/// `hf_perm[i]`. When `amplitude_perm` is set (HA++), the LF of image `i`
/// first receives the amplitude spectrum of the LF of image
/// `amplitude_perm[i]`, keeping its own phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedPlan {
    pub hf_perm: Vec<usize>,
    pub amplitude_perm: Option<Vec<usize>>,
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::invalid(format!(
            "permutation of length {} for a batch of {n}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid(format!("{perm:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

impl PairedPlan {
    pub fn identity(n: usize, plus: bool) -> Self {
        let id: Vec<usize> = (0..n).collect();
        Self {
            amplitude_perm: plus.then(|| id.clone()),
            hf_perm: id,
        }
    }

    /// Draws, in order: the batch gate, the HF permutation, and for HA++ the
    /// inner amplitude-swap gate and its permutation. `None` means the gate
    /// was not taken and the batch passes through unchanged.
    pub fn sample<R: RngCore + ?Sized>(
        n: usize,
        cfg: &AugmentConfig,
        plus: bool,
        rng: &mut R,
    ) -> Option<Self> {
        if !coin(rng, cfg.p_paired) {
            return None;
        }
        let hf_perm = permutation(rng, n);
        let amplitude_perm = if plus && coin(rng, cfg.p_inner_apr) {
            Some(permutation(rng, n))
        } else {
            None
        };
        Some(Self {
            hf_perm,
            amplitude_perm,
        })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_permutation(&self.hf_perm, n)?;
        if let Some(p) = &self.amplitude_perm {
            check_permutation(p, n)?;
        }
        Ok(())
    }

    /// The LF and HF parts of every output image before they are summed.
    pub fn components(
        &self,
        batch: &LabeledBatch,
        kernel: &GaussianKernel,
    ) -> Result<Vec<FrequencyDecomposition>> {
        self.validate(batch.len())?;
        let parts: Vec<FrequencyDecomposition> =
            batch.images().iter().map(|x| decompose(x, kernel)).collect();
        (0..batch.len())
            .map(|i| {
                let lf = match &self.amplitude_perm {
                    Some(perm) => apr_p(&parts[i].lf, &parts[perm[i]].lf)?,
                    None => parts[i].lf.clone(),
                };
                let hf = parts[self.hf_perm[i]].hf.clone();
                Ok(FrequencyDecomposition { lf, hf })
            })
            .collect()
    }

    pub fn apply(&self, batch: &LabeledBatch, kernel: &GaussianKernel) -> Result<LabeledBatch> {
        let images = self
            .components(batch, kernel)?
            .iter()
            .map(FrequencyDecomposition::reconstruct)
            .collect();
        Ok(batch.with_images(images))
    }
}

fn paired<R: RngCore + ?Sized>(
    batch: &LabeledBatch,
    cfg: &AugmentConfig,
    plus: bool,
    rng: &mut R,
) -> Result<LabeledBatch> {
    let kernel = cfg.kernel()?;
    match PairedPlan::sample(batch.len(), cfg, plus, rng) {
        Some(plan) => plan.apply(batch, &kernel),
        None => Ok(batch.clone()),
    }
}

/// Paired HybridAugment: `LF(x_i) + HF(x_π(i))` for a random permutation π.
pub fn ha_p<R: RngCore + ?Sized>(
    batch: &LabeledBatch,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<LabeledBatch> {
    paired(batch, cfg, false, rng)
}

/// Paired HybridAugment++: as [`ha_p`], with the LF amplitude optionally
/// taken from the LF of a second randomly paired image.
pub fn ha_pp_p<R: RngCore + ?Sized>(
    batch: &LabeledBatch,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<LabeledBatch> {
    paired(batch, cfg, true, rng)
}

/// Paired APR over a batch: with probability `p_paired`, every image keeps
/// its phase and takes the amplitude of `x_ρ(i)`.
pub fn apr_p_batch<R: RngCore + ?Sized>(
    batch: &LabeledBatch,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<LabeledBatch> {
    if !coin(rng, cfg.p_paired) {
        return Ok(batch.clone());
    }
    let perm = permutation(rng, batch.len());
    let images: Vec<ImageTensor> = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| apr_p(&batch.images()[i], &batch.images()[j]))
        .collect::<Result<_>>()?;
    Ok(batch.with_images(images))
}
