use rand::RngCore;

use crate::error::Result;
use crate::image::ImageTensor;
use crate::ops::{apply_chain, sample_chain, OpChain};
use crate::rng::coin;
use crate::spectral::{decompose, FrequencyDecomposition, GaussianKernel};

use super::apr::AprPlan;
use super::config::AugmentConfig;

/// Random decisions of one single-image HA / HA++ application.
///
/// Two views `v1 = first(x)` and `v2 = second(x)` are split into bands. For
/// HA++, each view's LF may be replaced by a single-image APR of that LF. The
/// output is `LF(v1) + HF(v2)`, or `LF(v2) + HF(v1)` when `lf_from_second`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinglePlan {
    pub first: OpChain,
    pub second: OpChain,
    pub first_lf_apr: Option<AprPlan>,
    pub second_lf_apr: Option<AprPlan>,
    pub lf_from_second: bool,
}

impl SinglePlan {
    /// Both views unaugmented, no APR, LF from the first view.
    pub fn identity() -> Self {
        Self {
            first: OpChain::identity(),
            second: OpChain::identity(),
            first_lf_apr: None,
            second_lf_apr: None,
            lf_from_second: false,
        }
    }

    /// Draws, in order: the gate, both view chains, for HA++ an APR gate and
    /// two chains per view, and finally the LF/HF source pick. The pick uses
    /// `p_single` as its probability; when it fires the LF comes from the
    /// second view. `None` means the gate was not taken.
    pub fn sample<R: RngCore + ?Sized>(
        cfg: &AugmentConfig,
        plus: bool,
        rng: &mut R,
    ) -> Option<Self> {
        if !coin(rng, cfg.p_single) {
            return None;
        }
        let first = sample_chain(rng);
        let second = sample_chain(rng);
        let mut lf_apr = || {
            if coin(rng, cfg.p_inner_apr) {
                Some(AprPlan::sample(rng))
            } else {
                None
            }
        };
        let (first_lf_apr, second_lf_apr) = if plus {
            let a = lf_apr();
            let b = lf_apr();
            (a, b)
        } else {
            (None, None)
        };
        let lf_from_second = coin(rng, cfg.p_single);
        Some(Self {
            first,
            second,
            first_lf_apr,
            second_lf_apr,
            lf_from_second,
        })
    }

    /// The LF and HF parts of the output before they are summed.
    pub fn components(&self, x: &ImageTensor, kernel: &GaussianKernel) -> FrequencyDecomposition {
        let view = |chain: &OpChain, apr: &Option<AprPlan>| {
            let mut parts = decompose(&apply_chain(x, chain), kernel);
            if let Some(plan) = apr {
                parts.lf = plan.apply(&parts.lf);
            }
            parts
        };
        let first = view(&self.first, &self.first_lf_apr);
        let second = view(&self.second, &self.second_lf_apr);
        if self.lf_from_second {
            FrequencyDecomposition {
                lf: second.lf,
                hf: first.hf,
            }
        } else {
            FrequencyDecomposition {
                lf: first.lf,
                hf: second.hf,
            }
        }
    }

    pub fn apply(&self, x: &ImageTensor, kernel: &GaussianKernel) -> ImageTensor {
        self.components(x, kernel).reconstruct()
    }
}

fn single<R: RngCore + ?Sized>(
    x: &ImageTensor,
    cfg: &AugmentConfig,
    plus: bool,
    rng: &mut R,
) -> Result<ImageTensor> {
    let kernel = cfg.kernel()?;
    Ok(match SinglePlan::sample(cfg, plus, rng) {
        Some(plan) => plan.apply(x, &kernel),
        None => x.clone(),
    })
}

/// Single-image HybridAugment: LF of one augmented view plus HF of another.
pub fn ha_s<R: RngCore + ?Sized>(
    x: &ImageTensor,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<ImageTensor> {
    single(x, cfg, false, rng)
}

/// Single-image HybridAugment++: [`ha_s`] with single-image APR applied to
/// each view's LF component.
pub fn ha_pp_s<R: RngCore + ?Sized>(
    x: &ImageTensor,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<ImageTensor> {
    single(x, cfg, true, rng)
}
