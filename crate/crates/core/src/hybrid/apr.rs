use rand::RngCore;

use crate::error::Result;
use crate::image::ImageTensor;
use crate::ops::{apply_chain, sample_chain, OpChain};
use crate::spectral::{dft2, idft2_with_residual};

/// Amplitude-phase recombination: the phase of `phase_donor` combined with
/// the amplitude of `amplitude_donor`, transformed back to image space.
pub fn apr_p(phase_donor: &ImageTensor, amplitude_donor: &ImageTensor) -> Result<ImageTensor> {
    phase_donor.ensure_same_shape(amplitude_donor)?;
    let mixed = dft2(phase_donor).with_amplitude_of(&dft2(amplitude_donor))?;
    let (out, residual) = idft2_with_residual(&mixed);
    debug_assert!(
        {
            let peak = out.data().iter().fold(1f64, |m, v| m.max(f64::from(v.abs())));
            residual <= 1e-5 * peak
        },
        "imaginary residual {residual} after recombining real spectra"
    );
    Ok(out)
}

/// The two chains of a single-image APR: one view donates phase, the other amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct AprPlan {
    pub phase_chain: OpChain,
    pub amplitude_chain: OpChain,
}

impl AprPlan {
    pub fn sample<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let phase_chain = sample_chain(rng);
        let amplitude_chain = sample_chain(rng);
        Self {
            phase_chain,
            amplitude_chain,
        }
    }

    pub fn identity() -> Self {
        Self {
            phase_chain: OpChain::identity(),
            amplitude_chain: OpChain::identity(),
        }
    }

    pub fn apply(&self, x: &ImageTensor) -> ImageTensor {
        let phase_view = apply_chain(x, &self.phase_chain);
        let amplitude_view = apply_chain(x, &self.amplitude_chain);
        apr_p(&phase_view, &amplitude_view).expect("views share the source shape")
    }
}

/// Single-image APR with two freshly sampled chains.
pub fn apr_s<R: RngCore + ?Sized>(x: &ImageTensor, rng: &mut R) -> ImageTensor {
    AprPlan::sample(rng).apply(x)
}
