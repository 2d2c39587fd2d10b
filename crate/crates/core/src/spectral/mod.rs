//! Frequency-domain primitives: Gaussian low-pass filtering, the LF/HF band
//! split, and the 2D DFT with amplitude/phase access.
//!
//! All arithmetic runs in f64; images are stored as f32. Nothing here
//! clamps values.

mod blur;
mod fourier;
mod kernel;

pub use blur::{decompose, low_pass, low_pass_plane, reflect_101, FrequencyDecomposition};
pub use fourier::{dft2, idft2, idft2_complex, idft2_with_residual, Spectrum};
pub use rustfft::num_complex::Complex64;
pub use kernel::GaussianKernel;
