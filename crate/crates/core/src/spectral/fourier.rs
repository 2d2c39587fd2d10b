use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::image::ImageTensor;

/// Per-channel 2D DFT of an image, held as amplitude and phase planes.
///
/// Planes are stored channel-major: bin `(u, v)` of channel `c` lives at
/// `c * height * width + u * width + v`. Amplitudes are nonnegative and
/// phases lie in `(-π, π]`, with phase 0 wherever the amplitude is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    channels: usize,
    amplitude: Vec<f64>,
    phase: Vec<f64>,
}

impl Spectrum {
    pub fn from_parts(
        height: usize,
        width: usize,
        channels: usize,
        amplitude: Vec<f64>,
        phase: Vec<f64>,
    ) -> Result<Self> {
        let n = height * width * channels;
        if n == 0 || amplitude.len() != n || phase.len() != n {
            return Err(Error::invalid(format!(
                "spectrum planes must hold {height}x{width}x{channels} bins"
            )));
        }
        if amplitude.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::invalid("amplitude must be finite and nonnegative"));
        }
        if phase.iter().any(|p| !(*p > -PI && *p <= PI)) {
            return Err(Error::invalid("phase must lie in (-pi, pi]"));
        }
        Ok(Self {
            height,
            width,
            channels,
            amplitude,
            phase,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn channel_amplitude(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.amplitude[c * n..(c + 1) * n]
    }

    pub fn channel_phase(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.phase[c * n..(c + 1) * n]
    }

    /// Complex coefficients `A·e^{iP}` of one channel.
    pub fn channel_complex(&self, c: usize) -> Vec<Complex64> {
        self.channel_amplitude(c)
            .iter()
            .zip(self.channel_phase(c))
            .map(|(&a, &p)| Complex64::from_polar(a, p))
            .collect()
    }

    /// Keeps this spectrum's phase and takes the amplitude from `donor`.
    pub fn with_amplitude_of(&self, donor: &Spectrum) -> Result<Spectrum> {
        if self.shape() != donor.shape() {
            return Err(Error::invalid(format!(
                "spectrum shape mismatch: {:?} vs {:?}",
                self.shape(),
                donor.shape()
            )));
        }
        Ok(Spectrum {
            amplitude: donor.amplitude.clone(),
            ..self.clone()
        })
    }
}

fn fft2_in_place(buf: &mut [Complex64], height: usize, width: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft(width, direction).process(buf);

    let mut transposed = vec![Complex64::default(); buf.len()];
    for y in 0..height {
        for x in 0..width {
            transposed[x * height + y] = buf[y * width + x];
        }
    }
    planner.plan_fft(height, direction).process(&mut transposed);
    for x in 0..width {
        for y in 0..height {
            buf[y * width + x] = transposed[x * height + y];
        }
    }
}

fn principal_phase(z: Complex64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    let p = z.im.atan2(z.re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

/// Unnormalized forward 2D DFT per channel.
///
/// The transform of a real image is conjugate-symmetric; the computed
/// coefficients are symmetrized so that amplitude is exactly even and phase
/// exactly odd, which keeps amplitude/phase recombinations of real images real.
pub fn dft2(x: &ImageTensor) -> Spectrum {
    let (h, w, ch) = x.shape();
    let n = h * w;
    let mut amplitude = Vec::with_capacity(n * ch);
    let mut phase = Vec::with_capacity(n * ch);
    for c in 0..ch {
        let mut buf: Vec<Complex64> = x
            .channel_plane(c)
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        fft2_in_place(&mut buf, h, w, FftDirection::Forward);

        for u in 0..h {
            for v in 0..w {
                let mirror = ((h - u) % h) * w + (w - v) % w;
                let z = (buf[u * w + v] + buf[mirror].conj()) * 0.5;
                amplitude.push(z.norm());
                phase.push(principal_phase(z));
            }
        }
    }
    Spectrum {
        height: h,
        width: w,
        channels: ch,
        amplitude,
        phase,
    }
}

/// Full complex inverse 2D DFT of channel `c`, scaled by `1/(H·W)`.
pub fn idft2_complex(spec: &Spectrum, c: usize) -> Vec<Complex64> {
    let (h, w, _) = spec.shape();
    let scale = 1.0 / (h * w) as f64;
    let mut buf = spec.channel_complex(c);
    fft2_in_place(&mut buf, h, w, FftDirection::Inverse);
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Inverse 2D DFT scaled by `1/(H·W)`, returning the real part together
/// with the largest discarded imaginary magnitude.
pub fn idft2_with_residual(spec: &Spectrum) -> (ImageTensor, f64) {
    let (h, w, ch) = spec.shape();
    let mut residual = 0f64;
    let planes: Vec<Vec<f64>> = (0..ch)
        .map(|c| {
            idft2_complex(spec, c)
                .iter()
                .map(|z| {
                    residual = residual.max(z.im.abs());
                    z.re
                })
                .collect()
        })
        .collect();
    (ImageTensor::from_planes(h, w, &planes), residual)
}

/// Inverse 2D DFT scaled by `1/(H·W)`; the imaginary part is discarded.
pub fn idft2(spec: &Spectrum) -> ImageTensor {
    idft2_with_residual(spec).0
}
