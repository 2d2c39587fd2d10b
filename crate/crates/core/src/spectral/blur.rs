use crate::image::ImageTensor;

use super::kernel::GaussianKernel;

/// Low- and high-frequency bands of one image. `lf + hf` reproduces the source.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDecomposition {
    pub lf: ImageTensor,
    pub hf: ImageTensor,
}

impl FrequencyDecomposition {
    pub fn reconstruct(&self) -> ImageTensor {
        self.lf.add(&self.hf)
    }
}

/// Reflect-101 border index (`dcb|abcd|cba`): the edge sample is not repeated.
/// Offsets further than one period away are folded repeatedly.
pub fn reflect_101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut j = i.rem_euclid(period);
    if j >= n as isize {
        j = period - j;
    }
    j as usize
}

fn convolve_rows(plane: &[f64], height: usize, width: usize, weights: &[f64]) -> Vec<f64> {
    let r = (weights.len() / 2) as isize;
    let mut out = vec![0.0; plane.len()];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..width {
            out[y * width + x] = weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * row[reflect_101(x as isize + k as isize - r, width)])
                .sum();
        }
    }
    out
}

fn convolve_cols(plane: &[f64], height: usize, width: usize, weights: &[f64]) -> Vec<f64> {
    let r = (weights.len() / 2) as isize;
    let mut out = vec![0.0; plane.len()];
    for y in 0..height {
        for (k, w) in weights.iter().enumerate() {
            let src = reflect_101(y as isize + k as isize - r, height);
            let src_row = &plane[src * width..(src + 1) * width];
            let dst_row = &mut out[y * width..(y + 1) * width];
            for (d, s) in dst_row.iter_mut().zip(src_row) {
                *d += w * s;
            }
        }
    }
    out
}

/// [`low_pass`] on one row-major `height × width` plane, in double precision.
pub fn low_pass_plane(plane: &[f64], height: usize, width: usize, kernel: &GaussianKernel) -> Vec<f64> {
    assert_eq!(plane.len(), height * width, "plane size mismatch");
    let rows = convolve_rows(plane, height, width, kernel.weights());
    convolve_cols(&rows, height, width, kernel.weights())
}

/// Separable Gaussian blur: a horizontal pass then a vertical pass with the
/// same 1D kernel, per channel, with reflect-101 borders.
pub fn low_pass(x: &ImageTensor, kernel: &GaussianKernel) -> ImageTensor {
    let (h, w, ch) = x.shape();
    if kernel.size() == 1 {
        return x.clone();
    }
    let planes: Vec<Vec<f64>> = (0..ch)
        .map(|c| low_pass_plane(&x.channel_plane(c), h, w, kernel))
        .collect();
    ImageTensor::from_planes(h, w, &planes)
}

/// Splits `x` into `lf = low_pass(x)` and `hf = x - lf`.
pub fn decompose(x: &ImageTensor, kernel: &GaussianKernel) -> FrequencyDecomposition {
    let lf = low_pass(x, kernel);
    let hf = x.sub(&lf);
    FrequencyDecomposition { lf, hf }
}
