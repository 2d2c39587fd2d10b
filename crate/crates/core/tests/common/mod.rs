#![allow(dead_code)]

use hybridaug::ImageTensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(r: &mut ChaCha8Rng, h: usize, w: usize, c: usize) -> ImageTensor {
    ImageTensor::from_fn(h, w, c, |_, _, _| r.random::<f32>()).unwrap()
}

/// Smooth field plus fine noise, a rough stand-in for natural image statistics.
pub fn natural_image(r: &mut ChaCha8Rng, h: usize, w: usize, c: usize) -> ImageTensor {
    let fx = r.random_range(0.5..3.0);
    let fy = r.random_range(0.5..3.0);
    let phase: f64 = r.random_range(0.0..TAU);
    ImageTensor::from_fn(h, w, c, |y, x, _| {
        let smooth = 0.5
            + 0.3 * ((fx * x as f64 / w as f64 + fy * y as f64 / h as f64) * TAU + phase).sin();
        (smooth + 0.15 * (r.random::<f64>() - 0.5)) as f32
    })
    .unwrap()
}

pub fn max_abs_diff(a: &ImageTensor, b: &ImageTensor) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| f64::from((x - y).abs()))
        .fold(0.0, f64::max)
}

/// Naive `O(N²)` 2D DFT of one channel, as (re, im) pairs in row-major order.
pub fn naive_dft(x: &ImageTensor, c: usize, inverse: bool) -> Vec<(f64, f64)> {
    let (h, w, _) = x.shape();
    let plane: Vec<(f64, f64)> = (0..h * w)
        .map(|i| (f64::from(x.get(i / w, i % w, c)), 0.0))
        .collect();
    naive_dft_complex(&plane, h, w, inverse)
}

pub fn naive_dft_complex(plane: &[(f64, f64)], h: usize, w: usize, inverse: bool) -> Vec<(f64, f64)> {
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out = vec![(0.0, 0.0); h * w];
    for u in 0..h {
        for v in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let angle = sign
                        * 2.0
                        * std::f64::consts::PI
                        * ((u * y) as f64 / h as f64 + (v * x) as f64 / w as f64);
                    let (s, co) = angle.sin_cos();
                    let (a, b) = plane[y * w + x];
                    re += a * co - b * s;
                    im += a * s + b * co;
                }
            }
            out[u * w + v] = (re, im);
        }
    }
    out
}

/// Direct 2D convolution with the outer product of `weights`, reflect-101 borders.
pub fn direct_blur(x: &ImageTensor, weights: &[f64]) -> Vec<f64> {
    let (h, w, ch) = x.shape();
    let r = (weights.len() / 2) as isize;
    let reflect = |i: isize, n: usize| -> usize {
        if n == 1 {
            return 0;
        }
        let mut i = i;
        let n = n as isize;
        loop {
            if i < 0 {
                i = -i;
            } else if i >= n {
                i = 2 * (n - 1) - i;
            } else {
                return i as usize;
            }
        }
    };
    let mut out = Vec::with_capacity(h * w * ch);
    for y in 0..h {
        for xx in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (ky, wy) in weights.iter().enumerate() {
                    for (kx, wx) in weights.iter().enumerate() {
                        let sy = reflect(y as isize + ky as isize - r, h);
                        let sx = reflect(xx as isize + kx as isize - r, w);
                        acc += wy * wx * f64::from(x.get(sy, sx, c));
                    }
                }
                out.push(acc);
            }
        }
    }
    out
}
