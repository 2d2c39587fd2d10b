//! Single-image photometric and geometric ops used to build augmented views,
//! and the random sampler that strings them into short chains.
//!
//! Magnitudes live in `[0, 1]` and are scaled per op: rotate up to 30°,
//! shear up to 0.3, translate up to 25% of the axis, solarize threshold
//! `1 - 0.5·m`, posterize to `8 - round(4·m)` bits. Autocontrast and equalize
//! ignore the magnitude. Geometric ops resample bilinearly with zero fill.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageTensor;

pub const MAX_ROTATE_DEGREES: f64 = 30.0;
pub const MAX_SHEAR: f64 = 0.3;
pub const MAX_TRANSLATE_FRACTION: f64 = 0.25;
pub const MAX_CHAIN_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Posterize,
    Autocontrast,
    Equalize,
    Rotate,
    Solarize,
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
}

impl OpKind {
    pub const ALL: [OpKind; 9] = [
        OpKind::Posterize,
        OpKind::Autocontrast,
        OpKind::Equalize,
        OpKind::Rotate,
        OpKind::Solarize,
        OpKind::ShearX,
        OpKind::ShearY,
        OpKind::TranslateX,
        OpKind::TranslateY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Posterize => "posterize",
            OpKind::Autocontrast => "autocontrast",
            OpKind::Equalize => "equalize",
            OpKind::Rotate => "rotate",
            OpKind::Solarize => "solarize",
            OpKind::ShearX => "shear_x",
            OpKind::ShearY => "shear_y",
            OpKind::TranslateX => "translate_x",
            OpKind::TranslateY => "translate_y",
        }
    }

    pub fn is_geometric(self) -> bool {
        matches!(
            self,
            OpKind::Rotate
                | OpKind::ShearX
                | OpKind::ShearY
                | OpKind::TranslateX
                | OpKind::TranslateY
        )
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OpKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown op kind '{s}'")))
    }
}

/// One op with its normalized magnitude. `negate` selects the direction of
/// the signed geometric ops and is ignored by the others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugOp {
    kind: OpKind,
    magnitude: f64,
    negate: bool,
}

impl AugOp {
    pub fn new(kind: OpKind, magnitude: f64) -> Result<Self> {
        Self::signed(kind, magnitude, false)
    }

    pub fn signed(kind: OpKind, magnitude: f64, negate: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&magnitude) {
            return Err(Error::invalid(format!(
                "op magnitude must be in [0, 1], got {magnitude}"
            )));
        }
        Ok(Self {
            kind,
            magnitude,
            negate,
        })
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn negate(&self) -> bool {
        self.negate
    }

    fn signed_magnitude(&self) -> f64 {
        if self.negate {
            -self.magnitude
        } else {
            self.magnitude
        }
    }
}

/// An ordered list of one to three ops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpChain {
    ops: Vec<AugOp>,
}

impl OpChain {
    pub fn new(ops: Vec<AugOp>) -> Result<Self> {
        if ops.is_empty() || ops.len() > MAX_CHAIN_LEN {
            return Err(Error::invalid(format!(
                "op chain must hold 1 to {MAX_CHAIN_LEN} ops, got {}",
                ops.len()
            )));
        }
        Ok(Self { ops })
    }

    /// A chain that leaves every image unchanged (a zero-degree rotation).
    pub fn identity() -> Self {
        Self {
            ops: vec![AugOp {
                kind: OpKind::Rotate,
                magnitude: 0.0,
                negate: false,
            }],
        }
    }

    pub fn ops(&self) -> &[AugOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Draws a chain: length uniform in {1, 2, 3}, then per op a kind uniform over
/// the nine kinds, a magnitude uniform in `[0, 1)` and a direction bit.
pub fn sample_chain<R: RngCore + ?Sized>(rng: &mut R) -> OpChain {
    let len = rng.random_range(1..=MAX_CHAIN_LEN);
    let ops = (0..len)
        .map(|_| {
            let kind = OpKind::ALL[rng.random_range(0..OpKind::ALL.len())];
            let magnitude = rng.random::<f64>();
            let negate = rng.random::<bool>();
            AugOp {
                kind,
                magnitude,
                negate,
            }
        })
        .collect();
    OpChain { ops }
}

pub fn apply_chain(x: &ImageTensor, chain: &OpChain) -> ImageTensor {
    chain
        .ops()
        .iter()
        .fold(x.clone(), |img, op| apply_op(&img, op))
}

pub fn apply_op(x: &ImageTensor, op: &AugOp) -> ImageTensor {
    let m = op.magnitude;
    if op.kind.is_geometric() && m == 0.0 {
        return x.clone();
    }
    let s = op.signed_magnitude();
    match op.kind {
        OpKind::Posterize => {
            let bits = 8 - (m * 4.0).round() as u32;
            posterize(x, bits)
        }
        OpKind::Autocontrast => per_channel_lut(x, autocontrast_lut),
        OpKind::Equalize => per_channel_lut(x, equalize_lut),
        OpKind::Solarize => solarize(x, 1.0 - 0.5 * m),
        OpKind::Rotate => {
            let theta = (s * MAX_ROTATE_DEGREES).to_radians();
            let (sin, cos) = theta.sin_cos();
            resample(x, |x, y, cx, cy| {
                let (dx, dy) = (x - cx, y - cy);
                (cx + cos * dx + sin * dy, cy - sin * dx + cos * dy)
            })
        }
        OpKind::ShearX => {
            let k = s * MAX_SHEAR;
            resample(x, |x, y, _, cy| (x + k * (y - cy), y))
        }
        OpKind::ShearY => {
            let k = s * MAX_SHEAR;
            resample(x, |x, y, cx, _| (x, y + k * (x - cx)))
        }
        OpKind::TranslateX => {
            let t = s * MAX_TRANSLATE_FRACTION * x.width() as f64;
            resample(x, |x, y, _, _| (x - t, y))
        }
        OpKind::TranslateY => {
            let t = s * MAX_TRANSLATE_FRACTION * x.height() as f64;
            resample(x, |x, y, _, _| (x, y - t))
        }
    }
}

fn quantize(v: f32) -> u8 {
    (f64::from(v).clamp(0.0, 1.0) * 255.0).round() as u8
}

fn posterize(x: &ImageTensor, bits: u32) -> ImageTensor {
    let mask = !(0xFFu16 >> bits) as u8;
    let data = x
        .data()
        .iter()
        .map(|&v| f32::from(quantize(v) & mask) / 255.0)
        .collect();
    let (h, w, c) = x.shape();
    ImageTensor::from_parts(h, w, c, data)
}

fn solarize(x: &ImageTensor, threshold: f64) -> ImageTensor {
    let t = threshold as f32;
    let data = x
        .data()
        .iter()
        .map(|&v| if v >= t { 1.0 - v } else { v })
        .collect();
    let (h, w, c) = x.shape();
    ImageTensor::from_parts(h, w, c, data)
}

fn histogram(values: impl Iterator<Item = u8>) -> [usize; 256] {
    let mut hist = [0usize; 256];
    for q in values {
        hist[q as usize] += 1;
    }
    hist
}

/// Stretches the occupied range `[lo, hi]` to `[0, 255]`.
fn autocontrast_lut(hist: &[usize; 256]) -> [u8; 256] {
    let mut lut: [u8; 256] = std::array::from_fn(|i| i as u8);
    let lo = hist.iter().position(|&n| n > 0);
    let hi = hist.iter().rposition(|&n| n > 0);
    if let (Some(lo), Some(hi)) = (lo, hi) {
        if hi > lo {
            let scale = 255.0 / (hi - lo) as f64;
            for (i, out) in lut.iter_mut().enumerate() {
                let v = (i as f64 - lo as f64) * scale;
                *out = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    lut
}

/// Classic CDF equalization: `round((cdf(v) - cdf_min) / (N - cdf_min) · 255)`.
fn equalize_lut(hist: &[usize; 256]) -> [u8; 256] {
    let mut lut: [u8; 256] = std::array::from_fn(|i| i as u8);
    let total: usize = hist.iter().sum();
    let Some(first) = hist.iter().position(|&n| n > 0) else {
        return lut;
    };
    let cdf_min = hist[first];
    if total == cdf_min {
        return lut;
    }
    let denom = (total - cdf_min) as f64;
    let mut cdf = 0usize;
    for (i, out) in lut.iter_mut().enumerate() {
        cdf += hist[i];
        let v = (cdf.saturating_sub(cdf_min)) as f64 / denom * 255.0;
        *out = v.round().clamp(0.0, 255.0) as u8;
    }
    lut
}

fn per_channel_lut(x: &ImageTensor, build: fn(&[usize; 256]) -> [u8; 256]) -> ImageTensor {
    let (h, w, ch) = x.shape();
    let mut data = vec![0f32; x.data().len()];
    for c in 0..ch {
        let quantized: Vec<u8> = x.data().iter().skip(c).step_by(ch).map(|&v| quantize(v)).collect();
        let lut = build(&histogram(quantized.iter().copied()));
        for (i, q) in quantized.into_iter().enumerate() {
            data[i * ch + c] = f32::from(lut[q as usize]) / 255.0;
        }
    }
    ImageTensor::from_parts(h, w, ch, data)
}

/// Inverse-maps every output pixel through `src` (which receives the pixel
/// coordinates and the image center) and samples bilinearly; samples outside
/// the source read as zero.
fn resample(
    img: &ImageTensor,
    src: impl Fn(f64, f64, f64, f64) -> (f64, f64),
) -> ImageTensor {
    let (h, w, ch) = img.shape();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let fetch = |yi: i64, xi: i64, c: usize| -> f64 {
        if yi < 0 || xi < 0 || yi >= h as i64 || xi >= w as i64 {
            0.0
        } else {
            f64::from(img.get(yi as usize, xi as usize, c))
        }
    };
    let mut data = Vec::with_capacity(h * w * ch);
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = src(x as f64, y as f64, cx, cy);
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let (x0, y0) = (x0 as i64, y0 as i64);
            for c in 0..ch {
                let top = (1.0 - fx) * fetch(y0, x0, c) + fx * fetch(y0, x0 + 1, c);
                let bottom = (1.0 - fx) * fetch(y0 + 1, x0, c) + fx * fetch(y0 + 1, x0 + 1, c);
                data.push(((1.0 - fy) * top + fy * bottom) as f32);
            }
        }
    }
    ImageTensor::from_parts(h, w, ch, data)
}
