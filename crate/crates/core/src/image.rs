use crate::error::{Error, Result};

/// An `height × width × channels` image stored row-major in `(y, x, c)` order.
///
/// Source images are nominally in `[0, 1]`; intermediate results such as
/// high-frequency residuals may be negative or exceed one. Every value is
/// finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageTensor {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::invalid(format!(
                "data length {} does not match {height}x{width}x{channels}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
    }

    /// Builds an image from a closure over `(y, x, c)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    /// Internal constructor for results whose shape is known to be valid.
    /// Values must already be finite.
    pub(crate) fn from_parts(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width * channels);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            height,
            width,
            channels,
            data,
        }
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

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[self.index(y, x, c)]
    }

    pub fn same_shape(&self, other: &ImageTensor) -> bool {
        self.shape() == other.shape()
    }

    pub(crate) fn ensure_same_shape(&self, other: &ImageTensor) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )))
        }
    }

    /// Maps every value through `f`. Non-finite results are rejected.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<ImageTensor> {
        Self::new(
            self.height,
            self.width,
            self.channels,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Element-wise sum. Panics on shape mismatch.
    pub fn add(&self, other: &ImageTensor) -> ImageTensor {
        assert!(self.same_shape(other), "shape mismatch in add");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self::from_parts(self.height, self.width, self.channels, data)
    }

    /// Element-wise difference. Panics on shape mismatch.
    pub fn sub(&self, other: &ImageTensor) -> ImageTensor {
        assert!(self.same_shape(other), "shape mismatch in sub");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self::from_parts(self.height, self.width, self.channels, data)
    }

    /// Euclidean norm over all values, accumulated in f64.
    pub fn l2_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt()
    }

    /// Extracts one channel as an f64 plane in row-major `(y, x)` order.
    pub fn channel_plane(&self, c: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .map(|&v| f64::from(v))
            .collect()
    }

    /// Inverse of [`channel_plane`](Self::channel_plane) for all channels at once.
    pub(crate) fn from_planes(
        height: usize,
        width: usize,
        planes: &[Vec<f64>],
    ) -> ImageTensor {
        let channels = planes.len();
        let mut data = vec![0f32; height * width * channels];
        for (c, plane) in planes.iter().enumerate() {
            for (i, &v) in plane.iter().enumerate() {
                data[i * channels + c] = v as f32;
            }
        }
        Self::from_parts(height, width, channels, data)
    }
}
