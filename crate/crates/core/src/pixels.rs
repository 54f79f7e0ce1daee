//! Image containers: an N×3 row-per-pixel colour matrix and a single-channel grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major pixel matrix. Row `y * width + x` holds the three channel values of
/// pixel `(x, y)`; the colour space (sRGB or L\*a\*b\*) is implied by context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pixels<T> {
    width: usize,
    height: usize,
    data: Vec<[T; 3]>,
}

impl<T: Scalar> Pixels<T> {
    pub fn new(width: usize, height: usize, data: Vec<[T; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::NoPixels);
        }
        if width.checked_mul(height) != Some(data.len()) {
            return Err(Error::BadBuffer {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: [T; 3]) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [T; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Number of pixels, N.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> &[[T; 3]] {
        &self.data
    }

    pub fn rows_mut(&mut self) -> &mut [[T; 3]] {
        &mut self.data
    }

    pub fn into_rows(self) -> Vec<[T; 3]> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [T; 3] {
        self.data[y * self.width + x]
    }

    /// Same dimensions, rows mapped independently.
    pub fn map(&self, f: impl Fn([T; 3]) -> [T; 3]) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn channel(&self, c: usize) -> Grid<T> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|p| p[c]).collect(),
        }
    }

    pub fn clamp_unit(&self) -> Self {
        self.map(|p| p.map(|v| v.max(T::zero()).min(T::one())))
    }

    pub(crate) fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }

    /// Mean of every channel.
    pub fn mean(&self) -> [T; 3] {
        let n = T::from_usize(self.len()).unwrap();
        let mut acc = [T::zero(); 3];
        for p in &self.data {
            for c in 0..3 {
                acc[c] += p[c];
            }
        }
        acc.map(|s| s / n)
    }

    /// Per-channel mean absolute difference.
    pub fn mean_abs_diff(&self, other: &Self) -> Result<[T; 3]> {
        self.ensure_same_dims(other)?;
        let n = T::from_usize(self.len()).unwrap();
        let mut acc = [T::zero(); 3];
        for (p, q) in self.data.iter().zip(&other.data) {
            for c in 0..3 {
                acc[c] += (p[c] - q[c]).abs();
            }
        }
        Ok(acc.map(|s| s / n))
    }
}

/// Single-channel image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width.checked_mul(height) != Some(data.len()) {
            return Err(Error::BadBuffer {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Replicate-padded access.
    #[inline]
    pub fn at_clamped(&self, x: isize, y: isize) -> T {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.at(x, y)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.height, self.width, |x, y| self.at(y, x))
    }
}
