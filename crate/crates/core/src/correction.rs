//! Weighted, ridge-regularised least-squares fit of a 3×3 colour transform from
//! palette correspondences, and its application to whole images.

use serde::{Deserialize, Serialize};

use crate::colorspace::Lab;
use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::pixels::Pixels;
use crate::scalar::Scalar;

pub const DEFAULT_REGULARISATION: f64 = 1e-3;

/// Everything needed to re-apply an edit at any resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionModel<T> {
    pub matrix: Mat3<T>,
    pub delta_e_max: T,
    pub target: Lab<T>,
    pub regularisation: T,
}

/// `M = (Cᵀ W C + k I)⁻¹ Cᵀ W D` with `W = diag(weights / Σ weights)`.
///
/// Rows of `source` and `target` are RGB correspondences; the fitted matrix maps
/// row vectors, `cᵀ M ≈ dᵀ`.
pub fn estimate_matrix<T: Scalar>(
    source: &[[T; 3]],
    target: &[[T; 3]],
    weights: &[T],
    regularisation: T,
) -> Result<Mat3<T>> {
    let n = source.len();
    if n == 0 {
        return Err(Error::NoPixels);
    }
    if target.len() != n || weights.len() != n {
        return Err(Error::DimensionMismatch {
            left: (n, 3),
            right: (target.len().min(weights.len()), 3),
        });
    }
    if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
        return Err(Error::InvalidParams("correspondence weights must be positive".into()));
    }
    if !(regularisation >= T::zero()) {
        return Err(Error::InvalidParams("regularisation must be non-negative".into()));
    }
    let total: T = weights.iter().copied().sum();

    let mut gram = Mat3::zeros();
    let mut cross = Mat3::zeros();
    for ((c, d), &w) in source.iter().zip(target).zip(weights) {
        let w = w / total;
        for i in 0..3 {
            for j in 0..3 {
                gram[(i, j)] += w * c[i] * c[j];
                cross[(i, j)] += w * c[i] * d[j];
            }
        }
    }
    let system = gram + Mat3::diagonal(regularisation);
    let m = system.solve(&cross).ok_or(Error::DegeneratePalette)?;
    if !m.is_finite() {
        return Err(Error::DegeneratePalette);
    }
    Ok(m)
}

/// `B = A M`, one row per pixel. No clamping.
pub fn apply_matrix<T: Scalar>(img: &Pixels<T>, m: &Mat3<T>) -> Pixels<T> {
    img.map(|p| m.left_mul(p))
}
