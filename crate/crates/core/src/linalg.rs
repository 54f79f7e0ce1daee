//! Minimal dense 3×3 algebra for the colour-correction fit.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Scalar> Mat3<T> {
    pub fn zeros() -> Self {
        Self([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        Self::diagonal(T::one())
    }

    pub fn diagonal(v: T) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = v;
        }
        m
    }

    pub fn scale(self, s: T) -> Self {
        Self(self.0.map(|row| row.map(|v| v * s)))
    }

    pub fn transpose(self) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    /// Row vector times matrix, `vᵀ M`.
    #[inline]
    pub fn left_mul(&self, v: [T; 3]) -> [T; 3] {
        let m = &self.0;
        [
            v[0] * m[0][0] + v[1] * m[1][0] + v[2] * m[2][0],
            v[0] * m[0][1] + v[1] * m[1][1] + v[2] * m[2][1],
            v[0] * m[0][2] + v[1] * m[1][2] + v[2] * m[2][2],
        ]
    }

    pub fn determinant(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn frobenius(&self) -> T {
        self.0.iter().flatten().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a pivot vanishes relative to the matrix scale.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let mut a = self.0;
        let mut b = rhs.0;
        let scale = self
            .0
            .iter()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()));
        if !(scale > T::zero()) {
            return None;
        }
        let tiny = scale * T::epsilon() * T::lit(8.0);

        for col in 0..3 {
            let pivot = (col..3)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            if !(a[pivot][col].abs() > tiny) {
                return None;
            }
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                for k in 0..3 {
                    b[row][k] -= f * b[col][k];
                }
            }
        }
        let mut x = [[T::zero(); 3]; 3];
        for row in (0..3).rev() {
            for k in 0..3 {
                let mut acc = b[row][k];
                for j in row + 1..3 {
                    acc -= a[row][j] * x[j][k];
                }
                x[row][k] = acc / a[row][row];
            }
        }
        Some(Self(x))
    }
}

impl<T> Index<(usize, usize)> for Mat3<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}

impl<T: Scalar> Add for Mat3<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl<T: Scalar> Sub for Mat3<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-T::one())
    }
}

impl<T: Scalar> Mul for Mat3<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}
