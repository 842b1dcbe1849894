//! 2x2 complex matrices and boundary vectors.

use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An element of the boundary space C^2.
///
/// Slot 0 belongs to the endpoint x = 1, slot 1 to x = 0, matching the
/// ordering of the trace maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryVector(pub [Complex64; 2]);

impl BoundaryVector {
    pub const ZERO: BoundaryVector = BoundaryVector([ZERO, ZERO]);

    pub fn new(at_one: Complex64, at_zero: Complex64) -> Self {
        BoundaryVector([at_one, at_zero])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = [ZERO; 2];
        v[i] = ONE;
        BoundaryVector(v)
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    /// Inner product linear in the first slot.
    pub fn dot(&self, other: &BoundaryVector) -> Complex64 {
        self.0[0] * other.0[0].conj() + self.0[1] * other.0[1].conj()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        BoundaryVector([self.0[0] * c, self.0[1] * c])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }
}

impl Index<usize> for BoundaryVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl Add for BoundaryVector {
    type Output = BoundaryVector;
    fn add(self, o: BoundaryVector) -> BoundaryVector {
        BoundaryVector([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for BoundaryVector {
    type Output = BoundaryVector;
    fn sub(self, o: BoundaryVector) -> BoundaryVector {
        BoundaryVector([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    /// Matrix whose columns are `c0` and `c1`.
    pub fn from_columns(c0: BoundaryVector, c1: BoundaryVector) -> Self {
        Mat2([[c0.0[0], c1.0[0]], [c0.0[1], c1.0[1]]])
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let [[a, b], [c, d]] = self.0;
        Some(Mat2([[d / det, -b / det], [-c / det, a / det]]))
    }

    pub fn conj_transpose(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[a.conj(), c.conj()], [b.conj(), d.conj()]])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Condition number in the Frobenius norm; infinite when singular.
    pub fn condition(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm() * inv.norm(),
            None => f64::INFINITY,
        }
    }

    pub fn apply(&self, v: &BoundaryVector) -> BoundaryVector {
        BoundaryVector([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[a * s, b * s], [c * s, d * s]])
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += o.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= o.0[i][j];
            }
        }
        out
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_round_trip() {
        let m = Mat2::new(c(1.0, 2.0), c(0.5, 0.0), c(-0.3, 1.0), c(2.0, -1.0));
        let p = m * m.inverse().unwrap();
        assert!((p - Mat2::IDENTITY).norm() < 1e-14);
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = Mat2::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(m.inverse().is_none());
        assert!(m.condition().is_infinite());
    }

    #[test]
    fn columns_layout() {
        let m = Mat2::from_columns(
            BoundaryVector::new(c(1.0, 0.0), c(2.0, 0.0)),
            BoundaryVector::new(c(3.0, 0.0), c(4.0, 0.0)),
        );
        assert_eq!(m.get(0, 1), c(3.0, 0.0));
        assert_eq!(m.get(1, 0), c(2.0, 0.0));
    }
}
