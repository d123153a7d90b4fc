//! Plane vectors, 2×2 matrices, and the algebraic reconstruction that
//! recovers a matrix from one matrix-vector product plus its trace.

use crate::error::{Error, Result};
use crate::tolerances::DEGENERACY_THRESHOLD;

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x1: f64,
    pub x2: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        Vec2 { x1, x2 }
    }

    pub fn norm_sq(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    /// Counterclockwise quarter turn: (x1, x2) ↦ (−x2, x1).
    pub fn perp(self) -> Vec2 {
        Vec2 { x1: -self.x2, x2: self.x1 }
    }

    /// Cross product z-component: self.x1·other.x2 − self.x2·other.x1.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x1 * other.x2 - self.x2 * other.x1
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2 { x1: s * self.x1, x2: s * self.x2 }
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2 { x1: self.x1 + rhs.x1, x2: self.x2 + rhs.x2 }
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2 { x1: self.x1 - rhs.x1, x2: self.x2 - rhs.x2 }
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        self.scale(rhs)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2 { x1: -self.x1, x2: -self.x2 }
    }
}

/// A 2×2 real matrix, row-major: [[m11, m12], [m21, m22]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

/// The quarter-turn matrix [[0, −1], [1, 0]]; J x = x⊥.
pub const J: Mat2 = Mat2 { m11: 0.0, m12: -1.0, m21: 1.0, m22: 0.0 };

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 { m11: 0.0, m12: 0.0, m21: 0.0, m22: 0.0 };
    pub const IDENTITY: Mat2 = Mat2 { m11: 1.0, m12: 0.0, m21: 0.0, m22: 1.0 };

    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Mat2 { m11, m12, m21, m22 }
    }

    pub fn det(self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(self) -> f64 {
        self.m11 + self.m22
    }

    pub fn transpose(self) -> Mat2 {
        Mat2 { m11: self.m11, m12: self.m21, m21: self.m12, m22: self.m22 }
    }

    /// Max absolute entry (the norm used by the matrix bound below).
    pub fn max_norm(self) -> f64 {
        self.m11
            .abs()
            .max(self.m12.abs())
            .max(self.m21.abs())
            .max(self.m22.abs())
    }

    /// Frobenius norm.
    pub fn frobenius(self) -> f64 {
        (self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + self.m22 * self.m22)
            .sqrt()
    }

    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2 {
            x1: self.m11 * v.x1 + self.m12 * v.x2,
            x2: self.m21 * v.x1 + self.m22 * v.x2,
        }
    }

    pub fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }

    pub fn add(self, rhs: Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 + rhs.m11,
            m12: self.m12 + rhs.m12,
            m21: self.m21 + rhs.m21,
            m22: self.m22 + rhs.m22,
        }
    }

    pub fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 - rhs.m11,
            m12: self.m12 - rhs.m12,
            m21: self.m21 - rhs.m21,
            m22: self.m22 - rhs.m22,
        }
    }

    pub fn scale(self, s: f64) -> Mat2 {
        Mat2 {
            m11: s * self.m11,
            m12: s * self.m12,
            m21: s * self.m21,
            m22: s * self.m22,
        }
    }

    pub fn inverse(self) -> Result<Mat2> {
        let d = self.det();
        if d.abs() < DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateMatrix { det: d, threshold: DEGENERACY_THRESHOLD });
        }
        Ok(Mat2 {
            m11: self.m22 / d,
            m12: -self.m12 / d,
            m21: -self.m21 / d,
            m22: self.m11 / d,
        })
    }

    /// Rotation by `theta` radians, counterclockwise.
    pub fn rotation(theta: f64) -> Mat2 {
        let (s, c) = theta.sin_cos();
        Mat2 { m11: c, m12: -s, m21: s, m22: c }
    }

    /// Outer product a ⊗ b = a bᵀ.
    pub fn outer(a: Vec2, b: Vec2) -> Mat2 {
        Mat2 {
            m11: a.x1 * b.x1,
            m12: a.x1 * b.x2,
            m21: a.x2 * b.x1,
            m22: a.x2 * b.x2,
        }
    }

    pub fn symmetric_part(self) -> Mat2 {
        let off = 0.5 * (self.m12 + self.m21);
        Mat2 { m11: self.m11, m12: off, m21: off, m22: self.m22 }
    }

    pub fn antisymmetric_part(self) -> Mat2 {
        let off = 0.5 * (self.m12 - self.m21);
        Mat2 { m11: 0.0, m12: off, m21: -off, m22: 0.0 }
    }

    /// Column i of the matrix (0-based).
    pub fn column(self, i: usize) -> Vec2 {
        assert!(i < 2, "2x2 matrix has columns 0 and 1");
        if i == 0 {
            Vec2 { x1: self.m11, x2: self.m21 }
        } else {
            Vec2 { x1: self.m12, x2: self.m22 }
        }
    }

    pub fn entries(self) -> [f64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }
}

/// Evaluate the exact reconstruction identity for a symmetric matrix `b`
/// through an invertible frame `m = [[a, b], [c, d]]`:
///
///   B = E (Eᵀ B M) F / det(M E),
///
/// where E = [[a, −c], [c, a]] is the conformal matrix built from the
/// first column of M and F = [[d, −b], [−c, a]] = det(M)·M⁻¹ is its
/// adjugate. The identity holds because E Eᵀ = det(E)·I and
/// M F = det(M)·I, so the right-hand side collapses back to B; the point
/// of evaluating it literally is that the middle factor Eᵀ B M is the
/// only data a pointwise gradient estimate provides, and this shows B is
/// recoverable from it.
///
/// Returns the right-hand side, which equals `b` up to roundoff.
pub fn serfati_reconstruct(b: Mat2, m: Mat2) -> Result<Mat2> {
    // Symmetry is a structural precondition on the input.
    assert!(
        (b.m12 - b.m21).abs() <= 1e-9 * (1.0 + b.max_norm()),
        "reconstruction applies to symmetric matrices"
    );
    let d = m.det();
    if d.abs() < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateMatrix { det: d, threshold: DEGENERACY_THRESHOLD });
    }
    let e = Mat2 { m11: m.m11, m12: -m.m21, m21: m.m21, m22: m.m11 };
    let f = Mat2 { m11: m.m22, m12: -m.m12, m21: -m.m21, m22: m.m11 };
    // det(ME) = det M · |M₁|²; det M ≠ 0 forces M₁ ≠ 0, but guard anyway.
    let det_me = d * e.det();
    if det_me.abs() < DEGENERACY_THRESHOLD * DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateMatrix { det: det_me, threshold: DEGENERACY_THRESHOLD });
    }
    let middle = e.transpose().mul(b).mul(m);
    Ok(e.mul(middle).mul(f).scale(1.0 / det_me))
}

/// Pointwise bound for a symmetric matrix `b` in terms of its action on
/// the first column of a frame `m` with positive determinant:
///
///   |B|_max ≤ C* · ( (|M|_max / det M) · |B M₁|₂ + |tr B| ).
///
/// Returns the bracketed quantity (without C*); callers multiply by
/// [`crate::tolerances::SERFATI_CALIBRATION`].
pub fn serfati_bound(b: Mat2, m: Mat2) -> Result<f64> {
    // Symmetry is a structural precondition, not a data error.
    assert!(
        (b.m12 - b.m21).abs() <= 1e-12 * (1.0 + b.max_norm()),
        "bound applies to symmetric matrices"
    );
    let d = m.det();
    if d < DEGENERACY_THRESHOLD {
        // Orientation-preserving frames only: det must be positive and
        // bounded away from zero.
        return Err(Error::DegenerateMatrix { det: d, threshold: DEGENERACY_THRESHOLD });
    }
    let col = m.column(0);
    Ok(m.max_norm() / d * b.apply(col).norm() + b.trace().abs())
}
