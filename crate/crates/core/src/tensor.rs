//! Symmetric second-order tensors in two dimensions and the fourth-order
//! operators acting on them, both stored in orthonormal (Mandel) form.
//!
//! A symmetric tensor `t` is stored as `(t11, t22, sqrt(2) t12)`. With this
//! weighting the double contraction `a : b` is the plain dot product of the
//! 3-vectors, and the Frobenius norm is the Euclidean norm.

use std::ops::{Add, Mul, Neg, Sub};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymTensor2 {
    pub m: [f64; 3],
}

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2 { m: [0.0; 3] };
    pub const IDENTITY: SymTensor2 = SymTensor2 { m: [1.0, 1.0, 0.0] };

    /// Builds a tensor from its ordinary components `t11, t22, t12`.
    pub fn from_components(t11: f64, t22: f64, t12: f64) -> Self {
        SymTensor2 {
            m: [t11, t22, SQRT_2 * t12],
        }
    }

    pub fn from_mandel(m: [f64; 3]) -> Self {
        SymTensor2 { m }
    }

    /// Returns `(t11, t22, t12)`.
    pub fn components(&self) -> (f64, f64, f64) {
        (self.m[0], self.m[1], self.m[2] / SQRT_2)
    }

    /// `a ⊗ a` for a 2-vector `a`.
    pub fn dyad(a: [f64; 2]) -> Self {
        SymTensor2::from_components(a[0] * a[0], a[1] * a[1], a[0] * a[1])
    }

    /// Double contraction `self : other`.
    pub fn ddot(&self, other: &SymTensor2) -> f64 {
        self.m[0] * other.m[0] + self.m[1] * other.m[1] + self.m[2] * other.m[2]
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.m[0] + self.m[1]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|v| v.is_finite())
    }

    /// Largest absolute difference over the ordinary components.
    pub fn max_component_diff(&self, other: &SymTensor2) -> f64 {
        let (a11, a22, a12) = self.components();
        let (b11, b22, b12) = other.components();
        (a11 - b11).abs().max((a22 - b22).abs()).max((a12 - b12).abs())
    }
}

impl Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, rhs: SymTensor2) -> SymTensor2 {
        SymTensor2 {
            m: [self.m[0] + rhs.m[0], self.m[1] + rhs.m[1], self.m[2] + rhs.m[2]],
        }
    }
}

impl Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, rhs: SymTensor2) -> SymTensor2 {
        SymTensor2 {
            m: [self.m[0] - rhs.m[0], self.m[1] - rhs.m[1], self.m[2] - rhs.m[2]],
        }
    }
}

impl Neg for SymTensor2 {
    type Output = SymTensor2;
    fn neg(self) -> SymTensor2 {
        SymTensor2 {
            m: [-self.m[0], -self.m[1], -self.m[2]],
        }
    }
}

impl Mul<SymTensor2> for f64 {
    type Output = SymTensor2;
    fn mul(self, rhs: SymTensor2) -> SymTensor2 {
        SymTensor2 {
            m: [self * rhs.m[0], self * rhs.m[1], self * rhs.m[2]],
        }
    }
}

/// A fourth-order tensor with minor symmetries, as a 3×3 matrix acting on
/// Mandel vectors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tensor4 {
    pub a: [[f64; 3]; 3],
}

impl Tensor4 {
    pub const IDENTITY: Tensor4 = Tensor4 {
        a: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn from_rows(a: [[f64; 3]; 3]) -> Self {
        Tensor4 { a }
    }

    /// `x ⊗ y`, i.e. the operator `e ↦ (y : e) x`.
    pub fn outer(x: &SymTensor2, y: &SymTensor2) -> Self {
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x.m[i] * y.m[j];
            }
        }
        Tensor4 { a }
    }

    pub fn apply(&self, t: &SymTensor2) -> SymTensor2 {
        let mut m = [0.0; 3];
        for (i, mi) in m.iter_mut().enumerate() {
            *mi = self.a[i][0] * t.m[0] + self.a[i][1] * t.m[1] + self.a[i][2] * t.m[2];
        }
        SymTensor2 { m }
    }

    /// `t : self[t]`.
    pub fn quadratic_form(&self, t: &SymTensor2) -> f64 {
        t.ddot(&self.apply(t))
    }

    pub fn transpose(&self) -> Self {
        let mut a = self.a;
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.a[j][i];
            }
        }
        Tensor4 { a }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut a = self.a;
        a.iter_mut().flatten().for_each(|v| *v *= factor);
        Tensor4 { a }
    }

    pub fn matmul(&self, other: &Tensor4) -> Self {
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.a[i][k] * other.a[k][j]).sum();
            }
        }
        Tensor4 { a }
    }

    pub fn determinant(&self) -> f64 {
        let a = &self.a;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Inverse via the adjugate; `None` if the matrix is singular.
    pub fn inverse(&self) -> Option<Tensor4> {
        let det = self.determinant();
        let scale = self.max_abs();
        if !det.is_finite() || det.abs() <= f64::EPSILON * scale * scale * scale {
            return None;
        }
        let a = &self.a;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Some(Tensor4 { a: adj }.scaled(1.0 / det))
    }

    /// Symmetrized copy, used to wipe rounding asymmetry after inversion.
    pub fn symmetrized(&self) -> Self {
        let t = self.transpose();
        let mut a = self.a;
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = 0.5 * (self.a[i][j] + t.a[i][j]);
            }
        }
        Tensor4 { a }
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.a[i][j] - self.a[j][i]).abs());
            }
        }
        worst
    }

    /// Positive definiteness of the symmetric part by Cholesky.
    pub fn is_positive_definite(&self) -> bool {
        let s = self.symmetrized().a;
        let mut l = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let mut sum = s[i][j];
                for k in 0..j {
                    sum -= l[i][k] * l[j][k];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return false;
                    }
                    l[i][i] = sum.sqrt();
                } else {
                    l[i][j] = sum / l[j][j];
                }
            }
        }
        true
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: Tensor4) -> Tensor4 {
        let mut a = self.a;
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += rhs.a[i][j];
            }
        }
        Tensor4 { a }
    }
}
