//! Real 3×3 matrices: correlation matrices and plane projectors.

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Row-major 3×3 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn identity() -> Mat3 {
        Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn from_diag(d: Vec3) -> Mat3 {
        Mat3([[d.x, 0.0, 0.0], [0.0, d.y, 0.0], [0.0, 0.0, d.z]])
    }

    /// Outer product a bᵀ.
    pub fn outer(a: Vec3, b: Vec3) -> Mat3 {
        let a = [a.x, a.y, a.z];
        let b = [b.x, b.y, b.z];
        let mut m = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] = a[r] * b[c];
            }
        }
        Mat3(m)
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul(&self, other: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                let mut s = 0.0;
                for t in 0..3 {
                    s += self.0[r][t] * other.0[t][c];
                }
                out[r][c] = s;
            }
        }
        Mat3(out)
    }

    pub fn transpose(&self) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                out[r][c] = self.0[c][r];
            }
        }
        Mat3(out)
    }

    pub fn add(&self, other: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                out[r][c] = self.0[r][c] + other.0[r][c];
            }
        }
        Mat3(out)
    }

    pub fn sub(&self, other: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                out[r][c] = self.0[r][c] - other.0[r][c];
            }
        }
        Mat3(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                s += self.0[r][c] * self.0[r][c];
            }
        }
        s.sqrt()
    }

    pub fn row(&self, r: usize) -> Vec3 {
        Vec3::new(self.0[r][0], self.0[r][1], self.0[r][2])
    }

    pub fn col(&self, c: usize) -> Vec3 {
        Vec3::new(self.0[0][c], self.0[1][c], self.0[2][c])
    }
}

/// Projector onto the plane spanned by an orthonormal pair: P = p₁p₁ᵀ + p₂p₂ᵀ.
///
/// Symmetric, idempotent, rank 2. Inputs must be orthonormal within 1e-10.
pub fn plane_projector(p1: Vec3, p2: Vec3) -> Result<Mat3> {
    if (p1.norm() - 1.0).abs() > 1e-10 || (p2.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!(
            "plane_projector requires unit vectors: |p1| = {}, |p2| = {}",
            p1.norm(),
            p2.norm()
        )));
    }
    if p1.dot(p2).abs() > 1e-10 {
        return Err(Error::Validation(format!(
            "plane_projector requires orthogonal vectors: p1·p2 = {:.3e}",
            p1.dot(p2)
        )));
    }
    Ok(Mat3::outer(p1, p1).add(&Mat3::outer(p2, p2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::{orthonormal_complement, X_AXIS, Y_AXIS};

    #[test]
    fn projector_xy() {
        let p = plane_projector(X_AXIS, Y_AXIS).unwrap();
        assert_eq!(p, Mat3::from_diag(Vec3::new(1.0, 1.0, 0.0)));
    }

    #[test]
    fn projector_idempotent_and_kills_normal() {
        let v = Vec3::new(0.3, -0.8, 0.52);
        let (p1, p2) = orthonormal_complement(v).unwrap();
        let p = plane_projector(p1, p2).unwrap();
        let pp = p.mul(&p);
        assert!(pp.sub(&p).frobenius_norm() < 1e-10);
        assert!(p.mul_vec(v).norm() < 1e-10 * v.norm());
        // symmetric
        assert!(p.sub(&p.transpose()).frobenius_norm() == 0.0);
    }

    #[test]
    fn projector_rejects_bad_inputs() {
        assert!(plane_projector(X_AXIS, X_AXIS).is_err());
        assert!(plane_projector(X_AXIS.scale(0.9), Y_AXIS).is_err());
    }
}
