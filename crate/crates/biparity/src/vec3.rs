//! Real 3-vectors: Bloch vectors and measurement axes.

// add/sub/neg are deliberately plain methods: the call sites chain them with
// dot/scale/cross and never want operator sugar
#![allow(clippy::should_implement_trait)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the unit-norm requirement on measurement axes.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const X_AXIS: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
pub const Y_AXIS: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
pub const Z_AXIS: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Right-handed cross product; a zero result is meaningful (parallel inputs).
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn sub(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }

    pub fn normalized(self) -> Result<Vec3> {
        let n = self.norm();
        if n <= 1e-12 {
            return Err(Error::Degeneracy(format!(
                "cannot normalize near-zero vector (|v| = {n:.3e} <= 1e-12)"
            )));
        }
        Ok(self.scale(1.0 / n))
    }

    /// Checks the measurement-axis contract |n̂| = 1 within `UNIT_TOL`.
    pub fn ensure_unit(self) -> Result<()> {
        if (self.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Validation(format!(
                "axis must be unit length: |n| = {} violates | |n| - 1 | <= 1e-12",
                self.norm()
            )));
        }
        Ok(())
    }

    pub fn component(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("Vec3 component index {i} out of range"),
        }
    }

    /// Unit vector from zenith angle `phi` (from +z) and azimuth `theta` (from +x).
    pub fn from_spherical(phi: f64, theta: f64) -> Vec3 {
        Vec3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos())
    }

    /// Flips the sign so the first component with magnitude above 1e-9 is
    /// positive. Used to make axis outputs deterministic up to the physical
    /// n̂ ↔ −n̂ equivalence.
    pub fn sign_normalized(self) -> Vec3 {
        for i in 0..3 {
            let c = self.component(i);
            if c.abs() > 1e-9 {
                return if c < 0.0 { self.neg() } else { self };
            }
        }
        self
    }
}

/// Deterministic orthonormal completion of a nonzero vector.
///
/// `p1` is the normalized rejection of the canonical axis least aligned with
/// `v` (ties broken in x, y, z order) and `p2 = v̂ × p1`, so `(v̂, p1, p2)` is
/// a right-handed orthonormal triad. The output is invariant under positive
/// scaling of `v`.
pub fn orthonormal_complement(v: Vec3) -> Result<(Vec3, Vec3)> {
    let vhat = v.normalized().map_err(|_| {
        Error::Degeneracy(format!(
            "orthonormal_complement needs |v| > 1e-12, got |v| = {:.3e}",
            v.norm()
        ))
    })?;
    let axes = [X_AXIS, Y_AXIS, Z_AXIS];
    let mut best = 0;
    let mut best_align = f64::INFINITY;
    for (i, e) in axes.iter().enumerate() {
        let a = e.dot(vhat).abs();
        if a < best_align {
            best_align = a;
            best = i;
        }
    }
    let e = axes[best];
    let p1 = e.sub(vhat.scale(e.dot(vhat)));
    let p1 = p1.scale(1.0 / p1.norm());
    let p2 = vhat.cross(p1);
    Ok((p1, p2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_products() {
        let z = X_AXIS.cross(Y_AXIS);
        assert_eq!((z.x, z.y, z.z), (0.0, 0.0, 1.0));
        let a = Vec3::new(0.3, -0.2, 0.9);
        assert_eq!(a.cross(a).norm(), 0.0);
        // collinear z-axis Bloch vectors
        assert_eq!(Vec3::new(0.0, 0.0, 0.5).cross(Vec3::new(0.0, 0.0, 0.375)).norm(), 0.0);
    }

    #[test]
    fn cross_is_orthogonal() {
        let a = Vec3::new(0.3, 1.2, -0.4);
        let b = Vec3::new(-0.9, 0.1, 2.0);
        let c = a.cross(b);
        assert!(c.dot(a).abs() < 1e-12);
        assert!(c.dot(b).abs() < 1e-12);
    }

    #[test]
    fn complement_canonical_axes() {
        let (p1, p2) = orthonormal_complement(Z_AXIS).unwrap();
        assert!(p1.sub(X_AXIS).norm() < 1e-15);
        assert!(p2.sub(Y_AXIS).norm() < 1e-15);
        let (p1, p2) = orthonormal_complement(X_AXIS).unwrap();
        assert!(p1.sub(Y_AXIS).norm() < 1e-15);
        assert!(p2.sub(Z_AXIS).norm() < 1e-15);
    }

    #[test]
    fn complement_is_orthonormal_and_scale_invariant() {
        let v = Vec3::new(1.0, 1.0, 0.0).scale(1.0 / 2f64.sqrt());
        let (p1, p2) = orthonormal_complement(v).unwrap();
        assert!(p1.dot(p2).abs() < 1e-12);
        assert!(p1.dot(v).abs() < 1e-12);
        assert!(p2.dot(v).abs() < 1e-12);
        assert!((p1.norm() - 1.0).abs() < 1e-12);
        assert!((p2.norm() - 1.0).abs() < 1e-12);

        let (q1, q2) = orthonormal_complement(v.scale(73.5)).unwrap();
        assert!(p1.sub(q1).norm() < 1e-12);
        assert!(p2.sub(q2).norm() < 1e-12);
    }

    #[test]
    fn complement_rejects_zero() {
        assert!(orthonormal_complement(Vec3::ZERO).is_err());
    }

    #[test]
    fn triad_is_right_handed() {
        let v = Vec3::new(-0.2, 0.7, 0.4);
        let (p1, p2) = orthonormal_complement(v).unwrap();
        let vhat = v.normalized().unwrap();
        assert!((vhat.dot(p1.cross(p2)) - 1.0).abs() < 1e-12);
    }
}
