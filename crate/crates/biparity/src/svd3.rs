//! Cyclic Jacobi eigen-decomposition for small symmetric matrices and the
//! 3×3 singular value decomposition built on it.
//!
//! Jacobi is preferred over a closed-form 3×3 SVD because it stays accurate
//! near degenerate singular values.

use crate::error::{Error, Result};
use crate::mat3::Mat3;
use crate::vec3::Vec3;

const MAX_SWEEPS: usize = 40;

/// Eigen-decomposition of a symmetric N×N matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvector k stored as column k.
/// Sweeps stop once every off-diagonal magnitude falls below
/// `1e-14 * ||A||_F`. The output is unsorted.
pub fn jacobi_eigh<const N: usize>(a: &[[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = *a;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let mut fro = 0.0;
    for row in a.iter() {
        for x in row.iter() {
            fro += x * x;
        }
    }
    let tol = 1e-14 * fro.sqrt();

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..N {
            for q in (p + 1)..N {
                off = off.max(a[p][q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q].abs() <= tol * 1e-2 {
                    continue;
                }
                // rotation angle from the classic two-sided Jacobi formula
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..N {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for i in 0..N {
                    let api = a[p][i];
                    let aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut eig = [0.0; N];
    for i in 0..N {
        eig[i] = a[i][i];
    }
    (eig, v)
}

/// Singular value decomposition of a 3×3 real matrix.
///
/// `sigma` is sorted descending and nonnegative; `v` and `u` are the matching
/// right/left singular vectors. Each `v[k]` is sign-normalized (first
/// component with magnitude above 1e-9 is positive) so axis outputs are
/// deterministic; `u[k]` carries the compensating sign so that
/// `m · v[k] = sigma[k] · u[k]` always holds.
#[derive(Debug, Clone, Copy)]
pub struct Svd3 {
    pub sigma: [f64; 3],
    pub v: [Vec3; 3],
    pub u: [Vec3; 3],
}

/// SVD via Jacobi eigen-decomposition of MᵀM followed by left-vector recovery.
///
/// Total function: the zero matrix yields all-zero sigma with the canonical
/// basis for v.
pub fn svd3(m: &Mat3) -> Svd3 {
    let mt = m.transpose();
    let mtm = mt.mul(m);
    let (eig, vecs) = jacobi_eigh::<3>(&mtm.0);

    // stable descending sort so exact ties keep canonical order
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| eig[j].partial_cmp(&eig[i]).unwrap());

    let mut sigma = [0.0; 3];
    let mut v = [Vec3::ZERO; 3];
    for (k, &i) in idx.iter().enumerate() {
        sigma[k] = eig[i].max(0.0).sqrt();
        v[k] = Vec3::new(vecs[0][i], vecs[1][i], vecs[2][i]);
    }

    // left vectors: u_k = M v_k / sigma_k where well-conditioned, otherwise
    // complete an orthonormal triad
    let scale = sigma[0].max(1e-300);
    let mut u = [Vec3::ZERO; 3];
    let mut have = [false; 3];
    for k in 0..3 {
        if sigma[k] > 1e-13 * scale && sigma[k] > 0.0 {
            u[k] = m.mul_vec(v[k]).scale(1.0 / sigma[k]);
            have[k] = true;
        }
    }
    for k in 0..3 {
        if !have[k] {
            u[k] = complete_direction(&u, &have);
            have[k] = true;
        }
    }

    // deterministic sign convention on v, compensated in u
    for k in 0..3 {
        let vs = v[k].sign_normalized();
        if vs.sub(v[k]).norm() > 0.0 {
            v[k] = vs;
            u[k] = u[k].neg();
        }
    }

    Svd3 { sigma, v, u }
}

/// Unit vector orthogonal to every already-fixed direction in `u`.
fn complete_direction(u: &[Vec3; 3], have: &[bool; 3]) -> Vec3 {
    let fixed: Vec<Vec3> = (0..3).filter(|&k| have[k]).map(|k| u[k]).collect();
    match fixed.len() {
        0 => Vec3::new(1.0, 0.0, 0.0),
        1 => {
            let (p1, _) = crate::vec3::orthonormal_complement(fixed[0]).unwrap();
            p1
        }
        _ => {
            let c = fixed[0].cross(fixed[1]);
            c.scale(1.0 / c.norm())
        }
    }
}

impl Svd3 {
    /// Frobenius-level consistency check used by tests and the validation path.
    pub fn check_against(&self, m: &Mat3, tol: f64) -> Result<()> {
        for k in 0..3 {
            let lhs = m.mul_vec(self.v[k]);
            let rhs = self.u[k].scale(self.sigma[k]);
            if lhs.sub(rhs).norm() > tol {
                return Err(Error::Validation(format!(
                    "SVD residual |M v_{k} - sigma_{k} u_{k}| = {:.3e} exceeds {tol:.1e}",
                    lhs.sub(rhs).norm()
                )));
            }
        }
        let fro2 = m.frobenius_norm().powi(2);
        let sum2: f64 = self.sigma.iter().map(|s| s * s).sum();
        if (fro2 - sum2).abs() > tol {
            return Err(Error::Validation(format!(
                "sum of sigma^2 ({sum2}) differs from ||M||_F^2 ({fro2})"
            )));
        }
        Ok(())
    }
}
