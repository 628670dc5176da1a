//! Dense 4×4 complex matrices for the two-qubit Hilbert space.
//!
//! Used for the density-matrix round trip, the dense cross-validation
//! integrator, and the positivity check (Hermitian eigenvalues via a real
//! 8×8 embedding fed to the Jacobi solver).

use num_complex::Complex64;

use crate::svd3::jacobi_eigh;
use crate::vec3::Vec3;

pub type C64 = Complex64;

/// Row-major 4×4 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMat4(pub [[C64; 4]; 4]);

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Single-qubit Pauli basis in the order used throughout: I, X, Y, Z.
pub fn pauli2(idx: usize) -> [[C64; 2]; 2] {
    match idx {
        0 => [[ONE, ZERO], [ZERO, ONE]],
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("pauli index {idx} out of range"),
    }
}

/// Kronecker product of two 2×2 matrices (first factor = Alice).
pub fn kron2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> CMat4 {
    let mut m = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    CMat4(m)
}

/// σ_i ⊗ σ_j with i, j ∈ {I, X, Y, Z}.
pub fn pauli_pair(i: usize, j: usize) -> CMat4 {
    kron2(&pauli2(i), &pauli2(j))
}

/// n̂·σ ⊗ I, the observable for a weak measurement of Alice's qubit along n̂.
pub fn measurement_operator(axis: Vec3) -> CMat4 {
    let x = pauli_pair(1, 0).scale_re(axis.x);
    let y = pauli_pair(2, 0).scale_re(axis.y);
    let z = pauli_pair(3, 0).scale_re(axis.z);
    x.add(&y).add(&z)
}

impl CMat4 {
    pub const ZERO_MAT: CMat4 = CMat4([[ZERO; 4]; 4]);

    pub fn identity() -> CMat4 {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = ONE;
        }
        CMat4(m)
    }

    pub fn add(&self, other: &CMat4) -> CMat4 {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = self.0[r][c] + other.0[r][c];
            }
        }
        CMat4(m)
    }

    pub fn sub(&self, other: &CMat4) -> CMat4 {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = self.0[r][c] - other.0[r][c];
            }
        }
        CMat4(m)
    }

    pub fn mul(&self, other: &CMat4) -> CMat4 {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                let mut s = ZERO;
                for t in 0..4 {
                    s += self.0[r][t] * other.0[t][c];
                }
                m[r][c] = s;
            }
        }
        CMat4(m)
    }

    pub fn scale_re(&self, s: f64) -> CMat4 {
        let mut m = self.0;
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        CMat4(m)
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2] + self.0[3][3]
    }

    pub fn dagger(&self) -> CMat4 {
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = self.0[c][r].conj();
            }
        }
        CMat4(m)
    }

    /// (A + A†)/2.
    pub fn hermitized(&self) -> CMat4 {
        self.add(&self.dagger()).scale_re(0.5)
    }

    /// Largest |A_rc - conj(A_cr)| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max((self.0[r][c] - self.0[c][r].conj()).norm());
            }
        }
        d
    }

    pub fn max_abs_diff(&self, other: &CMat4) -> f64 {
        let mut d = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    ///
    /// A Hermitian A = X + iY embeds as the real symmetric 8×8 block matrix
    /// [[X, -Y], [Y, X]] whose spectrum is that of A with every eigenvalue
    /// doubled; the doubled spectrum is collapsed back by taking every other
    /// sorted value.
    pub fn eigenvalues_hermitian(&self) -> [f64; 4] {
        let mut s = [[0.0f64; 8]; 8];
        for r in 0..4 {
            for c in 0..4 {
                let x = self.0[r][c].re;
                let y = self.0[r][c].im;
                s[r][c] = x;
                s[r + 4][c + 4] = x;
                s[r][c + 4] = -y;
                s[r + 4][c] = y;
            }
        }
        let (eig, _) = jacobi_eigh::<8>(&s);
        let mut e = eig;
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        [e[0], e[2], e[4], e[6]]
    }
}
