//! Two-qubit states in the real Pauli-coefficient basis.
//!
//! A joint state is stored as the 4×4 real matrix r with
//! r[i][j] = Tr(ρ σ_i⊗σ_j), indices ordered I, X, Y, Z, Alice first. This is
//! the single source of truth for the joint state: the dense density matrix
//! is reconstructed as ρ = (1/4) Σ_ij r[i][j] σ_i⊗σ_j.

use serde::{Deserialize, Serialize};

use crate::cmat4::{pauli_pair, C64, CMat4};
use crate::error::{Error, Result};
use crate::mat3::Mat3;
use crate::vec3::Vec3;

/// Default tolerance on the smallest eigenvalue of the reconstructed density
/// matrix: states with min eigenvalue ≥ -POS_TOL are accepted.
pub const POS_TOL: f64 = 1e-9;

/// Branch probabilities below this are dropped from projective expectations
/// to avoid 0/0 in the conditional Bloch vectors.
pub const BRANCH_PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Alice,
    Bob,
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitState {
    /// r[alice_index][bob_index], indices 0..4 meaning I, X, Y, Z.
    pub r: [[f64; 4]; 4],
}

impl TwoQubitState {
    /// Coefficient matrix constructor; callers are expected to `validate`.
    pub fn from_coefficients(r: [[f64; 4]; 4]) -> Self {
        TwoQubitState { r }
    }

    pub fn maximally_mixed() -> Self {
        let mut r = [[0.0; 4]; 4];
        r[0][0] = 1.0;
        TwoQubitState { r }
    }

    /// Extracts Pauli coefficients from a dense density matrix.
    ///
    /// The input must be Hermitian within 1e-10 and have unit trace within
    /// 1e-10; r_II is pinned to exactly 1 afterwards.
    pub fn from_density_matrix(rho: &CMat4) -> Result<Self> {
        let herm = rho.hermiticity_defect();
        if herm > 1e-10 {
            return Err(Error::Validation(format!(
                "density matrix must be Hermitian: max |rho - rho†| entry = {herm:.3e} > 1e-10"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "density matrix must have unit trace: Tr = {} + {}i violates |Tr - 1| <= 1e-10",
                tr.re, tr.im
            )));
        }
        let mut r = [[0.0; 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = rho.mul(&pauli_pair(i, j)).trace().re;
            }
        }
        r[0][0] = 1.0;
        Ok(TwoQubitState { r })
    }

    /// Reconstructs the dense density matrix ρ = (1/4) Σ r_ij σ_i⊗σ_j.
    pub fn to_density_matrix(&self) -> CMat4 {
        let mut rho = CMat4::ZERO_MAT;
        for i in 0..4 {
            for j in 0..4 {
                if self.r[i][j] != 0.0 {
                    rho = rho.add(&pauli_pair(i, j).scale_re(self.r[i][j] * 0.25));
                }
            }
        }
        rho
    }

    /// Bloch vector of one party's reduced state.
    ///
    /// Alice reads down the first column (r_XI, r_YI, r_ZI); Bob reads across
    /// the first row (r_IX, r_IY, r_IZ).
    pub fn reduced_bloch(&self, party: Party) -> Vec3 {
        match party {
            Party::Alice => Vec3::new(self.r[1][0], self.r[2][0], self.r[3][0]),
            Party::Bob => Vec3::new(self.r[0][1], self.r[0][2], self.r[0][3]),
        }
    }

    /// Purity Tr(ρ²): (1 + |r|²)/2 for a party, (1/4) Σ r_ij² for the joint
    /// state.
    pub fn purity(&self, subsystem: Subsystem) -> f64 {
        match subsystem {
            Subsystem::Alice => 0.5 * (1.0 + self.reduced_bloch(Party::Alice).norm_sq()),
            Subsystem::Bob => 0.5 * (1.0 + self.reduced_bloch(Party::Bob).norm_sq()),
            Subsystem::Joint => {
                let mut s = 0.0;
                for row in &self.r {
                    for x in row {
                        s += x * x;
                    }
                }
                0.25 * s
            }
        }
    }

    /// Correlation matrix C with C[bob_row][alice_col] = r_ij − r_iI·r_Ij.
    ///
    /// C is the linear map from Alice's measurement axis to the drift
    /// direction of Bob's Bloch vector: C·n̂ has components
    /// r_nj − r_nI·r_Ij for j ∈ {X, Y, Z}.
    pub fn correlation_matrix(&self) -> Mat3 {
        let mut c = [[0.0; 3]; 3];
        for j in 1..4 {
            for i in 1..4 {
                c[j - 1][i - 1] = self.r[i][j] - self.r[i][0] * self.r[0][j];
            }
        }
        Mat3(c)
    }

    /// All invariant violations, or an empty list for a well-formed state.
    ///
    /// Positivity is established from the eigenvalues of the reconstructed
    /// density matrix. Never panics.
    pub fn validate(&self, pos_tol: f64) -> Vec<String> {
        let mut violations = Vec::new();
        const NAMES: [&str; 4] = ["I", "X", "Y", "Z"];
        if self.r[0][0] != 1.0 {
            violations.push(format!("r_II = 1 exactly (got {})", self.r[0][0]));
        }
        for i in 0..4 {
            for j in 0..4 {
                let v = self.r[i][j];
                if !v.is_finite() {
                    violations.push(format!("r_{}{} finite (got {v})", NAMES[i], NAMES[j]));
                } else if v.abs() > 1.0 + pos_tol {
                    violations.push(format!("|r_{}{}| <= 1 (got {v})", NAMES[i], NAMES[j]));
                }
            }
        }
        if !violations.is_empty() {
            // eigen-check would be meaningless on NaN/absurd coefficients
            if violations.iter().any(|v| v.contains("finite")) {
                return violations;
            }
        }
        let purity = self.purity(Subsystem::Joint);
        if !(0.25 - 1e-12..=1.0 + 4.0 * pos_tol).contains(&purity) {
            violations.push(format!(
                "joint purity in [1/4, 1 + 4*pos_tol] (got {purity})"
            ));
        }
        let eig = self.to_density_matrix().eigenvalues_hermitian();
        if eig[0] < -pos_tol {
            violations.push(format!(
                "positive semidefinite: min eigenvalue {} < -{pos_tol:.1e}",
                eig[0]
            ));
        }
        violations
    }

    /// `validate` with the default positivity tolerance, as a Result.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate(POS_TOL);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v.join("; ")))
        }
    }

    /// Instantaneous projective measurement of Alice's qubit along `axis`.
    pub fn projective_measure(&self, axis: Vec3) -> Result<ProjectiveOutcome> {
        axis.ensure_unit()?;
        let r_a = self.reduced_bloch(Party::Alice);
        let r_ni = axis.dot(r_a);
        let p_plus = 0.5 * (1.0 + r_ni);
        let p_minus = 0.5 * (1.0 - r_ni);

        // r_nj = Σ_i n_i r_ij for each Bob component j
        let r_n = Vec3::new(
            axis.x * self.r[1][1] + axis.y * self.r[2][1] + axis.z * self.r[3][1],
            axis.x * self.r[1][2] + axis.y * self.r[2][2] + axis.z * self.r[3][2],
            axis.x * self.r[1][3] + axis.y * self.r[2][3] + axis.z * self.r[3][3],
        );
        let r_b = self.reduced_bloch(Party::Bob);

        let mut expected = 0.0;
        let bloch = |sign: f64, p: f64| -> Vec3 {
            if p < BRANCH_PROB_FLOOR {
                Vec3::ZERO
            } else {
                r_b.add(r_n.scale(sign)).scale(1.0 / (2.0 * p))
            }
        };
        let b_plus = bloch(1.0, p_plus);
        let b_minus = bloch(-1.0, p_minus);
        if p_plus >= BRANCH_PROB_FLOOR {
            expected += p_plus * 0.5 * (1.0 + b_plus.norm_sq());
        }
        if p_minus >= BRANCH_PROB_FLOOR {
            expected += p_minus * 0.5 * (1.0 + b_minus.norm_sq());
        }

        Ok(ProjectiveOutcome {
            prob_plus: p_plus,
            prob_minus: p_minus,
            bob_bloch_plus: b_plus,
            bob_bloch_minus: b_minus,
            expected_bob_purity: expected,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let state: TwoQubitState =
            serde_json::from_str(text).map_err(|e| Error::Validation(format!("state file: {e}")))?;
        Ok(state)
    }
}

/// Outcome statistics of a projective measurement of Alice's qubit.
///
/// Branches with probability below `BRANCH_PROB_FLOOR` report a zero Bloch
/// vector and are excluded from the purity expectation.
#[derive(Debug, Clone, Copy)]
pub struct ProjectiveOutcome {
    pub prob_plus: f64,
    pub prob_minus: f64,
    pub bob_bloch_plus: Vec3,
    pub bob_bloch_minus: Vec3,
    pub expected_bob_purity: f64,
}

/// Named example states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    /// Pure superposition √((1+β)/2)|00⟩ + √((1−β)/2)|11⟩; maximally
    /// entangled at β = 0, a product state only at β = ±1.
    Bell { beta: f64 },
    /// The bell(β) state after dephasing of strength δ:
    /// (II + ZZ + β(ZI + IZ) + γ(XX − YY))/4 with γ = √(1−β²) − δ.
    Dephased { beta: f64, delta: f64 },
    /// (II + (XI + XZ + ZZ)/√5)/4: Alice's Bloch vector invites the
    /// single-qubit unbiased-axis rule while the correlations reward a
    /// different axis entirely.
    JacobsCounterexample,
    /// Uncorrelated pair with the given Bloch vectors.
    Product { alice: Vec3, bob: Vec3 },
    MaximallyMixed,
}

impl Preset {
    pub fn build(&self) -> Result<TwoQubitState> {
        match *self {
            Preset::Bell { beta } => {
                ensure_range("beta", beta, -1.0, 1.0)?;
                Ok(dephased_coefficients(beta, 0.0))
            }
            Preset::Dephased { beta, delta } => {
                ensure_range("beta", beta, -1.0, 1.0)?;
                let dmax = (1.0 - beta * beta).sqrt();
                if !(0.0..=dmax).contains(&delta) {
                    return Err(Error::Validation(format!(
                        "delta must satisfy 0 <= delta <= sqrt(1 - beta^2) = {dmax} (got {delta})"
                    )));
                }
                Ok(dephased_coefficients(beta, delta))
            }
            Preset::JacobsCounterexample => {
                let s = 1.0 / 5f64.sqrt();
                let mut r = [[0.0; 4]; 4];
                r[0][0] = 1.0;
                r[1][0] = s; // XI
                r[1][3] = s; // XZ
                r[3][3] = s; // ZZ
                Ok(TwoQubitState { r })
            }
            Preset::Product { alice, bob } => {
                for (label, v) in [("alice", alice), ("bob", bob)] {
                    if v.norm() > 1.0 + POS_TOL {
                        return Err(Error::Validation(format!(
                            "{label} Bloch vector must satisfy |r| <= 1 (got |r| = {})",
                            v.norm()
                        )));
                    }
                }
                let a = [1.0, alice.x, alice.y, alice.z];
                let b = [1.0, bob.x, bob.y, bob.z];
                let mut r = [[0.0; 4]; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        r[i][j] = a[i] * b[j];
                    }
                }
                Ok(TwoQubitState { r })
            }
            Preset::MaximallyMixed => Ok(TwoQubitState::maximally_mixed()),
        }
    }
}

fn dephased_coefficients(beta: f64, delta: f64) -> TwoQubitState {
    let gamma = (1.0 - beta * beta).sqrt() - delta;
    let mut r = [[0.0; 4]; 4];
    r[0][0] = 1.0;
    r[3][0] = beta; // ZI
    r[0][3] = beta; // IZ
    r[3][3] = 1.0; // ZZ
    r[1][1] = gamma; // XX
    r[2][2] = -gamma; // YY
    TwoQubitState { r }
}

fn ensure_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&v) {
        return Err(Error::Validation(format!(
            "{name} must satisfy {lo} <= {name} <= {hi} (got {v})"
        )));
    }
    Ok(())
}

/// Density matrix of a random valid state: ρ = A A† / Tr(A A†) with A drawn
/// entrywise from the standard complex normal distribution. Test utility.
pub fn random_state(rng: &mut crate::rng::CounterRng) -> TwoQubitState {
    let mut a = CMat4::ZERO_MAT;
    for r in 0..4 {
        for c in 0..4 {
            a.0[r][c] = C64::new(rng.normal(), rng.normal());
        }
    }
    let aa = a.mul(&a.dagger());
    let tr = aa.trace().re;
    let rho = aa.scale_re(1.0 / tr);
    TwoQubitState::from_density_matrix(&rho).expect("Gram matrix is a valid density matrix")
}
