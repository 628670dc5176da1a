//! Measurement-axis feedback rules and analytic purification-rate predictors.
//!
//! Every rule maps the current conditioned state to the axis Alice measures
//! next. `rate_alice` / `rate_bob` expose the drift and noise coefficients of
//! the purity increments
//!
//!   dP_A = 4k(1 − r_nI²)(1 − |r_A|²)·dt + r_nI(1 − |r_A|²)·√(8k)·dW
//!   dP_B = 4k|C·n̂|²·dt + (r_B·(C·n̂))·√(8k)·dW
//!
//! so tests and scans can predict ensemble behavior without simulating.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mat3::{plane_projector, Mat3};
use crate::pauli::{Party, TwoQubitState};
use crate::svd3::svd3;
use crate::vec3::{orthonormal_complement, Vec3, Z_AXIS};

/// Norms below this are treated as degenerate when selecting axes.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Drift (dt coefficient) and noise (dW coefficient) of a purity increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub drift: f64,
    pub noise: f64,
}

/// Purity rate of Alice's own qubit when measured along `axis`.
///
/// Depends only on Alice's Bloch vector; expects a unit axis.
pub fn rate_alice(state: &TwoQubitState, axis: Vec3, k: f64) -> Rate {
    debug_assert!((axis.norm() - 1.0).abs() < 1e-9);
    let r_a = state.reduced_bloch(Party::Alice);
    let r_ni = axis.dot(r_a);
    let gap = 1.0 - r_a.norm_sq();
    Rate {
        drift: 4.0 * k * (1.0 - r_ni * r_ni) * gap,
        noise: r_ni * gap * (8.0 * k).sqrt(),
    }
}

/// Purity rate of Bob's unprobed qubit when Alice measures along `axis`.
pub fn rate_bob(state: &TwoQubitState, axis: Vec3, k: f64) -> Rate {
    debug_assert!((axis.norm() - 1.0).abs() < 1e-9);
    let c = state.correlation_matrix();
    let delta_r = c.mul_vec(axis);
    let r_b = state.reduced_bloch(Party::Bob);
    Rate {
        drift: 4.0 * k * delta_r.norm_sq(),
        noise: r_b.dot(delta_r) * (8.0 * k).sqrt(),
    }
}

/// What an axis rule does when its defining vector degenerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyPolicy {
    /// Surface the degeneracy as an error.
    Error,
    /// Fall back to the canonical ẑ axis.
    FallbackCanonical,
    /// Fall back to the closest-related rule that is still defined
    /// (terminating at ẑ). Ensemble runs never abort mid-trajectory.
    #[default]
    FallbackNested,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Measure along one axis forever (stored unit-norm).
    Fixed(Vec3),
    /// Measure along Alice's own Bloch vector (maximal purity noise).
    AlongBloch,
    /// Measure orthogonal to Alice's Bloch vector: her purity drift is the
    /// single-qubit maximum 4k(1 − |r_A|²) and her noise coefficient
    /// vanishes. The in-plane direction is chosen to maximize Bob's rate.
    JacobsAlice,
    /// First right singular vector of C: maximizes Bob's purity drift at
    /// 4kσ₁².
    BobOptimal,
    /// Fastest axis in the plane orthogonal to r_B' = Cᵀr_B, which makes
    /// Bob's purity noise coefficient vanish.
    BobDeterministic,
    /// Axis ∝ r_A × r_B': both purity noise coefficients vanish at once.
    Simultaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    #[serde(with = "strategy_string")]
    pub strategy: Strategy,
    #[serde(default)]
    pub degeneracy_policy: DegeneracyPolicy,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy) -> Self {
        StrategyConfig { strategy, degeneracy_policy: DegeneracyPolicy::default() }
    }

    pub fn with_policy(strategy: Strategy, degeneracy_policy: DegeneracyPolicy) -> Self {
        StrategyConfig { strategy, degeneracy_policy }
    }

    /// Measurement axis for the current conditioned state.
    pub fn select_axis(&self, state: &TwoQubitState) -> Result<Vec3> {
        let policy = self.degeneracy_policy;
        match self.strategy {
            Strategy::Fixed(axis) => {
                axis.ensure_unit()?;
                Ok(axis)
            }
            Strategy::AlongBloch => select_axis_along_bloch(state, policy),
            Strategy::JacobsAlice => select_axis_jacobs_alice(state, policy),
            Strategy::BobOptimal => select_axis_bob_optimal(state, policy),
            Strategy::BobDeterministic => {
                select_axis_bob_deterministic(state, policy).map(|d| d.axis)
            }
            Strategy::Simultaneous => Ok(select_axis_simultaneous(state)),
        }
    }
}

/// Axis choice from the Bob-deterministic rule, plus its degeneracy flags.
#[derive(Debug, Clone, Copy)]
pub struct DeterministicAxis {
    pub axis: Vec3,
    /// σ₁(C·P_p) < tolerance: no deterministic purification is possible and
    /// the returned in-plane axis yields zero rate.
    pub zero_rate: bool,
    /// r_B' was degenerate and a fallback rule produced the axis.
    pub fell_back: bool,
}

fn fallback(
    policy: DegeneracyPolicy,
    what: &str,
    nested: impl FnOnce() -> Vec3,
) -> Result<Vec3> {
    match policy {
        DegeneracyPolicy::Error => Err(Error::Degeneracy(format!(
            "{what}; policy forbids a fallback"
        ))),
        DegeneracyPolicy::FallbackCanonical => Ok(Z_AXIS),
        DegeneracyPolicy::FallbackNested => Ok(nested()),
    }
}

/// Optimal axis for Bob's purification rate: v₁ of svd3(C), sign-normalized.
pub fn select_axis_bob_optimal(state: &TwoQubitState, policy: DegeneracyPolicy) -> Result<Vec3> {
    let c = state.correlation_matrix();
    if c.frobenius_norm() <= DEGENERACY_TOL {
        return fallback(policy, "correlation matrix is zero", || {
            jacobs_terminal(state).unwrap_or(Z_AXIS)
        });
    }
    Ok(svd3(&c).v[0].sign_normalized())
}

/// In-plane rate maximizer used by the Jacobs rule: axis ⊥ r_A chosen to
/// maximize |C·n̂|², or None when Alice's Bloch vector is degenerate.
fn jacobs_terminal(state: &TwoQubitState) -> Option<Vec3> {
    let r_a = state.reduced_bloch(Party::Alice);
    if r_a.norm() <= DEGENERACY_TOL {
        return None;
    }
    let (p1, p2) = orthonormal_complement(r_a).ok()?;
    let c = state.correlation_matrix();
    Some(max_rate_in_plane(&c, p1, p2))
}

/// Maximizes |C n̂|² over n̂ = cos(α)p₁ + sin(α)p₂.
///
/// The restriction is the quadratic form [[|Cp₁|², Cp₁·Cp₂], [·, |Cp₂|²]];
/// its top eigen-direction is the maximizer. Exact ties resolve to p₁.
fn max_rate_in_plane(c: &Mat3, p1: Vec3, p2: Vec3) -> Vec3 {
    let c1 = c.mul_vec(p1);
    let c2 = c.mul_vec(p2);
    let a11 = c1.norm_sq();
    let a22 = c2.norm_sq();
    let a12 = c1.dot(c2);
    let alpha = 0.5 * (2.0 * a12).atan2(a11 - a22);
    let cand_a = p1.scale(alpha.cos()).add(p2.scale(alpha.sin()));
    let cand_b = p1.scale(-alpha.sin()).add(p2.scale(alpha.cos()));
    let rate_a = c.mul_vec(cand_a).norm_sq();
    let rate_b = c.mul_vec(cand_b).norm_sq();
    let best = if rate_a >= rate_b { cand_a } else { cand_b };
    best.sign_normalized()
}

/// Single-qubit unbiased rule: measure in the plane orthogonal to r_A, which
/// zeroes Alice's purity noise and yields drift 4k(1 − |r_A|²); among that
/// plane the Bob-rate-maximizing direction is preferred.
pub fn select_axis_jacobs_alice(state: &TwoQubitState, policy: DegeneracyPolicy) -> Result<Vec3> {
    match jacobs_terminal(state) {
        Some(axis) => Ok(axis),
        None => fallback(policy, "Alice's Bloch vector is zero", || {
            let c = state.correlation_matrix();
            if c.frobenius_norm() > DEGENERACY_TOL {
                svd3(&c).v[0].sign_normalized()
            } else {
                Z_AXIS
            }
        }),
    }
}

/// Measure along Alice's Bloch vector (maximizes her purity noise
/// coefficient). Comparison strategy for ensemble runs.
pub fn select_axis_along_bloch(state: &TwoQubitState, policy: DegeneracyPolicy) -> Result<Vec3> {
    let r_a = state.reduced_bloch(Party::Alice);
    if r_a.norm() <= DEGENERACY_TOL {
        return fallback(policy, "Alice's Bloch vector is zero", || {
            let c = state.correlation_matrix();
            if c.frobenius_norm() > DEGENERACY_TOL {
                svd3(&c).v[0].sign_normalized()
            } else {
                Z_AXIS
            }
        });
    }
    Ok(r_a.scale(1.0 / r_a.norm()))
}

/// Fastest deterministic purification of Bob's qubit: v₁ of svd3(C·P_p)
/// where P_p projects onto the plane orthogonal to r_B' = Cᵀr_B.
pub fn select_axis_bob_deterministic(
    state: &TwoQubitState,
    policy: DegeneracyPolicy,
) -> Result<DeterministicAxis> {
    let c = state.correlation_matrix();
    let r_b = state.reduced_bloch(Party::Bob);
    let r_b_prime = c.transpose().mul_vec(r_b);
    if r_b_prime.norm() <= DEGENERACY_TOL {
        // the noise constraint is vacuous; every axis is deterministic for Bob
        let axis = match policy {
            DegeneracyPolicy::Error => {
                return Err(Error::Degeneracy(
                    "r_B' = C^T r_B is zero; policy forbids a fallback".into(),
                ))
            }
            DegeneracyPolicy::FallbackCanonical => Z_AXIS,
            DegeneracyPolicy::FallbackNested => select_axis_bob_optimal(state, policy)?,
        };
        return Ok(DeterministicAxis { axis, zero_rate: false, fell_back: true });
    }
    Ok(deterministic_in_plane(&c, r_b_prime))
}

/// v₁ of C·P_p for the plane orthogonal to `normal`, with the zero-rate flag
/// set when σ₁ vanishes (the plane carries no correlations).
fn deterministic_in_plane(c: &Mat3, normal: Vec3) -> DeterministicAxis {
    let (p1, p2) = orthonormal_complement(normal).expect("normal checked nonzero");
    let proj = plane_projector(p1, p2).expect("complement pair is orthonormal");
    let cp = c.mul(&proj);
    let svd = svd3(&cp);
    if svd.sigma[0] < DEGENERACY_TOL {
        return DeterministicAxis { axis: p1.sign_normalized(), zero_rate: true, fell_back: false };
    }
    DeterministicAxis { axis: svd.v[0].sign_normalized(), zero_rate: false, fell_back: false }
}

/// Axis making both purity evolutions deterministic at once.
///
/// Generic case: the normalized cross product r_A × r_B'. Degenerate cases
/// keep the function total: parallel nonzero vectors share an orthogonal
/// plane and the Bob-rate maximizer in it is returned; if exactly one vector
/// survives, its own deterministic rule applies; if both vanish the
/// constraints are vacuous and the overall rate optimum is returned.
pub fn select_axis_simultaneous(state: &TwoQubitState) -> Vec3 {
    let c = state.correlation_matrix();
    let r_a = state.reduced_bloch(Party::Alice);
    let r_b = state.reduced_bloch(Party::Bob);
    let r_b_prime = c.transpose().mul_vec(r_b);

    let cross = r_a.cross(r_b_prime);
    if cross.norm() > 1e-10 {
        return cross.scale(1.0 / cross.norm()).sign_normalized();
    }

    let a_ok = r_a.norm() > DEGENERACY_TOL;
    let b_ok = r_b_prime.norm() > DEGENERACY_TOL;
    match (a_ok, b_ok) {
        (true, true) => deterministic_in_plane(&c, r_a).axis,
        (true, false) => jacobs_terminal(state).expect("r_a checked nonzero"),
        (false, true) => deterministic_in_plane(&c, r_b_prime).axis,
        (false, false) => {
            if c.frobenius_norm() > DEGENERACY_TOL {
                svd3(&c).v[0].sign_normalized()
            } else {
                Z_AXIS
            }
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Fixed(v) => write!(f, "fixed:{},{},{}", v.x, v.y, v.z),
            Strategy::AlongBloch => write!(f, "along_bloch"),
            Strategy::JacobsAlice => write!(f, "jacobs"),
            Strategy::BobOptimal => write!(f, "bob_opt"),
            Strategy::BobDeterministic => write!(f, "bob_det"),
            Strategy::Simultaneous => write!(f, "simultaneous"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Accepts `fixed:<x>,<y>,<z>` (normalized on parse), `along_bloch`,
    /// `jacobs`, `bob_opt`, `bob_det`, `simultaneous`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("fixed:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Validation(format!(
                    "fixed axis needs three components, got `{rest}`"
                )));
            }
            let mut v = [0.0; 3];
            for (slot, part) in v.iter_mut().zip(&parts) {
                *slot = part.trim().parse::<f64>().map_err(|_| {
                    Error::Validation(format!("cannot parse axis component `{part}`"))
                })?;
            }
            let axis = Vec3::new(v[0], v[1], v[2]).normalized()?;
            return Ok(Strategy::Fixed(axis));
        }
        match s {
            "along_bloch" => Ok(Strategy::AlongBloch),
            "jacobs" => Ok(Strategy::JacobsAlice),
            "bob_opt" => Ok(Strategy::BobOptimal),
            "bob_det" => Ok(Strategy::BobDeterministic),
            "simultaneous" => Ok(Strategy::Simultaneous),
            other => Err(Error::Validation(format!(
                "unknown strategy `{other}` (expected fixed:<x>,<y>,<z> | along_bloch | jacobs | bob_opt | bob_det | simultaneous)"
            ))),
        }
    }
}

mod strategy_string {
    use super::*;

    pub fn serialize<S: Serializer>(s: &Strategy, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&s.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Strategy, D::Error> {
        let text = String::deserialize(de)?;
        Strategy::from_str(&text).map_err(D::Error::custom)
    }
}
