//! Conditioned evolution under continuous weak measurement of Alice's qubit.
//!
//! Two Euler–Maruyama integrators advance the same stochastic master
//! equation: `step_pauli` works directly on the 16 real Pauli coefficients
//! (the production path), `step_dense` advances the dense density matrix
//! dρ = −k[y,[y,ρ]]dt + √(2k)(yρ + ρy − 2⟨y⟩ρ)dW and exists to
//! cross-validate the coefficient form. Both evaluate all increments at the
//! pre-step state and must agree to floating-point accumulation error when
//! fed the same noise stream.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cmat4::{measurement_operator, CMat4};
use crate::error::{Error, Result};
use crate::pauli::{Subsystem, TwoQubitState};
use crate::rng::CounterRng;
use crate::strategy::StrategyConfig;
use crate::vec3::{orthonormal_complement, Vec3};

/// Default ceiling on k·dt; larger products let Euler drift kick
/// coefficients out of [-1, 1] often enough to distort ensemble statistics.
pub const KDT_GUARD: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Measurement strength, 1/time.
    pub k: f64,
    /// Integration timestep.
    pub dt: f64,
    /// Total simulated time; the step count is ceil(t_final/dt).
    pub t_final: f64,
    /// Master seed for the counter-based noise streams.
    pub seed: u64,
    /// Proceed past the k·dt guard instead of erroring.
    #[serde(default)]
    pub allow_large_kdt: bool,
}

impl SimParams {
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.k <= 0.0 || !self.k.is_finite() {
            return Err(Error::Validation(format!("k must be > 0 (got {})", self.k)));
        }
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(Error::Validation(format!("dt must be > 0 (got {})", self.dt)));
        }
        if self.t_final < 0.0 || !self.t_final.is_finite() {
            return Err(Error::Validation(format!(
                "t_final must be >= 0 (got {})",
                self.t_final
            )));
        }
        if self.k * self.dt > KDT_GUARD && !self.allow_large_kdt {
            return Err(Error::Guard(format!(
                "k*dt = {} exceeds {KDT_GUARD}; reduce dt or set the override flag",
                self.k * self.dt
            )));
        }
        Ok(())
    }
}

fn check_state_finite(state: &TwoQubitState) -> Result<()> {
    for row in &state.r {
        for v in row {
            if !v.is_finite() {
                return Err(Error::Validation("state contains a non-finite coefficient".into()));
            }
        }
    }
    Ok(())
}

/// One Euler–Maruyama update of the 16 coefficient equations.
///
/// Alice's coefficient rows are rotated into the measurement frame
/// (n̂, m̂₁, m̂₂); for every Bob index j the increments are
///
///   dr_mj = −(4k·dt + r_nI·√(8k)·dW)·r_mj        (m ∈ {m̂₁, m̂₂})
///   dr_nj = (r_Ij − r_nI·r_nj)·√(8k)·dW
///   dr_Ij = (r_nj − r_nI·r_Ij)·√(8k)·dW
///
/// then the rows are rotated back. r_II stays exactly 1. `dW` is supplied by
/// the caller (Gaussian with variance dt, or 0 for drift-only checks).
pub fn step_pauli(
    state: &TwoQubitState,
    axis: Vec3,
    k: f64,
    dt: f64,
    dw: f64,
) -> Result<TwoQubitState> {
    axis.ensure_unit()?;
    check_state_finite(state)?;

    let (m1, m2) = orthonormal_complement(axis)?;
    let r = &state.r;

    // project Alice's vector rows onto the measurement frame
    let mut a_n = [0.0; 4];
    let mut a_m1 = [0.0; 4];
    let mut a_m2 = [0.0; 4];
    for j in 0..4 {
        a_n[j] = axis.x * r[1][j] + axis.y * r[2][j] + axis.z * r[3][j];
        a_m1[j] = m1.x * r[1][j] + m1.y * r[2][j] + m1.z * r[3][j];
        a_m2[j] = m2.x * r[1][j] + m2.y * r[2][j] + m2.z * r[3][j];
    }

    let r_ni = a_n[0];
    let s8k = (8.0 * k).sqrt();
    let m_factor = 1.0 - (4.0 * k * dt + r_ni * s8k * dw);

    let mut out = TwoQubitState::maximally_mixed();
    let mut new_n = [0.0; 4];
    let mut new_m1 = [0.0; 4];
    let mut new_m2 = [0.0; 4];
    for j in 0..4 {
        let r_ij = r[0][j];
        new_n[j] = a_n[j] + (r_ij - r_ni * a_n[j]) * s8k * dw;
        new_m1[j] = a_m1[j] * m_factor;
        new_m2[j] = a_m2[j] * m_factor;
        out.r[0][j] = r_ij + (a_n[j] - r_ni * r_ij) * s8k * dw;
    }
    out.r[0][0] = 1.0;

    let frame = [axis, m1, m2];
    let rows = [new_n, new_m1, new_m2];
    for i in 0..3 {
        for j in 0..4 {
            out.r[1 + i][j] = frame[0].component(i) * rows[0][j]
                + frame[1].component(i) * rows[1][j]
                + frame[2].component(i) * rows[2][j];
        }
    }
    Ok(out)
}

/// One Euler–Maruyama update of the dense SME with y = n̂·σ ⊗ I.
///
/// The drift is −k[y,[y,ρ]]dt, the innovation √(2k)(yρ + ρy − 2⟨y⟩ρ)dW with
/// ⟨y⟩ = Tr(yρ); the result is re-Hermitized as (ρ + ρ†)/2. Both terms are
/// traceless, so the trace is preserved to machine precision.
pub fn step_dense(rho: &CMat4, axis: Vec3, k: f64, dt: f64, dw: f64) -> Result<CMat4> {
    axis.ensure_unit()?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::Validation(format!(
            "dense state must have unit trace within 1e-8 (got {} + {}i)",
            tr.re, tr.im
        )));
    }
    if rho.hermiticity_defect() > 1e-8 {
        return Err(Error::Validation(
            "dense state must be Hermitian within 1e-8".into(),
        ));
    }

    let y = measurement_operator(axis);
    let y_rho = y.mul(rho);
    let rho_y = rho.mul(&y);
    let comm = y_rho.sub(&rho_y); // [y, rho]
    let double_comm = y.mul(&comm).sub(&comm.mul(&y)); // [y, [y, rho]]
    let mean_y = y_rho.trace().re;
    let innovation = y_rho.add(&rho_y).sub(&rho.scale_re(2.0 * mean_y));

    let next = rho
        .sub(&double_comm.scale_re(k * dt))
        .add(&innovation.scale_re((2.0 * k).sqrt() * dw));
    Ok(next.hermitized())
}

/// Full record of one conditioned trajectory.
///
/// All arrays share length `steps + 1`. Row s holds the state at time
/// `times[s]`, the axis the controller chose there, and the Wiener increment
/// applied in the step leaving that state (0 in the final row, where no step
/// follows).
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<TwoQubitState>,
    pub axes: Vec<Vec3>,
    pub noises: Vec<f64>,
    pub purities_a: Vec<f64>,
    pub purities_b: Vec<f64>,
}

impl TrajectoryRecord {
    /// CSV columns: t, the 16 coefficients, axis, dW, and both purities.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        const NAMES: [&str; 4] = ["I", "X", "Y", "Z"];
        write!(w, "t")?;
        for i in 0..4 {
            for j in 0..4 {
                write!(w, ",r_{}{}", NAMES[i], NAMES[j])?;
            }
        }
        writeln!(w, ",n_x,n_y,n_z,dW,P_A,P_B")?;
        for s in 0..self.times.len() {
            write!(w, "{}", self.times[s])?;
            for i in 0..4 {
                for j in 0..4 {
                    write!(w, ",{}", self.states[s].r[i][j])?;
                }
            }
            let n = self.axes[s];
            writeln!(
                w,
                ",{},{},{},{},{},{}",
                n.x, n.y, n.z, self.noises[s], self.purities_a[s], self.purities_b[s]
            )?;
        }
        Ok(())
    }
}

/// Simulates one trajectory: at each step the controller picks the
/// measurement axis from the current conditioned state, a Wiener increment
/// is drawn from the trajectory's own counter-based stream, and `step_pauli`
/// advances the state. Identical inputs reproduce the record bit for bit.
pub fn simulate_trajectory(
    initial: &TwoQubitState,
    controller: &StrategyConfig,
    params: &SimParams,
    rng: &mut CounterRng,
) -> Result<TrajectoryRecord> {
    params.validate()?;
    initial.ensure_valid()?;

    let steps = params.steps();
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        axes: Vec::with_capacity(steps + 1),
        noises: Vec::with_capacity(steps + 1),
        purities_a: Vec::with_capacity(steps + 1),
        purities_b: Vec::with_capacity(steps + 1),
    };

    let mut state = *initial;
    for s in 0..=steps {
        let axis = controller
            .select_axis(&state)
            .map_err(|e| Error::Degeneracy(format!("step {s}: {e}")))?;
        let dw = if s < steps { rng.wiener(params.dt) } else { 0.0 };
        rec.times.push(s as f64 * params.dt);
        rec.states.push(state);
        rec.axes.push(axis);
        rec.noises.push(dw);
        rec.purities_a.push(state.purity(Subsystem::Alice));
        rec.purities_b.push(state.purity(Subsystem::Bob));
        if s < steps {
            state = step_pauli(&state, axis, params.k, params.dt, dw)
                .map_err(|e| Error::Validation(format!("step {s}: {e}")))?;
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Preset;
    use crate::strategy::{Strategy, StrategyConfig};
    use crate::vec3::{X_AXIS, Z_AXIS};

    #[test]
    fn drift_shrinks_transverse_rows() {
        let mut s = TwoQubitState::maximally_mixed();
        s.r[2][0] = 0.5; // YI
        let out = step_pauli(&s, Z_AXIS, 0.1, 0.01, 0.0).unwrap();
        assert!((out.r[2][0] - 0.498).abs() < 1e-15);
    }

    #[test]
    fn drift_leaves_measured_rows_alone() {
        let s = Preset::Dephased { beta: 0.5, delta: 0.01 }.build().unwrap();
        let out = step_pauli(&s, Z_AXIS, 0.1, 0.01, 0.0).unwrap();
        assert_eq!(out.r[3][0], s.r[3][0]); // ZI
        assert_eq!(out.r[0][3], s.r[0][3]); // IZ
        assert_eq!(out.r[3][3], s.r[3][3]); // ZZ
    }

    #[test]
    fn noise_kick_from_maximally_mixed() {
        let s = TwoQubitState::maximally_mixed();
        let w = 0.037;
        let k = 0.1;
        let out = step_pauli(&s, Z_AXIS, k, 1e-3, w).unwrap();
        assert!((out.r[3][0] - (8.0 * k).sqrt() * w).abs() < 1e-15);
        assert_eq!(out.r[3][3], 0.0);
        assert_eq!(out.r[0][0], 1.0);
    }

    #[test]
    fn step_rejects_bad_inputs() {
        let s = TwoQubitState::maximally_mixed();
        assert!(step_pauli(&s, Vec3::new(0.5, 0.0, 0.0), 0.1, 1e-3, 0.0).is_err());
        let mut nan = s;
        nan.r[1][2] = f64::NAN;
        assert!(step_pauli(&nan, Z_AXIS, 0.1, 1e-3, 0.0).is_err());
    }

    #[test]
    fn dense_fixed_point_when_diagonal_in_axis_basis() {
        // rho diagonal in the z eigenbasis commutes with y = Z⊗I
        let s = Preset::Product {
            alice: Vec3::new(0.0, 0.0, 0.4),
            bob: Vec3::new(0.0, 0.0, -0.7),
        }
        .build()
        .unwrap();
        let rho = s.to_density_matrix();
        let out = step_dense(&rho, Z_AXIS, 0.1, 1e-3, 0.0).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn dense_preserves_trace_for_any_noise() {
        let s = Preset::Dephased { beta: 0.5, delta: 0.01 }.build().unwrap();
        let mut rho = s.to_density_matrix();
        let mut rng = CounterRng::new(5);
        for _ in 0..200 {
            rho = step_dense(&rho, X_AXIS, 0.1, 1e-3, rng.wiener(1e-3)).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-13);
            assert!(rho.trace().im.abs() < 1e-15);
        }
    }

    #[test]
    fn pauli_and_dense_agree_on_one_step() {
        let s = Preset::JacobsCounterexample.build().unwrap();
        let axis = Vec3::new(1.0, 0.0, 1.0).scale(1.0 / 2f64.sqrt());
        let dw = 0.0123;
        let a = step_pauli(&s, axis, 0.1, 1e-3, dw).unwrap();
        let dense = step_dense(&s.to_density_matrix(), axis, 0.1, 1e-3, dw).unwrap();
        let b = TwoQubitState::from_density_matrix(&dense).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((a.r[i][j] - b.r[i][j]).abs() < 1e-12, "r[{i}][{j}]");
            }
        }
    }

    #[test]
    fn eigenstate_of_measured_axis_is_stationary() {
        // Alice pure |0>, measured along z: every increment vanishes
        let s = Preset::Product {
            alice: Vec3::new(0.0, 0.0, 1.0),
            bob: Vec3::new(0.2, -0.3, 0.1),
        }
        .build()
        .unwrap();
        let cfg = StrategyConfig::new(Strategy::Fixed(Z_AXIS));
        let params = SimParams { k: 0.1, dt: 1e-3, t_final: 0.05, seed: 3, allow_large_kdt: false };
        let mut rng = CounterRng::new(99);
        let rec = simulate_trajectory(&s, &cfg, &params, &mut rng).unwrap();
        let last = rec.states.last().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((last.r[i][j] - s.r[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_reproduces_bitwise() {
        let s = Preset::Dephased { beta: 0.5, delta: 0.01 }.build().unwrap();
        let cfg = StrategyConfig::new(Strategy::BobOptimal);
        let params = SimParams { k: 0.1, dt: 1e-3, t_final: 0.1, seed: 11, allow_large_kdt: false };
        let run = |seed: u64| {
            let mut rng = CounterRng::new(seed);
            simulate_trajectory(&s, &cfg, &params, &mut rng).unwrap()
        };
        let (a, b) = (run(7), run(7));
        for (x, y) in a.purities_b.iter().zip(&b.purities_b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.noises.iter().zip(&b.noises) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn record_arrays_share_length_and_purities_recompute() {
        let s = Preset::JacobsCounterexample.build().unwrap();
        let cfg = StrategyConfig::new(Strategy::Simultaneous);
        let params = SimParams { k: 0.1, dt: 1e-3, t_final: 0.02, seed: 1, allow_large_kdt: false };
        let mut rng = CounterRng::new(1);
        let rec = simulate_trajectory(&s, &cfg, &params, &mut rng).unwrap();
        let n = rec.times.len();
        assert_eq!(rec.states.len(), n);
        assert_eq!(rec.axes.len(), n);
        assert_eq!(rec.noises.len(), n);
        assert_eq!(rec.purities_a.len(), n);
        assert_eq!(rec.purities_b.len(), n);
        for (st, (pa, pb)) in rec.states.iter().zip(rec.purities_a.iter().zip(&rec.purities_b)) {
            assert!((st.purity(Subsystem::Alice) - pa).abs() < 1e-12);
            assert!((st.purity(Subsystem::Bob) - pb).abs() < 1e-12);
        }
    }

    #[test]
    fn controller_degeneracy_carries_step_index() {
        let s = TwoQubitState::maximally_mixed();
        let cfg = StrategyConfig::with_policy(
            Strategy::JacobsAlice,
            crate::strategy::DegeneracyPolicy::Error,
        );
        let params = SimParams { k: 0.1, dt: 1e-3, t_final: 0.01, seed: 0, allow_large_kdt: false };
        let mut rng = CounterRng::new(0);
        let err = simulate_trajectory(&s, &cfg, &params, &mut rng).unwrap_err();
        assert!(err.to_string().contains("step 0"), "{err}");
    }

    #[test]
    fn record_csv_schema() {
        let s = Preset::Dephased { beta: 0.5, delta: 0.01 }.build().unwrap();
        let cfg = StrategyConfig::new(Strategy::Simultaneous);
        let params = SimParams { k: 0.1, dt: 1e-3, t_final: 3e-3, seed: 2, allow_large_kdt: false };
        let mut rng = CounterRng::new(2);
        let rec = simulate_trajectory(&s, &cfg, &params, &mut rng).unwrap();
        let mut bytes = Vec::new();
        rec.write_csv(&mut bytes).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,r_II,r_IX,r_IY,r_IZ,r_XI,r_XX,r_XY,r_XZ,r_YI,r_YX,r_YY,r_YZ,r_ZI,r_ZX,r_ZY,r_ZZ,n_x,n_y,n_z,dW,P_A,P_B"
        );
        assert_eq!(lines.count(), rec.times.len());
        // final row carries no noise
        assert_eq!(*rec.noises.last().unwrap(), 0.0);
    }

    #[test]
    fn kdt_guard_trips_and_overrides() {
        let mut params = SimParams { k: 0.5, dt: 0.1, t_final: 1.0, seed: 0, allow_large_kdt: false };
        assert!(matches!(params.validate(), Err(Error::Guard(_))));
        params.allow_large_kdt = true;
        assert!(params.validate().is_ok());
    }
}
