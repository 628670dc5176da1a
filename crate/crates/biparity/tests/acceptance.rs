//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them) before asserting.
//!
//! Criterion 4 is expected to fail and is kept failing on purpose: its error
//! bounds require per-trajectory purity determinism that no Gaussian-increment
//! discretization can deliver at dt = 1e-3 (see the criterion's output and
//! the companion test, which pins the attainable discretization floor).

use std::time::Instant;

use biparity::ensemble::{run_ensemble, EnsembleConfig, Workers};
use biparity::pauli::{random_state, Preset, TwoQubitState};
use biparity::rng::CounterRng;
use biparity::scan::{argmax_axis, projection_map, rate_map};
use biparity::sme::{step_dense, step_pauli, SimParams};
use biparity::strategy::{rate_bob, select_axis_bob_optimal, DegeneracyPolicy, Strategy, StrategyConfig};
use biparity::svd3::svd3;
use biparity::vec3::Vec3;

const K: f64 = 0.1;

fn report(criterion: &str, pass: bool, details: &str) {
    println!("criterion {criterion}: {} — {details}", if pass { "PASS" } else { "FAIL" });
}

fn counterexample() -> TwoQubitState {
    Preset::JacobsCounterexample.build().unwrap()
}

fn dephased() -> TwoQubitState {
    Preset::Dephased { beta: 0.5, delta: 0.01 }.build().unwrap()
}

fn random_axis(rng: &mut CounterRng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.normal(), rng.normal(), rng.normal());
        if v.norm() > 1e-6 {
            return v.scale(1.0 / v.norm());
        }
    }
}

/// Criterion 1: the optimal axis for the counterexample state is
/// (x̂+ẑ)/√2 within 1e-6 up to sign, and the grid argmax agrees with the SVD
/// axis within 1e-4 rad, in under a second.
#[test]
fn criterion_1_optimal_axis_reproduction() {
    let t0 = Instant::now();
    let s = counterexample();
    let axis = select_axis_bob_optimal(&s, DegeneracyPolicy::Error).unwrap();
    let want = Vec3::new(1.0, 0.0, 1.0).scale(1.0 / 2f64.sqrt());
    let axis_err = axis.sub(want).norm().min(axis.add(want).norm());

    let rep = argmax_axis(&s, K, 100_000);
    let elapsed = t0.elapsed().as_secs_f64();

    let pass = axis_err < 1e-6 && rep.axis_angle_discrepancy < 1e-4 && elapsed < 1.0;
    report(
        "1",
        pass,
        &format!(
            "svd axis ({:.7}, {:.7}, {:.7}), |axis - (x+z)/sqrt2| = {axis_err:.2e}, \
             grid/svd angle = {:.2e} rad, {elapsed:.2} s",
            axis.x, axis.y, axis.z, rep.axis_angle_discrepancy
        ),
    );
    assert!(axis_err < 1e-6);
    assert!(rep.axis_angle_discrepancy < 1e-4);
    assert!(elapsed < 1.0, "took {elapsed} s");
}

/// Criterion 2: for the dephased state the weak-measurement rate map peaks
/// at zenith pi/2 (within one grid cell) while the projective expected Bob
/// purity peaks on the z axis at exactly 1 — the weak-vs-projective
/// contrast — at 181x361 in under 5 s.
#[test]
fn criterion_2_rate_map_vs_projective() {
    let t0 = Instant::now();
    let s = dephased();
    let map = rate_map(&s, K, 181, 361).unwrap();
    let (iz, _, _) = map.max_rate_b_cell();
    let cell = std::f64::consts::PI / 180.0;
    let zenith_err = (map.zeniths[iz] - std::f64::consts::PI / 2.0).abs();

    let proj = projection_map(&s, K, 181, 361).unwrap();
    let (pz, _, pval) = proj.argmax_projective();
    let elapsed = t0.elapsed().as_secs_f64();

    let pass = zenith_err <= cell + 1e-12 && pz == 0 && (pval - 1.0).abs() <= 1e-12 && elapsed < 5.0;
    report(
        "2",
        pass,
        &format!(
            "weak max at zenith {:.4} rad (pi/2 within {:.1e}), projective max on z with \
             expected purity {pval:.15}, {elapsed:.2} s",
            map.zeniths[iz], zenith_err
        ),
    );
    assert!(zenith_err <= cell + 1e-12);
    assert_eq!(pz, 0, "projective argmax zenith index");
    assert!((pval - 1.0).abs() <= 1e-12);
    assert!(elapsed < 5.0, "took {elapsed} s");
}

/// Criterion 3: the refined 1e5-point grid oracle reproduces the maximum
/// rate 4k sigma_1^2 within 1e-9 on 200 random states, plus the regression
/// pin for the counterexample's singular value.
#[test]
fn criterion_3_quantitative_rates() {
    let mut rng = CounterRng::new(0xACC3);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let s = random_state(&mut rng);
        let rep = argmax_axis(&s, K, 100_000);
        worst = worst.max((rep.grid.rate - rep.svd_rate).abs());
    }

    // regression: the counterexample's correlation matrix is rank one with
    // sigma_1 = sqrt(2/5) ~ 0.632, not 1/sqrt(5) ~ 0.447: the brute-force
    // grid maximum of |C n| equals sqrt(2/5), reached at (x+z)/sqrt2, giving
    // the rate 4k*(2/5) = 0.16 at k = 0.1
    let svd = svd3(&counterexample().correlation_matrix());
    let sigma_err = (svd.sigma[0] - (2.0f64 / 5.0).sqrt()).abs();
    let rep = argmax_axis(&counterexample(), K, 100_000);
    let rate_err = (rep.grid.rate - 0.16).abs();

    let pass = worst < 1e-9 && sigma_err < 1e-12 && rate_err < 1e-9;
    report(
        "3",
        pass,
        &format!(
            "max |grid - 4k sigma1^2| = {worst:.2e} over 200 states; counterexample sigma_1 = \
             {:.12} = sqrt(2/5) (grid-confirmed; 1/sqrt(5) = {:.12} is not the operative value), \
             rate {:.12}",
            svd.sigma[0],
            1.0 / 5f64.sqrt(),
            rep.grid.rate
        ),
    );
    assert!(worst < 1e-9);
    assert!(
        sigma_err < 1e-12,
        "sigma_1(C) = {} must equal sqrt(2/5) = {}; the value 1/sqrt(5) printed alongside the \
         counterexample matrix is inconsistent with the brute-force grid maximum of |C n|, which \
         this suite treats as authoritative",
        svd.sigma[0],
        (2.0f64 / 5.0).sqrt()
    );
    assert!(rate_err < 1e-9);
}

/// Criterion 4 (known failing): the unbiased-axis strategy from the
/// maximally mixed state must reproduce P_A(t) = 1 - e^{-8kt}/2 with
/// per-trajectory error < 5e-3 and cross-trajectory variance < 1e-6 at
/// k = 0.1, dt = 1e-3, t <= 2, 100 trajectories.
///
/// The closed form is reproduced in the ensemble mean, but the stated
/// per-trajectory bounds are unattainable at dt = 1e-3: each Euler step
/// injects a 4k(dW^2 - dt) fluctuation into the purity (a quadratic
/// functional of the state), giving a variance floor of about
/// 2k dt (1 - e^{-16kt}) ~ 1.9e-4 >> 1e-6 — equivalently a pathwise spread
/// of ~1.4e-2 >> 5e-3. The bounds would hold only for dt <~ 5e-6. See
/// `criterion_4_companion_discretization_floor` for the attainable bounds.
#[test]
fn criterion_4_single_qubit_closed_form() {
    let t0 = Instant::now();
    let dt = 1e-3;
    let cfg = EnsembleConfig {
        initial: TwoQubitState::maximally_mixed(),
        strategy: StrategyConfig::new(Strategy::JacobsAlice),
        params: SimParams { k: K, dt, t_final: 2.0, seed: 0xACC4, allow_large_kdt: false },
        n_traj: 100,
        record_trajectories: false,
        record_every: 1,
        workers: Workers::Auto,
    };
    let out = run_ensemble(&cfg).unwrap();
    let rows = out.rows;

    let mut max_traj_err = 0.0f64;
    for (s, &t) in out.stats.times.iter().enumerate() {
        let closed = 1.0 - 0.5 * (-8.0 * K * t).exp();
        for i in 0..cfg.n_traj {
            max_traj_err = max_traj_err.max((out.purity_a[i * rows + s] - closed).abs());
        }
    }
    let max_var = out.stats.var_pa.iter().cloned().fold(0.0f64, f64::max);
    let elapsed = t0.elapsed().as_secs_f64();

    let pass = max_traj_err < 5e-3 && max_var < 1e-6 && elapsed < 10.0;
    report(
        "4",
        pass,
        &format!(
            "max per-trajectory |P_A - closed| = {max_traj_err:.2e} (bound 5e-3), max var = \
             {max_var:.2e} (bound 1e-6); Gaussian-increment floor is var ~ 2k*dt = {:.1e}, so \
             these bounds need dt <~ 5e-6, contradicting the pinned dt = 1e-3; {elapsed:.2} s",
            2.0 * K * dt
        ),
    );
    assert!(
        max_traj_err < 5e-3,
        "per-trajectory error {max_traj_err:.3e} exceeds 5e-3: purity picks up 4k(dW^2 - dt) \
         per Euler step, a ~sqrt(2k dt) pathwise spread no Gaussian-increment scheme avoids"
    );
    assert!(max_var < 1e-6, "cross-trajectory variance {max_var:.3e} exceeds 1e-6");
    assert!(elapsed < 10.0, "took {elapsed} s");
}

/// Attainable counterpart to criterion 4: the ensemble mean reproduces the
/// closed form and the variance sits at the dW^2 discretization floor,
/// proportional to dt.
#[test]
fn criterion_4_companion_discretization_floor() {
    let dt = 1e-3;
    let cfg = EnsembleConfig {
        initial: TwoQubitState::maximally_mixed(),
        strategy: StrategyConfig::new(Strategy::JacobsAlice),
        params: SimParams { k: K, dt, t_final: 2.0, seed: 0xACC4, allow_large_kdt: false },
        n_traj: 400,
        record_trajectories: false,
        record_every: 1,
        workers: Workers::Auto,
    };
    let out = run_ensemble(&cfg).unwrap();
    let mut max_mean_err = 0.0f64;
    for (s, &t) in out.stats.times.iter().enumerate() {
        let closed = 1.0 - 0.5 * (-8.0 * K * t).exp();
        max_mean_err = max_mean_err.max((out.stats.mean_pa[s] - closed).abs());
    }
    let max_var = out.stats.var_pa.iter().cloned().fold(0.0f64, f64::max);
    let pass = max_mean_err < 5e-3 && max_var < 0.5 * dt;
    report(
        "4 (companion)",
        pass,
        &format!("max |mean P_A - closed| = {max_mean_err:.2e} (< 5e-3), max var = {max_var:.2e} (< 0.5 dt)"),
    );
    assert!(max_mean_err < 5e-3);
    assert!(max_var < 0.5 * dt, "variance {max_var:.3e} above the ~2k dt floor envelope");
}

/// Criterion 5: the simultaneous strategy purifies both qubits with
/// cross-trajectory spread (per-step variance) below 10 dt at every step for
/// dt in {1e-3, 1e-4}, and the spread shrinks proportionally to dt,
/// confirming the noise is discretization-only. 1000 trajectories per dt.
#[test]
fn criterion_5_deterministic_bipartite_purification() {
    let mut max_vars: Vec<(f64, f64, f64)> = Vec::new();
    for &dt in &[1e-3, 1e-4] {
        let cfg = EnsembleConfig {
            initial: dephased(),
            strategy: StrategyConfig::new(Strategy::Simultaneous),
            params: SimParams { k: K, dt, t_final: 1.0, seed: 0xACC5, allow_large_kdt: false },
            n_traj: 1000,
            record_trajectories: false,
            record_every: 1,
            workers: Workers::Auto,
        };
        let out = run_ensemble(&cfg).unwrap();
        let bound = 10.0 * dt;
        let mut max_va = 0.0f64;
        let mut max_vb = 0.0f64;
        for s in 0..out.rows {
            max_va = max_va.max(out.stats.var_pa[s]);
            max_vb = max_vb.max(out.stats.var_pb[s]);
            assert!(
                out.stats.var_pa[s] < bound && out.stats.var_pb[s] < bound,
                "dt = {dt}: step {s} var_pa = {}, var_pb = {} vs bound {bound}",
                out.stats.var_pa[s],
                out.stats.var_pb[s]
            );
        }
        max_vars.push((dt, max_va, max_vb));
    }
    let ratio_a = max_vars[0].1 / max_vars[1].1;
    let ratio_b = max_vars[0].2 / max_vars[1].2;
    let pass = (4.0..=25.0).contains(&ratio_a) && (4.0..=25.0).contains(&ratio_b);
    report(
        "5",
        pass,
        &format!(
            "max var P_A = {:.2e} (dt=1e-3), {:.2e} (dt=1e-4), ratio {ratio_a:.1}; max var P_B = \
             {:.2e}, {:.2e}, ratio {ratio_b:.1}; bounds 10 dt = 1e-2 / 1e-3 hold at every step",
            max_vars[0].1, max_vars[1].1, max_vars[0].2, max_vars[1].2
        ),
    );
    assert!(
        (4.0..=25.0).contains(&ratio_a) && (4.0..=25.0).contains(&ratio_b),
        "variance must shrink ~proportionally to dt (ratios {ratio_a:.2}, {ratio_b:.2})"
    );
}

/// Criterion 6: the coefficient integrator and the dense-matrix integrator
/// stay within 1e-6 of each other (max coefficient) over t = 1 at dt = 1e-4
/// with shared noise, across 100 random state/axis-sequence pairs, in under
/// a minute.
#[test]
fn criterion_6_integrator_oracle_equivalence() {
    let t0 = Instant::now();
    let dt = 1e-4;
    let steps = 10_000usize;
    let mut seed_rng = CounterRng::new(0xACC6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s0 = random_state(&mut seed_rng);
        let mut axes = CounterRng::new(seed_rng.next_u64());
        let mut noise = CounterRng::new(seed_rng.next_u64());
        let mut pauli = s0;
        let mut dense = s0.to_density_matrix();
        for step in 0..steps {
            let axis = random_axis(&mut axes);
            let w = noise.wiener(dt);
            pauli = step_pauli(&pauli, axis, K, dt, w).unwrap();
            dense = step_dense(&dense, axis, K, dt, w).unwrap();
            if step % 1000 == 999 {
                let back = TwoQubitState::from_density_matrix(&dense).unwrap();
                for i in 0..4 {
                    for j in 0..4 {
                        worst = worst.max((back.r[i][j] - pauli.r[i][j]).abs());
                    }
                }
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = worst < 1e-6 && elapsed < 60.0;
    report("6", pass, &format!("max coefficient discrepancy = {worst:.2e} (bound 1e-6), {elapsed:.1} s"));
    assert!(worst < 1e-6);
    assert!(elapsed < 60.0, "took {elapsed} s");
}

/// Criterion 7: Monte-Carlo drift at the published ensemble scale: with
/// N = 10,000 trajectories and k = 0.1, the initial slope of mean P_B under
/// the fixed axis (x̂+ẑ)/√2 from the counterexample state is 0.16 within 3
/// standard errors, in under two minutes.
#[test]
fn criterion_7_monte_carlo_drift() {
    let t0 = Instant::now();
    let dt = 1e-3;
    let n_traj = 10_000;
    let axis = Vec3::new(1.0, 0.0, 1.0).scale(1.0 / 2f64.sqrt());
    let cfg = EnsembleConfig {
        initial: counterexample(),
        strategy: StrategyConfig::new(Strategy::Fixed(axis)),
        params: SimParams { k: K, dt, t_final: 5.0 * dt, seed: 0xACC7, allow_large_kdt: false },
        n_traj,
        record_trajectories: false,
        record_every: 1,
        workers: Workers::Auto,
    };
    let out = run_ensemble(&cfg).unwrap();
    let slope = (out.stats.mean_pb[1] - out.stats.mean_pb[0]) / dt;
    let se = (out.stats.var_pb[1] / n_traj as f64).sqrt() / dt;
    let elapsed = t0.elapsed().as_secs_f64();

    let dev = (slope - 0.16).abs();
    let pass = dev <= 3.0 * se && elapsed < 120.0;
    report(
        "7",
        pass,
        &format!("MC slope = {slope:.5} vs 0.16, |dev| = {dev:.2e} <= 3 SE = {:.2e}, {elapsed:.1} s", 3.0 * se),
    );
    assert!(dev <= 3.0 * se, "slope {slope} deviates from 0.16 by {dev} > 3 SE {}", 3.0 * se);
    assert!(elapsed < 120.0, "took {elapsed} s");
}

/// Criterion 8: exact invariants. r_II stays bit-exactly 1 over 1e6 noisy
/// steps with changing axes; the dense step preserves the trace to 1e-13 per
/// step; rate maps are antipodally symmetric to 1e-12.
#[test]
fn criterion_8_exact_invariants() {
    // (a) r_II bit-exact over 1e6 steps
    let one = 1.0f64.to_bits();
    let mut state = dephased();
    let mut rng = CounterRng::new(0xACC8);
    let mut axes = CounterRng::new(0xACC8 ^ 0xFF);
    let dt = 1e-5;
    let mut r_ii_exact = true;
    for _ in 0..1_000_000 {
        let axis = random_axis(&mut axes);
        state = step_pauli(&state, axis, K, dt, rng.wiener(dt)).unwrap();
        if state.r[0][0].to_bits() != one {
            r_ii_exact = false;
            break;
        }
    }

    // (b) dense trace preserved to 1e-13 per step
    let mut max_trace_step = 0.0f64;
    let mut states_rng = CounterRng::new(0xACC8 ^ 0xAB);
    for _ in 0..5 {
        let mut rho = random_state(&mut states_rng).to_density_matrix();
        let mut prev = rho.trace().re;
        for _ in 0..2000 {
            let axis = random_axis(&mut axes);
            rho = step_dense(&rho, axis, K, 1e-3, rng.wiener(1e-3)).unwrap();
            let tr = rho.trace();
            max_trace_step = max_trace_step.max((tr.re - prev).abs()).max(tr.im.abs());
            prev = tr.re;
        }
    }

    // (c) antipodal symmetry of both rate fields, recomputed pointwise
    let mut max_antipodal = 0.0f64;
    let mut states = vec![dephased(), counterexample()];
    states.push(random_state(&mut states_rng));
    states.push(random_state(&mut states_rng));
    for s in &states {
        let map = rate_map(s, K, 61, 120).unwrap();
        for (iz, &phi) in map.zeniths.iter().enumerate() {
            for (ia, &theta) in map.azimuths.iter().enumerate() {
                let n = Vec3::from_spherical(phi, theta).neg();
                let rb = rate_bob(s, n.scale(1.0 / n.norm()), K).drift;
                max_antipodal = max_antipodal.max((map.rate_b[iz][ia] - rb).abs());
                let ra = biparity::strategy::rate_alice(s, n.scale(1.0 / n.norm()), K).drift;
                max_antipodal = max_antipodal.max((map.rate_a[iz][ia] - ra).abs());
            }
        }
    }

    let pass = r_ii_exact && max_trace_step < 1e-13 && max_antipodal < 1e-12;
    report(
        "8",
        pass,
        &format!(
            "r_II bit-exact over 1e6 steps: {r_ii_exact}; max per-step trace drift = \
             {max_trace_step:.2e} (bound 1e-13); max antipodal asymmetry = {max_antipodal:.2e} \
             (bound 1e-12)"
        ),
    );
    assert!(r_ii_exact);
    assert!(max_trace_step < 1e-13);
    assert!(max_antipodal < 1e-12);
}
