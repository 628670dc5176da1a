//! Ensembles of independent trajectories with per-step purity statistics.
//!
//! Trajectory i draws its noise from a stream keyed by
//! `trajectory_seed(master_seed, i)`, so the ensemble is reproducible bit for
//! bit regardless of how trajectories are distributed over worker threads:
//! workers only decide *who computes* a trajectory, never what it contains,
//! and aggregation always folds trajectories in index order.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Subsystem, TwoQubitState};
use crate::rng::{trajectory_seed, CounterRng};
use crate::sme::{step_pauli, SimParams, TrajectoryRecord};
use crate::strategy::StrategyConfig;

/// Positivity tolerance used when flagging integrator output; looser than
/// the validation default because discretization noise produces transient
/// excursions that projection would bias.
pub const FLAG_POS_TOL: f64 = 1e-6;

/// Full eigenvalue checks per trajectory are capped at this many recorded
/// points; cheap coefficient-bound checks still run at every recorded point.
const EIGEN_CHECKS_PER_TRAJECTORY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workers {
    Auto,
    Fixed(usize),
}

impl Workers {
    fn resolve(self) -> usize {
        match self {
            Workers::Auto => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            Workers::Fixed(n) => n.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub initial: TwoQubitState,
    pub strategy: StrategyConfig,
    pub params: SimParams,
    pub n_traj: usize,
    /// Keep full per-trajectory records (states, axes, noise) in memory.
    pub record_trajectories: bool,
    /// Statistics are recorded every `record_every` integration steps
    /// (plus the final step).
    pub record_every: usize,
    pub workers: Workers,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.initial.ensure_valid()?;
        if self.n_traj == 0 {
            return Err(Error::Validation("n_traj must be >= 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Validation("record_every must be >= 1".into()));
        }
        if let Workers::Fixed(0) = self.workers {
            return Err(Error::Validation("worker_count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-recorded-step statistics of P_A and P_B across the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean_pa: Vec<f64>,
    pub var_pa: Vec<f64>,
    pub mean_pb: Vec<f64>,
    pub var_pb: Vec<f64>,
    pub q05_pa: Vec<f64>,
    pub q50_pa: Vec<f64>,
    pub q95_pa: Vec<f64>,
    pub q05_pb: Vec<f64>,
    pub q50_pb: Vec<f64>,
    pub q95_pb: Vec<f64>,
    pub flagged_positivity_count: u64,
}

impl EnsembleStats {
    /// CSV columns: t, mean/var/quantiles of P_A, then of P_B.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "t,mean_pa,var_pa,q05_pa,q50_pa,q95_pa,mean_pb,var_pb,q05_pb,q50_pb,q95_pb"
        )?;
        for s in 0..self.times.len() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                self.times[s],
                self.mean_pa[s],
                self.var_pa[s],
                self.q05_pa[s],
                self.q50_pa[s],
                self.q95_pa[s],
                self.mean_pb[s],
                self.var_pb[s],
                self.q05_pb[s],
                self.q50_pb[s],
                self.q95_pb[s],
            )?;
        }
        Ok(())
    }
}

/// JSON envelope: schema version, effective config, statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub schema_version: u32,
    pub config: EnsembleConfig,
    pub stats: EnsembleStats,
}

pub const SCHEMA_VERSION: u32 = 1;

impl EnsembleReport {
    pub fn new(config: EnsembleConfig, stats: EnsembleStats) -> Self {
        EnsembleReport { schema_version: SCHEMA_VERSION, config, stats }
    }
}

/// Everything `run_ensemble` produces: the serializable statistics plus the
/// in-memory purity curves (trajectory-major) behind them.
#[derive(Debug, Clone)]
pub struct EnsembleOutput {
    pub stats: EnsembleStats,
    /// purity_a[i * rows + s] = P_A of trajectory i at recorded step s
    pub purity_a: Vec<f64>,
    pub purity_b: Vec<f64>,
    pub rows: usize,
    pub records: Option<Vec<TrajectoryRecord>>,
}

struct TrajOut {
    pa: Vec<f64>,
    pb: Vec<f64>,
    flagged: bool,
    record: Option<TrajectoryRecord>,
}

/// Simulates one trajectory, recording purities (and optionally everything)
/// at the given step indices, and flagging positivity violations.
fn run_one(
    config: &EnsembleConfig,
    recorded: &[usize],
    eigen_checks: &[usize],
    traj_index: usize,
) -> Result<TrajOut> {
    let params = &config.params;
    let steps = params.steps();
    let mut rng = CounterRng::new(trajectory_seed(params.seed, traj_index as u64));
    let mut state = config.initial;

    let mut pa = Vec::with_capacity(recorded.len());
    let mut pb = Vec::with_capacity(recorded.len());
    let mut flagged = false;
    let mut record = config.record_trajectories.then(|| TrajectoryRecord {
        times: Vec::with_capacity(recorded.len()),
        states: Vec::with_capacity(recorded.len()),
        axes: Vec::with_capacity(recorded.len()),
        noises: Vec::with_capacity(recorded.len()),
        purities_a: Vec::with_capacity(recorded.len()),
        purities_b: Vec::with_capacity(recorded.len()),
    });

    let mut next_record = 0usize;
    let mut next_eigen = 0usize;
    for s in 0..=steps {
        let at_record = next_record < recorded.len() && recorded[next_record] == s;
        let axis = config
            .strategy
            .select_axis(&state)
            .map_err(|e| Error::Degeneracy(format!("trajectory {traj_index}, step {s}: {e}")))?;
        let dw = if s < steps { rng.wiener(params.dt) } else { 0.0 };

        if at_record {
            next_record += 1;
            pa.push(state.purity(Subsystem::Alice));
            pb.push(state.purity(Subsystem::Bob));
            if !flagged {
                flagged = cheap_positivity_violation(&state);
            }
            if !flagged && next_eigen < eigen_checks.len() && eigen_checks[next_eigen] <= s {
                next_eigen += 1;
                let eig = state.to_density_matrix().eigenvalues_hermitian();
                flagged = eig[0] < -FLAG_POS_TOL;
            }
            if let Some(rec) = record.as_mut() {
                rec.times.push(s as f64 * params.dt);
                rec.states.push(state);
                rec.axes.push(axis);
                rec.noises.push(dw);
                rec.purities_a.push(*pa.last().unwrap());
                rec.purities_b.push(*pb.last().unwrap());
            }
        }

        if s < steps {
            state = step_pauli(&state, axis, params.k, params.dt, dw)
                .map_err(|e| Error::Validation(format!("trajectory {traj_index}, step {s}: {e}")))?;
        }
    }
    Ok(TrajOut { pa, pb, flagged, record })
}

fn cheap_positivity_violation(state: &TwoQubitState) -> bool {
    for row in &state.r {
        for v in row {
            if !v.is_finite() || v.abs() > 1.0 + FLAG_POS_TOL {
                return true;
            }
        }
    }
    state.purity(Subsystem::Joint) > 1.0 + 4.0 * FLAG_POS_TOL
}

/// Runs `n_traj` independent trajectories and aggregates per-step statistics.
///
/// The result is bit-identical for a fixed config regardless of worker count
/// or scheduling: per-trajectory streams are pure functions of
/// (seed, index), and the mean/variance accumulators fold trajectories in
/// index order.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleOutput> {
    config.validate()?;
    let steps = config.params.steps();

    let mut recorded: Vec<usize> = (0..=steps).step_by(config.record_every).collect();
    if *recorded.last().unwrap() != steps {
        recorded.push(steps);
    }
    // spread the expensive eigenvalue checks evenly over the recorded points
    let n_eigen = recorded.len().min(EIGEN_CHECKS_PER_TRAJECTORY);
    let mut eigen_checks: Vec<usize> = (0..n_eigen)
        .map(|j| recorded[j * (recorded.len() - 1) / (n_eigen - 1).max(1)])
        .collect();
    eigen_checks.dedup();

    let workers = config.workers.resolve().min(config.n_traj).max(1);
    let mut outs: Vec<Result<TrajOut>> = Vec::with_capacity(config.n_traj);

    if workers == 1 {
        for i in 0..config.n_traj {
            outs.push(run_one(config, &recorded, &eigen_checks, i));
        }
    } else {
        let chunk = config.n_traj.div_ceil(workers);
        let mut results: Vec<Vec<Result<TrajOut>>> = Vec::new();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(config.n_traj);
                if lo >= hi {
                    break;
                }
                let recorded = &recorded;
                let eigen_checks = &eigen_checks;
                handles.push(scope.spawn(move || {
                    (lo..hi)
                        .map(|i| run_one(config, recorded, eigen_checks, i))
                        .collect::<Vec<_>>()
                }));
            }
            for h in handles {
                results.push(h.join().expect("ensemble worker panicked"));
            }
        });
        for chunk_out in results {
            outs.extend(chunk_out);
        }
    }

    let rows = recorded.len();
    let n = config.n_traj;
    let mut purity_a = vec![0.0; n * rows];
    let mut purity_b = vec![0.0; n * rows];
    let mut records = config.record_trajectories.then(Vec::new);
    let mut flagged_count = 0u64;

    // streaming one-pass mean/variance per recorded step, trajectory order
    let mut mean_pa = vec![0.0; rows];
    let mut m2_pa = vec![0.0; rows];
    let mut mean_pb = vec![0.0; rows];
    let mut m2_pb = vec![0.0; rows];

    for (i, out) in outs.into_iter().enumerate() {
        let out = out?;
        if out.flagged {
            flagged_count += 1;
        }
        let count = (i + 1) as f64;
        for s in 0..rows {
            let xa = out.pa[s];
            let d = xa - mean_pa[s];
            mean_pa[s] += d / count;
            m2_pa[s] += d * (xa - mean_pa[s]);

            let xb = out.pb[s];
            let d = xb - mean_pb[s];
            mean_pb[s] += d / count;
            m2_pb[s] += d * (xb - mean_pb[s]);

            purity_a[i * rows + s] = xa;
            purity_b[i * rows + s] = xb;
        }
        if let (Some(recs), Some(rec)) = (records.as_mut(), out.record) {
            recs.push(rec);
        }
    }

    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let var_pa: Vec<f64> = m2_pa.iter().map(|m2| (m2 / denom).max(0.0)).collect();
    let var_pb: Vec<f64> = m2_pb.iter().map(|m2| (m2 / denom).max(0.0)).collect();

    let times: Vec<f64> = recorded.iter().map(|&s| s as f64 * config.params.dt).collect();
    let (q05_pa, q50_pa, q95_pa) = per_step_quantiles(&purity_a, n, rows);
    let (q05_pb, q50_pb, q95_pb) = per_step_quantiles(&purity_b, n, rows);

    Ok(EnsembleOutput {
        stats: EnsembleStats {
            times,
            mean_pa,
            var_pa,
            mean_pb,
            var_pb,
            q05_pa,
            q50_pa,
            q95_pa,
            q05_pb,
            q50_pb,
            q95_pb,
            flagged_positivity_count: flagged_count,
        },
        purity_a,
        purity_b,
        rows,
        records,
    })
}

/// Exact per-step 5/50/95% quantiles with linear interpolation between order
/// statistics.
fn per_step_quantiles(values: &[f64], n: usize, rows: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut q05 = Vec::with_capacity(rows);
    let mut q50 = Vec::with_capacity(rows);
    let mut q95 = Vec::with_capacity(rows);
    let mut scratch = vec![0.0; n];
    for s in 0..rows {
        for i in 0..n {
            scratch[i] = values[i * rows + s];
        }
        scratch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        q05.push(quantile_sorted(&scratch, 0.05));
        q50.push(quantile_sorted(&scratch, 0.50));
        q95.push(quantile_sorted(&scratch, 0.95));
    }
    (q05, q50, q95)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = q * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Cross-trajectory spread of the purity curves: per recorded step, the
/// maximum |P − mean P| for each party.
///
/// A strategy counts as deterministic for a party when its spread stays
/// below `tol_det = 10·√dt`, the scale of the dW² fluctuations an
/// Euler–Maruyama step injects into quadratic functionals of the state.
#[derive(Debug, Clone, Serialize)]
pub struct DeterminismReport {
    pub times: Vec<f64>,
    pub spread_a: Vec<f64>,
    pub spread_b: Vec<f64>,
    pub tol_det: f64,
    pub deterministic_a: bool,
    pub deterministic_b: bool,
}

pub fn determinism_report(output: &EnsembleOutput, config: &EnsembleConfig) -> DeterminismReport {
    let rows = output.rows;
    let n = output.purity_a.len().checked_div(rows).unwrap_or(0);
    let mut spread_a = vec![0.0; rows];
    let mut spread_b = vec![0.0; rows];
    for s in 0..rows {
        for i in 0..n {
            let da = (output.purity_a[i * rows + s] - output.stats.mean_pa[s]).abs();
            let db = (output.purity_b[i * rows + s] - output.stats.mean_pb[s]).abs();
            if da > spread_a[s] {
                spread_a[s] = da;
            }
            if db > spread_b[s] {
                spread_b[s] = db;
            }
        }
    }
    let tol_det = 10.0 * config.params.dt.sqrt();
    let deterministic_a = spread_a.iter().all(|&s| s < tol_det);
    let deterministic_b = spread_b.iter().all(|&s| s < tol_det);
    DeterminismReport {
        times: output.stats.times.clone(),
        spread_a,
        spread_b,
        tol_det,
        deterministic_a,
        deterministic_b,
    }
}
