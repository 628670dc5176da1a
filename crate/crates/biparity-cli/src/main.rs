//! Command-line front end: build and inspect states, scan purification
//! rates over measurement-axis orientations, run trajectory ensembles,
//! compare feedback strategies, and contrast projective with weak
//! measurement.
//!
//! Option precedence is command line > config file > defaults; the config
//! file is flat `key = value` text with `#` comments. Every command with a
//! fixed seed and fixed inputs is byte-reproducible. Exit codes: 0 success,
//! 1 I/O, 2 validation, 3 numerical guard.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use biparity::ensemble::{
    determinism_report, run_ensemble, EnsembleConfig, EnsembleOutput, EnsembleReport, Workers,
};
use biparity::pauli::{Party, Preset, Subsystem, TwoQubitState};
use biparity::scan::{argmax_axis, projection_map, rate_map, RateField};
use biparity::sme::SimParams;
use biparity::strategy::{Strategy, StrategyConfig};
use biparity::svd3::svd3;
use biparity::vec3::Vec3;
use biparity::Error as LibError;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn io(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_IO, message: msg.into() }
    }
    fn validation(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_VALIDATION, message: msg.into() }
    }
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        let code = match &e {
            LibError::Validation(_) | LibError::Degeneracy(_) => EXIT_VALIDATION,
            LibError::Guard(_) => EXIT_GUARD,
            LibError::Io(_) | LibError::Json(_) => EXIT_IO,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "biparity", version, about = "Two-qubit weak measurement and feedback control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a state from a preset or file, print its report, optionally save it
    State(StateArgs),
    /// Purification-rate map over all measurement-axis orientations
    Scan(ScanArgs),
    /// Run an ensemble of conditioned trajectories under one strategy
    Simulate(SimulateArgs),
    /// Run several strategies from the same state with a shared seed
    Compare(CompareArgs),
    /// Projective-measurement expected purity vs weak-measurement rate
    Project(ProjectArgs),
}

/// Flags shared by every command that needs an input state.
#[derive(Args, Debug, Clone)]
struct StateSource {
    /// Preset name: bell | dephased | jacobs_counterexample | product | maximally_mixed
    #[arg(long)]
    preset: Option<String>,
    /// Load the state from a JSON file {"r": [[...]]} instead
    #[arg(long)]
    file: Option<PathBuf>,
    /// beta for bell/dephased presets
    #[arg(long)]
    beta: Option<f64>,
    /// delta for the dephased preset
    #[arg(long)]
    delta: Option<f64>,
    /// Alice Bloch vector x,y,z for the product preset
    #[arg(long)]
    alice_bloch: Option<String>,
    /// Bob Bloch vector x,y,z for the product preset
    #[arg(long)]
    bob_bloch: Option<String>,
}

#[derive(Args, Debug)]
struct StateArgs {
    #[command(flatten)]
    source: StateSource,
    /// Write the state as JSON
    #[arg(long)]
    out: Option<PathBuf>,
    /// Positivity tolerance for validation
    #[arg(long)]
    pos_tol: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    source: StateSource,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    zenith_count: Option<usize>,
    #[arg(long)]
    azimuth_count: Option<usize>,
    /// Fibonacci-sphere points for the grid argmax
    #[arg(long)]
    grid_points: Option<usize>,
    /// Rate-map CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional SVG heatmap of the Bob rate
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: StateSource,
    /// fixed:<x>,<y>,<z> | along_bloch | jacobs | bob_opt | bob_det | simultaneous
    #[arg(long)]
    strategy: Option<String>,
    /// Fixed-axis strategy given as zenith,azimuth angles (radians, or e.g. 45deg)
    #[arg(long)]
    fixed_axis_angles: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Proceed past the k*dt stability guard
    #[arg(long)]
    allow_large_kdt: bool,
    /// Also print the per-party determinism report
    #[arg(long)]
    determinism: bool,
    /// Write full per-trajectory records as traj_<i>.csv into this directory
    #[arg(long)]
    record_dir: Option<PathBuf>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    source: StateSource,
    /// Comma-separated strategy list
    #[arg(long)]
    strategies: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    n_traj: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    allow_large_kdt: bool,
    /// Bob-purity target for the time-to-target summary
    #[arg(long)]
    target_purity: Option<f64>,
    /// Per-strategy stats written to <out_prefix>.<strategy>.csv
    #[arg(long)]
    out_prefix: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    #[command(flatten)]
    source: StateSource,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    zenith_count: Option<usize>,
    #[arg(long)]
    azimuth_count: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::State(args) => cmd_state(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Project(args) => cmd_project(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

// ---------------------------------------------------------------------------
// config file handling

/// Flat `key = value` config file; later assignments win within the file,
/// command-line flags win over the file.
struct FileConfig(HashMap<String, String>);

const KNOWN_KEYS: &[&str] = &[
    "preset", "file", "beta", "delta", "alice_bloch", "bob_bloch", "strategy", "strategies",
    "fixed_axis_angles", "k", "dt", "t_final", "n_traj", "seed", "record_every", "workers",
    "allow_large_kdt", "target_purity", "zenith_count", "azimuth_count", "grid_points",
    "pos_tol", "out", "out_prefix", "svg", "format",
];

impl FileConfig {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("config {}: {e}", path.display())))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::validation(format!(
                        "config {} line {}: expected key = value",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                let key = key.trim().to_string();
                if !KNOWN_KEYS.contains(&key.as_str()) {
                    return Err(CliError::validation(format!(
                        "config {} line {}: unknown key `{key}`",
                        path.display(),
                        lineno + 1
                    )));
                }
                map.insert(key, value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(text) => text.parse::<T>().map(Some).map_err(|_| {
                CliError::validation(format!("config key `{key}`: cannot parse `{text}`"))
            }),
        }
    }
}

fn pick<T: FromStr>(cli: Option<T>, file: &FileConfig, key: &str, default: T) -> CliResult<T> {
    Ok(cli.or(file.get(key)?).unwrap_or(default))
}

fn pick_opt<T: FromStr>(cli: Option<T>, file: &FileConfig, key: &str) -> CliResult<Option<T>> {
    Ok(cli.or(file.get(key)?))
}

/// Angle in radians; a `deg` suffix converts from degrees.
fn parse_angle(text: &str) -> CliResult<f64> {
    let t = text.trim();
    let (num, factor) = match t.strip_suffix("deg") {
        Some(inner) => (inner.trim(), std::f64::consts::PI / 180.0),
        None => (t, 1.0),
    };
    num.parse::<f64>()
        .map(|v| v * factor)
        .map_err(|_| CliError::validation(format!("cannot parse angle `{text}`")))
}

fn parse_vec3(text: &str) -> CliResult<Vec3> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::validation(format!("expected x,y,z, got `{text}`")));
    }
    let mut v = [0.0; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<f64>().map_err(|_| {
            CliError::validation(format!("cannot parse vector component `{part}`"))
        })?;
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

/// Resolves the input state from a preset name (+ params) or a state file.
fn resolve_state(source: &StateSource, file_cfg: &FileConfig) -> CliResult<TwoQubitState> {
    let preset = pick_opt(source.preset.clone(), file_cfg, "preset")?;
    let state_file = pick_opt(source.file.clone(), file_cfg, "file")?;
    match (preset, state_file) {
        (Some(_), Some(_)) => {
            Err(CliError::validation("give either --preset or --file, not both".to_string()))
        }
        (None, None) => Err(CliError::validation(
            "an input state is required: --preset <name> or --file <path>".to_string(),
        )),
        (Some(name), None) => {
            let beta = pick_opt(source.beta, file_cfg, "beta")?;
            let delta = pick_opt(source.delta, file_cfg, "delta")?;
            let preset = match name.as_str() {
                "bell" => Preset::Bell {
                    beta: beta.ok_or_else(|| CliError::validation("bell needs --beta"))?,
                },
                "dephased" => Preset::Dephased {
                    beta: beta.ok_or_else(|| CliError::validation("dephased needs --beta"))?,
                    delta: delta.ok_or_else(|| CliError::validation("dephased needs --delta"))?,
                },
                "jacobs_counterexample" => Preset::JacobsCounterexample,
                "maximally_mixed" => Preset::MaximallyMixed,
                "product" => {
                    let alice = pick_opt(source.alice_bloch.clone(), file_cfg, "alice_bloch")?
                        .ok_or_else(|| CliError::validation("product needs --alice-bloch"))?;
                    let bob = pick_opt(source.bob_bloch.clone(), file_cfg, "bob_bloch")?
                        .ok_or_else(|| CliError::validation("product needs --bob-bloch"))?;
                    Preset::Product { alice: parse_vec3(&alice)?, bob: parse_vec3(&bob)? }
                }
                other => {
                    return Err(CliError::validation(format!(
                        "unknown preset `{other}` (bell | dephased | jacobs_counterexample | product | maximally_mixed)"
                    )))
                }
            };
            Ok(preset.build()?)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            let state = TwoQubitState::from_json(&text)?;
            state.ensure_valid()?;
            Ok(state)
        }
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::io(format!("stdout: {e}")))
        }
    }
}

fn workers_from(cli: Option<usize>, file_cfg: &FileConfig) -> CliResult<Workers> {
    // BIPARITY_WORKERS overrides flags and config
    if let Ok(text) = std::env::var("BIPARITY_WORKERS") {
        let n: usize = text
            .parse()
            .map_err(|_| CliError::validation(format!("BIPARITY_WORKERS: cannot parse `{text}`")))?;
        return Ok(Workers::Fixed(n));
    }
    Ok(match pick_opt(cli, file_cfg, "workers")? {
        Some(n) => Workers::Fixed(n),
        None => Workers::Auto,
    })
}

// ---------------------------------------------------------------------------
// state

fn cmd_state(args: StateArgs) -> CliResult<()> {
    let file_cfg = FileConfig::load(args.config.as_deref())?;
    let pos_tol = pick(args.pos_tol, &file_cfg, "pos_tol", biparity::pauli::POS_TOL)?;

    // a state file is loaded without pre-validation so the report can show
    // exactly which invariant fails before the nonzero exit
    let preset = pick_opt(args.source.preset.clone(), &file_cfg, "preset")?;
    let state = if preset.is_some() {
        resolve_state(&args.source, &file_cfg)?
    } else {
        let path = pick_opt(args.source.file.clone(), &file_cfg, "file")?.ok_or_else(|| {
            CliError::validation(
                "an input state is required: --preset <name> or --file <path>".to_string(),
            )
        })?;
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        TwoQubitState::from_json(&text)?
    };

    let mut report = String::new();
    let names = ["I", "X", "Y", "Z"];
    writeln!(report, "coefficients r_ij (rows: Alice I X Y Z; columns: Bob I X Y Z)").unwrap();
    for (name, row) in names.iter().zip(&state.r) {
        write!(report, "  {name} ").unwrap();
        for v in row {
            write!(report, " {v:>12.9}").unwrap();
        }
        writeln!(report).unwrap();
    }
    let ra = state.reduced_bloch(Party::Alice);
    let rb = state.reduced_bloch(Party::Bob);
    writeln!(report, "alice bloch   ({:.9}, {:.9}, {:.9})  |r| = {:.9}", ra.x, ra.y, ra.z, ra.norm())
        .unwrap();
    writeln!(report, "bob bloch     ({:.9}, {:.9}, {:.9})  |r| = {:.9}", rb.x, rb.y, rb.z, rb.norm())
        .unwrap();
    writeln!(
        report,
        "purity        alice {:.9}  bob {:.9}  joint {:.9}",
        state.purity(Subsystem::Alice),
        state.purity(Subsystem::Bob),
        state.purity(Subsystem::Joint)
    )
    .unwrap();
    let c = state.correlation_matrix();
    writeln!(report, "correlation C (rows: Bob X Y Z; columns: Alice X Y Z)").unwrap();
    for r in 0..3 {
        writeln!(report, "    {:>12.9} {:>12.9} {:>12.9}", c.0[r][0], c.0[r][1], c.0[r][2]).unwrap();
    }
    let svd = svd3(&c);
    writeln!(report, "singular values ({:.9}, {:.9}, {:.9})", svd.sigma[0], svd.sigma[1], svd.sigma[2])
        .unwrap();
    writeln!(
        report,
        "v1 (fastest axis for Bob) ({:.9}, {:.9}, {:.9})",
        svd.v[0].x, svd.v[0].y, svd.v[0].z
    )
    .unwrap();
    if c.frobenius_norm() < 1e-12 {
        writeln!(report, "note: zero correlation matrix (product state); Bob cannot be purified")
            .unwrap();
    }

    let violations = state.validate(pos_tol);
    if violations.is_empty() {
        writeln!(report, "validation: ok (pos_tol = {pos_tol:e})").unwrap();
    } else {
        writeln!(report, "validation: INVALID (pos_tol = {pos_tol:e})").unwrap();
        for v in &violations {
            writeln!(report, "  violated: {v}").unwrap();
        }
    }
    print!("{report}");

    if let Some(out) = pick_opt(args.out, &file_cfg, "out")? {
        fs::write(&out, state.to_json())
            .map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
    }
    if !violations.is_empty() {
        return Err(CliError::validation(violations.join("; ")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scan

fn cmd_scan(args: ScanArgs) -> CliResult<()> {
    let file_cfg = FileConfig::load(args.config.as_deref())?;
    let state = resolve_state(&args.source, &file_cfg)?;
    let k = pick(args.k, &file_cfg, "k", 0.1)?;
    let zenith_count = pick(args.zenith_count, &file_cfg, "zenith_count", 181)?;
    let azimuth_count = pick(args.azimuth_count, &file_cfg, "azimuth_count", 360)?;
    let grid_points = pick(args.grid_points, &file_cfg, "grid_points", 100_000)?;

    let map = rate_map(&state, k, zenith_count, azimuth_count)?;
    let mut csv = Vec::new();
    map.write_csv(&mut csv)?;
    let out = pick_opt(args.out, &file_cfg, "out")?;
    write_output(out.as_deref(), &csv)?;

    if let Some(svg_path) = pick_opt(args.svg, &file_cfg, "svg")? {
        let mut svg = Vec::new();
        map.write_svg(&mut svg, RateField::Bob)?;
        fs::write(&svg_path, svg)
            .map_err(|e| CliError::io(format!("{}: {e}", svg_path.display())))?;
    }

    let rep = argmax_axis(&state, k, grid_points);
    let (iz, ia, cell_rate) = map.max_rate_b_cell();
    eprintln!(
        "argmax (grid+refine): axis ({:.7}, {:.7}, {:.7}) rate {:.9}{}",
        rep.grid.axis.x,
        rep.grid.axis.y,
        rep.grid.axis.z,
        rep.grid.rate,
        if rep.grid.degenerate { " [degenerate maximum]" } else { "" }
    );
    eprintln!(
        "argmax (svd):         axis ({:.7}, {:.7}, {:.7}) rate {:.9}",
        rep.svd_axis.x, rep.svd_axis.y, rep.svd_axis.z, rep.svd_rate
    );
    eprintln!(
        "discrepancy: rate {:.3e} (relative), axis {:.3e} rad; best map cell zenith {:.6} azimuth {:.6} rate {:.9}",
        rep.rate_rel_discrepancy,
        rep.axis_angle_discrepancy,
        map.zeniths[iz],
        map.azimuths[ia],
        cell_rate
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate

struct EnsembleArgs {
    strategy: Option<String>,
    fixed_axis_angles: Option<String>,
    k: Option<f64>,
    dt: Option<f64>,
    t_final: Option<f64>,
    n_traj: Option<usize>,
    seed: Option<u64>,
    record_every: Option<usize>,
    workers: Option<usize>,
    allow_large_kdt: bool,
}

fn ensemble_config_from(
    source: &StateSource,
    args: EnsembleArgs,
    file_cfg: &FileConfig,
) -> CliResult<EnsembleConfig> {
    let initial = resolve_state(source, file_cfg)?;
    let strategy = match pick_opt(args.fixed_axis_angles, file_cfg, "fixed_axis_angles")? {
        Some(angles) => {
            let parts: Vec<&str> = angles.split(',').collect();
            if parts.len() != 2 {
                return Err(CliError::validation(format!(
                    "fixed-axis angles need zenith,azimuth, got `{angles}`"
                )));
            }
            let phi = parse_angle(parts[0])?;
            let theta = parse_angle(parts[1])?;
            Strategy::Fixed(Vec3::from_spherical(phi, theta))
        }
        None => {
            let text = pick(args.strategy, file_cfg, "strategy", "bob_opt".to_string())?;
            Strategy::from_str(&text)?
        }
    };
    let allow = args.allow_large_kdt || file_cfg.get::<bool>("allow_large_kdt")?.unwrap_or(false);
    Ok(EnsembleConfig {
        initial,
        strategy: StrategyConfig::new(strategy),
        params: SimParams {
            k: pick(args.k, file_cfg, "k", 0.1)?,
            dt: pick(args.dt, file_cfg, "dt", 1e-3)?,
            t_final: pick(args.t_final, file_cfg, "t_final", 1.0)?,
            seed: pick(args.seed, file_cfg, "seed", 1)?,
            allow_large_kdt: allow,
        },
        n_traj: pick(args.n_traj, file_cfg, "n_traj", 100)?,
        record_trajectories: false,
        record_every: pick(args.record_every, file_cfg, "record_every", 1)?,
        workers: workers_from(args.workers, file_cfg)?,
    })
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let file_cfg = FileConfig::load(args.config.as_deref())?;
    let mut cfg = ensemble_config_from(
        &args.source,
        EnsembleArgs {
            strategy: args.strategy,
            fixed_axis_angles: args.fixed_axis_angles,
            k: args.k,
            dt: args.dt,
            t_final: args.t_final,
            n_traj: args.n_traj,
            seed: args.seed,
            record_every: args.record_every,
            workers: args.workers,
            allow_large_kdt: args.allow_large_kdt,
        },
        &file_cfg,
    )?;
    cfg.record_trajectories = args.record_dir.is_some();
    if cfg.params.allow_large_kdt && cfg.params.k * cfg.params.dt > biparity::sme::KDT_GUARD {
        eprintln!(
            "warning: k*dt = {} exceeds {}; Euler drift error per step grows accordingly",
            cfg.params.k * cfg.params.dt,
            biparity::sme::KDT_GUARD
        );
    }
    let output = run_ensemble(&cfg)?;

    if let Some(dir) = &args.record_dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
        for (i, rec) in output.records.as_deref().unwrap_or(&[]).iter().enumerate() {
            let mut bytes = Vec::new();
            rec.write_csv(&mut bytes)?;
            let path = dir.join(format!("traj_{i:06}.csv"));
            fs::write(&path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        }
    }

    let format = pick(args.format, &file_cfg, "format", "csv".to_string())?;
    let bytes = render_stats(&cfg, &output, &format)?;
    let out = pick_opt(args.out, &file_cfg, "out")?;
    write_output(out.as_deref(), &bytes)?;

    if args.determinism {
        let rep = determinism_report(&output, &cfg);
        let max_a = rep.spread_a.iter().cloned().fold(0.0f64, f64::max);
        let max_b = rep.spread_b.iter().cloned().fold(0.0f64, f64::max);
        eprintln!(
            "determinism: max spread P_A = {max_a:.3e}, P_B = {max_b:.3e}, tol_det = {:.3e} \
             (10*sqrt(dt)); deterministic: alice {}, bob {}",
            rep.tol_det, rep.deterministic_a, rep.deterministic_b
        );
    }
    Ok(())
}

fn render_stats(cfg: &EnsembleConfig, output: &EnsembleOutput, format: &str) -> CliResult<Vec<u8>> {
    match format {
        "csv" => {
            let mut bytes = Vec::new();
            output.stats.write_csv(&mut bytes)?;
            Ok(bytes)
        }
        "json" => {
            let report = EnsembleReport::new(*cfg, output.stats.clone());
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::validation(format!("json: {e}")))?;
            text.push('\n');
            Ok(text.into_bytes())
        }
        other => Err(CliError::validation(format!("unknown format `{other}` (csv | json)"))),
    }
}

// ---------------------------------------------------------------------------
// compare

fn cmd_compare(args: CompareArgs) -> CliResult<()> {
    let file_cfg = FileConfig::load(args.config.as_deref())?;
    let list = pick(
        args.strategies.clone(),
        &file_cfg,
        "strategies",
        "bob_opt,jacobs,along_bloch".to_string(),
    )?;
    let strategies: Vec<Strategy> = list
        .split(',')
        .map(|t| Strategy::from_str(t).map_err(CliError::from))
        .collect::<CliResult<_>>()?;
    if strategies.len() < 2 {
        return Err(CliError::validation("compare needs at least 2 strategies".to_string()));
    }
    let target = pick(args.target_purity, &file_cfg, "target_purity", 0.9)?;

    let base = ensemble_config_from(
        &args.source,
        EnsembleArgs {
            strategy: None,
            fixed_axis_angles: None,
            k: args.k,
            dt: args.dt,
            t_final: args.t_final,
            n_traj: args.n_traj,
            seed: args.seed,
            record_every: args.record_every,
            workers: args.workers,
            allow_large_kdt: args.allow_large_kdt,
        },
        &file_cfg,
    )?;

    let out_prefix = pick_opt(args.out_prefix, &file_cfg, "out_prefix")?;
    println!(
        "{:<22} {:>12} {:>14} {:>16}",
        "strategy", "slope P_B", "final mean P_B", "t to target"
    );
    for strategy in strategies {
        // shared master seed: every strategy sees identical noise streams
        let mut cfg = base;
        cfg.strategy = StrategyConfig::new(strategy);
        let output = run_ensemble(&cfg)?;
        let st = &output.stats;
        let dt_rec = st.times[1] - st.times[0];
        let slope = (st.mean_pb[1] - st.mean_pb[0]) / dt_rec;
        let final_pb = *st.mean_pb.last().unwrap();
        let ttt_text = match median_time_to_target(&output, target) {
            Some(t) => format!("{t:.4}"),
            None => "not reached".to_string(),
        };
        println!("{:<22} {:>12.6} {:>14.9} {:>16}", strategy.to_string(), slope, final_pb, ttt_text);

        if let Some(prefix) = &out_prefix {
            let mut bytes = Vec::new();
            st.write_csv(&mut bytes)?;
            let path =
                PathBuf::from(format!("{}.{}.csv", prefix.display(), strategy_slug(strategy)));
            fs::write(&path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(())
}

fn strategy_slug(s: Strategy) -> String {
    match s {
        Strategy::Fixed(_) => "fixed".to_string(),
        other => other.to_string(),
    }
}

/// Median (lower) over trajectories of the first recorded time with
/// P_B >= target; None when the median trajectory never reaches it.
fn median_time_to_target(output: &EnsembleOutput, target: f64) -> Option<f64> {
    let rows = output.rows;
    let n = output.purity_b.len() / rows;
    let mut firsts: Vec<Option<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut hit = None;
        for s in 0..rows {
            if output.purity_b[i * rows + s] >= target {
                hit = Some(output.stats.times[s]);
                break;
            }
        }
        firsts.push(hit);
    }
    firsts.sort_by(|a, b| match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(y).unwrap(),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    firsts[(n - 1) / 2]
}

// ---------------------------------------------------------------------------
// project

fn cmd_project(args: ProjectArgs) -> CliResult<()> {
    let file_cfg = FileConfig::load(args.config.as_deref())?;
    let state = resolve_state(&args.source, &file_cfg)?;
    let k = pick(args.k, &file_cfg, "k", 0.1)?;
    let zenith_count = pick(args.zenith_count, &file_cfg, "zenith_count", 181)?;
    let azimuth_count = pick(args.azimuth_count, &file_cfg, "azimuth_count", 360)?;

    let map = projection_map(&state, k, zenith_count, azimuth_count)?;
    let mut csv = Vec::new();
    map.write_csv(&mut csv)?;
    let out = pick_opt(args.out, &file_cfg, "out")?;
    write_output(out.as_deref(), &csv)?;

    let (pz, pa, pv) = map.argmax_projective();
    let (wz, wa, wv) = map.argmax_weak();
    eprintln!(
        "projective argmax: zenith {:.6} azimuth {:.6} expected P_B {:.9}",
        map.zeniths[pz], map.azimuths[pa], pv
    );
    eprintln!(
        "weak-rate argmax:  zenith {:.6} azimuth {:.6} rate {:.9}",
        map.zeniths[wz], map.azimuths[wa], wv
    );
    Ok(())
}
