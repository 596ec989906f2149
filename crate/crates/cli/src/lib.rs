//! Command-line front end for `qptsim`. [`run`] takes the argument list and
//! output streams so the whole tool can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use qptsim_core::circuit::{derive_one_qubit, derive_two_qubit, CircuitElements, SiElements};
use qptsim_core::effective::{bogoliubov, ground_state, normal_effective, superradiant_frame};
use qptsim_core::models::CutoffPolicy;
use qptsim_core::scan::{
    detect_transitions, one_qubit_analytic, rows_to_csv, scan_grid, spectrum, Axis, SpectrumRequest,
};
use qptsim_core::verify::{acceptance_checks, all_checks, run_checks};
use qptsim_core::{Couplings, Error, ErrorKind, FrameSpec, GridSpec, HalfInt, ModelKind, ModelParams, Module, C64};

#[derive(Debug, Parser)]
#[command(name = "qptsim", version, about = "Few-qubit ultrastrong-coupling circuit QED simulator")]
struct Cli {
    /// Worker threads for grid scans and verification (0 = all cores).
    #[arg(long, global = true, env = "QPTSIM_THREADS", default_value_t = 0)]
    threads: usize,
    /// Seed for the randomized checks of `verify`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact spectrum and ground-state observables for one model (JSON).
    Spectrum(SpectrumArgs),
    /// Grid scan over couplings (CSV).
    Scan(ScanArgs),
    /// Closed-form one-qubit effective theory at a coupling point (JSON).
    Effective(EffectiveArgs),
    /// Derived circuit parameters from element values (JSON).
    Circuit(CircuitArgs),
    /// Run the built-in invariant and acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of eigenvalues to report.
    #[arg(long, default_value_t = 10)]
    levels: usize,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also locate transitions along this axis of the scanned rows.
    #[arg(long, value_enum, requires = "report")]
    transitions: Option<AxisArg>,
    /// Where to write the transition report (JSON).
    #[arg(long, requires = "transitions")]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    LambdaX,
    LambdaY,
    Line,
}

#[derive(Debug, Args)]
struct EffectiveArgs {
    /// Normalized x coupling
    #[arg(long, allow_negative_numbers = true)]
    lambda_x: f64,
    /// Normalized y coupling
    #[arg(long, allow_negative_numbers = true)]
    lambda_y: f64,
    /// ω_q/ω_r.
    #[arg(long, allow_negative_numbers = true)]
    ratio: f64,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Topology {
    One,
    Two,
}

#[derive(Debug, Args)]
struct CircuitArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "one")]
    topology: Topology,
    /// The config holds SI element values instead of natural units.
    #[arg(long)]
    si: bool,
    /// Initial harmonic-oscillator basis size for the fluxonium levels.
    #[arg(long, default_value_t = 64)]
    basis: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Only run checks whose name contains this text.
    #[arg(long)]
    filter: Option<String>,
    /// Only the acceptance criteria.
    #[arg(long)]
    acceptance: bool,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Input of `qptsim spectrum`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumConfig {
    model: ModelKind,
    params: ModelParams,
    /// Displacement α as [re, im]; absent means the lab frame.
    #[serde(default)]
    displacement: Option<[f64; 2]>,
    #[serde(default = "default_cutoff")]
    initial_cutoff: usize,
    #[serde(default)]
    block_j: Option<HalfInt>,
}

fn default_cutoff() -> usize {
    16
}

/// Failure of a command: a library error or a CLI-level problem.
#[derive(Debug)]
struct Failure {
    module: String,
    code: String,
    message: String,
    exit: i32,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            module: e.module.to_string(),
            code: e.code.to_string(),
            message: e.message,
            exit: match e.kind {
                ErrorKind::Validation => 1,
                ErrorKind::Numerical => 2,
            },
        }
    }
}

impl Failure {
    fn cli(code: &str, message: impl Into<String>) -> Self {
        Failure {
            module: Module::Cli.to_string(),
            code: code.to_string(),
            message: message.into(),
            exit: 1,
        }
    }
}

/// Runs `qptsim` with `args` (including the program name) and returns the
/// process exit code: 0 on success, 1 for usage and validation errors, 2
/// for numerical failures and failed verification.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = writeln!(stderr, "ERROR cli:usage: missing subcommand");
                let _ = write!(stderr, "{}", e.render());
                return 1;
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let _ = writeln!(stderr, "ERROR cli:usage: {first}");
            let _ = write!(stderr, "{rendered}");
            return 1;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "ERROR cli:threads: {e}");
            return 1;
        }
    };
    let result = pool.install(|| dispatch(&cli)).and_then(|done| {
        for w in &done.warnings {
            let _ = writeln!(stderr, "{w}");
        }
        for (path, text) in &done.outputs {
            emit(path.as_ref(), text, stdout)?;
        }
        Ok(done.code)
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            let message = f.message.replace('\n', " ");
            let _ = writeln!(stderr, "ERROR {}:{}: {message}", f.module, f.code);
            f.exit
        }
    }
}

/// What a command produced: texts for files (or stdout when the path is
/// `None`), warnings for stderr and the exit code.
struct Done {
    code: i32,
    outputs: Vec<(Option<PathBuf>, String)>,
    warnings: Vec<String>,
}

impl Done {
    fn one(out: Option<&PathBuf>, text: String) -> Self {
        Done {
            code: 0,
            outputs: vec![(out.cloned(), text)],
            warnings: Vec::new(),
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Done, Failure> {
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Effective(a) => cmd_effective(a),
        Command::Circuit(a) => cmd_circuit(a),
        Command::Verify(a) => cmd_verify(a, cli.seed),
    }
}

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    if path.as_os_str().is_empty() {
        return Err(Failure::cli("path", "config path is empty"));
    }
    let text = fs::read_to_string(path).map_err(|e| Failure::cli("io", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::cli("config", format!("{}: {e}", path.display())))
}

fn emit(out: Option<&PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) if p.as_os_str().is_empty() => Err(Failure::cli("path", "output path is empty")),
        Some(p) => fs::write(p, text).map_err(|e| Failure::cli("io", format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::cli("io", format!("cannot write to stdout: {e}"))),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Rounds to six significant digits.
fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<Done, Failure> {
    let cfg: SpectrumConfig = read_config(&a.config)?;
    let frame = match cfg.displacement {
        Some([re, im]) => FrameSpec::displaced(C64::new(re, im)),
        None => FrameSpec::lab(),
    };
    let req = SpectrumRequest {
        params: cfg.params,
        kind: cfg.model,
        frame,
        initial_cutoff: cfg.initial_cutoff,
        block_j: cfg.block_j,
        policy: CutoffPolicy::default(),
    };
    let mut r = spectrum(&req)?;
    let k = a.levels.min(r.eigenvalues.len());
    r.eigenvalues.truncate(k);
    r.relative.truncate(k);
    let mut v = serde_json::to_value(&r).map_err(|e| Failure::cli("serialize", e.to_string()))?;
    if let Value::Object(m) = &mut v {
        if let Some(n) = m.remove("n_g") {
            m.insert("n_G".into(), n);
        }
        if let Some(n) = m.remove("n_g_first_excited") {
            m.insert("n_G_first_excited".into(), n);
        }
    }
    Ok(Done::one(a.out.as_ref(), pretty(&v)))
}

fn cmd_scan(a: &ScanArgs) -> Result<Done, Failure> {
    let spec: GridSpec = read_config(&a.config)?;
    let rows = scan_grid(&spec)?;
    let mut done = Done::one(a.out.as_ref(), rows_to_csv(&rows));
    for (i, r) in rows.iter().enumerate() {
        if let Some(e) = &r.error {
            done.warnings.push(format!("WARN row {i} (lambda_x = {}, lambda_y = {}): {e}", r.lambda_x, r.lambda_y));
        }
    }
    if let (Some(axis), Some(path)) = (a.transitions, &a.report) {
        let axis = match axis {
            AxisArg::LambdaX => Axis::LambdaX,
            AxisArg::LambdaY => Axis::LambdaY,
            AxisArg::Line => Axis::Line,
        };
        let report = detect_transitions(&rows, axis)?;
        let v = serde_json::to_value(&report).map_err(|e| Failure::cli("serialize", e.to_string()))?;
        done.outputs.push((Some(path.clone()), pretty(&v)));
    }
    Ok(done)
}

fn cmd_effective(a: &EffectiveArgs) -> Result<Done, Failure> {
    let c = Couplings::new(a.lambda_x, a.lambda_y, a.ratio)?;
    let (phase, gap) = one_qubit_analytic(&c);
    let g = ground_state(&c);
    let q = normal_effective(&c);
    let b = bogoliubov(&q, &c);
    let frame = superradiant_frame(&c).ok();
    let opt = |x: Option<f64>| x.map(sig6).map_or(Value::Null, Value::from);

    let mut m = Map::new();
    m.insert("lambda_x".into(), json!(a.lambda_x));
    m.insert("lambda_y".into(), json!(a.lambda_y));
    m.insert("ratio".into(), json!(a.ratio));
    m.insert("phase".into(), json!(phase.as_str()));
    m.insert("ground_energy".into(), json!(sig6(g.energy)));
    m.insert("n_G".into(), json!(sig6(g.n_g)));
    m.insert("gap".into(), opt(gap));
    m.insert("normal_a".into(), json!(sig6(q.a)));
    m.insert("normal_b".into(), json!(sig6(q.b)));
    m.insert("normal_c0".into(), json!(sig6(q.c0)));
    m.insert("normal_stable".into(), json!(b.stable));
    m.insert("normal_epsilon".into(), opt(b.epsilon));
    m.insert("normal_r".into(), opt(b.r));
    m.insert("eta".into(), json!(b.eta));
    m.insert("alpha_re".into(), opt(frame.as_ref().map(|f| f.alpha.re)));
    m.insert("alpha_im".into(), opt(frame.as_ref().map(|f| f.alpha.im)));
    m.insert("epsilon_tilde".into(), opt(frame.as_ref().map(|f| f.epsilon_tilde)));
    m.insert("r_tilde".into(), opt(frame.as_ref().and_then(|f| f.r_tilde)));
    Ok(Done::one(a.out.as_ref(), pretty(&Value::Object(m))))
}

fn cmd_circuit(a: &CircuitArgs) -> Result<Done, Failure> {
    let (elements, scales) = if a.si {
        let si: SiElements = read_config(&a.config)?;
        let (el, s) = si.to_natural();
        (el, Some(s))
    } else {
        (read_config::<CircuitElements>(&a.config)?, None)
    };
    let derived = match a.topology {
        Topology::One => derive_one_qubit(&elements, a.basis)?,
        Topology::Two => derive_two_qubit(&elements, a.basis)?,
    };
    let mut v = serde_json::to_value(&derived).map_err(|e| Failure::cli("serialize", e.to_string()))?;
    if let (Value::Object(m), Some(s)) = (&mut v, scales) {
        m.insert("unit_capacitance".into(), json!(s.capacitance));
        m.insert("unit_inductance".into(), json!(s.inductance));
        m.insert("unit_time".into(), json!(s.time));
        m.insert("unit_flux".into(), json!(s.flux));
        m.insert("unit_energy".into(), json!(s.energy));
    }
    Ok(Done::one(a.out.as_ref(), pretty(&v)))
}

fn cmd_verify(a: &VerifyArgs, seed: u64) -> Result<Done, Failure> {
    let checks = if a.acceptance { acceptance_checks() } else { all_checks() };
    let report = run_checks(&checks, seed, a.filter.as_deref());
    if report.outcomes.is_empty() {
        return Err(Failure::cli("filter", "no check matches the filter"));
    }
    let mut text = String::new();
    for o in &report.outcomes {
        text.push_str(&format!("{o}\n"));
    }
    text.push_str(&report.summary());
    text.push('\n');
    let mut done = Done::one(a.out.as_ref(), text);
    done.code = if report.all_passed() { 0 } else { 2 };
    Ok(done)
}
