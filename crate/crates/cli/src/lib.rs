//! Front end for the `qtradeoff` binary.
//!
//! Exit codes: 0 when every check passes, 1 when a check is violated, 2 for
//! configuration or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qtradeoff::dilation::{conditional_from_model, dilate, outcome_probability_from_model};
use qtradeoff::json::{density_from_json, instrument_from_json};
use qtradeoff::matcore::isometry_defect;
use qtradeoff::qmeas::{
    conditional_output, effects_of, outcome_probabilities, outcome_probability,
    unconditional_output, unmodified_pure_states, KrausInstrument,
};
use qtradeoff::qstate::{derive_seed, random_density, trace_distance, DensityMatrix, PureState};
use qtradeoff::tradeoff::{infodist_check, saturation_scan, scan_csv, FamilyPoint, TradeoffRecord};

pub mod output;
pub mod verify;

use output::{matrix_json, matrix_text, num, text, vector_json, vector_text};
use verify::{run_suites, text_header, SuiteResult, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run every property suite and report the worst case of each
    Verify,
    /// Emit the weak-measurement saturation scan (`--trials` grid points)
    Curve,
    /// List pure states left unchanged by each outcome of an instrument
    FixedStates,
    /// Build the system+ancilla dilation of an instrument and check it
    Dilate,
    /// Walk through the measure-and-prepare-|+> example
    Demo,
}

#[derive(Debug, Parser)]
#[command(
    name = "qtradeoff",
    version,
    about = "Numerical checks of the information-disturbance tradeoff"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Hilbert-space dimension for random suites
    #[arg(long, global = true, default_value_t = 2)]
    dim: usize,
    /// Random trials per suite, or grid points for `curve`
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Validation tolerance for inputs and checks
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Instrument or density-matrix JSON file
    #[arg(long = "in", global = true, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Write output (for `verify`: the JSON report) to this file
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Embed a timestamp in JSON reports
    #[arg(long, global = true)]
    stamp: bool,
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub stamp: bool,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, String> {
        if cli.trials < 1 {
            return Err("--trials must be at least 1".into());
        }
        if cli.dim < 2 || cli.dim > 16 {
            return Err("--dim must be between 2 and 16".into());
        }
        if !(cli.tol > 0.0 && cli.tol.is_finite()) {
            return Err("--tol must be a positive number".into());
        }
        Ok(Self {
            command: cli.command,
            dim: cli.dim,
            trials: cli.trials,
            seed: cli.seed,
            tol: cli.tol,
            input_path: cli.input,
            output_path: cli.out,
            format: cli.format,
            stamp: cli.stamp,
        })
    }
}

enum Failure {
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_INPUT;
        }
    };
    let result = match cfg.command {
        Command::Verify => cmd_verify(&cfg, stdout),
        Command::Curve => cmd_curve(&cfg, stdout),
        Command::FixedStates => cmd_fixed_states(&cfg, stdout),
        Command::Dilate => cmd_dilate(&cfg, stdout),
        Command::Demo => cmd_demo(&cfg, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn read_input(cfg: &RunConfig) -> Result<Option<String>, Failure> {
    match &cfg.input_path {
        None => Ok(None),
        Some(path) => fs::read_to_string(path)
            .map(Some)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display()))),
    }
}

fn require_instrument(cfg: &RunConfig) -> Result<KrausInstrument, Failure> {
    let text = read_input(cfg)?
        .ok_or_else(|| Failure::Input("this command needs --in <instrument.json>".into()))?;
    Ok(instrument_from_json(&text, cfg.tol)?)
}

/// Writes `content` to `--out` when given, otherwise to stdout.
fn emit(cfg: &RunConfig, content: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &cfg.output_path {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => Ok(stdout.write_all(content.as_bytes())?),
    }
}

fn header(cfg: &RunConfig, command: &str) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("tool".into(), json!("qtradeoff"));
    map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    map.insert("command".into(), json!(command));
    map.insert(
        "config".into(),
        json!({
            "dim": cfg.dim,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "tol": num(cfg.tol),
        }),
    );
    if cfg.stamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        map.insert("timestamp".into(), json!(secs));
    }
    map
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn record_json(r: &TradeoffRecord) -> Value {
    json!({
        "fidelity": num(r.fid_in_out),
        "disturbance": num(r.disturbance),
        "p_e": num(r.p_e_opt),
        "entropy": num(r.entropy),
        "info": num(r.info),
        "slack": num(r.slack),
        "holds": r.holds,
        "p_e_apparatus": r.p_e_apparatus.map(num),
    })
}

pub fn verify_report(cfg: &RunConfig, suites: &[SuiteResult]) -> Value {
    let mut map = header(cfg, "verify");
    map.insert(
        "suites".into(),
        Value::Array(suites.iter().map(SuiteResult::to_json).collect()),
    );
    map.insert(
        "all_passed".into(),
        json!(suites.iter().all(SuiteResult::passed)),
    );
    Value::Object(map)
}

fn cmd_verify(cfg: &RunConfig, stdout: &mut dyn Write) -> CmdResult {
    let suites = run_suites(&VerifyConfig {
        dim: cfg.dim,
        trials: cfg.trials,
        seed: cfg.seed,
        tol: cfg.tol,
    });
    let report = verify_report(cfg, &suites);
    let rendered = match cfg.format {
        Format::Json => pretty(&report),
        Format::Csv => {
            let mut s =
                String::from("suite,cases,skipped,violations,errors,worst,threshold,passed\n");
            for r in &suites {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.name,
                    r.cases,
                    r.skipped,
                    r.violations,
                    r.errors,
                    qtradeoff::format::fmt_sig(r.worst, 12),
                    qtradeoff::format::fmt_sig(r.threshold, 12),
                    r.passed()
                ));
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "verify: dim {}, {} trials per suite, seed {}\n{}\n",
                cfg.dim,
                cfg.trials,
                cfg.seed,
                text_header()
            );
            for r in &suites {
                s.push_str(&r.text_row());
                s.push('\n');
                if let Some(note) = &r.note {
                    s.push_str(&format!("    {note}\n"));
                }
            }
            let failed = suites.iter().filter(|r| !r.passed()).count();
            if failed == 0 {
                s.push_str("all suites passed\n");
            } else {
                s.push_str(&format!("{failed} suite(s) FAILED\n"));
            }
            s
        }
    };
    stdout.write_all(rendered.as_bytes())?;
    if let Some(path) = &cfg.output_path {
        fs::write(path, pretty(&report))
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(if suites.iter().all(SuiteResult::passed) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_curve(cfg: &RunConfig, stdout: &mut dyn Write) -> CmdResult {
    let input = match read_input(cfg)? {
        Some(text) => density_from_json(&text, cfg.tol)?,
        None => PureState::plus().projector(),
    };
    if input.dim() != 2 {
        return Err(Failure::Input(format!(
            "curve needs a qubit input state, found dimension {}",
            input.dim()
        )));
    }
    let points = saturation_scan(cfg.trials.max(3), &input)?;
    let rendered = match cfg.format {
        Format::Json => {
            let mut map = header(cfg, "curve");
            map.insert(
                "points".into(),
                Value::Array(
                    points
                        .iter()
                        .map(|p: &FamilyPoint| json!({"param": num(p.param), "record": record_json(&p.record)}))
                        .collect(),
                ),
            );
            pretty(&Value::Object(map))
        }
        Format::Csv | Format::Text => scan_csv(&points),
    };
    emit(cfg, &rendered, stdout)?;
    Ok(if points.iter().all(|p| p.record.holds) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn cmd_fixed_states(cfg: &RunConfig, stdout: &mut dyn Write) -> CmdResult {
    let instr = require_instrument(cfg)?;
    let mut per_outcome = Vec::new();
    for k in 0..instr.n_outcomes() {
        per_outcome.push(unmodified_pure_states(&instr, k, cfg.tol.max(1e-12))?);
    }
    let rendered = match cfg.format {
        Format::Json => {
            let mut map = header(cfg, "fixed-states");
            let outcomes: Vec<Value> = per_outcome
                .iter()
                .enumerate()
                .map(|(k, states)| {
                    json!({
                        "outcome": k,
                        "states": states.iter().map(|s| vector_json(s.amplitudes())).collect::<Vec<_>>(),
                    })
                })
                .collect();
            map.insert("outcomes".into(), Value::Array(outcomes));
            pretty(&Value::Object(map))
        }
        Format::Csv => {
            let mut s = String::from("outcome,state\n");
            for (k, states) in per_outcome.iter().enumerate() {
                for st in states {
                    s.push_str(&format!("{k},\"{}\"\n", vector_text(st.amplitudes())));
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for (k, states) in per_outcome.iter().enumerate() {
                if states.is_empty() {
                    s.push_str(&format!("outcome {k}: none found\n"));
                } else {
                    s.push_str(&format!("outcome {k}:\n"));
                    for st in states {
                        s.push_str(&format!("  {}\n", vector_text(st.amplitudes())));
                    }
                }
            }
            s
        }
    };
    emit(cfg, &rendered, stdout)?;
    Ok(EXIT_OK)
}

/// Round-trip agreement between a dilation and the instrument it realises.
#[derive(Clone, Debug, PartialEq)]
pub struct DilationCheck {
    pub system_dim: usize,
    pub ancilla_dim: usize,
    pub unitarity_residual: f64,
    pub max_state_discrepancy: f64,
    pub max_probability_discrepancy: f64,
    pub states: usize,
}

pub fn check_dilation(
    instr: &KrausInstrument,
    states: usize,
    seed: u64,
) -> qtradeoff::Result<DilationCheck> {
    let model = dilate(instr)?;
    let d = instr.dim();
    let mut check = DilationCheck {
        system_dim: d,
        ancilla_dim: model.dim_anc(),
        unitarity_residual: isometry_defect(model.unitary()),
        max_state_discrepancy: 0.0,
        max_probability_discrepancy: 0.0,
        states,
    };
    for i in 0..states {
        let rho = random_density(d, 1 + i % d, derive_seed(seed, 9, i as u64))?;
        for k in 0..instr.n_outcomes() {
            let p = outcome_probability(instr, &rho, k)?;
            let p_model = outcome_probability_from_model(&model, &rho, k)?;
            check.max_probability_discrepancy =
                check.max_probability_discrepancy.max((p - p_model).abs());
            if p > 1e-6 {
                let direct = conditional_output(instr, &rho, k)?;
                let via = conditional_from_model(&model, &rho, k)?;
                check.max_state_discrepancy = check
                    .max_state_discrepancy
                    .max(trace_distance(&direct, &via)?);
            }
        }
    }
    Ok(check)
}

fn cmd_dilate(cfg: &RunConfig, stdout: &mut dyn Write) -> CmdResult {
    let instr = require_instrument(cfg)?;
    let check = check_dilation(&instr, 100, cfg.seed)?;
    let passed = check.unitarity_residual < cfg.tol
        && check.max_state_discrepancy < cfg.tol
        && check.max_probability_discrepancy < cfg.tol;
    let rendered = match cfg.format {
        Format::Json => {
            let mut map = header(cfg, "dilate");
            map.insert("system_dim".into(), json!(check.system_dim));
            map.insert("ancilla_dim".into(), json!(check.ancilla_dim));
            map.insert("unitarity_residual".into(), num(check.unitarity_residual));
            map.insert("max_state_discrepancy".into(), num(check.max_state_discrepancy));
            map.insert("max_probability_discrepancy".into(), num(check.max_probability_discrepancy));
            map.insert("states".into(), json!(check.states));
            map.insert("passed".into(), json!(passed));
            pretty(&Value::Object(map))
        }
        Format::Csv => format!(
            "system_dim,ancilla_dim,unitarity_residual,max_state_discrepancy,max_probability_discrepancy,passed\n{},{},{},{},{},{}\n",
            check.system_dim,
            check.ancilla_dim,
            qtradeoff::format::fmt_sig(check.unitarity_residual, 12),
            qtradeoff::format::fmt_sig(check.max_state_discrepancy, 12),
            qtradeoff::format::fmt_sig(check.max_probability_discrepancy, 12),
            passed
        ),
        Format::Text => format!(
            "system dim {}, ancilla dim {}\nunitarity residual {}\nround trip over {} random states: max trace distance {}, max probability gap {}\n{}\n",
            check.system_dim,
            check.ancilla_dim,
            text(check.unitarity_residual),
            check.states,
            text(check.max_state_discrepancy),
            text(check.max_probability_discrepancy),
            if passed { "PASS" } else { "FAIL" }
        ),
    };
    emit(cfg, &rendered, stdout)?;
    Ok(if passed { EXIT_OK } else { EXIT_VIOLATION })
}

/// Every number shown by `demo`.
#[derive(Clone, Debug)]
pub struct DemoReport {
    pub instrument: KrausInstrument,
    pub input: DensityMatrix,
    pub probabilities: Vec<f64>,
    /// `(outcome, input basis state used, normalised output)`.
    pub conditional_outputs: Vec<(usize, usize, DensityMatrix)>,
    pub distances_to_plus: Vec<f64>,
    pub output: DensityMatrix,
    pub record: TradeoffRecord,
}

pub fn demo_report() -> qtradeoff::Result<DemoReport> {
    let instrument = KrausInstrument::measure_and_prepare_plus();
    let input = PureState::basis(2, 0).projector();
    let plus = PureState::plus().projector();
    let probabilities = outcome_probabilities(&instrument, &input)?;
    let mut conditional_outputs = Vec::new();
    let mut distances_to_plus = Vec::new();
    for k in 0..instrument.n_outcomes() {
        // outcome k is certain for input |k>
        let out = conditional_output(&instrument, &PureState::basis(2, k).projector(), k)?;
        distances_to_plus.push(trace_distance(&out, &plus)?);
        conditional_outputs.push((k, k, out));
    }
    let output = unconditional_output(&instrument, &input)?;
    let record = infodist_check(&instrument, &input)?;
    Ok(DemoReport {
        instrument,
        input,
        probabilities,
        conditional_outputs,
        distances_to_plus,
        output,
        record,
    })
}

fn cmd_demo(cfg: &RunConfig, stdout: &mut dyn Write) -> CmdResult {
    let demo = demo_report()?;
    let effects = effects_of(&demo.instrument);
    let r = &demo.record;
    let rendered = match cfg.format {
        Format::Json | Format::Csv => {
            let mut map = header(cfg, "demo");
            map.insert(
                "kraus".into(),
                Value::Array(demo.instrument.kraus().iter().map(matrix_json).collect()),
            );
            map.insert(
                "effects".into(),
                Value::Array(effects.effects().iter().map(matrix_json).collect()),
            );
            map.insert("input".into(), matrix_json(demo.input.matrix()));
            map.insert(
                "probabilities".into(),
                Value::Array(demo.probabilities.iter().map(|&p| num(p)).collect()),
            );
            map.insert(
                "conditional_outputs".into(),
                Value::Array(
                    demo.conditional_outputs
                        .iter()
                        .zip(&demo.distances_to_plus)
                        .map(|((k, basis, out), dist)| {
                            json!({
                                "outcome": k,
                                "input_basis_state": basis,
                                "state": matrix_json(out.matrix()),
                                "trace_distance_to_plus": num(*dist),
                            })
                        })
                        .collect(),
                ),
            );
            map.insert("output".into(), matrix_json(demo.output.matrix()));
            map.insert("record".into(), record_json(r));
            pretty(&Value::Object(map))
        }
        Format::Text => {
            let mut s = String::from(
                "instrument: K0 = |+><0|, K1 = |+><1|, one outcome per Kraus operator\n",
            );
            s.push_str("effects:\n");
            for (k, e) in effects.effects().iter().enumerate() {
                s.push_str(&format!("  Pi_{k} = {}\n", matrix_text(e)));
            }
            s.push_str("input rho = |0><0|\n");
            for (k, p) in demo.probabilities.iter().enumerate() {
                s.push_str(&format!("  p_{k} = {}\n", text(*p)));
            }
            s.push_str("conditional outputs:\n");
            for ((k, basis, out), dist) in
                demo.conditional_outputs.iter().zip(&demo.distances_to_plus)
            {
                s.push_str(&format!(
                    "  outcome {k} (input |{basis}>): {}  trace distance to |+><+| = {}\n",
                    matrix_text(out.matrix()),
                    text(*dist)
                ));
            }
            s.push_str(&format!(
                "output rho' = {}\n",
                matrix_text(demo.output.matrix())
            ));
            s.push_str(&format!("F = {}\n", text(r.fid_in_out)));
            s.push_str(&format!("p_e = {}\n", text(r.p_e_opt)));
            s.push_str(&format!("H2(p_e) = {}\n", text(r.entropy)));
            s.push_str(&format!("I = 1 - H2(p_e) = {}\n", text(r.info)));
            s.push_str(&format!(
                "bound F <= H2(p_e): {} ≤ {} {}\n",
                text(r.fid_in_out),
                text(r.entropy),
                if r.holds { "holds" } else { "VIOLATED" }
            ));
            s.push_str(&format!(
                "disturbance 1 - F = {} >= I = {}\n",
                text(r.disturbance),
                text(r.info)
            ));
            s
        }
    };
    emit(cfg, &rendered, stdout)?;
    Ok(if r.holds { EXIT_OK } else { EXIT_VIOLATION })
}
