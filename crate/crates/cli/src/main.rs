mod commands;
mod error;
mod registry;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use error::{CliError, CliResult};
use registry::Inputs;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "sptkit", version, about = "SPT invariants, group cohomology and lattice checks at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Group cohomology H^n(G, U(1)) with Z_M representatives
    Cohomology(Flags),
    /// Primitivity, transfer spectrum and correlation length of an MPS
    MpsCheck(Flags),
    /// Parent Hamiltonian kernel, gap and intersection property
    ParentHam(Flags),
    /// H^2 index of an MPS with on-site symmetry
    IndexOnsite(Flags),
    /// Z2 index of a reflection-symmetric MPS
    IndexReflection(Flags),
    /// Projective class of an on-site representation
    Lsm(Flags),
    /// Projector transport along a gapped path
    SpectralFlow(Flags),
    /// Lattice identities for the 2D cocycle model
    DwVerify(Flags),
    /// H^3 class read off from the 2D model
    DwExtract(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    #[command(flatten)]
    run: RunConfig,
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<String>,
}

impl Command {
    fn into_parts(self) -> (&'static str, Flags) {
        match self {
            Command::Cohomology(f) => ("cohomology", f),
            Command::MpsCheck(f) => ("mps-check", f),
            Command::ParentHam(f) => ("parent-ham", f),
            Command::IndexOnsite(f) => ("index-onsite", f),
            Command::IndexReflection(f) => ("index-reflection", f),
            Command::Lsm(f) => ("lsm", f),
            Command::SpectralFlow(f) => ("spectral-flow", f),
            Command::DwVerify(f) => ("dw-verify", f),
            Command::DwExtract(f) => ("dw-extract", f),
        }
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Text,
}

/// Run configuration. Every field can come from `--config` or a flag; flags win.
#[derive(Args, Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Subcommand name (config files only; must match the subcommand)
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Group: Z<n>, products like Z2xZ2, or a JSON group file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Cohomology degree
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    /// Coefficient modulus M (phases exp(2πi a/M))
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    /// MPS: aklt, aklt-cartesian, ghz, product:<d>, stacks a+b, or a JSON file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mps: Option<String>,
    /// Representation: pauli, pauli:<d>, trivial, trivial:<d>, stacks a+b
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rep: Option<String>,
    /// Window length of the parent Hamiltonian
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Chain lengths, inclusive, as a..b
    #[arg(long = "n-range")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_range: Option<String>,
    /// Gapped path: zx-interp, rotation, or a JSON checkpoint file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// RK4 steps for spectral flow
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Pass/fail tolerance of the command
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Cohomology class id (all classes when absent)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    /// Box size L of the 2D model
    #[arg(long = "L")]
    #[serde(rename = "L")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<i64>,
    /// Identities to verify: all, or a comma list of lemma_i, lemma_ii_first, lemma_ii_second, lemma_iii, lemma_iv
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<String>,
    /// Seeded configuration pairs per group element for 2D checks
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Base seed for sampled checks
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Report format
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit: Option<Emit>,
    /// Include wall time in the report (breaks byte-for-byte reproducibility)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    /// Allow L below the lemma threshold; the report is marked non-conformant
    #[arg(long = "allow-small-l", num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_small_l: Option<bool>,
}

impl RunConfig {
    /// Fields of `over` that are set replace those of `self`.
    fn merge(self, over: RunConfig) -> RunConfig {
        let mut base = serde_json::to_value(&self).expect("config serializes");
        let top = serde_json::to_value(&over).expect("config serializes");
        if let (Value::Object(b), Value::Object(t)) = (&mut base, top) {
            for (k, v) in t {
                if !v.is_null() {
                    b.insert(k, v);
                }
            }
        }
        serde_json::from_value(base).expect("merged config deserializes")
    }

    fn set_fields(&self) -> Vec<String> {
        match serde_json::to_value(self).expect("config serializes") {
            Value::Object(map) => map.into_iter().filter(|(_, v)| !v.is_null()).map(|(k, _)| k).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct Report {
    command: String,
    version: &'static str,
    config: RunConfig,
    inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    results: Value,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
}

fn digest(config: &RunConfig, inputs: &Inputs) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).expect("config serializes"));
    for (path, text) in &inputs.files {
        h.update([0u8]);
        h.update(path.as_bytes());
        h.update([0u8]);
        h.update(text.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn load_config(path: &str, inputs: &mut Inputs) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), message: e.to_string() })?;
    inputs.files.push((path.into(), text.clone()));
    serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
}

/// Dotted key = value lines for `--emit text`.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push(format!("{prefix} = {other}")),
    }
}

fn render(value: &Value, emit: Emit) -> String {
    match emit {
        Emit::Json => serde_json::to_string_pretty(value).expect("report serializes") + "\n",
        Emit::Text => {
            let mut lines = Vec::new();
            flatten("", value, &mut lines);
            lines.join("\n") + "\n"
        }
    }
}

fn write_out(text: &str, output: Option<&str>) -> CliResult<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io { path: p.into(), message: e.to_string() }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Io { path: "stdout".into(), message: e.to_string() })
        }
    }
}

fn run(command: &str, pass: Flags) -> CliResult<bool> {
    let mut inputs = Inputs::default();
    let base = match &pass.config {
        Some(p) => load_config(p, &mut inputs)?,
        None => RunConfig::default(),
    };
    if let Some(c) = &base.command {
        if c != command {
            return Err(CliError::Config(format!("config is for command {c:?}, not {command:?}")));
        }
    }
    let mut config = base.merge(pass.run);
    config.command = None;
    commands::check_fields(command, &config)?;
    let start = Instant::now();
    let (resolved, results, passed) = commands::dispatch(command, config, &mut inputs)?;
    let wall_time_s = (resolved.timing == Some(true)).then(|| start.elapsed().as_secs_f64());
    // where and how the report is written is not an input
    let echo = RunConfig { output: None, ..resolved.clone() };
    let digested = RunConfig { emit: None, timing: None, ..echo.clone() };
    let report = Report {
        command: command.into(),
        version: VERSION,
        inputs_digest: digest(&digested, &inputs),
        seed: resolved.seed,
        config: echo,
        results,
        passed,
        wall_time_s,
    };
    let value = serde_json::to_value(&report).expect("report serializes");
    write_out(&render(&value, resolved.emit.unwrap_or(Emit::Json)), resolved.output.as_deref())?;
    Ok(passed)
}

fn emit_error(command: Option<&str>, e: &CliError) -> ExitCode {
    let obj = json!({
        "command": command,
        "version": VERSION,
        "error": { "code": e.code(), "message": e.to_string() },
    });
    println!("{}", serde_json::to_string_pretty(&obj).expect("error serializes"));
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return emit_error(None, &CliError::Usage(e.to_string().trim().to_string())),
    };
    let (command, flags) = cli.command.into_parts();
    match run(command, flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => emit_error(Some(command), &e),
    }
}
