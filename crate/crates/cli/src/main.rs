mod commands;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dicke_core::qac0::DEFAULT_MAX_SYNTH_QUBITS;

/// Exit status for a run that completed but failed verification.
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "dicke",
    version,
    about = "Constant-depth Dicke state circuits: synthesize, verify, sweep, export"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a circuit and write it with its resource report.
    Synth(SynthArgs),
    /// Run a verdict suite; exits 1 if any verdict fails.
    Verify(VerifyArgs),
    /// Depth / ancilla / fidelity table over a grid.
    Sweep(SweepArgs),
    /// Search for a low-error gadget family for the approximate W state.
    Derandomize(DerandomizeArgs),
    /// Convert a circuit JSON file to the flat text gate list.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Qac0,
    Qac0f,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CswapArg {
    Sequential,
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MModeArg {
    Paper,
    Desk,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CapArgs {
    /// Largest circuit (in qubits) synthesis may build.
    #[arg(long, env = "DICKE_MAX_QUBITS", default_value_t = DEFAULT_MAX_SYNTH_QUBITS)]
    pub max_qubits: usize,
    /// Depth charged per oracle gate.
    #[arg(long, default_value_t = 1)]
    pub oracle_depth: usize,
    /// `c` in the QAC0 fan-out width bound c·⌈log₂ N⌉.
    #[arg(long, default_value_t = 2)]
    pub fanout_width_factor: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Block count for qac0f; chosen by --m-mode when absent.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value_t = MModeArg::Desk)]
    pub m_mode: MModeArg,
    #[arg(long, default_value_t = 0.5)]
    pub gamma_floor: f64,
    #[arg(long, value_enum, default_value_t = CswapArg::Sequential)]
    pub cswap: CswapArg,
    /// Prepare k > n/2 as n − k followed by an X layer (qac0).
    #[arg(long)]
    pub complement: bool,
    /// Build the approximate W state with this error (qac0, k = 1).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Seed for the gadget family search; required with --epsilon unless
    /// --family is given.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Gadget family JSON (plain or as written by `derandomize`).
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Evaluate the W gadgets in parallel on fanned-out copies.
    #[arg(long)]
    pub parallel: bool,
    /// Replace the W gadgets by an exact EXACT_1 oracle gate.
    #[arg(long)]
    pub perfect_oracle: bool,
    #[command(flatten)]
    pub cap: CapArgs,
    /// Output directory for circuit.json and report.json; the report goes
    /// to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Truth tables and exact QAC0 Dicke states.
    Exact,
    /// Approximate W states.
    Approx,
    /// Gadget decision statistics.
    Gadget,
    /// The QAC0f block pipeline.
    Qac0f,
    /// Depth flatness and ancilla envelopes.
    Resources,
    All,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Exact)]
    pub suite: Suite,
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    /// Required by the randomized suites (approx, gadget, all).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 10_000)]
    pub gadget_trials: usize,
    /// Exact-mode fidelity threshold.
    #[arg(long, default_value_t = dicke_core::verify::EXACT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub cap: CapArgs,
    /// Verdict JSON lines file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// `a..b`, `a,b,c` or a single value.
    #[arg(long, value_parser = parse_range)]
    pub n: Range,
    #[arg(long, value_parser = parse_range)]
    pub k: Range,
    /// Fixed block count for qac0f; otherwise chosen per point.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value_t = MModeArg::Desk)]
    pub m_mode: MModeArg,
    #[arg(long, default_value_t = 0.5)]
    pub gamma_floor: f64,
    #[arg(long, value_enum, default_value_t = CswapArg::Sequential)]
    pub cswap: CswapArg,
    /// Skip simulation and report resources only.
    #[arg(long)]
    pub no_simulate: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub cap: CapArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DerandomizeArgs {
    #[arg(long)]
    pub n: usize,
    /// Target W error; sets t = choose_t(ε/9) unless --t is given.
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Inclusive list of grid values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Range(pub Vec<usize>);

fn parse_range(s: &str) -> Result<Range, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let values = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    Ok(Range(values))
}

/// A failure with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<dicke_core::Error> for Failure {
    fn from(e: dicke_core::Error) -> Self {
        let code = match e {
            dicke_core::Error::ResourceLimit(_) => EXIT_RESOURCE,
            _ => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Derandomize(a) => commands::derandomize(a),
        Command::Export(a) => commands::export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
