use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod error;
mod report;
mod runners;
mod scenario;

use error::CliError;
use report::Report;
use scenario::Params;

#[derive(Parser)]
#[command(name = "qkd-audit", version, about = "Exact security-criterion audits for desk-scale QKD scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace distance, Holevo quantity and guessing probability of a CQ state or joint distribution
    Metrics(RunArgs),
    /// Maximal coupling of two distributions, or a product-bias counterexample
    Coupling(RunArgs),
    /// Scalar guessing, Gaussian-tail and phase-error bounds
    Bounds(RunArgs),
    /// Exhaustive BB84 run evaluated against the security criteria
    Bb84(RunArgs),
    /// Coherent-state discrimination and masking
    Coherent(RunArgs),
    /// Key-estimation comparison table (JSON and CSV)
    Table1(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file of `key = value` lines
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for report.json (and table.csv)
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's rng_seed
    #[arg(long)]
    seed: Option<u64>,
}

fn write_outputs(out: &Path, report: &Report) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    std::fs::create_dir_all(out).map_err(io)?;
    std::fs::write(out.join("report.json"), report.to_json()).map_err(io)?;
    if let Some(csv) = &report.csv {
        std::fs::write(out.join("table.csv"), csv).map_err(io)?;
    }
    Ok(())
}

fn execute(kind: &str, args: &RunArgs) -> Result<(), CliError> {
    let mut params = Params::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        params.set("rng_seed", seed.to_string());
    }
    let declared = params.optional("kind", kind.to_string())?;
    if declared != kind {
        return Err(CliError::Schema { key: "kind".into(), reason: format!("file declares '{declared}', subcommand is '{kind}'") });
    }
    let report = match kind {
        "metrics" => runners::metrics(&mut params)?,
        "coupling" => runners::coupling(&mut params)?,
        "bounds" => runners::bounds(&mut params)?,
        "bb84" => runners::bb84(&mut params)?,
        "coherent" => runners::coherent(&mut params)?,
        _ => runners::table1(&mut params)?,
    };
    params.finish()?;
    write_outputs(&args.out, &report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Metrics(a) => ("metrics", a),
        Command::Coupling(a) => ("coupling", a),
        Command::Bounds(a) => ("bounds", a),
        Command::Bb84(a) => ("bb84", a),
        Command::Coherent(a) => ("coherent", a),
        Command::Table1(a) => ("table1", a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qkd-audit {kind}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
