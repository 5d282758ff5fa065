use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use jetbrane::pipeline::{run, Pipeline, RunConfig};
use jetbrane::weak::AnsatzConfig;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Verify gauge-theory identities on theory files.
#[derive(Parser, Debug)]
#[command(name = "jetbrane", version)]
struct Cli {
    /// validate | noether | symmetry | closure | reducibility | currents | bv-nilpotency | master | full
    pipeline: String,
    /// Theory file.
    theory: PathBuf,
    /// Side file for symmetry, reducibility and currents.
    aux: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Derivative order of certificate terms and jet order inside their coefficients.
    #[arg(long, default_value_t = 2)]
    ansatz_order: usize,
    /// Polynomial degree of certificate coefficients.
    #[arg(long, default_value_t = 2)]
    max_degree: usize,
    /// Seed for randomized sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("JETBRANE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("JETBRANE_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("JETBRANE_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let usage = |msg: String| {
        eprintln!("jetbrane: {msg}");
        ExitCode::from(2)
    };
    if let Err(e) = configure_threads() {
        return usage(e);
    }
    let pipeline: Pipeline = match cli.pipeline.parse() {
        Ok(p) => p,
        Err(e) => return usage(e.to_string()),
    };
    let theory = match read(&cli.theory) {
        Ok(t) => t,
        Err(e) => return usage(e),
    };
    let aux = match cli.aux.as_deref().map(read).transpose() {
        Ok(a) => a,
        Err(e) => return usage(e),
    };
    let cfg = RunConfig {
        ansatz: AnsatzConfig {
            max_jet_order: cli.ansatz_order,
            max_coeff_degree: cli.max_degree,
            max_coeff_jet_order: cli.ansatz_order,
        },
        seed: cli.seed,
    };
    let report = match run(pipeline, &theory, aux.as_deref(), &cfg) {
        Ok(r) => r,
        Err(e) => return usage(e.to_string()),
    };
    match cli.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
