use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qhlab::experiment::{preset, presets, run, ConfigError, ExperimentSpec, ARTIFACT_DIR};
use qhlab::metric::set_element_cap;

/// Finite-radius experiments on quasi-homomorphisms.
#[derive(Parser)]
#[command(name = "qhlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec
    Run {
        spec: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a built-in experiment
    Preset {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List the built-in experiments
    List,
}

#[derive(Args)]
struct RunOpts {
    /// Override the radius of every check
    #[arg(long)]
    radius: Option<u32>,
    /// Maximum number of elements in any enumerated set
    #[arg(long)]
    budget: Option<usize>,
    /// Directory for the JSON report and CSV files
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("QHLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::Invalid(format!("QHLAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn execute(mut spec: ExperimentSpec, opts: RunOpts) -> Result<i32, ConfigError> {
    configure_threads()?;
    if let Some(b) = opts.budget {
        if b == 0 {
            return Err(ConfigError::Invalid("--budget must be positive".into()));
        }
        set_element_cap(b);
    }
    if let Some(r) = opts.radius {
        if r == 0 {
            return Err(ConfigError::Invalid("--radius must be positive".into()));
        }
        spec.override_radius(r);
    }
    let report = run(&spec)?;
    print!("{}", report.human_summary());
    let dir = opts.out.or_else(|| spec.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(ARTIFACT_DIR));
    let path = report.write(&dir)?;
    println!("report: {}", path.display());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            for p in presets() {
                println!("{:<30} {}", p.name, p.description);
            }
            Ok(0)
        }
        Command::Run { spec, opts } => ExperimentSpec::from_path(&spec).and_then(|s| execute(s, opts)),
        Command::Preset { name, opts } => preset(&name).and_then(|s| execute(s, opts)),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("qhlab: {e}");
            ExitCode::from(2)
        }
    }
}
