use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trk_lab::{load_config, report, run_job, JobKind, LabError};

/// Environment variable read when `--threads` is absent or 0.
const THREADS_ENV: &str = "TRK_LAB_THREADS";

#[derive(Parser)]
#[command(name = "trk-lab", version, about = "Sum-rule checks for static, driven and cavity-coupled models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bare-matter sum rule.
    StaticTrk(RunArgs),
    /// Driven system: zone and Sambe sums.
    Floquet(RunArgs),
    /// Matter coupled to a cavity mode.
    Qed(RunArgs),
    /// Harmonic or photon cutoff scan.
    Converge(RunArgs),
    /// Parameter sweep.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Job configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 = automatic.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::StaticTrk(a) => (JobKind::StaticTrk, a),
        Command::Floquet(a) => (JobKind::Floquet, a),
        Command::Qed(a) => (JobKind::Qed, a),
        Command::Converge(a) => (JobKind::Converge, a),
        Command::Sweep(a) => (JobKind::Sweep, a),
    };
    match run(kind, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trk-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn thread_count(flag: usize) -> Result<usize, LabError> {
    if flag > 0 {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| LabError::Config(format!("{THREADS_ENV} must be a non-negative integer (got {v:?})"))),
        Err(_) => Ok(0),
    }
}

fn run(kind: JobKind, args: &RunArgs) -> Result<(), LabError> {
    let threads = thread_count(args.threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| LabError::Config(format!("cannot start thread pool: {e}")))?;

    let config = load_config(&args.config)?;
    if config.job_kind != kind {
        return Err(LabError::Config(format!(
            "config has job_kind = \"{}\" but the `{}` subcommand was used",
            config.job_kind,
            kind.name().replace('_', "-")
        )));
    }
    let out = match (&args.out, config.output_directory()) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => PathBuf::from(dir),
        (None, None) => {
            return Err(LabError::Config(
                "no output directory: pass --out or set output.directory".into(),
            ))
        }
    };
    if args.verbose {
        eprintln!("resolved config:\n{}", config.to_toml());
        eprintln!("running {} job with {} threads", kind, rayon::current_num_threads());
    }
    let report = run_job(&config)?;
    for w in &report.warnings {
        eprintln!("warning [{}]: {}", w.source, w.message);
    }
    let written = report::write_report(&report, &out)?;
    if args.verbose {
        for point in &report.points {
            for sum in &point.sums {
                eprintln!(
                    "{} {}: value = {:.12} oracle = {:.12} residual = {:.3e}",
                    point.label, sum.name, sum.report.value, sum.report.oracle_value, sum.report.residual
                );
            }
        }
        for path in &written {
            eprintln!("wrote {}", path.display());
        }
        eprintln!("done in {:.3} s", report.timings.total_seconds);
    }
    Ok(())
}
