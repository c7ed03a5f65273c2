use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use massmeter::cli::{cmd_converge, cmd_solve, cmd_sweep, cmd_verify};
use massmeter::config::RunConfig;
use massmeter::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Solve,
    Verify,
    Sweep,
    Converge,
}

/// Neumann-data mass diagnostics for Dirichlet eigenfunctions on perturbed triangles.
#[derive(Debug, Parser)]
#[command(name = "massmeter", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides solver.threads).
    #[arg(long)]
    threads: Option<usize>,
    /// Eigensolver start-vector seed (overrides solver.seed).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &Args) -> Result<Vec<PathBuf>, Error> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    if let Some(t) = args.threads {
        cfg.solver.threads = t;
    }
    if let Some(s) = args.seed {
        cfg.solver.seed = s;
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.solver.threads)
        .build()
        .map_err(|e| Error::Config(format!("solver.threads: {e}")))?;
    let out = args.out.as_deref();
    pool.install(|| match args.command {
        Command::Solve => cmd_solve(&cfg, out),
        Command::Verify => cmd_verify(&cfg, out).map(|r| r.1),
        Command::Sweep => cmd_sweep(&cfg, out).map(|r| r.1),
        Command::Converge => cmd_converge(&cfg, out).map(|r| r.1),
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("massmeter: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
