use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use melab::{Config, Experiment};

/// Reproducible experiments on countable Markov shifts.
///
/// Writes one CSV per table and a summary.json into the output directory.
/// Exit codes: 0 all checks passed, 2 a check failed, 3 a precondition was
/// refused, 1 an I/O or parse error. MELAB_THREADS caps the worker threads.
#[derive(Debug, Parser)]
#[command(name = "melab", version)]
struct Cli {
    /// counterexample, usc_scan, entropy_compare, mme_search or flow_usc
    experiment: Experiment,
    /// Shift document (JSON)
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Target entropy of the counterexample
    #[arg(long)]
    h: Option<f64>,
    /// Comma-separated alphabet sizes for the counterexample
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    ns: Option<Vec<usize>>,
    /// Number of seeded families
    #[arg(long)]
    families: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance of the experiment's main check
    #[arg(long)]
    tol: Option<f64>,
    /// Cylinder depth for weak* comparisons
    #[arg(long)]
    depth: Option<usize>,
    /// Sequence length for mme_search on finite graphs
    #[arg(long)]
    length: Option<usize>,
    /// Roof document (JSON) for flow_usc; the unit roof by default
    #[arg(long)]
    roof: Option<PathBuf>,
}

fn main() -> ExitCode {
    // argument errors are parse errors (exit 1), not failed checks
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = Config {
        experiment: cli.experiment,
        spec: cli.spec,
        out: cli.out,
        h: cli.h,
        ns: cli.ns,
        families: cli.families,
        seed: cli.seed,
        tol: cli.tol,
        depth: cli.depth,
        length: cli.length,
        roof: cli.roof,
    };
    let result = melab::run(&cfg);
    match &result {
        Ok((outcome, paths)) => {
            println!("{}: {}", outcome.summary.experiment, outcome.summary.verdict);
            for note in &outcome.summary.notes {
                println!("  {note}");
            }
            for p in paths {
                println!("  wrote {}", p.display());
            }
        }
        Err(e) => eprintln!("melab: {e}"),
    }
    ExitCode::from(melab::exit_code(&result) as u8)
}
