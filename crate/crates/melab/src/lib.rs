//! Experiment driver for `melab-core`: JSON documents for shifts, measures
//! and roofs, a built-in corpus, seeded measure families, and the five
//! experiments behind the `melab` command.

pub mod corpus;
pub mod error;
pub mod experiments;
pub mod families;
pub mod formats;
pub mod output;

use std::path::{Path, PathBuf};

pub use error::{LabError, Result};
pub use experiments::{Experiment, Outcome};

use experiments::{counterexample, entropy_compare, flow_usc, mme_search, usc_scan};
use melab_core::ShiftSpec;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "MELAB_THREADS";

/// Exit code for a run whose own assertions failed.
pub const EXIT_ASSERTION: i32 = 2;

/// One invocation. Unset options take the experiment's defaults.
#[derive(Debug, Clone)]
pub struct Config {
    pub experiment: Experiment,
    pub spec: Option<PathBuf>,
    pub out: PathBuf,
    pub h: Option<f64>,
    pub ns: Option<Vec<usize>>,
    pub families: Option<usize>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub depth: Option<usize>,
    pub length: Option<usize>,
    pub roof: Option<PathBuf>,
}

impl Config {
    pub fn new(experiment: Experiment, out: impl Into<PathBuf>) -> Self {
        Self {
            experiment,
            spec: None,
            out: out.into(),
            h: None,
            ns: None,
            families: None,
            seed: 0,
            tol: None,
            depth: None,
            length: None,
            roof: None,
        }
    }
}

fn load_spec(path: Option<&Path>) -> Result<Option<ShiftSpec>> {
    path.map(formats::read_shift_spec).transpose()
}

fn required_spec(spec: Option<ShiftSpec>, experiment: Experiment) -> Result<ShiftSpec> {
    spec.ok_or_else(|| LabError::Precondition(format!("{experiment} needs --spec")))
}

/// Runs the experiment without writing anything.
pub fn execute(cfg: &Config) -> Result<Outcome> {
    let spec = load_spec(cfg.spec.as_deref())?;
    match cfg.experiment {
        Experiment::Counterexample => {
            let d = counterexample::Params::default();
            let p = counterexample::Params {
                h: cfg.h.unwrap_or(d.h),
                ns: cfg.ns.clone().unwrap_or(d.ns),
                depth: cfg.depth.unwrap_or(d.depth),
                tol: cfg.tol.unwrap_or(d.tol),
                seed: cfg.seed,
            };
            counterexample::run(spec.as_ref(), &p)
        }
        Experiment::UscScan => {
            let spec = required_spec(spec, cfg.experiment)?;
            let d = usc_scan::Params::default();
            let p = usc_scan::Params {
                families: cfg.families.unwrap_or(d.families),
                seed: cfg.seed,
                depth: cfg.depth.unwrap_or(d.depth),
                tol: cfg.tol.unwrap_or(d.tol),
            };
            usc_scan::run(&spec, &p)
        }
        Experiment::EntropyCompare => {
            let p = entropy_compare::Params {
                tol: cfg.tol.unwrap_or(entropy_compare::DEFAULT_TOL),
                seed: cfg.seed,
            };
            entropy_compare::run(spec.as_ref(), &p)
        }
        Experiment::MmeSearch => {
            let spec = required_spec(spec, cfg.experiment)?;
            let d = mme_search::Params::default();
            let p = mme_search::Params {
                length: cfg.length.unwrap_or(d.length),
                seed: cfg.seed,
                depth: cfg.depth.unwrap_or(d.depth),
                tol: cfg.tol.unwrap_or(d.tol),
            };
            mme_search::run(&spec, &p)
        }
        Experiment::FlowUsc => {
            let spec = required_spec(spec, cfg.experiment)?;
            let roof = cfg.roof.as_deref().map(formats::read_roof).transpose()?;
            let d = flow_usc::Params::default();
            let p = flow_usc::Params {
                families: cfg.families.unwrap_or(d.families),
                seed: cfg.seed,
                depth: cfg.depth.unwrap_or(d.depth),
                tol: cfg.tol.unwrap_or(d.tol),
                h: cfg.h.unwrap_or(d.h),
                ns: cfg.ns.clone().unwrap_or(d.ns),
            };
            flow_usc::run(&spec, roof.as_ref(), &p)
        }
    }
}

/// Worker count from `MELAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs the experiment on a pool capped by `MELAB_THREADS` and writes its
/// tables and `summary.json` into the output directory.
pub fn run(cfg: &Config) -> Result<(Outcome, Vec<PathBuf>)> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| LabError::Precondition(format!("cannot start worker threads: {e}")))?;
    let mut outcome = pool.install(|| execute(cfg))?;
    let paths = output::write_outputs(&cfg.out, &outcome.tables, &mut outcome.summary)?;
    Ok((outcome, paths))
}

/// Process exit code for a finished run.
pub fn exit_code(result: &Result<(Outcome, Vec<PathBuf>)>) -> i32 {
    match result {
        Ok((o, _)) if o.passed => 0,
        Ok(_) => EXIT_ASSERTION,
        Err(e) => e.exit_code(),
    }
}
