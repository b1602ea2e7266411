//! Experiment drivers. Each returns its tables and a summary; writing files
//! and choosing the exit code is left to the caller.

pub mod counterexample;
pub mod entropy_compare;
pub mod flow_usc;
pub mod mme_search;
pub mod usc_scan;

use std::fmt;
use std::str::FromStr;

use melab_core::entropy::has_finite_entropy;
use melab_core::shift::is_transitive;
use melab_core::{FiniteGraph, ShiftSpec};
use serde_json::json;

use crate::error::{LabError, Result};
use crate::output::{Summary, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Counterexample,
    UscScan,
    EntropyCompare,
    MmeSearch,
    FlowUsc,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Counterexample,
        Experiment::UscScan,
        Experiment::EntropyCompare,
        Experiment::MmeSearch,
        Experiment::FlowUsc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Counterexample => "counterexample",
            Experiment::UscScan => "usc_scan",
            Experiment::EntropyCompare => "entropy_compare",
            Experiment::MmeSearch => "mme_search",
            Experiment::FlowUsc => "flow_usc",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown experiment \"{s}\""))
    }
}

/// Tables and summary of one run. `passed` is false when an assertion of
/// the experiment failed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Summary,
    pub passed: bool,
}

impl Outcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub(crate) fn summary(experiment: Experiment, params: serde_json::Value, verdict: &str) -> Summary {
    Summary {
        experiment: experiment.as_str().into(),
        params,
        verdict: verdict.into(),
        artifacts: Vec::new(),
        notes: Vec::new(),
    }
}

pub(crate) fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(LabError::Precondition(format!("{name} must be positive, got {x}")))
    }
}

pub(crate) fn at_least_one(name: &str, x: usize) -> Result<usize> {
    if x >= 1 {
        Ok(x)
    } else {
        Err(LabError::Precondition(format!("{name} must be at least 1")))
    }
}

/// Refuses shifts without finite entropy, where the entropy map need not be
/// upper semi-continuous.
pub(crate) fn require_finite_entropy(spec: &ShiftSpec, experiment: Experiment) -> Result<()> {
    if has_finite_entropy(spec)? {
        Ok(())
    } else {
        Err(LabError::Precondition(format!(
            "{experiment} needs a shift of finite topological entropy; this spec has infinite entropy, so upper semi-continuity of the entropy map is not guaranteed"
        )))
    }
}

/// The deepest truncation, which has to be transitive.
pub(crate) fn transitive_graph(spec: &ShiftSpec) -> Result<FiniteGraph> {
    let g = spec.deepest()?;
    if !is_transitive(&g)? {
        return Err(LabError::Precondition(
            "the graph is not transitive; random Markov families would not be ergodic".into(),
        ));
    }
    Ok(g)
}

pub(crate) fn spec_label(spec: Option<&ShiftSpec>) -> serde_json::Value {
    match spec {
        Some(s) => serde_json::from_str(&crate::formats::shift_spec_to_json(s)).unwrap_or(json!(null)),
        None => json!(null),
    }
}
