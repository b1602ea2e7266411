//! Three estimates of the Gurevich entropy side by side: periodic-orbit
//! growth at a base vertex, the spectral radius of the truncation, and the
//! renewal equation of the first-return counts at the base vertex.

use melab_core::entropy::{gurevich_entropy_periodic, gurevich_entropy_truncation, loop_counts_entropy, loop_system_entropy};
use melab_core::shift::first_return_counts;
use melab_core::{FiniteGraph, ShiftSpec};
use rayon::prelude::*;
use serde_json::json;

use super::{positive, spec_label, summary, Experiment, Outcome};
use crate::corpus;
use crate::error::Result;
use crate::output::Table;

pub const PERIODIC_N_MAX: usize = 60;
pub const RENEWAL_HORIZON: usize = 400;
pub const PAIRWISE_TOL: f64 = 0.05;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Params {
    /// Bound on `|spectral - renewal|`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimates {
    pub base: u32,
    pub periodic: f64,
    pub spectral: f64,
    pub renewal: f64,
}

impl Estimates {
    pub fn max_pair_gap(&self) -> f64 {
        let v = [self.periodic, self.spectral, self.renewal];
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn spectral_renewal_gap(&self) -> f64 {
        (self.spectral - self.renewal).abs()
    }
}

pub fn estimate_graph(g: &FiniteGraph) -> Result<Estimates> {
    let a = corpus::highest_degree_vertex(g);
    let periodic = gurevich_entropy_periodic(g, a, PERIODIC_N_MAX, 1e-9)?.value;
    let spectral = gurevich_entropy_truncation(&ShiftSpec::Finite(g.clone()), 1, 1e-9)?.value;
    let counts = first_return_counts(g, a, RENEWAL_HORIZON)?;
    let renewal = loop_system_entropy(&counts, 1e-9)?.value;
    Ok(Estimates {
        base: a,
        periodic,
        spectral,
        renewal,
    })
}

/// Countable specs: the spectral estimate runs along the exhaustion; loop
/// systems take the periodic and renewal estimates from their counts.
pub fn estimate_spec(spec: &ShiftSpec) -> Result<Estimates> {
    match spec {
        ShiftSpec::Finite(g) => estimate_graph(g),
        ShiftSpec::Truncated { .. } => {
            let g = spec.deepest()?;
            let mut e = estimate_graph(&g)?;
            e.spectral = gurevich_entropy_truncation(spec, spec.cutoff(), 1e-9)?.value;
            Ok(e)
        }
        ShiftSpec::Loops(lc) => {
            let z = lc.returns_at_base(PERIODIC_N_MAX);
            let periodic = (1..=PERIODIC_N_MAX)
                .rev()
                .find(|&n| z[n].bits() > 0)
                .map_or(0.0, |n| melab_core::entropy::ln_big(&z[n]) / n as f64);
            let renewal = loop_counts_entropy(lc, 1e-9)?.value;
            let spectral = gurevich_entropy_truncation(spec, spec.cutoff(), 1e-9)?.value;
            Ok(Estimates {
                base: 0,
                periodic,
                spectral,
                renewal,
            })
        }
    }
}

pub fn run(spec: Option<&ShiftSpec>, p: &Params) -> Result<Outcome> {
    positive("tol", p.tol)?;
    let rows: Vec<(String, usize, Estimates)> = match spec {
        Some(s) => vec![("spec".into(), s.deepest().map_or(0, |g| melab_core::Graph::vertex_count(&g)), estimate_spec(s)?)],
        None => corpus::graphs()
            .into_par_iter()
            .map(|(name, g)| Ok((name.to_string(), melab_core::Graph::vertex_count(&g), estimate_graph(&g)?)))
            .collect::<Result<Vec<_>>>()?,
    };
    let mut table = Table::new(
        "entropy_compare",
        &["graph", "vertices", "base", "periodic", "spectral", "renewal", "max_pair_gap", "spectral_renewal_gap", "agree"],
    );
    let mut failures = 0usize;
    for (name, n, e) in &rows {
        let agree = e.max_pair_gap() < PAIRWISE_TOL && e.spectral_renewal_gap() < p.tol;
        failures += usize::from(!agree);
        table.push(vec![
            name.as_str().into(),
            (*n).into(),
            (e.base as usize).into(),
            e.periodic.into(),
            e.spectral.into(),
            e.renewal.into(),
            e.max_pair_gap().into(),
            e.spectral_renewal_gap().into(),
            agree.into(),
        ]);
    }
    let params = json!({
        "spec": spec_label(spec),
        "periodic_n_max": PERIODIC_N_MAX,
        "renewal_horizon": RENEWAL_HORIZON,
        "pairwise_tol": PAIRWISE_TOL,
        "tol": p.tol,
        "seed": p.seed,
    });
    let passed = failures == 0;
    let mut s = summary(Experiment::EntropyCompare, params, if passed { "agree" } else { "disagree" });
    s.notes.push(format!("{} of {} rows agree", rows.len() - failures, rows.len()));
    Ok(Outcome {
        tables: vec![table],
        summary: s,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use melab_core::{LoopCounts, Rule};

    #[test]
    fn corpus_agrees() {
        let out = run(None, &Params::default()).unwrap();
        assert!(out.passed, "{:?}", out.summary);
    }

    #[test]
    fn countable_specs() {
        let renewal = ShiftSpec::Truncated {
            rule: Rule::Renewal,
            cutoff: 40,
        };
        let e = estimate_spec(&renewal).unwrap();
        assert!((e.spectral - e.renewal).abs() < 1e-9, "{e:?}");
        let loops = ShiftSpec::Loops(LoopCounts::explicit(vec![1, 1]));
        let e = estimate_spec(&loops).unwrap();
        let ln_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((e.renewal - ln_phi).abs() < 1e-9);
        assert!((e.spectral - ln_phi).abs() < 1e-9);
        assert!((e.periodic - ln_phi).abs() < 0.02);
    }
}
