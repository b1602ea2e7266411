//! Seeded families of ergodic Markov measures converging along segments of
//! the stochastic-matrix simplex, each checked for upper semi-continuity of
//! the entropy map at its limit.

use melab_core::measure::ks_entropy;
use melab_core::weakstar::{usc_check, UscReport};
use melab_core::{ShiftSpec, UscTolerances, UscVerdict};
use rayon::prelude::*;
use serde_json::json;

use super::{positive, require_finite_entropy, spec_label, summary, transitive_graph, Experiment, Outcome};
use crate::error::Result;
use crate::families::{interpolation_family, Family};
use crate::output::Table;

pub const DEFAULT_FAMILIES: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_DEPTH: usize = 3;

#[derive(Debug, Clone)]
pub struct Params {
    pub families: usize,
    pub seed: u64,
    pub depth: usize,
    pub tol: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            families: DEFAULT_FAMILIES,
            seed: 0,
            depth: DEFAULT_DEPTH,
            tol: DEFAULT_TOL,
        }
    }
}

pub fn run(spec: &ShiftSpec, p: &Params) -> Result<Outcome> {
    require_finite_entropy(spec, Experiment::UscScan)?;
    positive("tol", p.tol)?;
    super::at_least_one("depth", p.depth)?;
    let g = transitive_graph(spec)?;
    let results: Vec<(Family, UscReport)> = (0..p.families as u64)
        .into_par_iter()
        .map(|i| {
            let fam = interpolation_family(&g, p.seed, i)?;
            let report = usc_check(&fam.members, &fam.limit, &g, p.depth, UscTolerances::uniform(p.tol))?;
            Ok((fam, report))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut families = Table::new(
        "usc_scan",
        &["family", "verdict", "weakstar", "limit_entropy", "tail_max", "excess", "final_deviation"],
    );
    let mut members = Table::new("usc_members", &["family", "member", "t", "entropy", "deviation", "metric"]);
    let mut holds = 0usize;
    for (i, (fam, r)) in results.iter().enumerate() {
        holds += usize::from(r.verdict == UscVerdict::Holds);
        families.push(vec![
            i.into(),
            r.verdict.as_str().into(),
            r.convergence.verdict.as_str().into(),
            r.limit_entropy.into(),
            r.tail_max.into(),
            (r.tail_max - r.limit_entropy).into(),
            r.convergence.final_deviation().into(),
        ]);
        for (j, m) in fam.members.iter().enumerate() {
            members.push(vec![
                i.into(),
                j.into(),
                fam.ts[j].into(),
                ks_entropy(m).into(),
                r.convergence.deviation(j).into(),
                r.convergence.metrics[j].into(),
            ]);
        }
    }
    let violated = results.iter().filter(|(_, r)| r.verdict == UscVerdict::Violated).count();
    let passed = holds == results.len();
    let verdict = if passed {
        "usc_holds"
    } else if violated > 0 {
        "usc_violated"
    } else {
        "inconclusive"
    };
    let params = json!({
        "spec": spec_label(Some(spec)),
        "families": p.families,
        "seed": p.seed,
        "depth": p.depth,
        "tol": p.tol,
    });
    let mut s = summary(Experiment::UscScan, params, verdict);
    s.notes.push(format!("{holds} of {} families usc_holds, {violated} usc_violated", results.len()));
    Ok(Outcome {
        tables: vec![families, members],
        summary: s,
        passed,
    })
}
