//! Semi-continuity of the entropy of suspension flows. On finite-entropy
//! specs the seeded base families are lifted under a common roof and must
//! satisfy the check; on an infinite-entropy spec the Bernoulli
//! counterexample is lifted under a constant roof and must violate it.

use melab_core::suspension::{flow_usc_check, lift_measure, FlowUscReport};
use melab_core::{FlowMeasure, MarkovMeasure, Rule, RuleGraph, RoofFunction, ShiftSpec, UscTolerances, UscVerdict};
use rayon::prelude::*;
use serde_json::json;

use super::counterexample;
use super::{positive, spec_label, summary, transitive_graph, Experiment, Outcome};
use crate::error::{LabError, Result};
use crate::families::interpolation_family;
use crate::formats::roof_to_json;
use crate::output::Table;

pub const DEFAULT_FAMILIES: usize = 20;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_DEPTH: usize = 3;

#[derive(Debug, Clone)]
pub struct Params {
    pub families: usize,
    pub seed: u64,
    pub depth: usize,
    pub tol: f64,
    /// Counterexample parameters, used on infinite-entropy specs.
    pub h: f64,
    pub ns: Vec<usize>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            families: DEFAULT_FAMILIES,
            seed: 0,
            depth: DEFAULT_DEPTH,
            tol: DEFAULT_TOL,
            h: std::f64::consts::LN_2,
            ns: counterexample::DEFAULT_NS.to_vec(),
        }
    }
}

fn lift_all(seq: &[MarkovMeasure], tau: &RoofFunction) -> Result<Vec<FlowMeasure>> {
    Ok(seq.iter().map(|m| lift_measure(m, tau)).collect::<std::result::Result<Vec<_>, _>>()?)
}

struct Run {
    params: Vec<Vec<f64>>,
    lifts: Vec<Vec<FlowMeasure>>,
    reports: Vec<FlowUscReport>,
    expected: UscVerdict,
}

fn finite_runs(spec: &ShiftSpec, tau: &RoofFunction, p: &Params) -> Result<Run> {
    let g = transitive_graph(spec)?;
    let results = (0..p.families as u64)
        .into_par_iter()
        .map(|i| {
            let fam = interpolation_family(&g, p.seed, i)?;
            let seq = lift_all(&fam.members, tau)?;
            let limit = lift_measure(&fam.limit, tau)?;
            let report = flow_usc_check(&seq, &limit, &g, p.depth, UscTolerances::uniform(p.tol))?;
            Ok((fam.ts, seq, report))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut run = Run {
        params: Vec::new(),
        lifts: Vec::new(),
        reports: Vec::new(),
        expected: UscVerdict::Holds,
    };
    for (ts, seq, report) in results {
        run.params.push(ts);
        run.lifts.push(seq);
        run.reports.push(report);
    }
    Ok(run)
}

fn counterexample_run(tau: &RoofFunction, p: &Params) -> Result<Run> {
    if tau.as_potential().is_constant().is_none() {
        return Err(LabError::Precondition(
            "the counterexample transfer needs a constant roof".into(),
        ));
    }
    let mut ns = p.ns.clone();
    ns.sort_unstable();
    if ns.len() < 3 {
        return Err(LabError::Precondition("the counterexample transfer needs at least 3 values of n".into()));
    }
    let base = counterexample::sequence(p.h, &ns)?;
    let g = RuleGraph::truncation(Rule::Full, ns[ns.len() - 1]);
    let seq = lift_all(&base, tau)?;
    let limit = lift_measure(&MarkovMeasure::dirac_periodic(&[0])?, tau)?;
    let tols = UscTolerances {
        weakstar: counterexample::DEFAULT_TOL,
        entropy: p.tol,
    };
    let report = flow_usc_check(&seq, &limit, &g, p.depth, tols)?;
    Ok(Run {
        params: vec![ns.iter().map(|&n| n as f64).collect()],
        lifts: vec![seq],
        reports: vec![report],
        expected: UscVerdict::Violated,
    })
}

pub fn run(spec: &ShiftSpec, roof: Option<&RoofFunction>, p: &Params) -> Result<Outcome> {
    positive("tol", p.tol)?;
    super::at_least_one("depth", p.depth)?;
    let unit = RoofFunction::constant(1.0)?;
    let tau = roof.unwrap_or(&unit);
    let finite = melab_core::entropy::has_finite_entropy(spec)?;
    let transfer = !finite;
    if transfer && !matches!(spec, ShiftSpec::Truncated { rule: Rule::Full, .. }) {
        return Err(LabError::Precondition(
            "infinite-entropy specs are only supported as the full countable shift (the counterexample transfer)".into(),
        ));
    }
    let run = if transfer {
        counterexample_run(tau, p)?
    } else {
        finite_runs(spec, tau, p)?
    };

    let mut families = Table::new(
        "flow_usc",
        &["family", "verdict", "base_weakstar", "limit_entropy", "tail_max", "final_z_gap"],
    );
    let mut members = Table::new(
        "flow_members",
        &["family", "member", "parameter", "abramov_entropy", "normalization", "z_gap", "deviation"],
    );
    for (i, r) in run.reports.iter().enumerate() {
        families.push(vec![
            i.into(),
            r.verdict.as_str().into(),
            r.base.verdict.as_str().into(),
            r.limit_entropy.into(),
            r.tail_max.into(),
            r.z_gaps[r.z_gaps.len() - 1].into(),
        ]);
        for (j, nu) in run.lifts[i].iter().enumerate() {
            members.push(vec![
                i.into(),
                j.into(),
                run.params[i][j].into(),
                r.entropies[j].into(),
                nu.normalization().into(),
                r.z_gaps[j].into(),
                r.base.deviation(j).into(),
            ]);
        }
    }
    let matching = run.reports.iter().filter(|r| r.verdict == run.expected).count();
    let passed = matching == run.reports.len();
    let verdict = if run.reports.iter().any(|r| r.verdict == UscVerdict::Violated) {
        UscVerdict::Violated
    } else if passed {
        UscVerdict::Holds
    } else {
        UscVerdict::NotApplicable
    };
    let roof_doc: serde_json::Value = serde_json::from_str(&roof_to_json(tau)).unwrap_or(json!(null));
    let params = json!({
        "spec": spec_label(Some(spec)),
        "roof": roof_doc,
        "mode": if transfer { "counterexample_transfer" } else { "families" },
        "families": if transfer { 1 } else { p.families },
        "seed": p.seed,
        "depth": p.depth,
        "tol": p.tol,
        "h": p.h,
        "ns": p.ns,
    });
    let mut s = summary(Experiment::FlowUsc, params, verdict.as_str());
    s.notes.push(format!(
        "{matching} of {} runs gave the expected verdict {}",
        run.reports.len(),
        run.expected.as_str()
    ));
    Ok(Outcome {
        tables: vec![families, members],
        summary: s,
        passed,
    })
}
