//! Bernoulli measures `(1 - a_n, a_n/n, ..., a_n/n)` with `a_n = h / log n`
//! on the full shift over `{0..n}`. Their entropies decrease to `h > 0` while
//! they converge to the point mass at `0`, which has entropy zero.

use melab_core::measure::{bernoulli_counterexample_measure, counterexample_weight, ks_entropy, partition_entropy};
use melab_core::weakstar::{cylinder_metric, sup_deviation, usc_check};
use melab_core::{MarkovMeasure, Rule, RuleGraph, ShiftSpec, UscTolerances, UscVerdict, WeakStarVerdict};
use serde_json::json;

use super::{positive, spec_label, summary, Experiment, Outcome};
use crate::error::{LabError, Result};
use crate::output::Table;

pub const DEFAULT_NS: [usize; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];
pub const DEFAULT_TOL: f64 = 0.2;
pub const DEFAULT_DEPTH: usize = 3;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Entropy slack for the semi-continuity check.
pub const ENTROPY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Params {
    pub h: f64,
    pub ns: Vec<usize>,
    pub depth: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            h: std::f64::consts::LN_2,
            ns: DEFAULT_NS.to_vec(),
            depth: DEFAULT_DEPTH,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

/// `-(1 - a) log(1 - a) - a log a + a log n`.
pub fn closed_form(h: f64, n: usize) -> f64 {
    let a = counterexample_weight(h, n);
    -(1.0 - a) * (1.0 - a).ln() - a * a.ln() + a * (n as f64).ln()
}

/// The sequence, checked for validity of every `n`.
pub fn sequence(h: f64, ns: &[usize]) -> Result<Vec<MarkovMeasure>> {
    positive("h", h)?;
    ns.iter()
        .map(|&n| {
            bernoulli_counterexample_measure(h, n)
                .map_err(|e| LabError::Precondition(format!("n = {n} is invalid for h = {h}: {e}")))
        })
        .collect()
}

fn check_spec(spec: Option<&ShiftSpec>) -> Result<()> {
    match spec {
        None | Some(ShiftSpec::Truncated { rule: Rule::Full, .. }) => Ok(()),
        Some(_) => Err(LabError::Precondition(
            "the counterexample lives on the full shift over a countable alphabet; pass a truncated spec with rule \"full\" or no spec".into(),
        )),
    }
}

pub fn run(spec: Option<&ShiftSpec>, p: &Params) -> Result<Outcome> {
    check_spec(spec)?;
    positive("tol", p.tol)?;
    super::at_least_one("depth", p.depth)?;
    let seq = sequence(p.h, &p.ns)?;
    let delta = MarkovMeasure::dirac_periodic(&[0])?;
    let max_n = p.ns.iter().copied().max().unwrap_or(1);
    let g = RuleGraph::truncation(Rule::Full, max_n);

    let mut table = Table::new(
        "counterexample",
        &["n", "a_n", "H1", "closed_form", "h_target", "ks_entropy", "deviation_to_delta0", "metric_to_delta0"],
    );
    let mut closed_ok = true;
    let mut h1s = Vec::new();
    for (mu, &n) in seq.iter().zip(&p.ns) {
        let h1 = partition_entropy(mu, 1)?.h(1);
        let closed = closed_form(p.h, n);
        closed_ok &= (h1 - closed).abs() < CLOSED_FORM_TOL;
        let dev = sup_deviation(mu, &delta, &g, p.depth)?[p.depth - 1];
        let metric = cylinder_metric(mu, &delta, &g, p.depth)?;
        table.push(vec![
            n.into(),
            counterexample_weight(p.h, n).into(),
            h1.into(),
            closed.into(),
            p.h.into(),
            ks_entropy(mu).into(),
            dev.into(),
            metric.into(),
        ]);
        h1s.push(h1);
    }
    // sorted by n, H1 decreases toward h from above
    let mut order: Vec<usize> = (0..p.ns.len()).collect();
    order.sort_by_key(|&i| p.ns[i]);
    let trend_ok = order.iter().all(|&i| h1s[i] >= p.h) && order.windows(2).all(|w| h1s[w[1]] < h1s[w[0]]);

    let params = json!({
        "spec": spec_label(spec),
        "h": p.h,
        "ns": p.ns,
        "depth": p.depth,
        "tol": p.tol,
        "seed": p.seed,
    });
    if seq.is_empty() {
        let mut s = summary(Experiment::Counterexample, params, "empty");
        s.notes.push("no n values given".into());
        return Ok(Outcome {
            tables: vec![table],
            summary: s,
            passed: true,
        });
    }
    let mut notes = Vec::new();
    let mut checks = vec![("closed_form", closed_ok), ("h1_trend", trend_ok)];
    let verdict = if seq.len() >= 3 {
        let sorted: Vec<MarkovMeasure> = order.iter().map(|&i| seq[i].clone()).collect();
        let tols = UscTolerances {
            weakstar: p.tol,
            entropy: ENTROPY_TOL,
        };
        let report = usc_check(&sorted, &delta, &g, p.depth, tols)?;
        checks.push(("weakstar_to_delta0", report.convergence.verdict == WeakStarVerdict::Converges));
        checks.push(("usc_violated", report.verdict == UscVerdict::Violated));
        notes.push(format!(
            "weak* verdict {}, limsup proxy {:.6} against limit entropy {}",
            report.convergence.verdict.as_str(),
            report.tail_max,
            report.limit_entropy
        ));
        report.verdict.as_str().to_string()
    } else {
        notes.push("fewer than 3 values of n: weak* and semi-continuity checks skipped".into());
        "not_applicable".to_string()
    };
    let passed = checks.iter().all(|(_, ok)| *ok);
    let mut s = summary(Experiment::Counterexample, params, &verdict);
    for (name, ok) in checks {
        s.notes.push(format!("{name}: {}", if ok { "pass" } else { "fail" }));
    }
    s.notes.extend(notes);
    Ok(Outcome {
        tables: vec![table],
        summary: s,
        passed,
    })
}
