//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its pass/fail line; exits nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use melab::corpus;
use melab::experiments::{counterexample, entropy_compare, flow_usc, usc_scan};
use melab::families::{random_markov, random_potential, stream};
use melab::output::Cell;
use melab::{Config, Experiment};
use melab_core::entropy::{gurevich_entropy_periodic, gurevich_entropy_truncation, gurevich_pressure, loop_system_entropy as counts_entropy};
use melab_core::measure::{free_energy, ks_entropy, partition_entropy};
use melab_core::recoding::{build_loop_system, induced_return_distribution, loop_system_entropy};
use melab_core::shift::{first_return_counts, first_return_words};
use melab_core::suspension::{abramov_entropy, brw_lift_check, kac_integral, lift_measure};
use melab_core::weakstar::{check_weakstar_limit, sup_deviation, usc_check};
use melab_core::{
    Graph, MarkovMeasure, Potential, RoofFunction, Rule, RuleGraph, ShiftSpec, UscTolerances, UscVerdict, Vertex,
    WeakStarVerdict,
};
use num_bigint::BigUint;
use rand::Rng;

/// Collects named checks and the time budget of one criterion.
struct Checks {
    items: Vec<(String, bool)>,
}

impl Checks {
    fn new() -> Self {
        Self { items: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.items.push((name.into(), ok));
    }

    fn failures(&self) -> Vec<&str> {
        self.items.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect()
    }
}

fn ln_phi() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

fn criterion_counterexample(c: &mut Checks) {
    let h = std::f64::consts::LN_2;
    let ns = counterexample::DEFAULT_NS;
    let seq = counterexample::sequence(h, &ns).unwrap();
    let delta = MarkovMeasure::dirac_periodic(&[0]).unwrap();
    let g = RuleGraph::truncation(Rule::Full, ns[ns.len() - 1]);
    let mut prev_dev = f64::INFINITY;
    for (mu, &n) in seq.iter().zip(&ns) {
        let a = h / (n as f64).ln();
        let closed = -(1.0 - a) * (1.0 - a).ln() - a * a.ln() + a * (n as f64).ln();
        let h1 = partition_entropy(mu, 1).unwrap().h(1);
        c.check(format!("closed form n={n}"), (h1 - closed).abs() < 1e-10);
        c.check(format!("entropy n={n}"), (ks_entropy(mu) - h1).abs() < 1e-10 && h1 >= 0.69);
        let dev = sup_deviation(mu, &delta, &g, 3).unwrap()[2];
        c.check(format!("deviation decreases n={n}"), dev < prev_dev);
        prev_dev = dev;
        if n >= 10_000 {
            let metric = melab_core::weakstar::cylinder_metric(mu, &delta, &g, 3).unwrap();
            c.check(format!("metric below 0.2 n={n}"), metric < 0.2);
        }
        if n == 100 {
            c.check("H1(100) oracle", (h1 - 1.1167485450380676).abs() < 1e-10);
        }
    }
    c.check("point mass has zero entropy", ks_entropy(&delta) == 0.0);
    let conv = check_weakstar_limit(&seq, &delta, &g, 3, 0.2).unwrap();
    c.check("weak* limit is the point mass", conv.verdict == WeakStarVerdict::Converges);
    let usc = usc_check(&seq, &delta, &g, 3, UscTolerances { weakstar: 0.2, entropy: 1e-8 }).unwrap();
    c.check("usc_violated", usc.verdict == UscVerdict::Violated);
    let out = counterexample::run(None, &counterexample::Params::default()).unwrap();
    c.check("experiment passes", out.passed && out.summary.verdict == "usc_violated");
}

fn criterion_entropy(c: &mut Checks) {
    let graphs = corpus::graphs();
    c.check("at least 10 graphs", graphs.len() >= 10);
    for (name, g) in &graphs {
        let a = corpus::highest_degree_vertex(g);
        let periodic = gurevich_entropy_periodic(g, a, 60, 1e-9).unwrap().value;
        let spectral = gurevich_entropy_truncation(&ShiftSpec::Finite(g.clone()), 1, 1e-9).unwrap().value;
        let renewal = counts_entropy(&first_return_counts(g, a, 400).unwrap(), 1e-9).unwrap().value;
        let pair = (periodic - spectral).abs().max((periodic - renewal).abs()).max((spectral - renewal).abs());
        c.check(format!("{name} pairwise"), pair < 0.05);
        c.check(format!("{name} spectral vs renewal"), (spectral - renewal).abs() < 1e-6);
        if *name == "golden" {
            c.check("golden value", (spectral - ln_phi()).abs() < 1e-9);
        }
    }
    let out = entropy_compare::run(None, &entropy_compare::Params::default()).unwrap();
    c.check("experiment passes", out.passed);
}

fn criterion_usc(c: &mut Checks) {
    for (name, spec) in corpus::finite_entropy_specs() {
        let out = usc_scan::run(&spec, &usc_scan::Params::default()).unwrap();
        let verdicts = out.table("usc_scan").unwrap().column("verdict").unwrap();
        let violated = verdicts
            .iter()
            .filter(|v| matches!(v, Cell::Text(s) if s == "usc_violated"))
            .count();
        c.check(format!("{name}: 100 families"), verdicts.len() == 100);
        c.check(format!("{name}: no violations"), violated == 0);
        c.check(format!("{name}: all usc_holds"), out.passed);
    }
}

fn criterion_markov(c: &mut Checks) {
    for (name, _, mu) in corpus::measures().unwrap() {
        let h = ks_entropy(&mu);
        let table = partition_entropy(&mu, 7).unwrap();
        let exact = table.increments().iter().all(|inc| (inc - h).abs() < 1e-10);
        c.check(format!("{name} increments"), exact);
        c.check(format!("{name} ratios"), table.ratios_nonincreasing(1e-12));
    }
}

fn criterion_variational(c: &mut Checks) {
    for (si, (name, g)) in corpus::graphs().into_iter().enumerate() {
        let spec = ShiftSpec::Finite(g.clone());
        let mut rng = stream(5, si as u64);
        let mut ok = true;
        for _ in 0..50 {
            let mu = random_markov(&g, &mut rng).unwrap();
            let phi = random_potential(g.vertex_count(), &mut rng);
            let p = gurevich_pressure(&spec, &phi, 1, 1e-9).unwrap().value;
            ok &= free_energy(&mu, &phi).unwrap() <= p + 1e-6;
        }
        c.check(format!("{name} inequality"), ok);
        let phi = random_potential(g.vertex_count(), &mut rng);
        let p = gurevich_pressure(&spec, &phi, 1, 1e-9).unwrap().value;
        let eq = MarkovMeasure::equilibrium(&g, &phi).unwrap();
        c.check(format!("{name} equality"), (free_energy(&eq, &phi).unwrap() - p).abs() < 1e-8);
    }
}

fn criterion_recoding(c: &mut Checks) {
    for (gi, (name, g)) in corpus::graphs().into_iter().enumerate() {
        let a: Vertex = 0;
        let ls = build_loop_system(&g, a, 40).unwrap();
        let mut counts_ok = true;
        for n in 0..=12 {
            let words = first_return_words(&g, a, n).unwrap();
            counts_ok &= ls.counts()[n] == BigUint::from(words.len());
            counts_ok &= ls.labels(n).unwrap() == words;
        }
        c.check(format!("{name} level counts"), counts_ok);

        let levels: Vec<usize> = (0..=12).filter(|&n| ls.count_u64(n).unwrap_or(0) > 0).collect();
        let mut rng = stream(11, gi as u64);
        let mut round_trips = 0;
        for _ in 0..1000 {
            let mut word = vec![a];
            for _ in 0..rng.gen_range(1..=8) {
                let level = levels[rng.gen_range(0..levels.len())];
                let idx = rng.gen_range(0..ls.count_u64(level).unwrap());
                word.extend(ls.unrank(level, &BigUint::from(idx)).unwrap());
                word.push(a);
            }
            let coded = ls.recode_word(&word).unwrap();
            if ls.is_admissible(&coded) && ls.decode_word(&coded).unwrap() == word {
                round_trips += 1;
            }
        }
        c.check(format!("{name} 1000 round trips"), round_trips == 1000);

        let spectral = gurevich_entropy_truncation(&ShiftSpec::Finite(g.clone()), 1, 1e-9).unwrap().value;
        let deep = build_loop_system(&g, a, 400).unwrap();
        let renewal = loop_system_entropy(&deep, 1e-9).unwrap().value;
        c.check(format!("{name} renewal entropy"), (spectral - renewal).abs() < 1e-6);
    }
    for (name, _, mu) in corpus::measures().unwrap() {
        // base at the heaviest vertex; returns longer than the horizon
        // account for the whole Kac gap, as a longer horizon confirms
        let (ia, _) = mu
            .stationary()
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, &p)| if p > best.1 { (i, p) } else { best });
        let a = mu.support()[ia];
        let r = induced_return_distribution(&mu, a, 40).unwrap();
        let long = induced_return_distribution(&mu, a, 600).unwrap();
        c.check(format!("{name} escape deficit"), r.escaped < 1e-6);
        c.check(format!("{name} kac gap from escaped returns"), r.kac_gap() >= 41.0 * r.escaped - 1e-9);
        c.check(format!("{name} kac"), long.kac_gap().abs() < 1e-9);
    }
}

fn criterion_suspension(c: &mut Checks) {
    for (name, g) in corpus::graphs() {
        let n = g.vertex_count();
        let mu = MarkovMeasure::parry(&g).unwrap();
        let values: Vec<f64> = (0..n).map(|i| 0.5 + 0.25 * i as f64).collect();
        let tau = RoofFunction::on_vertices(&values).unwrap();
        let nu = lift_measure(&mu, &tau).unwrap();
        c.check(format!("{name} kac of roof"), kac_integral(tau.as_potential(), &nu).unwrap() == 1.0);
        let h = abramov_entropy(&nu).unwrap();
        for s in [0.5, 2.0, 10.0] {
            let scaled = lift_measure(&mu, &tau.scaled(s).unwrap()).unwrap();
            c.check(format!("{name} abramov scaling {s}"), (abramov_entropy(&scaled).unwrap() - h / s).abs() < 1e-12);
        }
        let f = Potential::on_vertices(&(0..n).map(|i| (i as f64).sin()).collect::<Vec<_>>());
        for q in [16, 64, 256] {
            let check = brw_lift_check(&f, &tau, &g, q).unwrap();
            c.check(format!("{name} lift quadrature {q}"), check.within_bound);
        }
    }
    for (name, spec) in corpus::finite_entropy_specs() {
        let g = spec.deepest().unwrap();
        let values: Vec<f64> = (0..g.vertex_count()).map(|i| 1.0 + 0.5 * i as f64).collect();
        let tau = RoofFunction::on_vertices(&values).unwrap();
        let out = flow_usc::run(&spec, Some(&tau), &flow_usc::Params::default()).unwrap();
        c.check(format!("{name} flow usc_holds"), out.passed && out.summary.verdict == "usc_holds");
    }
    let full = ShiftSpec::Truncated {
        rule: Rule::Full,
        cutoff: 64,
    };
    let out = flow_usc::run(&full, None, &flow_usc::Params::default()).unwrap();
    c.check("unit-roof counterexample usc_violated", out.passed && out.summary.verdict == "usc_violated");
}

fn criterion_determinism(c: &mut Checks) {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("golden.json");
    std::fs::write(&golden, r#"{"type": "finite", "vertices": 2, "edges": [[0, 0], [0, 1], [1, 0]]}"#).unwrap();
    let full = dir.path().join("full.json");
    std::fs::write(&full, r#"{"type": "truncated", "rule": "full", "cutoff": 64}"#).unwrap();
    for experiment in Experiment::ALL {
        let mut outputs = Vec::new();
        for (run, threads) in [(0, 1), (1, 4)] {
            let mut cfg = Config::new(experiment, dir.path().join(format!("{experiment}_{run}")));
            cfg.seed = 42;
            cfg.families = Some(10);
            cfg.spec = match experiment {
                Experiment::Counterexample | Experiment::EntropyCompare => None,
                _ => Some(golden.clone()),
            };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let mut outcome = pool.install(|| melab::execute(&cfg)).unwrap();
            let paths = melab::output::write_outputs(&cfg.out, &outcome.tables, &mut outcome.summary).unwrap();
            let csv: Vec<Vec<u8>> = paths
                .iter()
                .filter(|p| p.extension().is_some_and(|e| e == "csv"))
                .map(|p| std::fs::read(p).unwrap())
                .collect();
            outputs.push(csv);
        }
        c.check(format!("{experiment} byte-identical"), !outputs[0].is_empty() && outputs[0] == outputs[1]);
    }
    let mut cfg = Config::new(Experiment::FlowUsc, dir.path().join("flow_full"));
    cfg.spec = Some(full);
    let a = melab::execute(&cfg).unwrap();
    let b = melab::execute(&cfg).unwrap();
    let bytes = |o: &melab::Outcome| o.tables.iter().map(|t| t.to_csv().unwrap()).collect::<Vec<_>>();
    c.check("flow transfer byte-identical", bytes(&a) == bytes(&b));
}

type Criterion = fn(&mut Checks);

fn main() {
    let criteria: [(&str, Criterion, Option<Duration>); 8] = [
        ("counterexample reproduction", criterion_counterexample, Some(Duration::from_secs(5))),
        ("entropy cross-validation", criterion_entropy, Some(Duration::from_secs(10))),
        ("usc at desk scale", criterion_usc, Some(Duration::from_secs(60))),
        ("markov exactness", criterion_markov, None),
        ("variational principle", criterion_variational, None),
        ("recoding soundness", criterion_recoding, None),
        ("suspension flows", criterion_suspension, None),
        ("determinism", criterion_determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let mut checks = Checks::new();
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(|| run(&mut checks)));
        let elapsed = start.elapsed();
        let mut problems: Vec<String> = checks.failures().into_iter().map(String::from).collect();
        if let Err(e) = result {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            problems.push(format!("panicked: {msg}"));
        }
        if let Some(limit) = budget {
            if elapsed > *limit {
                problems.push(format!("runtime {:.2}s over {}s", elapsed.as_secs_f64(), limit.as_secs()));
            }
        }
        let status = if problems.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {} ({name}): {status} [{} checks, {:.2}s]",
            i + 1,
            checks.items.len(),
            elapsed.as_secs_f64()
        );
        for p in &problems {
            println!("    failed: {p}");
        }
        failed += usize::from(!problems.is_empty());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
