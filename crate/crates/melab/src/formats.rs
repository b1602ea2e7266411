//! JSON documents for shifts, measures, roofs and loop systems.
//!
//! Shift documents:
//!
//! ```json
//! {"type": "finite", "vertices": 2, "edges": [[0, 0], [0, 1], [1, 0]]}
//! {"type": "truncated", "rule": "full", "cutoff": 64}
//! {"type": "loops", "counts": [1, 1]}
//! {"type": "loops", "rule": "exp:2", "cutoff": 200}
//! ```
//!
//! `rule` is one of `full`, `renewal`, `ladder` for truncated shifts and one
//! of `const:C`, `exp:B` (`c_n = B^(n-1)`), `factorial` for loop systems.
//! Loop counts are indexed by loop length starting at 1. Unknown keys are
//! rejected.
//!
//! Measure documents carry `type` (`markov`, `bernoulli`, `dirac`),
//! `support`, the matrix `P` (Markov only) and the vector `p` (Bernoulli, or
//! an optional stationary vector for Markov). For `dirac` the support lists
//! the periodic orbit in order.
//!
//! Roof documents are `{"depth": d, "values": {"0,1": 1.5, ...}}` with words
//! written as comma-separated vertices, or `{"constant": c}`.

use std::collections::BTreeMap;
use std::path::Path;

use melab_core::recoding::LoopSystem;
use melab_core::{CountRule, FiniteGraph, Graph, LoopCounts, MarkovMeasure, MeasureKind, RoofFunction, Rule, ShiftSpec, Vertex};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftDoc {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<(i64, i64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<serde_json::Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cutoff: Option<usize>,
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Format(msg.into())
}

fn forbid<T>(field: &Option<T>, name: &str, kind: &str) -> Result<()> {
    if field.is_some() {
        return Err(bad(format!("key \"{name}\" is not allowed for type \"{kind}\"")));
    }
    Ok(())
}

fn parse_rule(s: &str) -> Result<Rule> {
    match s {
        "full" => Ok(Rule::Full),
        "renewal" => Ok(Rule::Renewal),
        "ladder" => Ok(Rule::Ladder),
        other => Err(bad(format!("unknown rule \"{other}\""))),
    }
}

fn rule_name(rule: Rule) -> &'static str {
    match rule {
        Rule::Full => "full",
        Rule::Renewal => "renewal",
        Rule::Ladder => "ladder",
    }
}

fn parse_count_rule(s: &str) -> Result<CountRule> {
    let number = |t: &str| {
        t.parse::<u64>()
            .map_err(|_| bad(format!("bad count rule \"{s}\"")))
    };
    if s == "factorial" {
        Ok(CountRule::Factorial)
    } else if let Some(c) = s.strip_prefix("const:") {
        Ok(CountRule::Constant(number(c)?))
    } else if let Some(b) = s.strip_prefix("exp:") {
        Ok(CountRule::Exponential(number(b)?))
    } else {
        Err(bad(format!("unknown count rule \"{s}\"")))
    }
}

fn count_rule_name(rule: &CountRule) -> Option<String> {
    match rule {
        CountRule::Explicit(_) => None,
        CountRule::Constant(c) => Some(format!("const:{c}")),
        CountRule::Exponential(b) => Some(format!("exp:{b}")),
        CountRule::Factorial => Some("factorial".into()),
    }
}

/// Parses and validates a shift document.
pub fn parse_shift_spec(text: &str) -> Result<ShiftSpec> {
    let doc: ShiftDoc = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let kind = doc.kind.as_str();
    match kind {
        "finite" => {
            forbid(&doc.counts, "counts", kind)?;
            forbid(&doc.rule, "rule", kind)?;
            forbid(&doc.cutoff, "cutoff", kind)?;
            let n = doc.vertices.ok_or_else(|| bad("finite shift needs \"vertices\""))?;
            let raw = doc.edges.ok_or_else(|| bad("finite shift needs \"edges\""))?;
            let mut edges = Vec::with_capacity(raw.len());
            for (u, v) in raw {
                let in_range = |x: i64| x >= 0 && (x as u64) < n as u64;
                if !in_range(u) || !in_range(v) {
                    return Err(bad(format!("edge [{u}, {v}] references an undeclared vertex")));
                }
                edges.push((u as Vertex, v as Vertex));
            }
            Ok(ShiftSpec::Finite(FiniteGraph::new(n, &edges)?))
        }
        "truncated" => {
            forbid(&doc.vertices, "vertices", kind)?;
            forbid(&doc.edges, "edges", kind)?;
            forbid(&doc.counts, "counts", kind)?;
            let rule = parse_rule(doc.rule.as_deref().ok_or_else(|| bad("truncated shift needs \"rule\""))?)?;
            let cutoff = doc.cutoff.ok_or_else(|| bad("truncated shift needs \"cutoff\""))?;
            Ok(ShiftSpec::Truncated { rule, cutoff })
        }
        "loops" => {
            forbid(&doc.vertices, "vertices", kind)?;
            forbid(&doc.edges, "edges", kind)?;
            match (doc.counts, doc.rule) {
                (Some(raw), None) => {
                    let mut counts = Vec::with_capacity(raw.len());
                    for c in raw {
                        match c.as_u64() {
                            Some(v) => counts.push(v),
                            None if c.as_i64().is_some_and(|v| v < 0) => {
                                return Err(bad(format!("negative loop count {c}")));
                            }
                            None => return Err(bad(format!("loop count {c} is not a u64"))),
                        }
                    }
                    let mut lc = LoopCounts::explicit(counts);
                    if let Some(cutoff) = doc.cutoff {
                        if cutoff < lc.cutoff {
                            return Err(bad(format!(
                                "cutoff {cutoff} is shorter than the {} listed counts",
                                lc.cutoff
                            )));
                        }
                        lc.cutoff = cutoff;
                    }
                    Ok(ShiftSpec::Loops(lc))
                }
                (None, Some(rule)) => {
                    let rule = parse_count_rule(&rule)?;
                    let cutoff = doc.cutoff.ok_or_else(|| bad("a loop-count rule needs \"cutoff\""))?;
                    Ok(ShiftSpec::Loops(LoopCounts { rule, cutoff }))
                }
                _ => Err(bad("loops need exactly one of \"counts\" and \"rule\"")),
            }
        }
        other => Err(bad(format!("unknown shift type \"{other}\""))),
    }
}

fn shift_doc(spec: &ShiftSpec) -> ShiftDoc {
    let mut doc = ShiftDoc {
        kind: String::new(),
        vertices: None,
        edges: None,
        counts: None,
        rule: None,
        cutoff: None,
    };
    match spec {
        ShiftSpec::Finite(g) => {
            doc.kind = "finite".into();
            doc.vertices = Some(g.vertex_count());
            doc.edges = Some(g.edges().map(|(u, v)| (u as i64, v as i64)).collect());
        }
        ShiftSpec::Truncated { rule, cutoff } => {
            doc.kind = "truncated".into();
            doc.rule = Some(rule_name(*rule).into());
            doc.cutoff = Some(*cutoff);
        }
        ShiftSpec::Loops(lc) => {
            doc.kind = "loops".into();
            match &lc.rule {
                CountRule::Explicit(c) => {
                    doc.counts = Some(c.iter().map(|&x| x.into()).collect());
                    if lc.cutoff != c.len() {
                        doc.cutoff = Some(lc.cutoff);
                    }
                }
                rule => {
                    doc.rule = count_rule_name(rule);
                    doc.cutoff = Some(lc.cutoff);
                }
            }
        }
    }
    doc
}

pub fn shift_spec_to_json(spec: &ShiftSpec) -> String {
    serde_json::to_string_pretty(&shift_doc(spec)).expect("shift documents serialize")
}

pub fn read_shift_spec(path: &Path) -> Result<ShiftSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_shift_spec(&text).map_err(|e| match e {
        LabError::Format(message) => LabError::Parse {
            path: path.to_path_buf(),
            message,
        },
        LabError::Core(err) => LabError::Parse {
            path: path.to_path_buf(),
            message: err.to_string(),
        },
        other => other,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    #[serde(rename = "type")]
    kind: String,
    support: Vec<Vertex>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Vec<f64>>,
}

pub fn parse_measure(text: &str) -> Result<MarkovMeasure> {
    let doc: MeasureDoc = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let kind = doc.kind.as_str();
    let measure = match kind {
        "markov" => {
            let rows = doc.matrix.ok_or_else(|| bad("markov measure needs \"P\""))?;
            match doc.p {
                Some(p) => MarkovMeasure::markov_with_stationary(doc.support, &rows, p)?,
                None => MarkovMeasure::markov(doc.support, &rows)?,
            }
        }
        "bernoulli" => {
            forbid(&doc.matrix, "P", kind)?;
            let p = doc.p.ok_or_else(|| bad("bernoulli measure needs \"p\""))?;
            MarkovMeasure::bernoulli(doc.support, &p)?
        }
        "dirac" => {
            forbid(&doc.matrix, "P", kind)?;
            forbid(&doc.p, "p", kind)?;
            MarkovMeasure::dirac_periodic(&doc.support)?
        }
        other => return Err(bad(format!("unknown measure type \"{other}\""))),
    };
    Ok(measure)
}

/// Serializes a measure; periodic-orbit measures list their orbit in order.
pub fn measure_to_json(mu: &MarkovMeasure) -> String {
    let doc = match mu.kind() {
        MeasureKind::Bernoulli => MeasureDoc {
            kind: "bernoulli".into(),
            support: mu.support().to_vec(),
            matrix: None,
            p: Some(mu.stationary().to_vec()),
        },
        MeasureKind::DiracPeriodic => {
            let mut orbit = vec![mu.support()[0]];
            while orbit.len() < mu.support().len() {
                let last = *orbit.last().unwrap_or(&0);
                let next = mu
                    .support()
                    .iter()
                    .copied()
                    .find(|&v| mu.transition(last, v) > 0.0)
                    .unwrap_or(last);
                orbit.push(next);
            }
            MeasureDoc {
                kind: "dirac".into(),
                support: orbit,
                matrix: None,
                p: None,
            }
        }
        MeasureKind::Markov => MeasureDoc {
            kind: "markov".into(),
            support: mu.support().to_vec(),
            matrix: Some(mu.rows()),
            p: Some(mu.stationary().to_vec()),
        },
    };
    serde_json::to_string_pretty(&doc).expect("measure documents serialize")
}

pub fn read_measure(path: &Path) -> Result<MarkovMeasure> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_measure(&text)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoofDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constant: Option<f64>,
}

/// `"0,1,2"` to `[0, 1, 2]`.
pub fn parse_word_key(key: &str) -> Result<Vec<Vertex>> {
    key.split(',')
        .map(|s| {
            s.trim()
                .parse::<Vertex>()
                .map_err(|_| bad(format!("bad word key \"{key}\"")))
        })
        .collect()
}

pub fn word_key(w: &[Vertex]) -> String {
    w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_roof(text: &str) -> Result<RoofFunction> {
    let doc: RoofDoc = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    match (doc.constant, doc.depth, doc.values) {
        (Some(c), None, None) => Ok(RoofFunction::constant(c)?),
        (None, Some(depth), Some(values)) => {
            let mut table = BTreeMap::new();
            for (k, v) in values {
                table.insert(parse_word_key(&k)?, v);
            }
            Ok(RoofFunction::new(depth, table)?)
        }
        _ => Err(bad("a roof needs either \"constant\" or both \"depth\" and \"values\"")),
    }
}

pub fn roof_to_json(tau: &RoofFunction) -> String {
    let pot = tau.as_potential();
    let doc = match pot.is_constant() {
        Some(c) => RoofDoc {
            depth: None,
            values: None,
            constant: Some(c),
        },
        None => RoofDoc {
            depth: Some(pot.depth()),
            values: pot
                .table()
                .map(|t| t.iter().map(|(w, v)| (word_key(w), *v)).collect()),
            constant: None,
        },
    };
    serde_json::to_string_pretty(&doc).expect("roof documents serialize")
}

pub fn read_roof(path: &Path) -> Result<RoofFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_roof(&text)
}

/// The loop system as a `loops` shift document (counts by loop length).
pub fn loop_system_to_spec(ls: &LoopSystem) -> Result<ShiftSpec> {
    let counts = ls
        .loop_counts()
        .iter()
        .map(|c| u64::try_from(c).map_err(|_| bad(format!("loop count {c} does not fit in u64"))))
        .collect::<Result<Vec<u64>>>()?;
    Ok(ShiftSpec::Loops(LoopCounts::explicit(counts)))
}

/// `(level, index, source word)` rows for every level up to `max_level`.
pub fn labeling_table(ls: &LoopSystem, max_level: usize) -> Result<Vec<(usize, BigUint, String)>> {
    let mut rows = Vec::new();
    for level in 0..=max_level.min(ls.horizon()) {
        for (i, w) in ls.labels(level)?.into_iter().enumerate() {
            rows.push((level, BigUint::from(i), word_key(&w.symbols)));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_round_trip() {
        let spec = parse_shift_spec(r#"{"type":"finite","vertices":2,"edges":[[0,0],[0,1],[1,0],[1,1]]}"#).unwrap();
        let ShiftSpec::Finite(g) = &spec else { panic!() };
        assert!(g.is_complete());
        assert_eq!(parse_shift_spec(&shift_spec_to_json(&spec)).unwrap(), spec);
    }

    #[test]
    fn loops_example() {
        let spec = parse_shift_spec(r#"{"type":"loops","counts":[1,1]}"#).unwrap();
        let ShiftSpec::Loops(lc) = &spec else { panic!() };
        assert_eq!(lc.counts(), vec![BigUint::from(1u8), BigUint::from(1u8)]);
        let g = lc.realize(2).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn rejects_bad_documents() {
        let err = parse_shift_spec(r#"{"type":"finite","vertices":1,"edges":[]}"#).unwrap_err();
        assert!(err.to_string().contains("no outgoing edge"), "{err}");
        assert!(parse_shift_spec(r#"{"type":"finite","vertices":2,"edges":[[0,2]]}"#).is_err());
        assert!(parse_shift_spec(r#"{"type":"loops","counts":[1,-1]}"#)
            .unwrap_err()
            .to_string()
            .contains("negative"));
        assert!(parse_shift_spec(r#"{"type":"finite","vertices":1,"edges":[[0,0]],"extra":1}"#).is_err());
        assert!(parse_shift_spec(r#"{"type":"truncated","rule":"sideways","cutoff":3}"#).is_err());
        assert!(parse_shift_spec("not json").is_err());
    }

    #[test]
    fn rule_documents() {
        let spec = parse_shift_spec(r#"{"type":"loops","rule":"exp:2","cutoff":30}"#).unwrap();
        assert_eq!(parse_shift_spec(&shift_spec_to_json(&spec)).unwrap(), spec);
        let spec = parse_shift_spec(r#"{"type":"truncated","rule":"ladder","cutoff":12}"#).unwrap();
        assert_eq!(spec, ShiftSpec::Truncated { rule: Rule::Ladder, cutoff: 12 });
    }

    #[test]
    fn measure_documents() {
        let m = parse_measure(r#"{"type":"markov","support":[0,1],"P":[[0.5,0.5],[1.0,0.0]]}"#).unwrap();
        assert!((m.stationary()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(parse_measure(&measure_to_json(&m)).unwrap(), m);
        let d = parse_measure(r#"{"type":"dirac","support":[2,0,1]}"#).unwrap();
        assert_eq!(d.transition(2, 0), 1.0);
        assert_eq!(parse_measure(&measure_to_json(&d)).unwrap(), d);
        let b = parse_measure(r#"{"type":"bernoulli","support":[0,1],"p":[0.25,0.75]}"#).unwrap();
        assert_eq!(parse_measure(&measure_to_json(&b)).unwrap(), b);
        assert!(parse_measure(r#"{"type":"markov","support":[0,1],"P":[[0.5,0.4],[1.0,0.0]]}"#).is_err());
    }

    #[test]
    fn roof_documents() {
        let r = parse_roof(r#"{"depth":2,"values":{"0,0":1.0,"0,1":2.0,"1,0":0.5}}"#).unwrap();
        assert_eq!(r.eval(&[0, 1]), Some(2.0));
        assert_eq!(parse_roof(&roof_to_json(&r)).unwrap(), r);
        let c = parse_roof(r#"{"constant":3.0}"#).unwrap();
        assert_eq!(c.eval(&[7]), Some(3.0));
        assert!(parse_roof(r#"{"depth":1,"values":{"0":-1.0}}"#).is_err());
        assert!(parse_roof(r#"{"depth":1,"values":{"x":1.0}}"#).is_err());
    }
}
