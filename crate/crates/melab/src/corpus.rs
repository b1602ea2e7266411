//! Built-in graphs and measures used when no spec file is given, and by the
//! acceptance tests.
//!
//! Every graph is transitive, has at most 8 vertices, and has vertex 0 as a
//! vertex of highest out-degree.

use melab_core::{FiniteGraph, Graph, MarkovMeasure, ShiftSpec, Vertex};

use crate::error::Result;

fn edges_of(n: usize, edges: &[(Vertex, Vertex)]) -> FiniteGraph {
    FiniteGraph::new(n, edges).expect("corpus graphs are valid")
}

fn hub(n: Vertex, back: &[Vertex], extra: &[(Vertex, Vertex)], self_loop: bool) -> Vec<(Vertex, Vertex)> {
    let mut e: Vec<(Vertex, Vertex)> = (1..n).map(|i| (0, i)).collect();
    e.extend(back.iter().map(|&i| (i, 0)));
    e.extend_from_slice(extra);
    if self_loop {
        e.push((0, 0));
    }
    e
}

/// The named graph corpus.
pub fn graphs() -> Vec<(&'static str, FiniteGraph)> {
    let all = |n: Vertex| (1..n).collect::<Vec<_>>();
    let ladder5 = {
        let mut e = Vec::new();
        for i in 0..5 as Vertex {
            for j in 0..5 as Vertex {
                if i.abs_diff(j) <= 1 {
                    e.push((i, j));
                }
            }
        }
        e.extend([(0, 2), (2, 0), (0, 3), (3, 0), (0, 4), (4, 0)]);
        e
    };
    vec![
        ("golden", edges_of(2, &[(0, 0), (0, 1), (1, 0)])),
        ("full2", FiniteGraph::complete(2).expect("valid")),
        ("full3", FiniteGraph::complete(3).expect("valid")),
        ("tri", edges_of(3, &[(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 0)])),
        (
            "hub4",
            edges_of(4, &hub(4, &all(4), &[(1, 2), (2, 3), (3, 1)], true)),
        ),
        (
            "hub5",
            edges_of(5, &hub(5, &all(5), &[(1, 2), (2, 3), (3, 4), (4, 1), (2, 4)], false)),
        ),
        (
            "hub6",
            edges_of(
                6,
                &hub(6, &[1, 2, 3, 5], &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)], true),
            ),
        ),
        (
            "twocycles6",
            edges_of(
                6,
                &[(0, 0), (0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 5), (5, 0), (4, 0), (1, 0)],
            ),
        ),
        (
            "hub7",
            edges_of(
                7,
                &hub(7, &all(7), &[(1, 2), (2, 3), (3, 1), (4, 5), (5, 6), (6, 4), (3, 4)], false),
            ),
        ),
        (
            "hub8",
            edges_of(
                8,
                &hub(
                    8,
                    &[1, 2, 4, 6, 7],
                    &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 1), (3, 6), (5, 2)],
                    false,
                ),
            ),
        ),
        ("ladder5", edges_of(5, &ladder5)),
    ]
}

pub fn graph(name: &str) -> Option<FiniteGraph> {
    graphs().into_iter().find(|(n, _)| *n == name).map(|(_, g)| g)
}

/// Three finite-entropy specs for the semi-continuity scans.
pub fn finite_entropy_specs() -> Vec<(&'static str, ShiftSpec)> {
    ["golden", "tri", "hub5"]
        .into_iter()
        .map(|n| (n, ShiftSpec::Finite(graph(n).expect("corpus name"))))
        .collect()
}

/// Vertex of highest out-degree, smallest index on ties.
pub fn highest_degree_vertex(g: &FiniteGraph) -> Vertex {
    (0..g.vertex_count() as Vertex)
        .max_by_key(|&v| (g.out_degree(v), std::cmp::Reverse(v)))
        .unwrap_or(0)
}

/// Measures on the corpus graphs: the Parry measure of every graph, a
/// non-uniform Markov measure on each (favoring edges into vertex 0), two Bernoulli measures and two
/// periodic orbits. Each entry names the graph it lives on.
pub fn measures() -> Result<Vec<(String, &'static str, MarkovMeasure)>> {
    let mut out = Vec::new();
    for (name, g) in graphs() {
        out.push((format!("parry_{name}"), name, MarkovMeasure::parry(&g)?));
        let n = g.vertex_count();
        let mut rows = vec![vec![0.0; n]; n];
        for (k, (u, v)) in g.edges().enumerate() {
            // edges back to the hub weigh more, so returns to it are quick
            rows[u as usize][v as usize] = if v == 0 { 2.0 } else { 1.0 + 0.5 * (k % 3) as f64 };
        }
        for r in &mut rows {
            let s: f64 = r.iter().sum();
            r.iter_mut().for_each(|x| *x /= s);
        }
        out.push((
            format!("skewed_{name}"),
            name,
            MarkovMeasure::markov((0..n as Vertex).collect(), &rows)?,
        ));
    }
    out.push(("bernoulli_full2".into(), "full2", MarkovMeasure::bernoulli_on(&[0.3, 0.7])?));
    out.push((
        "bernoulli_full3".into(),
        "full3",
        MarkovMeasure::bernoulli_on(&[0.2, 0.5, 0.3])?,
    ));
    out.push(("dirac_fixed".into(), "golden", MarkovMeasure::dirac_periodic(&[0])?));
    out.push(("dirac_cycle".into(), "hub4", MarkovMeasure::dirac_periodic(&[1, 2, 3])?));
    Ok(out)
}
