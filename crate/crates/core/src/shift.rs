//! Presentations of countable Markov shifts.
//!
//! Vertices are nonnegative integers. A countable graph is only ever observed
//! through finite truncations: the truncation at depth `k` of a rule-based
//! graph keeps the vertices `0..=k`, and the truncation at `k + 1` always
//! contains the one at `k` as a subgraph.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ENUMERATION_BUDGET;

pub type Vertex = u32;

/// Read access to a (finite) directed graph with vertices `0..vertex_count()`.
pub trait Graph {
    fn vertex_count(&self) -> usize;

    fn has_edge(&self, from: Vertex, to: Vertex) -> bool;

    /// Successors of `v` in increasing order.
    fn successors(&self, v: Vertex) -> Successors<'_>;

    /// True when every ordered pair of vertices is an edge.
    fn is_complete(&self) -> bool {
        false
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                count: self.vertex_count(),
            })
        }
    }
}

/// Iterator over the successors of a vertex, in increasing order.
#[derive(Debug, Clone)]
pub enum Successors<'a> {
    Slice(core::slice::Iter<'a, Vertex>),
    Range(core::ops::Range<Vertex>),
    Few { items: [Vertex; 3], len: u8, pos: u8 },
}

impl Iterator for Successors<'_> {
    type Item = Vertex;

    fn next(&mut self) -> Option<Vertex> {
        match self {
            Successors::Slice(it) => it.next().copied(),
            Successors::Range(r) => r.next(),
            Successors::Few { items, len, pos } => {
                if pos < len {
                    let v = items[*pos as usize];
                    *pos += 1;
                    Some(v)
                } else {
                    None
                }
            }
        }
    }
}

impl<G: Graph + ?Sized> Graph for &G {
    fn vertex_count(&self) -> usize {
        (**self).vertex_count()
    }
    fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        (**self).has_edge(from, to)
    }
    fn successors(&self, v: Vertex) -> Successors<'_> {
        (**self).successors(v)
    }
    fn is_complete(&self) -> bool {
        (**self).is_complete()
    }
}

/// Explicit finite graph with a 0/1 edge relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGraph {
    succ: Vec<Vec<Vertex>>,
}

impl FiniteGraph {
    /// Builds a graph on `0..vertices`. Every vertex needs an outgoing edge,
    /// otherwise no infinite path can visit it.
    pub fn new(vertices: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut succ = vec![Vec::new(); vertices];
        for &(from, to) in edges {
            for v in [from, to] {
                if v as usize >= vertices {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        count: vertices,
                    });
                }
            }
            succ[from as usize].push(to);
        }
        Self::from_successors(succ)
    }

    pub fn from_successors(mut succ: Vec<Vec<Vertex>>) -> Result<Self> {
        if succ.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let n = succ.len();
        for (v, row) in succ.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            if row.is_empty() {
                return Err(Error::NoOutgoingEdge { vertex: v as Vertex });
            }
            if let Some(&bad) = row.iter().find(|&&w| w as usize >= n) {
                return Err(Error::VertexOutOfRange {
                    vertex: bad,
                    count: n,
                });
            }
        }
        Ok(Self { succ })
    }

    pub fn complete(vertices: usize) -> Result<Self> {
        let all: Vec<Vertex> = (0..vertices as Vertex).collect();
        Self::from_successors(vec![all; vertices])
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i as Vertex, j)))
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.succ[v as usize].len()
    }

    /// Edge set inclusion, with `self` allowed to have fewer vertices.
    pub fn is_subgraph_of(&self, other: &FiniteGraph) -> bool {
        self.succ.len() <= other.succ.len()
            && self
                .edges()
                .all(|(i, j)| other.succ[i as usize].binary_search(&j).is_ok())
    }

    /// Subgraph induced on `vertices` (sorted), relabelled `0..len`.
    /// Vertices left without an outgoing edge make this fail.
    pub fn induced(&self, vertices: &[Vertex]) -> Result<FiniteGraph> {
        let succ = vertices
            .iter()
            .map(|&v| {
                self.succ[v as usize]
                    .iter()
                    .filter_map(|w| vertices.binary_search(w).ok().map(|i| i as Vertex))
                    .collect()
            })
            .collect();
        FiniteGraph::from_successors(succ)
    }
}

impl Graph for FiniteGraph {
    fn vertex_count(&self) -> usize {
        self.succ.len()
    }

    fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        self.succ
            .get(from as usize)
            .is_some_and(|row| row.binary_search(&to).is_ok())
    }

    fn successors(&self, v: Vertex) -> Successors<'_> {
        Successors::Slice(self.succ[v as usize].iter())
    }

    fn is_complete(&self) -> bool {
        let n = self.succ.len();
        self.succ.iter().all(|row| row.len() == n)
    }
}

/// Edge rules for countable graphs on the nonnegative integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Every transition allowed: the full shift on a countable alphabet.
    Full,
    /// `i -> i + 1` and `i -> 0`; exactly one first-return loop of each length at 0.
    Renewal,
    /// `i -> i - 1`, `i -> i`, `i -> i + 1` on the half line.
    Ladder,
}

impl Rule {
    pub fn allows(self, from: Vertex, to: Vertex) -> bool {
        match self {
            Rule::Full => true,
            Rule::Renewal => to == 0 || to == from + 1,
            Rule::Ladder => from.abs_diff(to) <= 1,
        }
    }
}

/// A rule restricted to the vertices `0..size`, never materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleGraph {
    pub rule: Rule,
    size: usize,
}

impl RuleGraph {
    /// Truncation at depth `cutoff`, i.e. vertices `0..=cutoff`.
    pub fn truncation(rule: Rule, cutoff: usize) -> Self {
        Self {
            rule,
            size: cutoff + 1,
        }
    }

    pub fn to_finite(&self) -> Result<FiniteGraph> {
        let succ = (0..self.size as Vertex)
            .map(|v| self.successors(v).collect())
            .collect();
        FiniteGraph::from_successors(succ)
    }
}

impl Graph for RuleGraph {
    fn vertex_count(&self) -> usize {
        self.size
    }

    fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        (from as usize) < self.size && (to as usize) < self.size && self.rule.allows(from, to)
    }

    fn successors(&self, v: Vertex) -> Successors<'_> {
        let last = (self.size - 1) as Vertex;
        let mut items = [0; 3];
        let mut len = 0u8;
        let mut push = |w: Vertex| {
            items[len as usize] = w;
            len += 1;
        };
        match self.rule {
            Rule::Full => return Successors::Range(0..self.size as Vertex),
            Rule::Renewal => {
                push(0);
                if v < last {
                    push(v + 1);
                }
            }
            Rule::Ladder => {
                if v > 0 {
                    push(v - 1);
                }
                push(v);
                if v < last {
                    push(v + 1);
                }
            }
        }
        Successors::Few { items, len, pos: 0 }
    }

    fn is_complete(&self) -> bool {
        self.rule == Rule::Full || self.size == 1
    }
}

/// How a loop-count sequence `c_1, c_2, ...` (indexed by loop length) is produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CountRule {
    /// Listed counts, zero past the end.
    Explicit(Vec<u64>),
    /// `c_n = c` for every `n`.
    Constant(u64),
    /// `c_n = b^(n-1)`.
    Exponential(u64),
    /// `c_n = n!`, which has infinite entropy.
    Factorial,
}

/// A loop system: `c_n` simple loops of length `n` based at one common vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopCounts {
    pub rule: CountRule,
    pub cutoff: usize,
}

/// Vertex cap for realized loop graphs.
pub const LOOP_GRAPH_LIMIT: usize = 1 << 20;

impl LoopCounts {
    pub fn explicit(counts: Vec<u64>) -> Self {
        let cutoff = counts.len();
        Self {
            rule: CountRule::Explicit(counts),
            cutoff,
        }
    }

    /// `c_n` for `n = 1..=cutoff`, at index `n - 1`.
    pub fn counts(&self) -> Vec<BigUint> {
        (1..=self.cutoff).map(|n| self.count(n)).collect()
    }

    pub fn count(&self, n: usize) -> BigUint {
        if n == 0 || n > self.cutoff {
            return BigUint::zero();
        }
        match &self.rule {
            CountRule::Explicit(c) => c.get(n - 1).copied().map_or_else(BigUint::zero, BigUint::from),
            CountRule::Constant(c) => BigUint::from(*c),
            CountRule::Exponential(b) => num_traits::pow(BigUint::from(*b), n - 1),
            CountRule::Factorial => (1..=n as u64).map(BigUint::from).product(),
        }
    }

    /// Realizes the loop graph with loops of length at most `max_len`:
    /// base vertex 0, and the loops taken in order of length then index, the
    /// `i`-th loop of length `n` adding a fresh chain of `n - 1` vertices.
    pub fn realize(&self, max_len: usize) -> Result<FiniteGraph> {
        realize_loop_graph(&self.counts()[..max_len.min(self.cutoff)])
    }

    /// Closed paths of length `0..=n_max` at the base vertex, from the
    /// renewal recursion `Z_n = sum_m c_m Z_(n-m)`, `Z_0 = 1`.
    pub fn returns_at_base(&self, n_max: usize) -> Vec<BigUint> {
        BigLoopCounts(self.counts()).returns_at_base(n_max)
    }
}

/// Loop counts already evaluated, index `n - 1` holding `c_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigLoopCounts(pub Vec<BigUint>);

impl BigLoopCounts {
    pub fn returns_at_base(&self, n_max: usize) -> Vec<BigUint> {
        let c = &self.0;
        let mut z: Vec<BigUint> = Vec::with_capacity(n_max + 1);
        z.push(BigUint::one());
        for n in 1..=n_max {
            let mut acc = BigUint::zero();
            for m in 1..=n.min(c.len()) {
                if !c[m - 1].is_zero() {
                    acc += &c[m - 1] * &z[n - m];
                }
            }
            z.push(acc);
        }
        z
    }
}

pub(crate) fn realize_loop_graph(counts: &[BigUint]) -> Result<FiniteGraph> {
    let mut total: usize = 1;
    for (i, c) in counts.iter().enumerate() {
        let len = i + 1;
        if len == 1 {
            if *c > BigUint::one() {
                return Err(Error::MultipleSelfLoops {
                    count: alloc::format!("{c}"),
                });
            }
            continue;
        }
        let extra = c
            .to_usize()
            .and_then(|c| c.checked_mul(len - 1))
            .ok_or(Error::LoopGraphTooLarge {
                limit: LOOP_GRAPH_LIMIT,
            })?;
        total = total.saturating_add(extra);
        if total > LOOP_GRAPH_LIMIT {
            return Err(Error::LoopGraphTooLarge {
                limit: LOOP_GRAPH_LIMIT,
            });
        }
    }
    let mut succ: Vec<Vec<Vertex>> = vec![Vec::new(); total];
    let mut next: Vertex = 1;
    for (i, c) in counts.iter().enumerate() {
        let len = i + 1;
        let c = c.to_usize().unwrap_or(0);
        if len == 1 {
            if c == 1 {
                succ[0].push(0);
            }
            continue;
        }
        for _ in 0..c {
            succ[0].push(next);
            for k in 0..(len - 2) as Vertex {
                succ[(next + k) as usize].push(next + k + 1);
            }
            succ[(next + len as Vertex - 2) as usize].push(0);
            next += len as Vertex - 1;
        }
    }
    FiniteGraph::from_successors(succ)
}

/// A finite presentation of a countable Markov shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShiftSpec {
    Finite(FiniteGraph),
    Truncated { rule: Rule, cutoff: usize },
    Loops(LoopCounts),
}

impl ShiftSpec {
    /// Finite subgraph at exhaustion depth `k`. A finite graph is its own
    /// truncation at every depth; a loop system keeps loops of length `<= k`.
    pub fn truncation(&self, k: usize) -> Result<FiniteGraph> {
        match self {
            ShiftSpec::Finite(g) => Ok(g.clone()),
            ShiftSpec::Truncated { rule, .. } => RuleGraph::truncation(*rule, k).to_finite(),
            ShiftSpec::Loops(lc) => lc.realize(k),
        }
    }

    /// Declared evaluation depth.
    pub fn cutoff(&self) -> usize {
        match self {
            ShiftSpec::Finite(g) => g.vertex_count() - 1,
            ShiftSpec::Truncated { cutoff, .. } => *cutoff,
            ShiftSpec::Loops(lc) => lc.cutoff,
        }
    }

    /// The deepest truncation as a finite graph.
    pub fn deepest(&self) -> Result<FiniteGraph> {
        self.truncation(self.cutoff())
    }

    /// Smallest exhaustion depth with a valid (nonempty) truncation.
    pub fn first_depth(&self) -> usize {
        match self {
            ShiftSpec::Finite(g) => g.vertex_count() - 1,
            ShiftSpec::Truncated { .. } => 0,
            ShiftSpec::Loops(lc) => {
                let counts = lc.counts();
                counts.iter().position(|c| !c.is_zero()).map_or(lc.cutoff, |i| i + 1)
            }
        }
    }
}

/// An admissible word together with the index of its first symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub symbols: Vec<Vertex>,
    pub offset: i64,
}

impl Word {
    pub fn new(symbols: Vec<Vertex>) -> Self {
        Self { symbols, offset: 0 }
    }

    pub fn with_offset(symbols: Vec<Vertex>, offset: i64) -> Self {
        Self { symbols, offset }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl From<&[Vertex]> for Word {
    fn from(s: &[Vertex]) -> Self {
        Word::new(s.to_vec())
    }
}

/// True iff each consecutive pair of `w` is an edge.
pub fn is_admissible<G: Graph + ?Sized>(g: &G, w: &Word) -> Result<bool> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    for &v in &w.symbols {
        g.check_vertex(v)?;
    }
    Ok(w.symbols.windows(2).all(|p| g.has_edge(p[0], p[1])))
}

/// Like [`is_admissible`] but reports the first forbidden transition.
pub fn check_admissible<G: Graph + ?Sized>(g: &G, symbols: &[Vertex]) -> Result<()> {
    if symbols.is_empty() {
        return Err(Error::EmptyWord);
    }
    for &v in symbols {
        g.check_vertex(v)?;
    }
    match symbols.windows(2).find(|p| !g.has_edge(p[0], p[1])) {
        Some(p) => Err(Error::InadmissibleWord {
            from: p[0],
            to: p[1],
        }),
        None => Ok(()),
    }
}

/// Number of closed paths of length `n` at `a`, i.e. `(A^n)_{aa}`.
pub fn loops_at<G: Graph + ?Sized>(g: &G, a: Vertex, n: usize) -> Result<BigUint> {
    Ok(loops_at_all(g, a, n)?.pop().unwrap_or_default())
}

/// `(A^m)_{aa}` for `m = 1..=n`.
pub fn loops_at_all<G: Graph + ?Sized>(g: &G, a: Vertex, n: usize) -> Result<Vec<BigUint>> {
    if n == 0 {
        return Err(Error::ZeroLength);
    }
    g.check_vertex(a)?;
    let size = g.vertex_count();
    let mut row = vec![BigUint::zero(); size];
    row[a as usize] = BigUint::one();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); size];
        for (i, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in g.successors(i as Vertex) {
                next[j as usize] += x;
            }
        }
        row = next;
        out.push(row[a as usize].clone());
    }
    Ok(out)
}

/// All first-return words `a x_1 .. x_n a` with every `x_i != a`, in
/// lexicographic order. `n = 0` stands for the direct loop `a a`.
pub fn first_return_words<G: Graph + ?Sized>(g: &G, a: Vertex, n: usize) -> Result<Vec<Word>> {
    g.check_vertex(a)?;
    let mut out = Vec::new();
    if n == 0 {
        if g.has_edge(a, a) {
            out.push(Word::new(vec![a, a]));
        }
        return Ok(out);
    }
    let mut path: Vec<Vertex> = Vec::with_capacity(n + 2);
    path.push(a);
    let mut visited = 0usize;
    extend_first_return(g, a, n, &mut path, &mut out, &mut visited)?;
    Ok(out)
}

fn extend_first_return<G: Graph + ?Sized>(
    g: &G,
    a: Vertex,
    n: usize,
    path: &mut Vec<Vertex>,
    out: &mut Vec<Word>,
    visited: &mut usize,
) -> Result<()> {
    let last = *path.last().unwrap_or(&a);
    if path.len() == n + 1 {
        if g.has_edge(last, a) {
            let mut symbols = path.clone();
            symbols.push(a);
            out.push(Word::new(symbols));
        }
        return Ok(());
    }
    for next in g.successors(last) {
        if next == a {
            continue;
        }
        *visited += 1;
        if *visited > ENUMERATION_BUDGET {
            return Err(Error::EnumerationBudget {
                limit: ENUMERATION_BUDGET,
            });
        }
        path.push(next);
        extend_first_return(g, a, n, path, out, visited)?;
        path.pop();
    }
    Ok(())
}

/// `|C_n|` for interior lengths `n = 0..=n_max`, by transfer through the
/// graph with `a` removed. Exact, no enumeration.
pub fn first_return_counts<G: Graph + ?Sized>(g: &G, a: Vertex, n_max: usize) -> Result<Vec<BigUint>> {
    g.check_vertex(a)?;
    let size = g.vertex_count();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(if g.has_edge(a, a) {
        BigUint::one()
    } else {
        BigUint::zero()
    });
    // paths a x_1 .. x_m with all x_i != a, indexed by x_m
    let mut row = vec![BigUint::zero(); size];
    for j in g.successors(a) {
        if j != a {
            row[j as usize] = BigUint::one();
        }
    }
    for _ in 1..=n_max {
        let closing: BigUint = row
            .iter()
            .enumerate()
            .filter(|(i, x)| !x.is_zero() && g.has_edge(*i as Vertex, a))
            .map(|(_, x)| x)
            .sum();
        out.push(closing);
        let mut next = vec![BigUint::zero(); size];
        for (i, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in g.successors(i as Vertex) {
                if j != a {
                    next[j as usize] += x;
                }
            }
        }
        row = next;
    }
    Ok(out)
}

/// Strongly connected components, each sorted, ordered by smallest vertex.
pub fn strongly_connected_components<G: Graph + ?Sized>(g: &G) -> Vec<Vec<Vertex>> {
    let n = g.vertex_count();
    // Kosaraju, iterative.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack: Vec<(Vertex, Successors<'_>)> = vec![(start as Vertex, g.successors(start as Vertex))];
        while let Some((v, it)) = stack.last_mut() {
            let v = *v;
            match it.next() {
                Some(w) if !seen[w as usize] => {
                    seen[w as usize] = true;
                    stack.push((w, g.successors(w)));
                }
                Some(_) => {}
                None => {
                    order.push(v);
                    stack.pop();
                }
            }
        }
    }
    let mut rev: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for v in 0..n as Vertex {
        for w in g.successors(v) {
            rev[w as usize].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<Vertex>> = Vec::new();
    for &root in order.iter().rev() {
        if comp[root as usize] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![root];
        comp[root as usize] = id;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &rev[v as usize] {
                if comp[w as usize] == usize::MAX {
                    comp[w as usize] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// Strong connectivity of the whole graph.
pub fn is_transitive<G: Graph + ?Sized>(g: &G) -> Result<bool> {
    if g.vertex_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(strongly_connected_components(g).len() == 1)
}

/// True when the component has at least one edge inside it.
pub(crate) fn component_has_cycle<G: Graph + ?Sized>(g: &G, comp: &[Vertex]) -> bool {
    comp.len() > 1 || g.has_edge(comp[0], comp[0])
}
