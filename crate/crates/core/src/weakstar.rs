//! Weak* convergence through cylinder masses, and upper semi-continuity of
//! the entropy map along convergent sequences.
//!
//! Cylinders are clopen, so a sequence of measures converges weak* exactly
//! when every cylinder mass converges. Two quantities are tracked:
//!
//! - [`cylinder_metric`]: `sum_k 2^-k sum_{|w| = k} 2^-rank(w) |mu[w] - nu[w]|`,
//!   where `rank(w)` is the lexicographic index of `w` among the admissible
//!   words of length `k` of the ambient graph;
//! - [`sup_deviation`]: `max_{|w| <= k} |mu[w] - nu[w]|` for each `k <= d`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measure::{ks_entropy, MarkovMeasure};
use crate::shift::{Graph, Vertex};
use crate::sum::NeumaierSum;
use crate::ENUMERATION_BUDGET;

/// Words of rank at least this carry weight `2^-rank`, which is zero in f64,
/// so the metric is exact after enumerating this many words per length.
pub const RANK_HORIZON: usize = 1100;

/// Slack allowed when testing a deviation sequence for monotonicity.
pub const MONOTONE_SLACK: f64 = 1e-12;

fn check_compatible<G: Graph + ?Sized>(mu: &MarkovMeasure, g: &G) -> Result<()> {
    mu.validate_on(g).map_err(|e| match e {
        Error::VertexOutOfRange { vertex, count } => Error::Incompatible(alloc::format!(
            "measure charges vertex {vertex}, graph has {count} vertices"
        )),
        Error::TransitionOffGraph { from, to } => Error::Incompatible(alloc::format!(
            "measure charges the non-edge {from} -> {to}"
        )),
        other => other,
    })
}

/// Cylinder metric between two measures living on `g`, using cylinders of
/// length `1..=depth`.
pub fn cylinder_metric<G: Graph + ?Sized>(
    mu: &MarkovMeasure,
    nu: &MarkovMeasure,
    g: &G,
    depth: usize,
) -> Result<f64> {
    if depth == 0 {
        return Err(Error::ZeroLength);
    }
    check_compatible(mu, g)?;
    check_compatible(nu, g)?;
    let mut total = 0.0;
    let mut weight = 1.0;
    for k in 1..=depth {
        weight *= 0.5;
        let mut level = NeumaierSum::new();
        let mut rank_weight = 1.0;
        for_each_ranked_word(g, k, |w| {
            level.add(rank_weight * (mu.mass(w) - nu.mass(w)).abs());
            rank_weight *= 0.5;
        });
        total += weight * level.value();
    }
    Ok(total)
}

/// Calls `visit` on the first [`RANK_HORIZON`] admissible words of length `k`
/// in lexicographic order.
fn for_each_ranked_word<G: Graph + ?Sized>(g: &G, k: usize, mut visit: impl FnMut(&[Vertex])) {
    let mut word: Vec<Vertex> = Vec::with_capacity(k);
    let mut stack: Vec<crate::shift::Successors<'_>> = Vec::with_capacity(k);
    let mut seen = 0usize;
    let mut roots = 0..g.vertex_count() as Vertex;
    loop {
        let next = match stack.last_mut() {
            Some(it) => it.next(),
            None => roots.next(),
        };
        match next {
            None => {
                if stack.pop().is_none() {
                    return;
                }
                word.pop();
            }
            Some(v) => {
                word.push(v);
                if word.len() == k {
                    visit(&word);
                    seen += 1;
                    if seen == RANK_HORIZON {
                        return;
                    }
                    word.pop();
                } else {
                    stack.push(g.successors(v));
                }
            }
        }
    }
}

/// `S_k = max_{1 <= |w| <= k} |mu[w] - nu[w]|` for `k = 1..=depth`.
///
/// Branch and bound over the words charged by either measure: a prefix `w`
/// at length `j` is not extended once `max(mu[w], nu[w])` is at most the
/// largest deviation already found at lengths `<= j`, since no extension can
/// deviate by more than its own mass. The budget counts extended prefixes
/// longer than one symbol.
pub fn sup_deviation<G: Graph + ?Sized>(
    mu: &MarkovMeasure,
    nu: &MarkovMeasure,
    g: &G,
    depth: usize,
) -> Result<Vec<f64>> {
    if depth == 0 {
        return Err(Error::ZeroLength);
    }
    check_compatible(mu, g)?;
    check_compatible(nu, g)?;
    let mut best = vec![0.0f64; depth];
    if mu == nu {
        return Ok(best);
    }
    let mut search = Search {
        mu,
        nu,
        depth,
        best: &mut best,
        expanded: 0,
    };
    let roots = merge(
        mu.support().iter().zip(mu.stationary()).map(|(&v, &p)| (v, p)),
        nu.support().iter().zip(nu.stationary()).map(|(&v, &p)| (v, p)),
    );
    for &(_, pm, pn) in &roots {
        search.record(1, (pm - pn).abs());
    }
    for (v, pm, pn) in roots {
        let node = Node {
            len: 1,
            mass_mu: pm,
            mass_nu: pn,
            idx_mu: mu.index_of(v),
            idx_nu: nu.index_of(v),
        };
        search.descend(node)?;
    }
    // running max over lengths
    for k in 1..depth {
        best[k] = best[k].max(best[k - 1]);
    }
    Ok(best)
}

#[derive(Clone, Copy)]
struct Node {
    len: usize,
    mass_mu: f64,
    mass_nu: f64,
    idx_mu: Option<usize>,
    idx_nu: Option<usize>,
}

struct Search<'a> {
    mu: &'a MarkovMeasure,
    nu: &'a MarkovMeasure,
    depth: usize,
    best: &'a mut [f64],
    expanded: usize,
}

impl Search<'_> {
    fn record(&mut self, len: usize, dev: f64) {
        let b = &mut self.best[len - 1];
        if dev > *b {
            *b = dev;
        }
    }

    fn bound_so_far(&self, len: usize) -> f64 {
        self.best[..len].iter().copied().fold(0.0, f64::max)
    }

    fn descend(&mut self, node: Node) -> Result<()> {
        if node.len == self.depth || node.mass_mu.max(node.mass_nu) <= self.bound_so_far(node.len) {
            return Ok(());
        }
        if node.len > 1 {
            self.expanded += 1;
            if self.expanded > ENUMERATION_BUDGET {
                return Err(Error::EnumerationBudget {
                    limit: ENUMERATION_BUDGET,
                });
            }
        }
        let steps = |m: &MarkovMeasure, idx: Option<usize>| -> Vec<(Vertex, f64)> {
            match idx {
                Some(i) => m.positive_steps(i).map(|(j, p)| (m.support()[j], p)).collect(),
                None => Vec::new(),
            }
        };
        let children = merge(
            steps(self.mu, node.idx_mu).into_iter(),
            steps(self.nu, node.idx_nu).into_iter(),
        );
        let len = node.len + 1;
        for &(_, pm, pn) in &children {
            self.record(len, (node.mass_mu * pm - node.mass_nu * pn).abs());
        }
        if len == self.depth {
            return Ok(());
        }
        for (v, pm, pn) in children {
            let child = Node {
                len,
                mass_mu: node.mass_mu * pm,
                mass_nu: node.mass_nu * pn,
                idx_mu: if pm > 0.0 { self.mu.index_of(v) } else { None },
                idx_nu: if pn > 0.0 { self.nu.index_of(v) } else { None },
            };
            self.descend(child)?;
        }
        Ok(())
    }
}

/// Sorted union of two sorted `(vertex, weight)` lists, missing weights as 0.
fn merge(
    a: impl Iterator<Item = (Vertex, f64)>,
    b: impl Iterator<Item = (Vertex, f64)>,
) -> Vec<(Vertex, f64, f64)> {
    let mut a = a.peekable();
    let mut b = b.peekable();
    let mut out = Vec::with_capacity(a.size_hint().0.max(b.size_hint().0));
    loop {
        match (a.peek().copied(), b.peek().copied()) {
            (None, None) => return out,
            (Some((u, p)), None) => {
                out.push((u, p, 0.0));
                a.next();
            }
            (None, Some((v, q))) => {
                out.push((v, 0.0, q));
                b.next();
            }
            (Some((u, p)), Some((v, q))) => {
                if u == v {
                    out.push((u, p, q));
                    a.next();
                    b.next();
                } else if u < v {
                    out.push((u, p, 0.0));
                    a.next();
                } else {
                    out.push((v, 0.0, q));
                    b.next();
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakStarVerdict {
    Converges,
    Diverges,
    Inconclusive,
}

impl WeakStarVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            WeakStarVerdict::Converges => "converges",
            WeakStarVerdict::Diverges => "diverges",
            WeakStarVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Deviations of a sequence from a candidate limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub depth: usize,
    pub tol: f64,
    /// `deviations[i][k - 1] = S_k(mu_i, mu)`.
    pub deviations: Vec<Vec<f64>>,
    pub metrics: Vec<f64>,
    pub verdict: WeakStarVerdict,
    /// First index of the tail used for the verdict.
    pub tail_start: usize,
}

impl ConvergenceReport {
    /// Sup deviation over all cylinders of length `<= depth` at index `i`.
    pub fn deviation(&self, i: usize) -> f64 {
        self.deviations[i][self.depth - 1]
    }

    pub fn final_deviation(&self) -> f64 {
        self.deviation(self.deviations.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.deviations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deviations.is_empty()
    }

    /// Deviations at full depth along the sequence.
    pub fn top_deviations(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.deviation(i)).collect()
    }
}

/// Length of the tail examined by the verdicts: a third of the sequence, at
/// least two entries.
pub fn tail_len(len: usize) -> usize {
    len.div_ceil(3).max(2).min(len)
}

fn nonincreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK)
}

/// Compares every member of `seq` with `mu` on cylinders of length `<= depth`.
///
/// - `Converges`: final deviation below `tol` and deviations nonincreasing
///   over the tail.
/// - `Diverges`: every tail deviation at least `tol`, or the tail is not
///   monotone and at least half of it is at least `tol`.
/// - `Inconclusive`: anything else.
pub fn check_weakstar_limit<G: Graph + ?Sized>(
    seq: &[MarkovMeasure],
    mu: &MarkovMeasure,
    g: &G,
    depth: usize,
    tol: f64,
) -> Result<ConvergenceReport> {
    if seq.len() < 3 {
        return Err(Error::SequenceTooShort {
            needed: 3,
            got: seq.len(),
        });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let mut deviations = Vec::with_capacity(seq.len());
    let mut metrics = Vec::with_capacity(seq.len());
    for m in seq {
        deviations.push(sup_deviation(m, mu, g, depth)?);
        metrics.push(cylinder_metric(m, mu, g, depth)?);
    }
    let top: Vec<f64> = deviations.iter().map(|d| d[depth - 1]).collect();
    let tail_start = seq.len() - tail_len(seq.len());
    let tail = &top[tail_start..];
    let monotone = nonincreasing(tail);
    let large = tail.iter().filter(|&&d| d >= tol).count();
    let verdict = if top[top.len() - 1] < tol && monotone {
        WeakStarVerdict::Converges
    } else if large == tail.len() || (!monotone && 2 * large >= tail.len()) {
        WeakStarVerdict::Diverges
    } else {
        WeakStarVerdict::Inconclusive
    };
    Ok(ConvergenceReport {
        depth,
        tol,
        deviations,
        metrics,
        verdict,
        tail_start,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UscVerdict {
    Holds,
    Violated,
    NotApplicable,
}

impl UscVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            UscVerdict::Holds => "usc_holds",
            UscVerdict::Violated => "usc_violated",
            UscVerdict::NotApplicable => "not_applicable",
        }
    }
}

/// Upper semi-continuity check along one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct UscReport {
    pub verdict: UscVerdict,
    pub convergence: ConvergenceReport,
    /// Entropy of each member.
    pub entropies: Vec<f64>,
    pub limit_entropy: f64,
    /// Max entropy over the tail, the finite stand-in for the limsup.
    pub tail_max: f64,
    /// Index attaining `tail_max` when the check fails.
    pub witness: Option<usize>,
    pub tol: f64,
}

/// Tolerances for [`usc_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UscTolerances {
    /// Deviation threshold for the weak* verdict.
    pub weakstar: f64,
    /// Allowed excess of the tail entropies over the limit entropy.
    pub entropy: f64,
}

impl UscTolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            weakstar: tol,
            entropy: tol,
        }
    }
}

/// Checks `limsup h(mu_n) <= h(mu)` along a sequence of ergodic measures.
///
/// The verdict is `NotApplicable` unless the sequence is certified to
/// converge to `mu`. The limsup is replaced by the maximum entropy over the
/// tail (the final third of the sequence).
pub fn usc_check<G: Graph + ?Sized>(
    seq: &[MarkovMeasure],
    mu: &MarkovMeasure,
    g: &G,
    depth: usize,
    tol: UscTolerances,
) -> Result<UscReport> {
    entropy_usc(seq, mu, g, depth, tol, ks_entropy)
}

/// Shared body of the base and flow checks: `entropy` maps a member to the
/// entropy being tested.
pub(crate) fn entropy_usc<G: Graph + ?Sized>(
    seq: &[MarkovMeasure],
    mu: &MarkovMeasure,
    g: &G,
    depth: usize,
    tol: UscTolerances,
    entropy: impl Fn(&MarkovMeasure) -> f64,
) -> Result<UscReport> {
    if let Some(index) = seq.iter().position(|m| !m.is_ergodic()) {
        return Err(Error::NonErgodic { index });
    }
    let convergence = check_weakstar_limit(seq, mu, g, depth, tol.weakstar)?;
    let entropies: Vec<f64> = seq.iter().map(&entropy).collect();
    let limit_entropy = entropy(mu);
    let start = seq.len() - tail_len(seq.len());
    let (arg, tail_max) = entropies[start..]
        .iter()
        .enumerate()
        .fold((start, f64::NEG_INFINITY), |(ai, am), (i, &h)| {
            if h > am {
                (start + i, h)
            } else {
                (ai, am)
            }
        });
    let (verdict, witness) = if convergence.verdict != WeakStarVerdict::Converges {
        (UscVerdict::NotApplicable, None)
    } else if tail_max <= limit_entropy + tol.entropy {
        (UscVerdict::Holds, None)
    } else {
        (UscVerdict::Violated, Some(arg))
    };
    Ok(UscReport {
        verdict,
        convergence,
        entropies,
        limit_entropy,
        tail_max,
        witness,
        tol: tol.entropy,
    })
}
