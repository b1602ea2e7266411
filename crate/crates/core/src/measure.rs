//! Shift-invariant Markov measures and their entropies.
//!
//! A [`MarkovMeasure`] lives on a finite support inside the vertex set of a
//! shift. Bernoulli measures keep only their probability vector, so measures
//! on very large alphabets (such as the members of the non-semicontinuity
//! family on the countable full shift) stay cheap.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::math;
use crate::potential::Potential;
use crate::shift::{self, FiniteGraph, Graph, Vertex, Word};
use crate::sum::NeumaierSum;
use crate::ENUMERATION_BUDGET;

/// Tolerance for row sums and stationarity residuals.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Supports up to this size get a dense linear solve for the stationary vector.
pub const DENSE_SOLVE_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Markov,
    Bernoulli,
    DiracPeriodic,
}

impl MeasureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Markov => "markov",
            MeasureKind::Bernoulli => "bernoulli",
            MeasureKind::DiracPeriodic => "dirac",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kernel {
    Dense(DenseMatrix),
    /// Every row equals the stationary vector.
    Product,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    kind: MeasureKind,
    support: Vec<Vertex>,
    stationary: Vec<f64>,
    kernel: Kernel,
    ergodic: bool,
}

fn check_support(support: &[Vertex]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::InvalidParameter("empty support".into()));
    }
    if support.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "support must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_rows(rows: &DenseMatrix) -> Result<()> {
    for i in 0..rows.dim() {
        let row = rows.row(i);
        let s: f64 = row.iter().copied().collect::<NeumaierSum>().value();
        if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotStochastic { row: i });
        }
    }
    Ok(())
}

impl MarkovMeasure {
    /// Stationary Markov measure of an irreducible stochastic matrix on `support`.
    pub fn markov(support: Vec<Vertex>, rows: &[Vec<f64>]) -> Result<Self> {
        check_support(&support)?;
        if rows.len() != support.len() {
            return Err(Error::ShapeMismatch {
                expected: support.len(),
            });
        }
        let m = DenseMatrix::from_rows(rows)?;
        let stationary = stationary_distribution(&m).map_err(|e| relabel(e, &support))?;
        Ok(Self {
            kind: MeasureKind::Markov,
            support,
            stationary,
            kernel: Kernel::Dense(m),
            ergodic: true,
        })
    }

    /// Markov measure with a caller-supplied stationary vector. The matrix may
    /// be reducible, in which case the measure is invariant but not ergodic.
    pub fn markov_with_stationary(support: Vec<Vertex>, rows: &[Vec<f64>], p: Vec<f64>) -> Result<Self> {
        check_support(&support)?;
        if rows.len() != support.len() || p.len() != support.len() {
            return Err(Error::ShapeMismatch {
                expected: support.len(),
            });
        }
        let m = DenseMatrix::from_rows(rows)?;
        check_rows(&m)?;
        check_probability(&p)?;
        let residual = stationary_residual(&m, &p);
        if residual >= STOCHASTIC_TOL {
            return Err(Error::NotStationary { residual });
        }
        let ergodic = shift::strongly_connected_components(&positive_graph(&m)).len() == 1;
        Ok(Self {
            kind: MeasureKind::Markov,
            support,
            stationary: p,
            kernel: Kernel::Dense(m),
            ergodic,
        })
    }

    /// Bernoulli measure with `probs[i]` on `support[i]`; zero entries are
    /// dropped from the support.
    pub fn bernoulli(support: Vec<Vertex>, probs: &[f64]) -> Result<Self> {
        if probs.len() != support.len() {
            return Err(Error::ShapeMismatch {
                expected: support.len(),
            });
        }
        check_support(&support)?;
        check_probability(probs)?;
        let (support, stationary): (Vec<Vertex>, Vec<f64>) = support
            .into_iter()
            .zip(probs.iter().copied())
            .filter(|(_, p)| *p > 0.0)
            .unzip();
        Ok(Self {
            kind: MeasureKind::Bernoulli,
            support,
            stationary,
            kernel: Kernel::Product,
            ergodic: true,
        })
    }

    /// Bernoulli measure on the symbols `0..probs.len()`.
    pub fn bernoulli_on(probs: &[f64]) -> Result<Self> {
        Self::bernoulli((0..probs.len() as Vertex).collect(), probs)
    }

    /// Uniform measure on the periodic orbit `orbit[0] -> orbit[1] -> ... -> orbit[0]`.
    /// Orbit vertices must be distinct.
    pub fn dirac_periodic(orbit: &[Vertex]) -> Result<Self> {
        let mut support = orbit.to_vec();
        support.sort_unstable();
        support.dedup();
        if support.len() != orbit.len() || orbit.is_empty() {
            return Err(Error::InvalidParameter(
                "periodic orbit must be a nonempty list of distinct vertices".into(),
            ));
        }
        let n = orbit.len();
        let mut m = DenseMatrix::zeros(n);
        for (k, &v) in orbit.iter().enumerate() {
            let i = support.binary_search(&v).unwrap_or(0);
            let j = support.binary_search(&orbit[(k + 1) % n]).unwrap_or(0);
            m.set(i, j, 1.0);
        }
        Ok(Self {
            kind: MeasureKind::DiracPeriodic,
            support,
            stationary: vec![1.0 / n as f64; n],
            kernel: Kernel::Dense(m),
            ergodic: true,
        })
    }

    /// Parry measure (measure of maximal entropy) of a transitive finite graph.
    pub fn parry(g: &FiniteGraph) -> Result<Self> {
        Self::weighted_perron(g, &DenseMatrix::adjacency(g))
    }

    /// Equilibrium measure of a depth-1 or depth-2 potential on a transitive
    /// finite graph, built from the Perron data of the weighted matrix.
    pub fn equilibrium(g: &FiniteGraph, phi: &Potential) -> Result<Self> {
        if phi.is_constant().is_none() && phi.depth() > 2 {
            return Err(Error::InvalidParameter(
                "equilibrium measures are Markov only for potentials of depth <= 2".into(),
            ));
        }
        let m = crate::entropy::weighted_matrix(g, phi)?;
        Self::weighted_perron(g, &m)
    }

    fn weighted_perron(g: &FiniteGraph, m: &DenseMatrix) -> Result<Self> {
        let comps = shift::strongly_connected_components(g);
        if comps.len() != 1 {
            return Err(Error::Reducible { components: comps });
        }
        let perron = linalg::perron(m)?;
        let r = &perron.vector;
        let n = m.dim();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let raw: Vec<f64> = (0..n).map(|j| m.get(i, j) * r[j]).collect();
                let s: f64 = raw.iter().copied().collect::<NeumaierSum>().value();
                raw.into_iter().map(|x| x / s).collect()
            })
            .collect();
        Self::markov((0..n as Vertex).collect(), &rows)
    }

    /// Convex combination `(1 - t) a + t b` of the transition matrices, with
    /// the stationary vector recomputed. Both measures need the same support.
    pub fn interpolate(a: &Self, b: &Self, t: f64) -> Result<Self> {
        if a.support != b.support {
            return Err(Error::Incompatible("interpolation needs equal supports".into()));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(alloc::format!("t = {t} outside [0, 1]")));
        }
        let ra = a.rows();
        let rb = b.rows();
        let rows: Vec<Vec<f64>> = ra
            .iter()
            .zip(&rb)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| (1.0 - t) * u + t * v).collect())
            .collect();
        Self::markov(a.support.clone(), &rows)
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn support(&self) -> &[Vertex] {
        &self.support
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Positive transitions form a strongly connected graph.
    pub fn is_ergodic(&self) -> bool {
        self.ergodic
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.support.binary_search(&v).ok()
    }

    /// `P_{ij}` by support index.
    #[inline]
    pub fn transition_idx(&self, i: usize, j: usize) -> f64 {
        match &self.kernel {
            Kernel::Dense(m) => m.get(i, j),
            Kernel::Product => self.stationary[j],
        }
    }

    /// `P_{uv}` by vertex label, zero off the support.
    pub fn transition(&self, u: Vertex, v: Vertex) -> f64 {
        match (self.index_of(u), self.index_of(v)) {
            (Some(i), Some(j)) => self.transition_idx(i, j),
            _ => 0.0,
        }
    }

    /// Transition matrix rows on the support.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.support.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.transition_idx(i, j)).collect())
            .collect()
    }

    /// Support indices reachable from `i` with positive probability, ascending.
    pub(crate) fn positive_steps(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.support.len();
        (0..n)
            .map(move |j| (j, self.transition_idx(i, j)))
            .filter(|(_, p)| *p > 0.0)
    }

    /// `mu([w])` without admissibility checks; zero off the support.
    pub fn mass(&self, w: &[Vertex]) -> f64 {
        let Some((&first, rest)) = w.split_first() else {
            return 1.0;
        };
        let Some(mut i) = self.index_of(first) else {
            return 0.0;
        };
        let mut m = self.stationary[i];
        for &v in rest {
            let Some(j) = self.index_of(v) else {
                return 0.0;
            };
            m *= self.transition_idx(i, j);
            if m == 0.0 {
                return 0.0;
            }
            i = j;
        }
        m
    }

    /// Checks that the measure lives on `g`: support inside the vertex set and
    /// positive transitions along edges.
    pub fn validate_on<G: Graph + ?Sized>(&self, g: &G) -> Result<()> {
        for &v in &self.support {
            g.check_vertex(v)?;
        }
        if g.is_complete() {
            return Ok(());
        }
        for (i, &u) in self.support.iter().enumerate() {
            for (j, _) in self.positive_steps(i) {
                let v = self.support[j];
                if !g.has_edge(u, v) {
                    return Err(Error::TransitionOffGraph { from: u, to: v });
                }
            }
        }
        Ok(())
    }

    /// Depth-first walk over the words of length `len` with positive mass, in
    /// lexicographic order. Words of length 1 are the support itself and do
    /// not count against the budget.
    pub fn for_each_positive_word<F>(&self, len: usize, mut visit: F) -> Result<()>
    where
        F: FnMut(&[Vertex], f64),
    {
        self.walk_positive(len, &mut |w, m| {
            if w.len() == len {
                visit(w, m);
            }
        })
    }

    /// Visits every positive-mass word of length `1..=len` (prefixes first).
    fn walk_positive(&self, len: usize, visit: &mut dyn FnMut(&[Vertex], f64)) -> Result<()> {
        if len == 0 {
            return Ok(());
        }
        let mut word = Vec::with_capacity(len);
        let mut budget = 0usize;
        for (i, &v) in self.support.iter().enumerate() {
            let m = self.stationary[i];
            if m <= 0.0 {
                continue;
            }
            word.push(v);
            visit(&word, m);
            self.walk_from(i, m, len, &mut word, &mut budget, visit)?;
            word.pop();
        }
        Ok(())
    }

    fn walk_from(
        &self,
        i: usize,
        m: f64,
        len: usize,
        word: &mut Vec<Vertex>,
        budget: &mut usize,
        visit: &mut dyn FnMut(&[Vertex], f64),
    ) -> Result<()> {
        if word.len() == len {
            return Ok(());
        }
        for (j, p) in self.positive_steps(i) {
            *budget += 1;
            if *budget > ENUMERATION_BUDGET {
                return Err(Error::EnumerationBudget {
                    limit: ENUMERATION_BUDGET,
                });
            }
            let mj = m * p;
            word.push(self.support[j]);
            visit(word, mj);
            self.walk_from(j, mj, len, word, budget, visit)?;
            word.pop();
        }
        Ok(())
    }
}

fn relabel(e: Error, support: &[Vertex]) -> Error {
    match e {
        Error::Reducible { components } => Error::Reducible {
            components: components
                .into_iter()
                .map(|c| c.into_iter().map(|i| support[i as usize]).collect())
                .collect(),
        },
        other => other,
    }
}

fn check_probability(p: &[f64]) -> Result<()> {
    let s: f64 = p.iter().copied().collect::<NeumaierSum>().value();
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidParameter("not a probability vector".into()));
    }
    Ok(())
}

fn positive_graph(m: &DenseMatrix) -> PositiveGraph {
    let n = m.dim();
    PositiveGraph(
        (0..n)
            .map(|i| (0..n).filter(|&j| m.get(i, j) > 0.0).map(|j| j as Vertex).collect())
            .collect(),
    )
}

struct PositiveGraph(Vec<Vec<Vertex>>);

impl Graph for PositiveGraph {
    fn vertex_count(&self) -> usize {
        self.0.len()
    }
    fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        self.0[from as usize].binary_search(&to).is_ok()
    }
    fn successors(&self, v: Vertex) -> shift::Successors<'_> {
        shift::Successors::Slice(self.0[v as usize].iter())
    }
}

fn stationary_residual(m: &DenseMatrix, p: &[f64]) -> f64 {
    m.vec_mul(p)
        .iter()
        .zip(p)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
}

/// Unique stationary probability vector of an irreducible stochastic matrix.
///
/// Dense solve for up to [`DENSE_SOLVE_LIMIT`] states, power iteration on the
/// lazy chain `(P + I) / 2` beyond that.
pub fn stationary_distribution(m: &DenseMatrix) -> Result<Vec<f64>> {
    check_rows(m)?;
    let n = m.dim();
    let comps = shift::strongly_connected_components(&positive_graph(m));
    if comps.len() != 1 {
        return Err(Error::Reducible { components: comps });
    }
    let mut p = if n <= DENSE_SOLVE_LIMIT {
        // (P^T - I) p = 0 with the last equation replaced by sum(p) = 1
        let mut a = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                a.set(i, j, m.get(j, i) - id);
            }
        }
        for j in 0..n {
            a.set(n - 1, j, 1.0);
        }
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        linalg::solve(&a, &b)?
    } else {
        let mut p = vec![1.0 / n as f64; n];
        let mut converged = false;
        for _ in 0..linalg::MAX_ITERATIONS {
            let q = m.vec_mul(&p);
            let next: Vec<f64> = q.iter().zip(&p).map(|(a, b)| 0.5 * (a + b)).collect();
            let diff = next.iter().zip(&p).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            p = next;
            if diff < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                iterations: linalg::MAX_ITERATIONS,
            });
        }
        p
    };
    for x in &mut p {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = p.iter().copied().collect::<NeumaierSum>().value();
    for x in &mut p {
        *x /= s;
    }
    let residual = stationary_residual(m, &p);
    if residual >= STOCHASTIC_TOL {
        return Err(Error::NotStationary { residual });
    }
    Ok(p)
}

/// `mu([w])` for an admissible word `w` of `g`. The offset of `w` is ignored
/// since the measure is shift invariant.
pub fn cylinder_mass<G: Graph + ?Sized>(mu: &MarkovMeasure, g: &G, w: &Word) -> Result<f64> {
    shift::check_admissible(g, &w.symbols)?;
    Ok(mu.mass(&w.symbols))
}

/// `H_mu(P^k)` for `k = 1..=n`, where `P` is the partition into length-one
/// cylinders.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEntropyTable {
    entropies: Vec<f64>,
}

impl PartitionEntropyTable {
    /// `H_k`, `k >= 1`.
    pub fn h(&self, k: usize) -> f64 {
        self.entropies[k - 1]
    }

    pub fn depth(&self) -> usize {
        self.entropies.len()
    }

    pub fn entropies(&self) -> &[f64] {
        &self.entropies
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.entropies
            .iter()
            .enumerate()
            .map(|(i, h)| h / (i + 1) as f64)
            .collect()
    }

    /// `H_{k+1} - H_k` for `k = 1..depth`.
    pub fn increments(&self) -> Vec<f64> {
        self.entropies.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `(n, H_n, H_n / n, H_n - H_{n-1})`, with `H_0 = 0`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64, f64)> + '_ {
        self.entropies.iter().enumerate().map(move |(i, &h)| {
            let prev = if i == 0 { 0.0 } else { self.entropies[i - 1] };
            (i + 1, h, h / (i + 1) as f64, h - prev)
        })
    }

    /// `H_n / n` nonincreasing up to `tol`.
    pub fn ratios_nonincreasing(&self, tol: f64) -> bool {
        self.ratios().windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// Exact partition entropies by summation over positive-mass cylinders, with
/// `0 log 0 = 0`.
pub fn partition_entropy(mu: &MarkovMeasure, n: usize) -> Result<PartitionEntropyTable> {
    if n == 0 {
        return Err(Error::ZeroLength);
    }
    let mut sums = vec![NeumaierSum::new(); n];
    mu.walk_positive(n, &mut |w, m| sums[w.len() - 1].add(math::xlogx_neg(m)))?;
    Ok(PartitionEntropyTable {
        entropies: sums.iter().map(NeumaierSum::value).collect(),
    })
}

/// Kolmogorov-Sinai entropy `-sum_i p_i sum_j P_ij log P_ij`.
pub fn ks_entropy(mu: &MarkovMeasure) -> f64 {
    match &mu.kernel {
        Kernel::Product => mu
            .stationary
            .iter()
            .map(|&p| math::xlogx_neg(p))
            .collect::<NeumaierSum>()
            .value(),
        Kernel::Dense(m) => {
            let mut s = NeumaierSum::new();
            for (i, &p) in mu.stationary.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for &x in m.row(i) {
                    s.add(p * math::xlogx_neg(x));
                }
            }
            s.value()
        }
    }
}

/// Bernoulli measure with vector `(1 - a, a/n, ..., a/n)` (`a/n` repeated `n`
/// times) on the symbols `0..=n`, where `a = h / log n`. Its entropy tends to
/// `h` while the measures converge to the point mass at the fixed point `0`.
pub fn bernoulli_counterexample_measure(h: f64, n: usize) -> Result<MarkovMeasure> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("h = {h} must be a positive real")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(alloc::format!("n = {n} must exceed 1")));
    }
    let a = counterexample_weight(h, n);
    if a >= 1.0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "a_n = h / log n = {a} is not below 1 for n = {n}"
        )));
    }
    let mut probs = vec![a / n as f64; n + 1];
    probs[0] = 1.0 - a;
    // the vector sums to 1 up to rounding in the n-fold repeated entry
    let support: Vec<Vertex> = (0..=n as Vertex).collect();
    let (support, stationary): (Vec<Vertex>, Vec<f64>) = support
        .into_iter()
        .zip(probs)
        .filter(|(_, p)| *p > 0.0)
        .unzip();
    Ok(MarkovMeasure {
        kind: MeasureKind::Bernoulli,
        support,
        stationary,
        kernel: Kernel::Product,
        ergodic: true,
    })
}

/// `a_n = h / log n`.
pub fn counterexample_weight(h: f64, n: usize) -> f64 {
    h / math::ln(n as f64)
}

/// `int f dmu` for a locally constant `f`, as an exact finite sum over the
/// positive-mass words of length `depth(f)`.
pub fn integrate(mu: &MarkovMeasure, f: &Potential) -> Result<f64> {
    if let Some(c) = f.is_constant() {
        return Ok(c);
    }
    let mut sum = NeumaierSum::new();
    let mut missing = None;
    mu.for_each_positive_word(f.depth(), |w, m| match f.eval(w) {
        Some(v) => sum.add(m * v),
        None => {
            if missing.is_none() {
                missing = Some(w.to_vec());
            }
        }
    })?;
    if let Some(word) = missing {
        return Err(Error::PotentialUndefined { word });
    }
    Ok(sum.value())
}

/// `h_mu + int phi dmu`.
pub fn free_energy(mu: &MarkovMeasure, phi: &Potential) -> Result<f64> {
    Ok(ks_entropy(mu) + integrate(mu, phi)?)
}
