//! First-return recoding of a shift at a vertex into a loop system.
//!
//! Every point that visits `a` infinitely often in both directions splits
//! into blocks `a x_1 .. x_n` where the interior avoids `a`. Replacing each
//! interior by a loop of length `n + 1` at a common base vertex gives a loop
//! system with `c_n` loops of length `n + 1`, `c_n` being the number of
//! first-return words with `n` interior symbols.
//!
//! The bijection between interiors and loops is fixed by lexicographic order:
//! the `i`-th interior of length `n` goes to loop `i` of level `n`. Ranks are
//! computed from suffix-count tables, so nothing is enumerated.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::math;
use crate::measure::MarkovMeasure;
use crate::shift::{self, FiniteGraph, Graph, Vertex, Word};
use crate::sum::NeumaierSum;

/// A vertex of the loop graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LoopSymbol {
    Base,
    /// Position `position` (0-based) on loop `index` of level `level`, the
    /// level being the number of interior vertices of the loop.
    Interior {
        level: usize,
        index: BigUint,
        position: usize,
    },
}

/// The loop system of a shift at a base vertex, up to a horizon on the
/// interior length.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSystem {
    base: Vertex,
    horizon: usize,
    succ: Vec<Vec<Vertex>>,
    /// `suffix[m][v]`: walks `v y_1 .. y_m` avoiding the base, followed by an
    /// edge back to the base.
    suffix: Vec<Vec<BigUint>>,
    /// `counts[n]` interiors of length `n`, `n = 0..=horizon`.
    counts: Vec<BigUint>,
}

/// Builds the loop system of `g` at `a` with interiors of length `<= n_max`.
pub fn build_loop_system<G: Graph + ?Sized>(g: &G, a: Vertex, n_max: usize) -> Result<LoopSystem> {
    g.check_vertex(a)?;
    let size = g.vertex_count();
    let succ: Vec<Vec<Vertex>> = (0..size as Vertex).map(|v| g.successors(v).collect()).collect();
    let mut suffix: Vec<Vec<BigUint>> = Vec::with_capacity(n_max);
    if n_max > 0 {
        let first: Vec<BigUint> = (0..size as Vertex)
            .map(|v| {
                if v != a && g.has_edge(v, a) {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            })
            .collect();
        suffix.push(first);
    }
    for m in 1..n_max {
        let prev = &suffix[m - 1];
        let row: Vec<BigUint> = (0..size)
            .map(|v| {
                if v as Vertex == a {
                    return BigUint::zero();
                }
                succ[v]
                    .iter()
                    .filter(|&&u| u != a)
                    .map(|&u| &prev[u as usize])
                    .sum()
            })
            .collect();
        suffix.push(row);
    }
    let mut counts = Vec::with_capacity(n_max + 1);
    counts.push(if g.has_edge(a, a) {
        BigUint::one()
    } else {
        BigUint::zero()
    });
    for n in 1..=n_max {
        let c: BigUint = succ[a as usize]
            .iter()
            .filter(|&&u| u != a)
            .map(|&u| &suffix[n - 1][u as usize])
            .sum();
        counts.push(c);
    }
    if counts.iter().all(Zero::is_zero) {
        return Err(Error::NoLoops {
            vertex: a,
            horizon: n_max,
        });
    }
    Ok(LoopSystem {
        base: a,
        horizon: n_max,
        succ,
        suffix,
        counts,
    })
}

impl LoopSystem {
    pub fn base(&self) -> Vertex {
        self.base
    }

    /// Largest interior length represented.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `c_n` for interior lengths `n = 0..=horizon`.
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// Loops by length: index `l - 1` holds the number of loops of length `l`,
    /// the shape expected by the loop-system entropy estimator.
    pub fn loop_counts(&self) -> Vec<BigUint> {
        self.counts.clone()
    }

    /// Lexicographic rank of an interior among the interiors of its length.
    pub fn rank(&self, interior: &[Vertex]) -> Result<BigUint> {
        let n = interior.len();
        if n > self.horizon {
            return Err(Error::BlockTooLong {
                length: n,
                horizon: self.horizon,
            });
        }
        let mut rank = BigUint::zero();
        let mut prev = self.base;
        for (k, &x) in interior.iter().enumerate() {
            if x == self.base || !self.edge(prev, x) {
                return Err(self.bad_step(prev, x));
            }
            let rest = n - k - 1;
            for &u in &self.succ[prev as usize] {
                if u >= x {
                    break;
                }
                if u != self.base {
                    rank += &self.suffix[rest][u as usize];
                }
            }
            prev = x;
        }
        if !self.edge(prev, self.base) {
            return Err(self.bad_step(prev, self.base));
        }
        Ok(rank)
    }

    /// Interior of rank `index` at level `level`.
    pub fn unrank(&self, level: usize, index: &BigUint) -> Result<Vec<Vertex>> {
        self.check_label(level, index)?;
        let mut out = Vec::with_capacity(level);
        let mut rest_index = index.clone();
        let mut prev = self.base;
        for k in 0..level {
            let rest = level - k - 1;
            let mut chosen = None;
            for &u in &self.succ[prev as usize] {
                if u == self.base {
                    continue;
                }
                let block = &self.suffix[rest][u as usize];
                if rest_index < *block {
                    chosen = Some(u);
                    break;
                }
                rest_index -= block;
            }
            // check_label guarantees the index is in range
            let u = chosen.ok_or(Error::InvalidParameter("label out of range".into()))?;
            out.push(u);
            prev = u;
        }
        Ok(out)
    }

    fn check_label(&self, level: usize, index: &BigUint) -> Result<()> {
        if level > self.horizon {
            return Err(Error::BlockTooLong {
                length: level,
                horizon: self.horizon,
            });
        }
        if *index >= self.counts[level] {
            return Err(Error::InvalidParameter(alloc::format!(
                "loop {index} does not exist at level {level}"
            )));
        }
        Ok(())
    }

    fn edge(&self, from: Vertex, to: Vertex) -> bool {
        self.succ
            .get(from as usize)
            .is_some_and(|s| s.binary_search(&to).is_ok())
    }

    fn bad_step(&self, from: Vertex, to: Vertex) -> Error {
        if (to as usize) >= self.succ.len() {
            Error::VertexOutOfRange {
                vertex: to,
                count: self.succ.len(),
            }
        } else {
            Error::InadmissibleWord { from, to }
        }
    }

    /// Source first-return words of one level, in label order.
    pub fn labels(&self, level: usize) -> Result<Vec<Word>> {
        if level > self.horizon {
            return Err(Error::BlockTooLong {
                length: level,
                horizon: self.horizon,
            });
        }
        let g = self.source()?;
        shift::first_return_words(&g, self.base, level)
    }

    /// The source graph the system was built from.
    pub fn source(&self) -> Result<FiniteGraph> {
        FiniteGraph::from_successors(self.succ.clone())
    }

    /// Recodes a source word `a x_1 a x_2 .. a` block by block. The output has
    /// the same length.
    pub fn recode_word(&self, w: &[Vertex]) -> Result<Vec<LoopSymbol>> {
        let (Some(&first), Some(&last)) = (w.first(), w.last()) else {
            return Err(Error::EmptyWord);
        };
        if first != self.base || last != self.base {
            return Err(Error::NotBracketed { base: self.base });
        }
        let mut out = Vec::with_capacity(w.len());
        out.push(LoopSymbol::Base);
        let mut start = 1;
        for (k, &x) in w.iter().enumerate().skip(1) {
            if x != self.base {
                continue;
            }
            let interior = &w[start..k];
            let level = interior.len();
            if level == 0 && !self.edge(self.base, self.base) {
                return Err(Error::InadmissibleWord {
                    from: self.base,
                    to: self.base,
                });
            }
            let index = self.rank(interior)?;
            for position in 0..level {
                out.push(LoopSymbol::Interior {
                    level,
                    index: index.clone(),
                    position,
                });
            }
            out.push(LoopSymbol::Base);
            start = k + 1;
        }
        Ok(out)
    }

    /// Inverse of [`recode_word`](Self::recode_word).
    pub fn decode_word(&self, w: &[LoopSymbol]) -> Result<Vec<Vertex>> {
        if !self.is_admissible(w) {
            return Err(Error::InvalidParameter("inadmissible loop-system word".into()));
        }
        if w.first() != Some(&LoopSymbol::Base) || w.last() != Some(&LoopSymbol::Base) {
            return Err(Error::NotBracketed { base: self.base });
        }
        let mut out = Vec::with_capacity(w.len());
        let mut k = 0;
        while k < w.len() {
            match &w[k] {
                LoopSymbol::Base => {
                    out.push(self.base);
                    k += 1;
                }
                LoopSymbol::Interior { level, index, .. } => {
                    out.extend(self.unrank(*level, index)?);
                    k += level;
                }
            }
        }
        Ok(out)
    }

    fn symbol_valid(&self, s: &LoopSymbol) -> bool {
        match s {
            LoopSymbol::Base => true,
            LoopSymbol::Interior {
                level,
                index,
                position,
            } => {
                *level >= 1 && *level <= self.horizon && *position < *level && *index < self.counts[*level]
            }
        }
    }

    /// Transition `s -> t` in the loop graph.
    pub fn allows(&self, s: &LoopSymbol, t: &LoopSymbol) -> bool {
        if !self.symbol_valid(s) || !self.symbol_valid(t) {
            return false;
        }
        match (s, t) {
            (LoopSymbol::Base, LoopSymbol::Base) => !self.counts[0].is_zero(),
            (LoopSymbol::Base, LoopSymbol::Interior { position, .. }) => *position == 0,
            (LoopSymbol::Interior { level, position, .. }, LoopSymbol::Base) => *position + 1 == *level,
            (
                LoopSymbol::Interior {
                    level: l1,
                    index: i1,
                    position: p1,
                },
                LoopSymbol::Interior {
                    level: l2,
                    index: i2,
                    position: p2,
                },
            ) => l1 == l2 && i1 == i2 && p1 + 1 == *p2,
        }
    }

    pub fn is_admissible(&self, w: &[LoopSymbol]) -> bool {
        !w.is_empty() && w.iter().all(|s| self.symbol_valid(s)) && w.windows(2).all(|p| self.allows(&p[0], &p[1]))
    }

    /// Vertex number of a symbol in [`realize`](Self::realize): the base is 0
    /// and loops follow in order of level, then index, each taking `level`
    /// consecutive numbers.
    pub fn vertex_id(&self, s: &LoopSymbol) -> BigUint {
        match s {
            LoopSymbol::Base => BigUint::zero(),
            LoopSymbol::Interior {
                level,
                index,
                position,
            } => {
                let mut id = BigUint::one();
                for m in 1..*level {
                    id += &self.counts[m] * BigUint::from(m);
                }
                id + index * BigUint::from(*level) + BigUint::from(*position)
            }
        }
    }

    /// The loop graph as an explicit graph, if it fits under the vertex cap.
    pub fn realize(&self) -> Result<FiniteGraph> {
        shift::realize_loop_graph(&self.counts)
    }
}

/// Law of the first-return block seen from the base vertex under a measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnDistribution {
    pub base: Vertex,
    /// `mu([a])`.
    pub base_mass: f64,
    /// `levels[n]`: conditional mass of the first-return words with `n`
    /// interior symbols, `n = 0..=horizon`.
    pub levels: Vec<f64>,
    /// Conditional mass of returns beyond the horizon.
    pub escaped: f64,
}

impl ReturnDistribution {
    /// `sum_n (n + 1) levels[n]`, the expected return time seen within the
    /// horizon.
    pub fn expected_return(&self) -> f64 {
        self.levels
            .iter()
            .enumerate()
            .map(|(n, m)| (n + 1) as f64 * m)
            .collect::<NeumaierSum>()
            .value()
    }

    /// Gap `1 / mu([a]) - expected_return()`, which is the contribution of
    /// the returns beyond the horizon.
    pub fn kac_gap(&self) -> f64 {
        1.0 / self.base_mass - self.expected_return()
    }
}

/// Conditional law of the first-return blocks at `a`, by taboo transfer.
pub fn induced_return_distribution(mu: &MarkovMeasure, a: Vertex, n_max: usize) -> Result<ReturnDistribution> {
    let Some(ia) = mu.index_of(a) else {
        return Err(Error::NullBase { vertex: a });
    };
    let base_mass = mu.stationary()[ia];
    if base_mass <= 0.0 {
        return Err(Error::NullBase { vertex: a });
    }
    if !mu.is_ergodic() {
        return Err(Error::NonErgodic { index: 0 });
    }
    let size = mu.support().len();
    let mut levels = Vec::with_capacity(n_max + 1);
    levels.push(mu.transition_idx(ia, ia));
    // row[j]: P(x_1 .. x_m avoid a, x_m = j | x_0 = a)
    let mut row = vec![0.0; size];
    for (j, p) in mu.positive_steps(ia) {
        if j != ia {
            row[j] = p;
        }
    }
    for _ in 1..=n_max {
        let closing: NeumaierSum = row
            .iter()
            .enumerate()
            .map(|(j, &x)| x * mu.transition_idx(j, ia))
            .collect();
        levels.push(closing.value());
        let mut next = vec![0.0; size];
        for (j, &x) in row.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (k, p) in mu.positive_steps(j) {
                if k != ia {
                    next[k] += x * p;
                }
            }
        }
        row = next;
    }
    let seen: f64 = levels.iter().copied().collect::<NeumaierSum>().value();
    Ok(ReturnDistribution {
        base: a,
        base_mass,
        levels,
        escaped: (1.0 - seen).max(0.0),
    })
}

/// Conditional masses `mu([w]) / mu([a])` of the first-return words with `n`
/// interior symbols, in label order.
pub fn return_word_masses<G: Graph + ?Sized>(
    mu: &MarkovMeasure,
    g: &G,
    a: Vertex,
    n: usize,
) -> Result<Vec<(Word, f64)>> {
    let base_mass = mu.mass(&[a]);
    if base_mass <= 0.0 {
        return Err(Error::NullBase { vertex: a });
    }
    Ok(shift::first_return_words(g, a, n)?
        .into_iter()
        .map(|w| {
            let m = mu.mass(&w.symbols) / base_mass;
            (w, m)
        })
        .collect())
}

/// Entropy of the loop system from its counts, logs taken in the big-integer
/// domain.
pub fn loop_system_entropy(ls: &LoopSystem, tol: f64) -> Result<crate::entropy::EntropyEstimate> {
    crate::entropy::loop_system_entropy(&ls.loop_counts(), tol)
}

/// `log c_n / (n + 1)` for each level with a loop, a cheap view of the growth.
pub fn level_growth(ls: &LoopSystem) -> Vec<(usize, f64)> {
    ls.counts
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(n, c)| (n, math::ln_big(c) / (n + 1) as f64))
        .collect()
}

/// Interior length of each block of a bracketed word, in order.
pub fn block_lengths(w: &[Vertex], a: Vertex) -> Result<Vec<usize>> {
    if w.first() != Some(&a) || w.last() != Some(&a) {
        return Err(Error::NotBracketed { base: a });
    }
    let mut out = Vec::new();
    let mut start = 1;
    for (k, &x) in w.iter().enumerate().skip(1) {
        if x == a {
            out.push(k - start);
            start = k + 1;
        }
    }
    Ok(out)
}

impl LoopSystem {
    /// `c_n` as `u64` where it fits.
    pub fn count_u64(&self, level: usize) -> Option<u64> {
        self.counts.get(level).and_then(ToPrimitive::to_u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::FiniteGraph;

    fn golden() -> FiniteGraph {
        FiniteGraph::new(2, &[(0, 0), (0, 1), (1, 0)]).unwrap()
    }

    #[test]
    fn full_two_shift_has_one_loop_per_level() {
        let ls = build_loop_system(&FiniteGraph::complete(2).unwrap(), 0, 10).unwrap();
        assert!(ls.counts().iter().all(|c| c.is_one()));
    }

    #[test]
    fn golden_mean_levels() {
        let ls = build_loop_system(&golden(), 0, 6).unwrap();
        let c: Vec<u64> = (0..=6).map(|n| ls.count_u64(n).unwrap()).collect();
        assert_eq!(c, vec![1, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn single_self_loop() {
        let g = FiniteGraph::new(1, &[(0, 0)]).unwrap();
        let ls = build_loop_system(&g, 0, 4).unwrap();
        assert_eq!(ls.count_u64(0), Some(1));
        assert!(ls.counts()[1..].iter().all(Zero::is_zero));
        assert_eq!(ls.recode_word(&[0, 0]).unwrap(), vec![LoopSymbol::Base; 2]);
    }

    #[test]
    fn counts_match_transfer_and_enumeration() {
        let g = FiniteGraph::new(
            4,
            &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 0), (2, 3), (3, 0), (3, 1), (1, 0)],
        )
        .unwrap();
        let ls = build_loop_system(&g, 0, 9).unwrap();
        assert_eq!(ls.counts(), &shift::first_return_counts(&g, 0, 9).unwrap()[..]);
        for n in 0..=9 {
            let words = shift::first_return_words(&g, 0, n).unwrap();
            assert_eq!(BigUint::from(words.len()), ls.counts()[n]);
            for (i, w) in words.iter().enumerate() {
                let interior = &w.symbols[1..w.len() - 1];
                assert_eq!(ls.rank(interior).unwrap(), BigUint::from(i));
                assert_eq!(ls.unrank(n, &BigUint::from(i)).unwrap(), interior);
            }
        }
    }

    #[test]
    fn recode_full_two_shift_by_hand() {
        let ls = build_loop_system(&FiniteGraph::complete(2).unwrap(), 0, 5).unwrap();
        let w = [0, 1, 0, 1, 1, 0];
        let r = ls.recode_word(&w).unwrap();
        let int = |level, position| LoopSymbol::Interior {
            level,
            index: BigUint::zero(),
            position,
        };
        assert_eq!(
            r,
            vec![LoopSymbol::Base, int(1, 0), LoopSymbol::Base, int(2, 0), int(2, 1), LoopSymbol::Base]
        );
        assert_eq!(ls.decode_word(&r).unwrap(), w);
        let ids: Vec<BigUint> = r.iter().map(|s| ls.vertex_id(s)).collect();
        let g = ls.realize().unwrap();
        for p in ids.windows(2) {
            assert!(g.has_edge(p[0].to_u32().unwrap(), p[1].to_u32().unwrap()));
        }
    }

    #[test]
    fn recode_errors() {
        let ls = build_loop_system(&FiniteGraph::complete(2).unwrap(), 0, 2).unwrap();
        assert_eq!(ls.recode_word(&[1, 0]), Err(Error::NotBracketed { base: 0 }));
        assert_eq!(
            ls.recode_word(&[0, 1, 1, 1, 0]),
            Err(Error::BlockTooLong { length: 3, horizon: 2 })
        );
        let g = golden();
        let ls = build_loop_system(&g, 0, 3).unwrap();
        assert_eq!(ls.recode_word(&[0, 1, 1, 0]), Err(Error::InadmissibleWord { from: 1, to: 1 }));
    }

    #[test]
    fn no_loops_is_an_error() {
        let g = FiniteGraph::new(3, &[(0, 1), (1, 2), (2, 1)]).unwrap();
        assert_eq!(
            build_loop_system(&g, 0, 5).unwrap_err(),
            Error::NoLoops { vertex: 0, horizon: 5 }
        );
    }

    #[test]
    fn geometric_returns_for_fair_coin() {
        let mu = MarkovMeasure::bernoulli_on(&[0.5, 0.5]).unwrap();
        let d = induced_return_distribution(&mu, 0, 30).unwrap();
        for (n, m) in d.levels.iter().enumerate() {
            assert!((m - 0.5f64.powi(n as i32 + 1)).abs() < 1e-16);
        }
        assert!((d.escaped - 0.5f64.powi(31)).abs() < 1e-15);
    }

    #[test]
    fn dirac_returns_immediately() {
        let d = induced_return_distribution(&MarkovMeasure::dirac_periodic(&[0]).unwrap(), 0, 5).unwrap();
        assert_eq!(d.levels[0], 1.0);
        assert_eq!(d.escaped, 0.0);
        assert_eq!(d.expected_return(), 1.0);
    }

    #[test]
    fn parry_returns_are_exhausted_at_two() {
        let g = golden();
        let mu = MarkovMeasure::parry(&g).unwrap();
        let d = induced_return_distribution(&mu, 0, 2).unwrap();
        let total: f64 = d.levels.iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(d.kac_gap().abs() < 1e-12);
        let words = return_word_masses(&mu, &g, 0, 1).unwrap();
        assert_eq!(words.len(), 1);
        assert!((words[0].1 - d.levels[1]).abs() < 1e-15);
    }

    #[test]
    fn null_base() {
        let mu = MarkovMeasure::dirac_periodic(&[1]).unwrap();
        assert_eq!(
            induced_return_distribution(&mu, 0, 3).unwrap_err(),
            Error::NullBase { vertex: 0 }
        );
    }
}
