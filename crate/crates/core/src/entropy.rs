//! Topological (Gurevich) entropy and pressure estimators.
//!
//! Every estimator returns its partial estimates verbatim together with the
//! final value, so convergence along an exhaustion can be inspected rather
//! than assumed.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::math;
use crate::potential::Potential;
use crate::shift::{self, FiniteGraph, Graph, LoopCounts, ShiftSpec, Vertex};
use crate::sum::NeumaierSum;
use crate::ENUMERATION_BUDGET;

pub use crate::math::ln_big;

/// Upper end of the entropy search range for renewal roots, in nats.
pub const ENTROPY_CAP: f64 = 50.0;
pub const BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    PeriodicOrbit,
    TruncationSpectral,
    LoopRenewal,
}

impl EntropyMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EntropyMethod::PeriodicOrbit => "periodic_orbit",
            EntropyMethod::TruncationSpectral => "truncation_spectral",
            EntropyMethod::LoopRenewal => "loop_renewal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partial {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    pub method: EntropyMethod,
    pub partials: Vec<Partial>,
    /// Last two partials closer than `tolerance`.
    pub converged: bool,
    pub tolerance: f64,
    /// Partials keep growing at a rate whose sum diverges.
    pub possibly_infinite: bool,
    /// Renewal equation has no root below 1; the entropy is zero.
    pub boundary: bool,
}

impl EntropyEstimate {
    fn from_partials(method: EntropyMethod, partials: Vec<Partial>, tolerance: f64) -> Self {
        let value = partials.last().map_or(0.0, |p| p.value);
        let converged = match partials.as_slice() {
            [.., a, b] => (b.value - a.value).abs() < tolerance,
            _ => false,
        };
        Self {
            value,
            method,
            partials,
            converged,
            tolerance,
            possibly_infinite: false,
            boundary: false,
        }
    }

    /// `(index, partial, delta)` rows; the first delta is zero.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.partials.iter().enumerate().map(move |(i, p)| {
            let delta = if i == 0 {
                0.0
            } else {
                p.value - self.partials[i - 1].value
            };
            (p.index, p.value, delta)
        })
    }
}

/// `(1/n) log Z_n(a)` for `n = 1..=n_max`, skipping lengths with no loop.
pub fn gurevich_entropy_periodic<G: Graph + ?Sized>(
    g: &G,
    a: Vertex,
    n_max: usize,
    tol: f64,
) -> Result<EntropyEstimate> {
    let z = shift::loops_at_all(g, a, n_max)?;
    let partials: Vec<Partial> = z
        .iter()
        .enumerate()
        .filter(|(_, z)| !z.is_zero())
        .map(|(i, z)| Partial {
            index: i + 1,
            value: math::ln_big(z) / (i + 1) as f64,
        })
        .collect();
    if partials.is_empty() {
        return Err(Error::NoLoops {
            vertex: a,
            horizon: n_max,
        });
    }
    Ok(EntropyEstimate::from_partials(
        EntropyMethod::PeriodicOrbit,
        partials,
        tol,
    ))
}

/// `log rho(A_k)` along the exhaustion, up to depth `k_max`.
pub fn gurevich_entropy_truncation(spec: &ShiftSpec, k_max: usize, tol: f64) -> Result<EntropyEstimate> {
    exhaustion_estimate(spec, k_max, tol, |g| {
        linalg::spectral_radius(&DenseMatrix::adjacency(g))
    })
}

/// `log rho(A_k(phi))` along the exhaustion, where `A_k(phi)` carries the
/// weights `exp(phi(word))` of the depth-`d` higher-block presentation.
pub fn gurevich_pressure(spec: &ShiftSpec, phi: &Potential, k_max: usize, tol: f64) -> Result<EntropyEstimate> {
    exhaustion_estimate(spec, k_max, tol, |g| {
        linalg::spectral_radius(&weighted_matrix(g, phi)?)
    })
}

fn exhaustion_estimate<F>(spec: &ShiftSpec, k_max: usize, tol: f64, radius: F) -> Result<EntropyEstimate>
where
    F: Fn(&FiniteGraph) -> Result<f64>,
{
    let partials = match spec {
        ShiftSpec::Finite(g) => vec![Partial {
            index: spec.first_depth(),
            value: linalg::log_or_neg_inf(radius(g)?),
        }],
        _ => {
            let first = spec.first_depth();
            if k_max < first {
                return Err(Error::InvalidParameter(alloc::format!(
                    "k_max {k_max} is below the first nonempty truncation {first}"
                )));
            }
            (first..=k_max)
                .map(|k| {
                    let g = spec.truncation(k)?;
                    Ok(Partial {
                        index: k,
                        value: linalg::log_or_neg_inf(radius(&g)?),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut est = EntropyEstimate::from_partials(EntropyMethod::TruncationSpectral, partials, tol);
    if matches!(spec, ShiftSpec::Finite(_)) {
        est.converged = true;
    } else if !est.converged {
        est.possibly_infinite = dyadic_growth_diverges(&est.partials);
    }
    Ok(est)
}

/// Compares the growth of a nondecreasing sequence over the dyadic blocks
/// `(K/4, K/2]` and `(K/2, K]`. Increments summing to a finite limit shrink
/// from one block to the next (by `2^-p` for `k^-p` tails, faster for
/// geometric ones); harmonic-type growth does not.
pub(crate) fn dyadic_growth_diverges(partials: &[Partial]) -> bool {
    let Some(last) = partials.last() else {
        return false;
    };
    let k = last.index;
    if k < 8 {
        return false;
    }
    let at = |target: usize| {
        partials
            .iter()
            .rev()
            .find(|p| p.index <= target)
            .map(|p| p.value)
    };
    match (at(k / 4), at(k / 2)) {
        (Some(q), Some(h)) if q.is_finite() && h.is_finite() => {
            let recent = last.value - h;
            let earlier = h - q;
            recent > 1e-12 && recent >= 0.75 * earlier
        }
        _ => false,
    }
}

/// Weighted transfer matrix of `phi` on the truncation `g`.
///
/// Depth 1 weights edge `i -> j` by `exp(phi(i))`, depth 2 by
/// `exp(phi(i, j))`; deeper potentials use the higher-block graph on
/// admissible words of length `depth - 1`.
pub fn weighted_matrix(g: &FiniteGraph, phi: &Potential) -> Result<DenseMatrix> {
    if let Some(c) = phi.is_constant() {
        let mut m = DenseMatrix::adjacency(g);
        let w = math::exp(c);
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                if m.get(i, j) != 0.0 {
                    m.set(i, j, w);
                }
            }
        }
        return Ok(m);
    }
    let n = g.vertex_count();
    match phi.depth() {
        1 => {
            let mut m = DenseMatrix::zeros(n);
            for i in 0..n as Vertex {
                let w = math::exp(phi.eval_or_err(&[i])?);
                for j in g.successors(i) {
                    m.set(i as usize, j as usize, w);
                }
            }
            Ok(m)
        }
        2 => {
            let mut m = DenseMatrix::zeros(n);
            for (i, j) in g.edges() {
                m.set(i as usize, j as usize, math::exp(phi.eval_or_err(&[i, j])?));
            }
            Ok(m)
        }
        d => {
            let states = admissible_words(g, d - 1)?;
            let mut m = DenseMatrix::zeros(states.len());
            for (si, u) in states.iter().enumerate() {
                let last = *u.last().unwrap_or(&0);
                for x in g.successors(last) {
                    let mut full = u.clone();
                    full.push(x);
                    let weight = math::exp(phi.eval_or_err(&full)?);
                    let next = &full[1..];
                    if let Ok(sj) = states.binary_search_by(|s| s.as_slice().cmp(next)) {
                        m.set(si, sj, weight);
                    }
                }
            }
            Ok(m)
        }
    }
}

/// All admissible words of length `len` in lexicographic order.
pub fn admissible_words<G: Graph + ?Sized>(g: &G, len: usize) -> Result<Vec<Vec<Vertex>>> {
    let mut out = Vec::new();
    if len == 0 {
        return Ok(out);
    }
    let mut path = Vec::with_capacity(len);
    fn rec<G: Graph + ?Sized>(
        g: &G,
        len: usize,
        path: &mut Vec<Vertex>,
        out: &mut Vec<Vec<Vertex>>,
    ) -> Result<()> {
        if path.len() == len {
            if out.len() >= ENUMERATION_BUDGET {
                return Err(Error::EnumerationBudget {
                    limit: ENUMERATION_BUDGET,
                });
            }
            out.push(path.clone());
            return Ok(());
        }
        let next: Vec<Vertex> = match path.last() {
            None => (0..g.vertex_count() as Vertex).collect(),
            Some(&v) => g.successors(v).collect(),
        };
        for x in next {
            path.push(x);
            rec(g, len, path, out)?;
            path.pop();
        }
        Ok(())
    }
    rec(g, len, &mut path, &mut out)?;
    Ok(out)
}

/// Entropy of a loop system from the renewal equation `sum_n c_n x^n = 1`,
/// `h = -log x*`. `counts[n - 1]` is the number of loops of length `n`.
///
/// Partials are the roots obtained from the counts truncated at dyadic
/// checkpoints and at the last two cutoffs.
pub fn loop_system_entropy(counts: &[BigUint], tol: f64) -> Result<EntropyEstimate> {
    if counts.iter().all(Zero::is_zero) {
        return Err(Error::AllCountsZero);
    }
    let ln_counts: Vec<f64> = counts.iter().map(math::ln_big).collect();
    if counts_diverge(&ln_counts) {
        return Err(Error::InfiniteEntropy);
    }
    let n = counts.len();
    let mut checkpoints = Vec::new();
    let mut c = 1;
    while c < n.saturating_sub(1) {
        checkpoints.push(c);
        c *= 2;
    }
    if n >= 2 {
        checkpoints.push(n - 1);
    }
    checkpoints.push(n);
    checkpoints.dedup();

    let mut partials = Vec::with_capacity(checkpoints.len());
    let mut boundary = false;
    for &cut in &checkpoints {
        let prefix = &ln_counts[..cut];
        if prefix.iter().all(|l| *l == f64::NEG_INFINITY) {
            continue;
        }
        let root = renewal_root(prefix)?;
        boundary = root.boundary;
        partials.push(Partial {
            index: cut,
            value: root.entropy,
        });
    }
    let mut est = EntropyEstimate::from_partials(EntropyMethod::LoopRenewal, partials, tol);
    est.boundary = boundary;
    Ok(est)
}

/// [`loop_system_entropy`] on a loop-count spec.
pub fn loop_counts_entropy(lc: &LoopCounts, tol: f64) -> Result<EntropyEstimate> {
    loop_system_entropy(&lc.counts(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalRoot {
    /// Root `x*` of `sum c_n x^n = 1` in `(exp(-cap), 1]`.
    pub x: f64,
    pub entropy: f64,
    pub boundary: bool,
}

/// Bisection on `(exp(-ENTROPY_CAP), 1 - eps)` for the generating function
/// given through `ln c_n` (`-inf` for zero counts).
pub fn renewal_root(ln_counts: &[f64]) -> Result<RenewalRoot> {
    let f = |ln_x: f64| -> f64 {
        ln_counts
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_finite())
            .map(|(i, l)| math::exp(l + (i + 1) as f64 * ln_x))
            .collect::<NeumaierSum>()
            .value()
    };
    let mut lo = math::exp(-ENTROPY_CAP);
    let mut hi = 1.0 - f64::EPSILON;
    if f(math::ln(lo)) >= 1.0 {
        return Err(Error::EntropyAboveCap { cap: ENTROPY_CAP });
    }
    if f(math::ln(hi)) < 1.0 {
        return Ok(RenewalRoot {
            x: 1.0,
            entropy: 0.0,
            boundary: true,
        });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(math::ln(mid)) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(RenewalRoot {
        x,
        entropy: -math::ln(x),
        boundary: false,
    })
}

/// Root test on the running maximum of `ln(c_n)/n`: unbounded growth at a
/// non-summable rate means no `r > 0` with `sum c_n r^n < inf`.
fn counts_diverge(ln_counts: &[f64]) -> bool {
    let mut running = f64::NEG_INFINITY;
    let partials: Vec<Partial> = ln_counts
        .iter()
        .enumerate()
        .map(|(i, l)| {
            running = running.max(l / (i + 1) as f64);
            Partial {
                index: i + 1,
                value: running,
            }
        })
        .collect();
    dyadic_growth_diverges(&partials)
}

/// Finite-entropy flag of a loop-count sequence at its cutoff.
pub fn loop_counts_finite_entropy(lc: &LoopCounts) -> bool {
    let ln: Vec<f64> = lc.counts().iter().map(math::ln_big).collect();
    !counts_diverge(&ln)
}

/// Finite-entropy check for a spec: finite graphs always pass, rule-based
/// exhaustions pass unless their truncation entropies grow like a divergent
/// series up to the declared cutoff.
pub fn has_finite_entropy(spec: &ShiftSpec) -> Result<bool> {
    match spec {
        ShiftSpec::Finite(_) => Ok(true),
        ShiftSpec::Loops(lc) => Ok(loop_counts_finite_entropy(lc)),
        ShiftSpec::Truncated { cutoff, .. } => {
            let est = gurevich_entropy_truncation(spec, *cutoff, 1e-9)?;
            Ok(!est.possibly_infinite)
        }
    }
}

/// `log rho` of each strongly connected component carrying a cycle, with the
/// component's vertices.
pub fn component_entropies(g: &FiniteGraph) -> Result<Vec<(Vec<Vertex>, f64)>> {
    shift::strongly_connected_components(g)
        .into_iter()
        .filter(|c| shift::component_has_cycle(g, c))
        .map(|c| {
            let sub = g.induced(&c)?;
            let h = linalg::log_or_neg_inf(linalg::spectral_radius(&DenseMatrix::adjacency(&sub))?);
            Ok((c, h))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{CountRule, Rule};

    fn golden() -> FiniteGraph {
        FiniteGraph::new(2, &[(0, 0), (0, 1), (1, 0)]).unwrap()
    }

    const LOG_PHI: f64 = 0.481_211_825_059_603_4;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn periodic_examples() {
        let full = FiniteGraph::complete(2).unwrap();
        let e = gurevich_entropy_periodic(&full, 0, 30, 1e-6).unwrap();
        // Z_n = 2^(n-1)
        for p in &e.partials {
            let oracle = core::f64::consts::LN_2 * (1.0 - 1.0 / p.index as f64);
            assert!((p.value - oracle).abs() < 1e-12);
        }
        assert!((e.value - core::f64::consts::LN_2).abs() < 0.05);

        let one = FiniteGraph::new(1, &[(0, 0)]).unwrap();
        let e = gurevich_entropy_periodic(&one, 0, 10, 1e-6).unwrap();
        assert!(e.partials.iter().all(|p| p.value == 0.0));
        assert!(e.converged);

        let e = gurevich_entropy_periodic(&golden(), 0, 40, 1e-6).unwrap();
        assert!((e.value - LOG_PHI).abs() < 0.02);
    }

    #[test]
    fn periodic_rejects_vertex_off_loops() {
        let g = FiniteGraph::new(3, &[(0, 0), (0, 1), (1, 0), (2, 0)]).unwrap();
        assert_eq!(
            gurevich_entropy_periodic(&g, 2, 20, 1e-6),
            Err(Error::NoLoops { vertex: 2, horizon: 20 })
        );
    }

    #[test]
    fn truncation_of_full_countable_shift_diverges() {
        let spec = ShiftSpec::Truncated {
            rule: Rule::Full,
            cutoff: 40,
        };
        let e = gurevich_entropy_truncation(&spec, 40, 1e-9).unwrap();
        for p in &e.partials {
            assert!((p.value - ((p.index + 1) as f64).ln()).abs() < 1e-12);
        }
        assert!(e.partials.windows(2).all(|w| w[1].value > w[0].value));
        assert!(!e.converged);
        assert!(e.possibly_infinite);
    }

    #[test]
    fn truncation_of_finite_graph_is_exact() {
        let e = gurevich_entropy_truncation(&ShiftSpec::Finite(golden()), 5, 1e-9).unwrap();
        assert!(e.converged);
        assert_eq!(e.partials.len(), 1);
        assert!((e.value - LOG_PHI).abs() < 1e-9);
    }

    #[test]
    fn renewal_and_ladder_exhaustions_converge() {
        let ren = ShiftSpec::Truncated {
            rule: Rule::Renewal,
            cutoff: 60,
        };
        let e = gurevich_entropy_truncation(&ren, 60, 1e-9).unwrap();
        assert!(e.converged);
        assert!(!e.possibly_infinite);
        assert!((e.value - core::f64::consts::LN_2).abs() < 1e-9);
        assert!(e.partials.windows(2).all(|w| w[1].value >= w[0].value - 1e-12));

        let lad = ShiftSpec::Truncated {
            rule: Rule::Ladder,
            cutoff: 40,
        };
        let e = gurevich_entropy_truncation(&lad, 40, 1e-9).unwrap();
        assert!(!e.possibly_infinite);
        // rho_k = 1 + 2 cos(pi / (k + 2))
        for p in &e.partials {
            let oracle = (1.0 + 2.0 * (core::f64::consts::PI / (p.index as f64 + 2.0)).cos()).ln();
            assert!((p.value - oracle).abs() < 1e-9, "k={}", p.index);
        }
        assert!(e.partials.windows(2).all(|w| w[1].value >= w[0].value));
    }

    #[test]
    fn loop_entropy_examples() {
        let e = loop_system_entropy(&big(&[1, 1]), 1e-9).unwrap();
        assert!((e.value - LOG_PHI).abs() < 1e-9);

        let e = loop_system_entropy(&big(&[1; 60]), 1e-6).unwrap();
        assert!((e.value - core::f64::consts::LN_2).abs() < 1e-6);
        assert!(e.converged);

        for k in 1..=10u64 {
            let e = loop_system_entropy(&big(&[k]), 1e-9).unwrap();
            assert!((e.value - (k as f64).ln()).abs() < 1e-12, "k={k}");
        }
        let one = loop_system_entropy(&big(&[1]), 1e-9).unwrap();
        assert!(one.boundary);
        assert_eq!(one.value, 0.0);
    }

    #[test]
    fn loop_entropy_errors() {
        assert_eq!(loop_system_entropy(&big(&[0, 0]), 1e-9), Err(Error::AllCountsZero));
        let fact = LoopCounts {
            rule: CountRule::Factorial,
            cutoff: 60,
        };
        assert!(!loop_counts_finite_entropy(&fact));
        assert_eq!(loop_counts_entropy(&fact, 1e-9), Err(Error::InfiniteEntropy));
        let exp = LoopCounts {
            rule: CountRule::Exponential(3),
            cutoff: 200,
        };
        assert!(loop_counts_finite_entropy(&exp));
        // c_n = 3^(n-1): sum (3x)^n / 3 = 1 at x = 1/4, h = log 4
        let e = loop_counts_entropy(&exp, 1e-9).unwrap();
        assert!((e.value - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn pressure_examples() {
        let g = golden();
        let spec = ShiftSpec::Finite(g.clone());
        let p0 = gurevich_pressure(&spec, &Potential::zero(), 1, 1e-9).unwrap();
        let h = gurevich_entropy_truncation(&spec, 1, 1e-9).unwrap();
        assert!((p0.value - h.value).abs() < 1e-12);

        let full = ShiftSpec::Finite(FiniteGraph::complete(2).unwrap());
        let p = gurevich_pressure(&full, &Potential::constant(0.3), 1, 1e-9).unwrap();
        assert!((p.value - (core::f64::consts::LN_2 + 0.3)).abs() < 1e-12);

        // [[1/2, 1/2], [1, 0]] has rho = 1
        let phi = Potential::on_vertices(&[-core::f64::consts::LN_2, 0.0]);
        let p = gurevich_pressure(&spec, &phi, 1, 1e-9).unwrap();
        assert!(p.value.abs() < 1e-12);
    }

    #[test]
    fn pressure_rejects_undefined_potential() {
        let spec = ShiftSpec::Finite(golden());
        let phi = Potential::on_vertices(&[0.0]);
        assert!(matches!(
            gurevich_pressure(&spec, &phi, 1, 1e-9),
            Err(Error::PotentialUndefined { .. })
        ));
    }

    #[test]
    fn depth_three_pressure_matches_depth_two_lift() {
        // a depth-3 potential that only reads its first two symbols must give
        // the same pressure as the depth-2 potential it extends
        let g = FiniteGraph::new(3, &[(0, 0), (0, 1), (1, 2), (2, 0), (2, 1)]).unwrap();
        let mut t2 = alloc::collections::BTreeMap::new();
        for (k, (i, j)) in g.edges().enumerate() {
            t2.insert(vec![i, j], 0.1 * k as f64 - 0.2);
        }
        let phi2 = Potential::from_table(2, t2.clone()).unwrap();
        let mut t3 = alloc::collections::BTreeMap::new();
        for w in admissible_words(&g, 3).unwrap() {
            t3.insert(w.clone(), t2[&w[..2].to_vec()]);
        }
        let phi3 = Potential::from_table(3, t3).unwrap();
        let spec = ShiftSpec::Finite(g);
        let a = gurevich_pressure(&spec, &phi2, 1, 1e-9).unwrap().value;
        let b = gurevich_pressure(&spec, &phi3, 1, 1e-9).unwrap().value;
        assert!((a - b).abs() < 1e-11);
    }

    #[test]
    fn components_of_non_transitive_graph() {
        let g = FiniteGraph::new(4, &[(0, 0), (0, 1), (1, 0), (1, 2), (2, 2), (2, 3), (3, 2)]).unwrap();
        let comps = component_entropies(&g).unwrap();
        assert_eq!(comps.len(), 2);
        assert!((comps[0].1 - LOG_PHI).abs() < 1e-10);
        assert!((comps[1].1 - LOG_PHI).abs() < 1e-10);
        let whole = gurevich_entropy_truncation(&ShiftSpec::Finite(g), 0, 1e-9).unwrap();
        assert!((whole.value - LOG_PHI).abs() < 1e-9);
    }
}
