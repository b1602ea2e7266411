//! Small dense linear algebra: nonnegative Perron data and linear solves.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::shift::{Graph, Vertex};

/// Power-iteration stopping rule on consecutive Rayleigh quotients.
pub const RAYLEIGH_TOL: f64 = 1e-13;
pub const MAX_ITERATIONS: usize = 1_000_000;
/// Max-norm change of the normalized eigenvector at which iteration stops.
pub const VECTOR_TOL: f64 = 1e-14;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch { expected: n });
        }
        Ok(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// 0/1 adjacency matrix of a graph.
    pub fn adjacency<G: Graph + ?Sized>(g: &G) -> Self {
        let n = g.vertex_count();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in g.successors(i as Vertex) {
                m.set(i, j as usize, 1.0);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x M`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }
}

/// Spectral radius and a nonnegative eigenvector of a nonnegative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub value: f64,
    /// Right eigenvector, normalized to unit max-norm.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Power iteration from the all-ones vector.
///
/// Iterates with `M + I`, which has the same eigenvectors and spectral radius
/// shifted by one but is aperiodic on every irreducible block, so periodic
/// graphs converge too. Stops when consecutive Rayleigh quotients of `M`
/// differ by less than [`RAYLEIGH_TOL`] (relative to `max(1, rho)`) and the
/// normalized vector moves by less than [`VECTOR_TOL`].
pub fn perron(m: &DenseMatrix) -> Result<PerronData> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    // nonzero pattern, so sparse truncations cost O(edges) per step
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(j, &a)| (j, a))
                .collect()
        })
        .collect();
    let mut x = vec![1.0; n];
    let mut prev = f64::NAN;
    for it in 1..=MAX_ITERATIONS {
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r.iter().map(|&(j, a)| a * x[j]).sum())
            .collect();
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let xx: f64 = x.iter().map(|a| a * a).sum();
        let rq = xy / xx;
        let mut next: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a + b).collect();
        let norm = next.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if norm == 0.0 {
            return Ok(PerronData {
                value: 0.0,
                vector: x,
                iterations: it,
            });
        }
        for v in &mut next {
            *v /= norm;
        }
        let moved = next.iter().zip(&x).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        x = next;
        if (rq - prev).abs() < RAYLEIGH_TOL * rq.abs().max(1.0) && moved < VECTOR_TOL {
            return Ok(PerronData {
                value: rq,
                vector: x,
                iterations: it,
            });
        }
        prev = rq;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

/// Spectral radius of a nonnegative matrix, taken as the maximum over the
/// irreducible diagonal blocks (strongly connected components of the support),
/// each handled by [`perron`].
pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    let n = m.dim();
    let succ: Vec<Vec<Vertex>> = (0..n)
        .map(|i| (0..n).filter(|&j| m.get(i, j) != 0.0).map(|j| j as Vertex).collect())
        .collect();
    let support = SupportGraph(&succ);
    let mut best = 0.0f64;
    for comp in crate::shift::strongly_connected_components(&support) {
        if !crate::shift::component_has_cycle(&support, &comp) {
            continue;
        }
        let mut block = DenseMatrix::zeros(comp.len());
        for (a, &i) in comp.iter().enumerate() {
            for (b, &j) in comp.iter().enumerate() {
                block.set(a, b, m.get(i as usize, j as usize));
            }
        }
        best = best.max(perron(&block)?.value);
    }
    Ok(best)
}

struct SupportGraph<'a>(&'a [Vec<Vertex>]);

impl Graph for SupportGraph<'_> {
    fn vertex_count(&self) -> usize {
        self.0.len()
    }
    fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        self.0[from as usize].binary_search(&to).is_ok()
    }
    fn successors(&self, v: Vertex) -> crate::shift::Successors<'_> {
        crate::shift::Successors::Slice(self.0[v as usize].iter())
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::ShapeMismatch { expected: n });
    }
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap_or(col);
        if m[pivot * n + col].abs() < 1e-300 {
            return Err(Error::InvalidParameter("singular linear system".into()));
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r * n + k] * x[k]).sum();
        x[r] = (rhs[r] - s) / m[r * n + r];
    }
    Ok(x)
}

pub(crate) fn log_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        math::ln(x)
    } else {
        f64::NEG_INFINITY
    }
}
