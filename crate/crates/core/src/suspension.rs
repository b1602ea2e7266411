//! Suspension flows over a shift with a locally constant roof.
//!
//! A flow-invariant probability is represented by its base measure `mu` and
//! the roof `tau`: it is `(mu x Leb)` restricted to the region under the roof,
//! divided by `Z = int tau dmu`. Integrals of flow observables reduce to base
//! integrals of their fiber integrals (Kac), and entropy is the base entropy
//! divided by `Z` (Abramov).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::entropy::admissible_words;
use crate::error::{Error, Result};
use crate::measure::{integrate, ks_entropy, MarkovMeasure};
use crate::potential::Potential;
use crate::shift::{Graph, Vertex};
use crate::weakstar::{check_weakstar_limit, tail_len, ConvergenceReport, UscTolerances, UscVerdict, WeakStarVerdict};

/// A positive roof depending on the first `depth` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RoofFunction {
    values: Potential,
    min: f64,
}

impl RoofFunction {
    pub fn constant(c: f64) -> Result<Self> {
        Self::from_potential(Potential::constant(c))
    }

    pub fn new(depth: usize, table: BTreeMap<Vec<Vertex>, f64>) -> Result<Self> {
        Self::from_potential(Potential::from_table(depth, table)?)
    }

    /// Depth-1 roof `x -> values[x_0]`.
    pub fn on_vertices(values: &[f64]) -> Result<Self> {
        Self::from_potential(Potential::on_vertices(values))
    }

    pub fn from_potential(values: Potential) -> Result<Self> {
        let Some((min, _)) = values.range() else {
            return Err(Error::InvalidParameter("roof has no values".into()));
        };
        if !(min > 0.0 && min.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "roof must be bounded away from zero, found {min}"
            )));
        }
        Ok(Self { values, min })
    }

    pub fn depth(&self) -> usize {
        self.values.depth()
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn eval(&self, word: &[Vertex]) -> Option<f64> {
        self.values.eval(word)
    }

    pub fn as_potential(&self) -> &Potential {
        &self.values
    }

    /// `c * tau` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c.is_nan() || c <= 0.0 {
            return Err(Error::InvalidParameter("roof scale must be positive".into()));
        }
        Self::from_potential(self.values.scaled(c))
    }
}

/// A base measure lifted under a roof.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMeasure {
    base: MarkovMeasure,
    roof: RoofFunction,
    z: f64,
}

impl FlowMeasure {
    pub fn base(&self) -> &MarkovMeasure {
        &self.base
    }

    pub fn roof(&self) -> &RoofFunction {
        &self.roof
    }

    /// `Z = int tau dmu`.
    pub fn normalization(&self) -> f64 {
        self.z
    }
}

pub fn lift_measure(mu: &MarkovMeasure, tau: &RoofFunction) -> Result<FlowMeasure> {
    let z = integrate(mu, &tau.values)?;
    Ok(FlowMeasure {
        base: mu.clone(),
        roof: tau.clone(),
        z,
    })
}

/// `int F dnu` for any flow observable whose fiber integral is `f`, i.e.
/// `int f dmu / Z`. The depth of `f` may not exceed the roof depth.
pub fn kac_integral(f: &Potential, nu: &FlowMeasure) -> Result<f64> {
    if f.is_constant().is_none() && f.depth() > nu.roof.depth() {
        return Err(Error::DepthMismatch {
            function: f.depth(),
            roof: nu.roof.depth(),
        });
    }
    Ok(integrate(&nu.base, f)? / nu.z)
}

/// `h(nu) = h(mu) / Z`.
pub fn abramov_entropy(nu: &FlowMeasure) -> Result<f64> {
    if !nu.base.is_ergodic() {
        return Err(Error::NonErgodic { index: 0 });
    }
    Ok(ks_entropy(&nu.base) / nu.z)
}

/// `psi(u) = 3u^2 - 2u^3`.
pub fn psi(u: f64) -> f64 {
    u * u * (3.0 - 2.0 * u)
}

/// `psi'(u) = 6u(1 - u)`.
pub fn psi_prime(u: f64) -> f64 {
    6.0 * u * (1.0 - u)
}

/// The lifted observable `F(x, t) = f(x) / tau(x) * psi'(t / tau(x))` on the
/// fiber over a point with `f(x) = f` and `tau(x) = tau`.
pub fn brw_lift(f: f64, tau: f64, t: f64) -> f64 {
    f / tau * psi_prime(t / tau)
}

/// Composite Simpson rule on `[0, b]` with `n` (even) subintervals.
pub fn simpson(g: impl Fn(f64) -> f64, b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..n {
        let v = g(k as f64 * h);
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (g(0.0) + 4.0 * odd + 2.0 * even + g(b))
}

/// Error bound for the Simpson integral of the lift over a fiber of height
/// `tau`: the truncation term `tau h^4 / 180 * max |F''''|` vanishes because
/// `F(x, .)` is quadratic, leaving a rounding term `4 (n + 1) eps max|F| tau`.
pub fn simpson_bound(f: f64, tau: f64, n: usize) -> f64 {
    let h = tau / n as f64;
    let fourth_derivative = 0.0;
    let truncation = tau * h * h * h * h / 180.0 * fourth_derivative;
    // max over the fiber of |F| is 1.5 |f| / tau, attained at t = tau / 2
    let max_f = 1.5 * f.abs() / tau;
    truncation + 4.0 * (n + 1) as f64 * f64::EPSILON * max_f * tau
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrwCheck {
    /// `max_w |Simpson(F) - f(w)|`.
    pub max_error: f64,
    /// Largest per-word bound.
    pub bound: f64,
    /// Every word's error is under its own bound.
    pub within_bound: bool,
    pub words: usize,
}

/// Integrates the lift of `f` along every fiber over the admissible words of
/// `g` of the common depth and compares with `f`.
pub fn brw_lift_check<G: Graph + ?Sized>(
    f: &Potential,
    tau: &RoofFunction,
    g: &G,
    quadrature_n: usize,
) -> Result<BrwCheck> {
    if quadrature_n < 8 || quadrature_n % 2 == 1 {
        return Err(Error::InvalidParameter(alloc::format!(
            "quadrature_n = {quadrature_n} must be even and at least 8"
        )));
    }
    let depth = f.depth().max(tau.depth());
    let mut out = BrwCheck {
        max_error: 0.0,
        bound: 0.0,
        within_bound: true,
        words: 0,
    };
    for w in admissible_words(g, depth)? {
        let (Some(fw), Some(tw)) = (f.eval(&w), tau.eval(&w)) else {
            continue;
        };
        let q = simpson(|t| brw_lift(fw, tw, t), tw, quadrature_n);
        let err = (q - fw).abs();
        let bound = simpson_bound(fw, tw, quadrature_n);
        out.max_error = out.max_error.max(err);
        out.bound = out.bound.max(bound);
        out.within_bound &= err <= bound;
        out.words += 1;
    }
    Ok(out)
}

/// Upper semi-continuity of the flow entropy along a sequence of lifts.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowUscReport {
    pub verdict: UscVerdict,
    pub base: ConvergenceReport,
    /// `|Z_n - Z|`.
    pub z_gaps: Vec<f64>,
    pub entropies: Vec<f64>,
    pub limit_entropy: f64,
    pub tail_max: f64,
    pub witness: Option<usize>,
    pub tol: f64,
}

/// The flow measures converge when the bases converge weak* and the
/// normalizations converge; then the tail-max flow entropy is compared with
/// the entropy of the limit.
pub fn flow_usc_check<G: Graph + ?Sized>(
    seq: &[FlowMeasure],
    nu: &FlowMeasure,
    g: &G,
    depth: usize,
    tol: UscTolerances,
) -> Result<FlowUscReport> {
    if seq.iter().any(|m| m.roof != nu.roof) {
        return Err(Error::MixedRoofs);
    }
    if let Some(index) = seq.iter().position(|m| !m.base.is_ergodic()) {
        return Err(Error::NonErgodic { index });
    }
    let bases: Vec<MarkovMeasure> = seq.iter().map(|m| m.base.clone()).collect();
    let base = check_weakstar_limit(&bases, &nu.base, g, depth, tol.weakstar)?;
    let z_gaps: Vec<f64> = seq.iter().map(|m| (m.z - nu.z).abs()).collect();
    let entropies = seq.iter().map(abramov_entropy).collect::<Result<Vec<f64>>>()?;
    let limit_entropy = ks_entropy(&nu.base) / nu.z;
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
    let z_converges = z_gaps[z_gaps.len() - 1] < tol.weakstar
        && z_gaps[start..].windows(2).all(|w| w[1] <= w[0] + crate::weakstar::MONOTONE_SLACK);
    let (verdict, witness) = if base.verdict != WeakStarVerdict::Converges || !z_converges {
        (UscVerdict::NotApplicable, None)
    } else if tail_max <= limit_entropy + tol.entropy {
        (UscVerdict::Holds, None)
    } else {
        (UscVerdict::Violated, Some(arg))
    };
    Ok(FlowUscReport {
        verdict,
        base,
        z_gaps,
        entropies,
        limit_entropy,
        tail_max,
        witness,
        tol: tol.entropy,
    })
}
