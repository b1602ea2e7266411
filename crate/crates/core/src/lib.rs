//! Computable objects on countable Markov shifts.
//!
//! The crate works on finite presentations of countable Markov shifts
//! ([`ShiftSpec`]): explicit finite graphs, rule-based graphs observed through
//! a monotone exhaustion `{0..k}`, and loop systems given by their loop counts.
//! On top of those it provides
//!
//! - topological (Gurevich) entropy and pressure estimators ([`entropy`]),
//! - Markov, Bernoulli and periodic-orbit measures with cylinder masses,
//!   partition entropies and Kolmogorov-Sinai entropy ([`measure`]),
//! - a cylinder metric for weak* convergence and upper semi-continuity
//!   verdicts for the entropy map ([`weakstar`]),
//! - first-return recoding of a shift into a loop system ([`recoding`]),
//! - suspension flows with locally constant roofs ([`suspension`]).
//!
//! All logarithms are natural. The crate is `no_std` and needs `alloc`;
//! enable the `std` feature to use the platform float intrinsics instead of
//! `libm`.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod entropy;
mod error;
pub mod linalg;
pub mod measure;
pub mod potential;
pub mod recoding;
pub mod shift;
mod sum;
pub mod suspension;
pub mod weakstar;

pub(crate) mod math;

pub use entropy::{EntropyEstimate, EntropyMethod, Partial};
pub use error::{Error, Result};
pub use measure::{MarkovMeasure, MeasureKind, PartitionEntropyTable};
pub use potential::Potential;
pub use recoding::{LoopSymbol, LoopSystem, ReturnDistribution};
pub use shift::{
    CountRule, FiniteGraph, Graph, LoopCounts, Rule, RuleGraph, ShiftSpec, Vertex, Word,
};
pub use suspension::{FlowMeasure, RoofFunction};
pub use sum::NeumaierSum;
pub use weakstar::{ConvergenceReport, UscReport, UscTolerances, UscVerdict, WeakStarVerdict};

/// Cap on the number of words any single enumeration may visit.
pub const ENUMERATION_BUDGET: usize = 1_000_000;
