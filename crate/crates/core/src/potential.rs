//! Locally constant functions on the shift.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::shift::Vertex;

/// A bounded function depending only on the first `depth` coordinates.
///
/// Locally constant functions have zero variation beyond their depth, so they
/// are in particular of summable variations.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    depth: usize,
    values: Values,
}

#[derive(Debug, Clone, PartialEq)]
enum Values {
    Constant(f64),
    Table(BTreeMap<Vec<Vertex>, f64>),
}

impl Potential {
    pub fn constant(c: f64) -> Self {
        Self {
            depth: 1,
            values: Values::Constant(c),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Depth-1 potential `x -> values[x_0]`.
    pub fn on_vertices(values: &[f64]) -> Self {
        let table = values
            .iter()
            .enumerate()
            .map(|(v, &x)| (alloc::vec![v as Vertex], x))
            .collect();
        Self {
            depth: 1,
            values: Values::Table(table),
        }
    }

    pub fn from_table(depth: usize, table: BTreeMap<Vec<Vertex>, f64>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("potential depth must be positive".into()));
        }
        if let Some(w) = table.keys().find(|w| w.len() != depth) {
            return Err(Error::InvalidParameter(alloc::format!(
                "word {w:?} does not have length {depth}"
            )));
        }
        if let Some(v) = table.values().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("non-finite value {v}")));
        }
        Ok(Self {
            depth,
            values: Values::Table(table),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self.values {
            Values::Constant(c) => Some(c),
            Values::Table(_) => None,
        }
    }

    /// Value on any word at least `depth` long; only the prefix is read.
    pub fn eval(&self, word: &[Vertex]) -> Option<f64> {
        match &self.values {
            Values::Constant(c) => Some(*c),
            Values::Table(t) => word.get(..self.depth).and_then(|w| t.get(w)).copied(),
        }
    }

    pub(crate) fn eval_or_err(&self, word: &[Vertex]) -> Result<f64> {
        self.eval(word).ok_or_else(|| Error::PotentialUndefined {
            word: word.iter().take(self.depth).copied().collect(),
        })
    }

    /// `max |phi|`.
    pub fn bound(&self) -> f64 {
        self.range().map_or(0.0, |(lo, hi)| lo.abs().max(hi.abs()))
    }

    /// `(min, max)` of the values, `None` for an empty table.
    pub fn range(&self) -> Option<(f64, f64)> {
        match &self.values {
            Values::Constant(c) => Some((*c, *c)),
            Values::Table(t) => t.values().fold(None, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            }),
        }
    }

    pub fn table(&self) -> Option<&BTreeMap<Vec<Vertex>, f64>> {
        match &self.values {
            Values::Constant(_) => None,
            Values::Table(t) => Some(t),
        }
    }

    /// `self * c`.
    pub fn scaled(&self, c: f64) -> Self {
        let values = match &self.values {
            Values::Constant(v) => Values::Constant(v * c),
            Values::Table(t) => Values::Table(t.iter().map(|(k, v)| (k.clone(), v * c)).collect()),
        };
        Self {
            depth: self.depth,
            values,
        }
    }
}
