//! Seeded generators of measures, potentials and convergent families.
//!
//! Family `i` under seed `s` draws from its own ChaCha stream `(s, i)`, so
//! the output does not depend on the order in which families are built.

use melab_core::{FiniteGraph, Graph, MarkovMeasure, Potential, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// Members per family.
pub const FAMILY_LENGTH: usize = 12;

/// Ratio of the interpolation parameters: `t_j = RATIO^-j`.
pub const RATIO: f64 = 16.0;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Markov measure with transition weights drawn from `(0.1, 1)` on every
/// edge of `g`, then normalized row by row.
pub fn random_markov(g: &FiniteGraph, rng: &mut impl Rng) -> Result<MarkovMeasure> {
    let n = g.vertex_count();
    let mut rows = vec![vec![0.0; n]; n];
    for (u, v) in g.edges() {
        rows[u as usize][v as usize] = rng.gen_range(0.1..1.0);
    }
    for r in &mut rows {
        let s: f64 = r.iter().sum();
        r.iter_mut().for_each(|x| *x /= s);
    }
    Ok(MarkovMeasure::markov((0..n as Vertex).collect(), &rows)?)
}

/// Depth-1 potential with values in `(-1, 1)`.
pub fn random_potential(n: usize, rng: &mut impl Rng) -> Potential {
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Potential::on_vertices(&values)
}

/// A sequence converging to `limit`, with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct Family {
    pub limit: MarkovMeasure,
    pub ts: Vec<f64>,
    pub members: Vec<MarkovMeasure>,
}

pub fn interpolation_parameters(len: usize) -> Vec<f64> {
    (1..=len as i32).map(|j| RATIO.powi(-j)).collect()
}

/// Members `(1 - t_j) P0 + t_j P1` for `t_j = 16^-j`, converging to `P0`.
pub fn segment(limit: &MarkovMeasure, other: &MarkovMeasure, len: usize) -> Result<Family> {
    let ts = interpolation_parameters(len);
    let members = ts
        .iter()
        .map(|&t| MarkovMeasure::interpolate(limit, other, t))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Family {
        limit: limit.clone(),
        ts,
        members,
    })
}

/// Family `index` under `seed`: both endpoints random.
pub fn interpolation_family(g: &FiniteGraph, seed: u64, index: u64) -> Result<Family> {
    let mut rng = stream(seed, index);
    let p0 = random_markov(g, &mut rng)?;
    let p1 = random_markov(g, &mut rng)?;
    segment(&p0, &p1, FAMILY_LENGTH)
}

/// Perturbations of the Parry measure toward a random measure.
pub fn parry_family(g: &FiniteGraph, seed: u64, len: usize) -> Result<Family> {
    let mut rng = stream(seed, 0);
    let parry = MarkovMeasure::parry(g)?;
    let other = random_markov(g, &mut rng)?;
    segment(&parry, &other, len)
}
