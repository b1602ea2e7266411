//! Sequences of measures whose entropies approach the topological entropy.
//! When the sequence converges, its limit has to be a measure of maximal
//! entropy; when mass escapes to infinity, there is no limit to test.
//!
//! Finite graphs use perturbations of the Parry measure. Countable specs use
//! the Parry measures of the truncations at depths `2, 4, 8, ...` up to the
//! cutoff, tested against the deepest one.

use melab_core::entropy::gurevich_entropy_truncation;
use melab_core::measure::ks_entropy;
use melab_core::weakstar::check_weakstar_limit;
use melab_core::{MarkovMeasure, ShiftSpec, Vertex, WeakStarVerdict};
use serde_json::json;

use super::{positive, require_finite_entropy, spec_label, summary, Experiment, Outcome};
use crate::error::{LabError, Result};
use crate::families::parry_family;
use crate::output::Table;

pub const DEFAULT_LENGTH: usize = 12;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_DEPTH: usize = 3;
pub const NO_LIMIT: &str = "no accumulation point at horizon";

#[derive(Debug, Clone)]
pub struct Params {
    pub length: usize,
    pub seed: u64,
    pub depth: usize,
    pub tol: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            length: DEFAULT_LENGTH,
            seed: 0,
            depth: DEFAULT_DEPTH,
            tol: DEFAULT_TOL,
        }
    }
}

/// Truncation depths `2, 4, 8, ...` below the cutoff, then the cutoff.
pub fn dyadic_depths(first: usize, cutoff: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = first.max(2).next_power_of_two();
    while k < cutoff {
        out.push(k);
        k *= 2;
    }
    out.push(cutoff);
    out
}

/// Stationary mass that `mu` gives to `core`.
pub fn core_mass(mu: &MarkovMeasure, core: &[Vertex]) -> f64 {
    core.iter().map(|&v| mu.mass(&[v])).sum()
}

/// Mass on the first member's support decreases strictly across the tail
/// and ends below half its initial value.
pub fn mass_escapes(masses: &[f64], tail_start: usize) -> bool {
    let (Some(&first), Some(&last)) = (masses.first(), masses.last()) else {
        return false;
    };
    masses[tail_start..].windows(2).all(|w| w[1] < w[0]) && last < 0.5 * first
}

pub fn run(spec: &ShiftSpec, p: &Params) -> Result<Outcome> {
    require_finite_entropy(spec, Experiment::MmeSearch)?;
    positive("tol", p.tol)?;
    super::at_least_one("depth", p.depth)?;
    let h_top = gurevich_entropy_truncation(spec, spec.cutoff(), 1e-9)?.value;
    let g = spec.deepest()?;

    let (seq, limit, labels): (Vec<MarkovMeasure>, MarkovMeasure, Vec<f64>) = match spec {
        ShiftSpec::Finite(g) => {
            if p.length < 3 {
                return Err(LabError::Precondition("sequence length must be at least 3".into()));
            }
            let fam = parry_family(g, p.seed, p.length)?;
            (fam.members, fam.limit, fam.ts)
        }
        _ => {
            let depths = dyadic_depths(spec.first_depth(), spec.cutoff());
            if depths.len() < 4 {
                return Err(LabError::Precondition(format!(
                    "cutoff {} leaves fewer than 4 dyadic truncation depths",
                    spec.cutoff()
                )));
            }
            let mut all = depths
                .iter()
                .map(|&k| Ok(MarkovMeasure::parry(&spec.truncation(k)?)?))
                .collect::<Result<Vec<_>>>()?;
            let limit = all.pop().expect("at least four depths");
            (all, limit, depths.iter().map(|&k| k as f64).collect())
        }
    };

    let report = check_weakstar_limit(&seq, &limit, &g, p.depth, p.tol)?;
    let core = seq[0].support().to_vec();
    let mut masses: Vec<f64> = seq.iter().map(|m| core_mass(m, &core)).collect();
    masses.push(core_mass(&limit, &core));
    let escapes = !matches!(spec, ShiftSpec::Finite(_)) && mass_escapes(&masses, report.tail_start);

    let mut table = Table::new(
        "mme_search",
        &["member", "parameter", "entropy", "deviation", "metric", "core_mass"],
    );
    for (i, m) in seq.iter().enumerate() {
        table.push(vec![
            i.into(),
            labels[i].into(),
            ks_entropy(m).into(),
            report.deviation(i).into(),
            report.metrics[i].into(),
            masses[i].into(),
        ]);
    }
    let limit_entropy = ks_entropy(&limit);
    let gap = (limit_entropy - h_top).abs();
    let (verdict, passed, note) = if escapes || report.verdict == WeakStarVerdict::Diverges {
        (
            NO_LIMIT.to_string(),
            true,
            format!("mass on the initial core fell from {:.6} to {:.6e}", masses[0], masses[masses.len() - 1]),
        )
    } else if report.verdict == WeakStarVerdict::Converges {
        let ok = gap < p.tol;
        (
            "converges".to_string(),
            ok,
            format!("limit entropy {limit_entropy} against topological entropy {h_top}, gap {gap:e}"),
        )
    } else {
        (
            "inconclusive".to_string(),
            false,
            format!("final deviation {:e} with tol {:e}", report.final_deviation(), p.tol),
        )
    };
    let params = json!({
        "spec": spec_label(Some(spec)),
        "length": p.length,
        "seed": p.seed,
        "depth": p.depth,
        "tol": p.tol,
        "h_top": h_top,
        "limit_entropy": limit_entropy,
    });
    let mut s = summary(Experiment::MmeSearch, params, &verdict);
    s.notes.push(note);
    Ok(Outcome {
        tables: vec![table],
        summary: s,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::families::segment;
    use melab_core::Rule;

    #[test]
    fn golden_parry_is_the_mme() {
        let g = corpus::graph("golden").unwrap();
        let out = run(&ShiftSpec::Finite(g.clone()), &Params::default()).unwrap();
        assert!(out.passed, "{:?}", out.summary);
        assert_eq!(out.summary.verdict, "converges");
        let parry = MarkovMeasure::parry(&g).unwrap();
        let ln_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((ks_entropy(&parry) - ln_phi).abs() < 1e-8);
    }

    #[test]
    fn constant_sequence_converges_at_once() {
        let g = corpus::graph("tri").unwrap();
        let parry = MarkovMeasure::parry(&g).unwrap();
        let fam = segment(&parry, &parry, 6).unwrap();
        let r = check_weakstar_limit(&fam.members, &parry, &g, 3, 1e-12).unwrap();
        assert_eq!(r.verdict, WeakStarVerdict::Converges);
        assert!(r.deviations.iter().all(|d| d.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn renewal_converges_and_ladder_escapes() {
        let renewal = ShiftSpec::Truncated {
            rule: Rule::Renewal,
            cutoff: 64,
        };
        let out = run(&renewal, &Params::default()).unwrap();
        assert_eq!(out.summary.verdict, "converges", "{:?}", out.summary);
        assert!(out.passed);
        let ladder = ShiftSpec::Truncated {
            rule: Rule::Ladder,
            cutoff: 64,
        };
        let out = run(&ladder, &Params::default()).unwrap();
        assert_eq!(out.summary.verdict, NO_LIMIT, "{:?}", out.summary);
        assert!(out.passed);
    }

    #[test]
    fn depths() {
        assert_eq!(dyadic_depths(0, 64), vec![2, 4, 8, 16, 32, 64]);
        assert_eq!(dyadic_depths(3, 50), vec![4, 8, 16, 32, 50]);
    }
}
