use std::collections::BTreeMap;

use melab_core::entropy::{gurevich_entropy_truncation, gurevich_pressure};
use melab_core::measure::{
    bernoulli_counterexample_measure, free_energy, integrate, ks_entropy, partition_entropy,
};
use melab_core::recoding::build_loop_system;
use melab_core::suspension::{abramov_entropy, kac_integral, lift_measure};
use melab_core::weakstar::{cylinder_metric, sup_deviation};
use melab_core::{FiniteGraph, Graph, MarkovMeasure, Potential, RoofFunction, ShiftSpec, Vertex};
use proptest::prelude::*;

fn graphs() -> Vec<FiniteGraph> {
    vec![
        FiniteGraph::new(2, &[(0, 0), (0, 1), (1, 0)]).unwrap(),
        FiniteGraph::complete(3).unwrap(),
        FiniteGraph::new(3, &[(0, 1), (1, 2), (2, 0), (2, 2), (1, 0)]).unwrap(),
        FiniteGraph::new(
            4,
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 3), (2, 1)],
        )
        .unwrap(),
    ]
}

/// Markov measure on `g` whose kernel gives edge `e` weight `w[e]`.
fn measure_on(g: &FiniteGraph, weights: &[f64]) -> MarkovMeasure {
    let n = g.vertex_count();
    let mut rows = vec![vec![0.0; n]; n];
    for (k, (u, v)) in g.edges().enumerate() {
        rows[u as usize][v as usize] = weights[k % weights.len()];
    }
    for r in &mut rows {
        let s: f64 = r.iter().sum();
        r.iter_mut().for_each(|x| *x /= s);
    }
    MarkovMeasure::markov((0..n as Vertex).collect(), &rows).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_is_a_pseudometric(gi in 0usize..4, a in weights(), b in weights(), c in weights(), d in 1usize..5) {
        let g = &graphs()[gi];
        let (x, y, z) = (measure_on(g, &a), measure_on(g, &b), measure_on(g, &c));
        let xy = cylinder_metric(&x, &y, g, d).unwrap();
        let yx = cylinder_metric(&y, &x, g, d).unwrap();
        let xz = cylinder_metric(&x, &z, g, d).unwrap();
        let zy = cylinder_metric(&z, &y, g, d).unwrap();
        prop_assert!(xy >= 0.0);
        prop_assert!((xy - yx).abs() < 1e-12);
        prop_assert!(xy <= xz + zy + 1e-12);
        prop_assert_eq!(cylinder_metric(&x, &x, g, d).unwrap(), 0.0);
    }

    #[test]
    fn metric_vanishes_with_deviations(gi in 0usize..4, a in weights(), b in weights()) {
        let g = &graphs()[gi];
        let (x, y) = (measure_on(g, &a), measure_on(g, &b));
        let mut last = (f64::INFINITY, f64::INFINITY);
        for j in 4..10 {
            let t = 4f64.powi(-j);
            let m = MarkovMeasure::interpolate(&x, &y, t).unwrap();
            let metric = cylinder_metric(&m, &x, g, 3).unwrap();
            let dev = sup_deviation(&m, &x, g, 3).unwrap()[2];
            // rank weights sum to at most 2 at each length
            prop_assert!(metric <= 2.0 * dev + 1e-15);
            last = (metric, dev);
        }
        prop_assert!(last.0 < 1e-5 && last.1 < 1e-5);
    }

    #[test]
    fn markov_exactness(gi in 0usize..4, a in weights()) {
        let g = &graphs()[gi];
        let mu = measure_on(g, &a);
        let h = ks_entropy(&mu);
        let table = partition_entropy(&mu, 7).unwrap();
        for inc in table.increments() {
            prop_assert!((inc - h).abs() < 1e-10);
        }
        prop_assert!(table.ratios_nonincreasing(1e-12));
        prop_assert!(table.entropies().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn entropy_bounded_by_topological(gi in 0usize..4, a in weights()) {
        let g = &graphs()[gi];
        let mu = measure_on(g, &a);
        let top = gurevich_entropy_truncation(&ShiftSpec::Finite(g.clone()), 1, 1e-9).unwrap();
        prop_assert!(ks_entropy(&mu) <= top.value + 1e-8);
    }

    #[test]
    fn variational_inequality(gi in 0usize..4, a in weights(), phi in prop::collection::vec(-2.0f64..2.0, 4)) {
        let g = &graphs()[gi];
        let mu = measure_on(g, &a);
        let phi = Potential::on_vertices(&phi[..g.vertex_count()]);
        let p = gurevich_pressure(&ShiftSpec::Finite(g.clone()), &phi, 1, 1e-9).unwrap();
        prop_assert!(free_energy(&mu, &phi).unwrap() <= p.value + 1e-6);
        let eq = MarkovMeasure::equilibrium(g, &phi).unwrap();
        prop_assert!((free_energy(&eq, &phi).unwrap() - p.value).abs() < 1e-8);
    }

    #[test]
    fn recode_round_trip(gi in 0usize..4, blocks in prop::collection::vec(any::<u64>(), 1..8)) {
        let g = &graphs()[gi];
        let a = 0;
        let ls = build_loop_system(g, a, 10).unwrap();
        // pick each block by (level, index) from the available labels
        let levels: Vec<usize> = (0..=10).filter(|&n| !num_zero(&ls.counts()[n])).collect();
        let mut word = vec![a];
        for b in blocks {
            let level = levels[(b % levels.len() as u64) as usize];
            let count = ls.count_u64(level).unwrap();
            let interior = ls.unrank(level, &num_bigint::BigUint::from((b >> 8) % count)).unwrap();
            word.extend(interior);
            word.push(a);
        }
        let coded = ls.recode_word(&word).unwrap();
        prop_assert_eq!(coded.len(), word.len());
        prop_assert!(ls.is_admissible(&coded));
        prop_assert_eq!(ls.decode_word(&coded).unwrap(), word);
    }

    #[test]
    fn abramov_scaling(gi in 0usize..4, a in weights(), roof in prop::collection::vec(0.2f64..3.0, 4), c in 0.1f64..10.0) {
        let g = &graphs()[gi];
        let mu = measure_on(g, &a);
        let tau = RoofFunction::on_vertices(&roof[..g.vertex_count()]).unwrap();
        let h = abramov_entropy(&lift_measure(&mu, &tau).unwrap()).unwrap();
        let hc = abramov_entropy(&lift_measure(&mu, &tau.scaled(c).unwrap()).unwrap()).unwrap();
        prop_assert!((hc - h / c).abs() < 1e-12);
    }

    #[test]
    fn kac_is_linear_and_normalized(gi in 0usize..4, a in weights(), roof in prop::collection::vec(0.2f64..3.0, 4),
                                    f in prop::collection::vec(-1.0f64..1.0, 4), k in prop::collection::vec(-1.0f64..1.0, 4), s in -3.0f64..3.0) {
        let g = &graphs()[gi];
        let n = g.vertex_count();
        let nu = lift_measure(&measure_on(g, &a), &RoofFunction::on_vertices(&roof[..n]).unwrap()).unwrap();
        prop_assert_eq!(kac_integral(nu.roof().as_potential(), &nu).unwrap(), 1.0);
        let comb: Vec<f64> = f[..n].iter().zip(&k[..n]).map(|(x, y)| x + s * y).collect();
        let lhs = kac_integral(&Potential::on_vertices(&comb), &nu).unwrap();
        let rhs = kac_integral(&Potential::on_vertices(&f[..n]), &nu).unwrap()
            + s * kac_integral(&Potential::on_vertices(&k[..n]), &nu).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn depth_two_integrals_refine_depth_one(gi in 0usize..4, a in weights(), f in prop::collection::vec(-1.0f64..1.0, 4)) {
        let g = &graphs()[gi];
        let mu = measure_on(g, &a);
        let one = Potential::on_vertices(&f[..g.vertex_count()]);
        let table: BTreeMap<Vec<Vertex>, f64> = g.edges().map(|(u, v)| (vec![u, v], f[u as usize])).collect();
        let two = Potential::from_table(2, table).unwrap();
        prop_assert!((integrate(&mu, &one).unwrap() - integrate(&mu, &two).unwrap()).abs() < 1e-14);
    }
}

fn num_zero(x: &num_bigint::BigUint) -> bool {
    x.bits() == 0
}

#[test]
fn counterexample_closed_form() {
    let h = std::f64::consts::LN_2;
    let mut prev = f64::INFINITY;
    for e in 1..=6 {
        let n = 10usize.pow(e);
        if h / (n as f64).ln() >= 1.0 {
            continue;
        }
        let mu = bernoulli_counterexample_measure(h, n).unwrap();
        let a = h / (n as f64).ln();
        let closed = -(1.0 - a) * (1.0 - a).ln() - a * a.ln() + a * (n as f64).ln();
        let h1 = partition_entropy(&mu, 1).unwrap().h(1);
        assert!((h1 - closed).abs() < 1e-10, "n = {n}: {h1} vs {closed}");
        assert!((ks_entropy(&mu) - h1).abs() < 1e-10);
        // approaches h from above
        assert!(h1 > h && h1 < prev);
        prev = h1;
    }
}
