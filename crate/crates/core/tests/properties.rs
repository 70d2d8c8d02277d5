use std::collections::BTreeSet;

use proptest::prelude::*;

use supanova::adaptive::{AdaptiveConfig, AdaptiveRun, FnGridEvaluator, Strategy as Selection};
use supanova::cost::{cost_of_method, CostParams, SystemSizes};
use supanova::expansions::{set_element, truncation_sum};
use supanova::graph::{geodesic_hull, is_convex_subset, simplex_ideal, GraphPoset, InteractionGraph};
use supanova::poset::{
    chain_moebius, combination_coefficients, AxisElement, GridElement, OrderIdeal, PosetAxis, PosetGrid,
    SparseIntTensor, VertexSet,
};
use supanova::potentials::{Evaluator, SubproblemSpec, SyntheticEvaluator, SyntheticParams};

/// A connected graph on `n` vertices: a random spanning tree plus extra edges.
fn connected_graph(max_n: u32) -> impl Strategy<Value = InteractionGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let parents = proptest::collection::vec(any::<prop::sample::Index>(), n.saturating_sub(1) as usize);
        let extra = proptest::collection::vec((0..n, 0..n), 0..=n as usize);
        (Just(n), parents, extra).prop_map(|(n, parents, extra)| {
            let mut edges: Vec<(u32, u32)> =
                parents.iter().enumerate().map(|(k, p)| (p.index(k + 1) as u32, k as u32 + 1)).collect();
            edges.extend(extra.into_iter().filter(|(a, b)| a != b));
            InteractionGraph::new(n, &edges).unwrap()
        })
    })
}

fn tree(max_n: u32) -> impl Strategy<Value = InteractionGraph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<prop::sample::Index>(), n.saturating_sub(1) as usize).prop_map(move |parents| {
            let edges: Vec<(u32, u32)> =
                parents.iter().enumerate().map(|(k, p)| (p.index(k + 1) as u32, k as u32 + 1)).collect();
            InteractionGraph::new(n, &edges).unwrap()
        })
    })
}

fn nonempty_subsets(n: u32) -> impl Iterator<Item = VertexSet> {
    VertexSet::full(n).subsets().filter(|u| !u.is_empty()).collect::<Vec<_>>().into_iter()
}

/// B_m x [a] x [b] and an ideal generated by up to three random elements.
fn grid_and_ideal() -> impl Strategy<Value = (PosetGrid, OrderIdeal)> {
    (1..=4u32, 1..=3u32, 1..=3u32).prop_flat_map(|(m, a, b)| {
        let gen = (0..1u64 << m, 1..=a, 1..=b);
        proptest::collection::vec(gen, 1..=3).prop_map(move |gens| {
            let grid = PosetGrid::new(vec![PosetAxis::Boolean(m), PosetAxis::ChainBounded(a), PosetAxis::ChainBounded(b)])
                .unwrap();
            let elements = gens.into_iter().map(|(mask, i, j)| {
                GridElement::new(vec![
                    AxisElement::Set(VertexSet::from_mask(mask)),
                    AxisElement::Index(i),
                    AxisElement::Index(j),
                ])
            });
            let ideal = OrderIdeal::generated_by(&grid, elements).unwrap();
            (grid, ideal)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_live_on_the_ideal_and_sum_to_one((grid, ideal) in grid_and_ideal()) {
        let d = combination_coefficients(&grid, &ideal).unwrap();
        prop_assert!(d.iter().all(|(p, _)| ideal.contains(p)));
        prop_assert_eq!(d.iter().map(|(_, c)| c).sum::<i64>(), 1);
    }

    #[test]
    fn coefficients_are_summed_moebius_tensors((grid, ideal) in grid_and_ideal()) {
        let mut sum = SparseIntTensor::new();
        for p in ideal.iter() {
            sum.add_scaled(&grid.moebius_tensor(p).unwrap(), 1).unwrap();
        }
        prop_assert_eq!(sum, combination_coefficients(&grid, &ideal).unwrap());
    }

    #[test]
    fn chain_moebius_vectors_telescope(p in 1u32..50) {
        let axis = PosetAxis::ChainBounded(50);
        let total: i64 = axis.moebius_vector(&AxisElement::Index(p)).unwrap().iter().map(|(_, m)| m).sum();
        prop_assert_eq!(total, if p == 1 { 1 } else { 0 });
        prop_assert_eq!(chain_moebius(p, p), 1);
    }

    #[test]
    fn truncation_ignores_values_outside_the_ideal(
        (grid, ideal) in grid_and_ideal(),
        noise in proptest::collection::vec(-1.0f64..1.0, 256),
    ) {
        let elements = grid.elements().unwrap();
        let index = |p: &GridElement| elements.iter().position(|q| q == p).unwrap();
        let base = |p: &GridElement| Ok((index(p) as f64 * 0.37).sin());
        let perturbed = |p: &GridElement| {
            let v = (index(p) as f64 * 0.37).sin();
            Ok(if ideal.contains(p) { v } else { v + noise[index(p) % noise.len()] })
        };
        let a = truncation_sum(&grid, &ideal, base).unwrap();
        let b = truncation_sum(&grid, &ideal, perturbed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn convex_sets_are_closed_under_intersection(g in connected_graph(7)) {
        let poset = GraphPoset::convex(g);
        let sets = poset.elements().unwrap();
        let family: BTreeSet<&VertexSet> = sets.iter().collect();
        for (k, a) in sets.iter().enumerate() {
            for b in &sets[k + 1..] {
                prop_assert!(family.contains(&a.intersection(b)), "{} ∩ {} is not convex", a, b);
            }
        }
    }

    #[test]
    fn convex_implies_connected(g in connected_graph(7)) {
        let poset = GraphPoset::convex(g.clone());
        for u in poset.elements().unwrap().iter().filter(|u| !u.is_empty()) {
            prop_assert!(g.is_connected_subset(u).unwrap());
        }
    }

    #[test]
    fn on_trees_convex_and_connected_coincide(g in tree(8)) {
        let convex: BTreeSet<VertexSet> = GraphPoset::convex(g.clone()).elements().unwrap().into_iter().collect();
        let connected: BTreeSet<VertexSet> = GraphPoset::connected(g).elements().unwrap().into_iter().collect();
        prop_assert_eq!(convex, connected);
    }

    #[test]
    fn hull_is_a_closure_operator(g in connected_graph(7), a in any::<u64>(), b in any::<u64>()) {
        let poset = GraphPoset::convex(g.clone());
        let o = poset.oracle();
        let n = g.vertex_count();
        let mask = (1u64 << n) - 1;
        let u = VertexSet::from_mask(a & mask);
        let v = u.union(&VertexSet::from_mask(b & mask));
        let hu = geodesic_hull(o, &u).unwrap();
        prop_assert!(u.is_subset(&hu));
        prop_assert_eq!(geodesic_hull(o, &hu).unwrap(), hu.clone());
        prop_assert!(hu.is_subset(&geodesic_hull(o, &v).unwrap()));
        prop_assert!(is_convex_subset(o, &hu).unwrap() || hu.is_empty());
    }

    #[test]
    fn convex_covers_match_enumeration(g in connected_graph(6)) {
        let poset = GraphPoset::convex(g);
        let sets = poset.elements().unwrap();
        for u in &sets {
            let brute_up: BTreeSet<VertexSet> = sets
                .iter()
                .filter(|v| u.is_strict_subset(v) && !sets.iter().any(|w| u.is_strict_subset(w) && w.is_strict_subset(v)))
                .cloned()
                .collect();
            let up: BTreeSet<VertexSet> = poset.covers_up(u).unwrap().into_iter().collect();
            prop_assert_eq!(&up, &brute_up, "covers above {}", u);
            let brute_down: BTreeSet<VertexSet> = sets
                .iter()
                .filter(|v| v.is_strict_subset(u) && !sets.iter().any(|w| v.is_strict_subset(w) && w.is_strict_subset(u)))
                .cloned()
                .collect();
            let down: BTreeSet<VertexSet> = poset.covers_down(u).unwrap().into_iter().collect();
            prop_assert_eq!(&down, &brute_down, "covers below {}", u);
        }
    }

    #[test]
    fn simplices_are_convex_and_downward_closed(g in connected_graph(7), r in 0i32..4) {
        let simplices: BTreeSet<VertexSet> = simplex_ideal(&g, r).unwrap().into_iter().collect();
        let poset = GraphPoset::convex(g.clone());
        for u in &simplices {
            prop_assert!(u.len() as i32 <= r + 1);
            prop_assert!(u.is_empty() || is_convex_subset(poset.oracle(), u).unwrap());
            prop_assert!(g.is_clique(u).unwrap());
            for w in u.subsets() {
                prop_assert!(simplices.contains(&w));
            }
        }
        let cliques = nonempty_subsets(g.vertex_count())
            .filter(|u| u.len() as i32 <= r + 1 && g.is_clique(u).unwrap())
            .count();
        prop_assert_eq!(simplices.iter().filter(|u| !u.is_empty()).count(), cliques);
    }

    #[test]
    fn costs_rise_along_the_method_hierarchy(
        n_corr in 1u64..30, extra_virt in 0u64..60, frozen in 0u64..5, n_eri in 1u64..1_000_000,
    ) {
        let n_occ = n_corr + frozen;
        let n_virt = n_corr + extra_virt;
        let s = SystemSizes { n_ao: n_occ + n_virt, n_occ, n_corr, n_virt, n_eri };
        let p = CostParams::default();
        let costs: Vec<f64> = (1..=6).map(|m| cost_of_method(&p, m, &s).unwrap()).collect();
        prop_assert!(costs.iter().all(|&c| c > 0.0));
        // HF ≤ MP2, and the coupled-cluster ladder is increasing.
        prop_assert!(costs[0] <= costs[1]);
        for w in costs[2..].windows(2) {
            prop_assert!(w[0] <= w[1], "{:?}", costs);
        }
    }

    #[test]
    fn synthetic_evaluations_are_pure(seed in any::<u64>(), mask in 0u64..64, m in 1u32..=2, b in 1u32..=2) {
        let params = SyntheticParams { vertex_count: 6, seed, method_levels: 2, basis_levels: 2, ..Default::default() };
        let e1 = SyntheticEvaluator::new(params.clone()).unwrap();
        let e2 = SyntheticEvaluator::new(params).unwrap();
        let spec = SubproblemSpec::new(VertexSet::from_mask(mask), m, b);
        prop_assert_eq!(e1.evaluate(&spec).unwrap(), e2.evaluate(&spec).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adaptive_runs_keep_their_invariants(
        g in connected_graph(5),
        seed in any::<u64>(),
        best in any::<bool>(),
        concurrency in 1usize..4,
    ) {
        let grid = PosetGrid::new(vec![
            PosetAxis::graph(GraphPoset::convex(g.clone())),
            PosetAxis::ChainBounded(2),
        ])
        .unwrap();
        let params = SyntheticParams {
            vertex_count: g.vertex_count(),
            seed,
            method_levels: 2,
            graph: Some(g.edges()),
            one_body_scale: 0.5,
            ..Default::default()
        };
        let ev = SyntheticEvaluator::new(params).unwrap();
        let strategy = if best { Selection::Best } else { Selection::All };
        let mut run = AdaptiveRun::new(&grid, &ev, AdaptiveConfig { strategy, concurrency, ..Default::default() }).unwrap();
        let mut previous_cost = 0.0;
        let mut previous_size = 0;
        while let Some(r) = run.step().unwrap() {
            let r = r.clone();
            let ideal = run.ideal();
            // Downward closure.
            for p in ideal.iter() {
                for q in grid.covers_down(p).unwrap() {
                    prop_assert!(ideal.contains(&q), "{} in the ideal but {} is not", p, q);
                }
            }
            let by_contributions: f64 = ideal.iter().map(|p| run.contribution(p).unwrap()).sum();
            prop_assert!((r.s - by_contributions).abs() <= 1e-12 * r.s.abs().max(1e-12));
            prop_assert!(r.cost >= previous_cost);
            prop_assert!(r.ideal_size > previous_size);
            previous_cost = r.cost;
            previous_size = r.ideal_size;
        }
        prop_assert_eq!(run.ideal().len(), grid.elements().unwrap().len());
        let top = run.history().last().unwrap().s;
        prop_assert!((top - ev.target_value()).abs() <= 1e-12 * ev.target_value().abs().max(1e-12));
    }

    #[test]
    fn closure_evaluators_work_on_boolean_grids(m in 1u32..=4, values in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let grid = PosetGrid::new(vec![PosetAxis::Boolean(m)]).unwrap();
        let table = values.clone();
        let ev = FnGridEvaluator(move |p: &GridElement| {
            let u = p.coords()[0].set().unwrap();
            (table[u.to_mask() as usize], 1e-8, 1.0 + u.len() as f64)
        });
        let report = AdaptiveRun::new(&grid, &ev, AdaptiveConfig::default()).unwrap().run_with(|_| {}).unwrap();
        let top = values[((1u64 << m) - 1) as usize];
        prop_assert!((report.last().s - top).abs() <= 1e-12);
        prop_assert_eq!(report.antichain, vec![set_element(VertexSet::full(m))]);
    }
}
