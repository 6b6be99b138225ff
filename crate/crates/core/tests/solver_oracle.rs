//! Greedy contraction and local search against exhaustive enumeration.

use afpy::partition::{
    greedy_additive_contraction, local_search, multicut_objective, solve_exact, solve_greedy_contract, Partition,
    PartitionGraph, SolverConfig,
};
use afpy::rng::SplitMix64;
use proptest::prelude::*;

fn arb_graph(max_nodes: usize) -> impl Strategy<Value = PartitionGraph> {
    (1..=max_nodes).prop_flat_map(|n| {
        let pairs: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|u| ((u + 1)..n as u32).map(move |v| (u, v)))
            .collect();
        let m = pairs.len();
        (
            proptest::collection::vec(any::<bool>(), m),
            proptest::collection::vec(-1.0f64..1.0, m),
        )
            .prop_map(move |(keep, ws)| {
                let edges = pairs
                    .iter()
                    .zip(keep.iter().zip(ws))
                    .filter(|(_, (k, _))| **k)
                    .map(|(&(u, v), (_, w))| (u, v, w));
                PartitionGraph::from_weighted_edges(n, edges).unwrap()
            })
    })
}

/// Minimum over every label vector in `0..n` per node.
fn brute_force_min(g: &PartitionGraph) -> f64 {
    let n = g.node_count();
    let mut labels = vec![0u32; n];
    let mut best = f64::INFINITY;
    loop {
        let cut: f64 = g
            .edges()
            .iter()
            .filter(|e| labels[e.u as usize] != labels[e.v as usize])
            .map(|e| e.w)
            .sum();
        best = best.min(cut);
        let mut i = 0;
        while i < n {
            labels[i] += 1;
            if (labels[i] as usize) < n {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn heuristic_never_beats_exact(g in arb_graph(8), seed in any::<u64>()) {
        let exact = solve_exact(&g).unwrap();
        let opt = multicut_objective(&g, &exact).unwrap();
        let cfg = SolverConfig { rng_seed: seed, ..SolverConfig::default() };
        let heur = multicut_objective(&g, &solve_greedy_contract(&g, &cfg)).unwrap();
        let tol = 1e-12 * (1.0 + g.edges().iter().map(|e| e.w.abs()).sum::<f64>());
        prop_assert!(heur >= opt - tol);
    }

    #[test]
    fn exact_matches_brute_force(g in arb_graph(6)) {
        let opt = multicut_objective(&g, &solve_exact(&g).unwrap()).unwrap();
        prop_assert!((opt - brute_force_min(&g)).abs() < 1e-9);
    }

    #[test]
    fn local_search_never_worsens(g in arb_graph(10), seed in any::<u64>(), raw in proptest::collection::vec(0u32..4, 10)) {
        let start = Partition::from_labels(&raw[..g.node_count()]);
        let cfg = SolverConfig { rng_seed: seed, ..SolverConfig::default() };
        let before = multicut_objective(&g, &start).unwrap();
        let after = multicut_objective(&g, &local_search(&g, &start, &cfg)).unwrap();
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn greedy_result_has_no_positive_merge(g in arb_graph(10)) {
        let p = greedy_additive_contraction(&g);
        let mut between = std::collections::HashMap::new();
        for e in g.edges() {
            let (a, b) = (p.labels()[e.u as usize], p.labels()[e.v as usize]);
            if a != b {
                *between.entry((a.min(b), a.max(b))).or_insert(0.0) += e.w;
            }
        }
        prop_assert!(between.values().all(|&w| w <= 1e-12));
    }
}

#[test]
fn solver_is_deterministic_per_seed() {
    let mut rng = SplitMix64::new(77);
    let n = 40;
    let edges: Vec<(u32, u32, f64)> = (0..n as u32)
        .flat_map(|u| ((u + 1)..n as u32).map(move |v| (u, v)))
        .filter(|_| rng.bernoulli(0.2))
        .map(|(u, v)| (u, v, 0.0))
        .collect();
    let mut rng = SplitMix64::new(78);
    let edges: Vec<_> = edges.into_iter().map(|(u, v, _)| (u, v, rng.next_f64() * 2.0 - 1.0)).collect();
    let g = PartitionGraph::from_weighted_edges(n, edges).unwrap();
    let cfg = SolverConfig { rng_seed: 5, ..SolverConfig::default() };
    assert_eq!(solve_greedy_contract(&g, &cfg), solve_greedy_contract(&g, &cfg));
}
