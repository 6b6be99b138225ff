//! Kernighan-Lin style refinement of a multicut partition.
//!
//! A sweep visits every node (in a seeded order) and applies the best
//! single-node move: into a neighbouring segment or into a fresh segment of
//! its own. It then merges neighbouring segments whose joint edge weight is
//! positive, greedily by weight. Only strict objective decreases are
//! accepted. Sweeps repeat until one changes nothing or the sweep budget is
//! spent.

use std::collections::BTreeMap;

use crate::partition::{greedy_additive_contraction, Edge, Partition, PartitionGraph, SolverConfig};
use crate::rng::SplitMix64;

pub fn local_search(g: &PartitionGraph, start: &Partition, cfg: &SolverConfig) -> Partition {
    let n = g.node_count();
    assert_eq!(start.len(), n, "partition does not match graph");
    if n == 0 {
        return start.clone();
    }
    let adj = g.adjacency();
    let scale = g.edges().iter().map(|e| e.w.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * (1.0 + scale);

    let mut labels = start.labels().to_vec();
    let mut sizes = vec![0u32; n];
    for &l in &labels {
        sizes[l as usize] += 1;
    }
    // Free label slots: a partition of n nodes never needs more than n labels.
    let mut free: Vec<u32> = (0..n as u32).rev().filter(|&l| sizes[l as usize] == 0).collect();

    let mut order: Vec<u32> = (0..n as u32).collect();
    SplitMix64::new(cfg.rng_seed).shuffle(&mut order);

    let mut gains: Vec<(u32, f64)> = Vec::new();
    for _ in 0..cfg.max_ls_sweeps {
        let mut changed = false;
        for &node in &order {
            let v = node as usize;
            let own = labels[v];
            gains.clear();
            let mut to_own = 0.0;
            for &(nbr, w) in &adj[v] {
                let l = labels[nbr as usize];
                if l == own {
                    to_own += w;
                } else if let Some(slot) = gains.iter_mut().find(|(s, _)| *s == l) {
                    slot.1 += w;
                } else {
                    gains.push((l, w));
                }
            }
            gains.sort_by_key(|&(l, _)| l);
            // Moving v from its segment A to B changes the objective by
            // w(v, A) - w(v, B); to a fresh segment by w(v, A).
            let mut best: Option<(Option<u32>, f64)> = None;
            for &(l, w) in &gains {
                let delta = to_own - w;
                if best.is_none_or(|(_, d)| delta < d) {
                    best = Some((Some(l), delta));
                }
            }
            if sizes[own as usize] > 1 && best.is_none_or(|(_, d)| to_own < d) {
                best = Some((None, to_own));
            }
            let Some((target, delta)) = best else { continue };
            if delta >= -tol {
                continue;
            }
            let target = target.unwrap_or_else(|| free.pop().expect("a free label exists"));
            sizes[own as usize] -= 1;
            if sizes[own as usize] == 0 {
                free.push(own);
            }
            sizes[target as usize] += 1;
            labels[v] = target;
            changed = true;
        }

        if merge_segments(g, &mut labels, tol) {
            changed = true;
            sizes.iter_mut().for_each(|s| *s = 0);
            for &l in &labels {
                sizes[l as usize] += 1;
            }
            free = (0..n as u32).rev().filter(|&l| sizes[l as usize] == 0).collect();
        }
        if !changed {
            break;
        }
    }
    Partition::from_labels(&labels)
}

/// Contracts the segment graph greedily; returns whether anything merged.
fn merge_segments(g: &PartitionGraph, labels: &mut [u32], tol: f64) -> bool {
    let dense = Partition::from_labels(labels);
    let segs = dense.segment_count();
    let mut between: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (dense.labels()[e.u as usize], dense.labels()[e.v as usize]);
        if a != b {
            *between.entry((a.min(b), a.max(b))).or_insert(0.0) += e.w;
        }
    }
    if !between.values().any(|&w| w > tol) {
        return false;
    }
    let edges = between
        .into_iter()
        .filter(|&(_, w)| w.abs() > tol)
        .map(|((u, v), w)| Edge { u, v, w })
        .collect();
    let seg_graph =
        PartitionGraph::from_parts_unchecked((0..segs as u32).map(|s| vec![s]).collect(), edges);
    let merged = greedy_additive_contraction(&seg_graph);
    for (l, d) in labels.iter_mut().zip(dense.labels()) {
        *l = merged.labels()[*d as usize];
    }
    true
}
