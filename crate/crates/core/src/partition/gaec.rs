//! Greedy additive edge contraction.
//!
//! Repeatedly merges the endpoints of the heaviest remaining edge while its
//! weight is positive, summing the weights of edges that become parallel.
//! Ties go to the lexicographically smaller `(u, v)` of current
//! representatives. The queue uses lazy deletion: an entry is live only if
//! both endpoints are still representatives and the stored weight matches
//! the current one bit for bit. Runs in O(E log E).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::partition::{Partition, PartitionGraph};

#[derive(Debug)]
struct Candidate {
    w: f64,
    u: u32,
    v: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Max-heap: heavier first, then smaller (u, v).
    fn cmp(&self, other: &Self) -> Ordering {
        self.w
            .total_cmp(&other.w)
            .then_with(|| (other.u, other.v).cmp(&(self.u, self.v)))
    }
}

pub fn greedy_additive_contraction(g: &PartitionGraph) -> Partition {
    let n = g.node_count();
    let mut adj: Vec<BTreeMap<u32, f64>> = vec![BTreeMap::new(); n];
    let mut heap = BinaryHeap::new();
    for e in g.edges() {
        adj[e.u as usize].insert(e.v, e.w);
        adj[e.v as usize].insert(e.u, e.w);
        if e.w > 0.0 {
            heap.push(Candidate { w: e.w, u: e.u, v: e.v });
        }
    }
    let mut parent: Vec<u32> = (0..n as u32).collect();

    while let Some(Candidate { w, u, v }) = heap.pop() {
        let (ui, vi) = (u as usize, v as usize);
        if parent[ui] != u || parent[vi] != v {
            continue;
        }
        match adj[ui].get(&v) {
            Some(current) if current.to_bits() == w.to_bits() => {}
            _ => continue,
        }
        // Keep the endpoint with more neighbours; ties keep the smaller index.
        let (keep, drop) = if adj[vi].len() > adj[ui].len() { (v, u) } else { (u, v) };
        let (ki, di) = (keep as usize, drop as usize);
        adj[ki].remove(&drop);
        let moved = std::mem::take(&mut adj[di]);
        for (nbr, wn) in moved {
            if nbr == keep {
                continue;
            }
            let ni = nbr as usize;
            adj[ni].remove(&drop);
            let merged = {
                let slot = adj[ki].entry(nbr).or_insert(0.0);
                *slot += wn;
                *slot
            };
            adj[ni].insert(keep, merged);
            if merged > 0.0 {
                heap.push(Candidate {
                    w: merged,
                    u: keep.min(nbr),
                    v: keep.max(nbr),
                });
            }
        }
        parent[di] = keep;
    }

    let labels: Vec<u32> = (0..n).map(|i| find(&mut parent, i as u32)).collect();
    Partition::from_labels(&labels)
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    let mut root = x;
    while parent[root as usize] != root {
        root = parent[root as usize];
    }
    while parent[x as usize] != root {
        let next = parent[x as usize];
        parent[x as usize] = root;
        x = next;
    }
    root
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::multicut_objective;

    #[test]
    fn parallel_edges_are_summed() {
        // Contracting (0, 1) first makes 0-2 and 1-2 parallel: -1 + 1.5 > 0.
        let g = PartitionGraph::from_weighted_edges(3, [(0, 1, 5.0), (0, 2, -1.0), (1, 2, 1.5)])
            .unwrap();
        assert_eq!(greedy_additive_contraction(&g), Partition::joined(3));
    }

    #[test]
    fn remaining_edges_are_non_positive() {
        let mut rng = crate::rng::SplitMix64::new(4);
        for _ in 0..50 {
            let n = 30;
            let mut edges = Vec::new();
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    if rng.bernoulli(0.2) {
                        edges.push((a, b, rng.next_f64() * 2.0 - 1.0));
                    }
                }
            }
            let g = PartitionGraph::from_weighted_edges(n, edges).unwrap();
            let p = greedy_additive_contraction(&g);
            let labels = p.labels();
            let mut between = std::collections::HashMap::new();
            for e in g.edges() {
                let (a, b) = (labels[e.u as usize], labels[e.v as usize]);
                if a != b {
                    *between.entry((a.min(b), a.max(b))).or_insert(0.0) += e.w;
                }
            }
            assert!(between.values().all(|&w| w <= 0.0));
            let obj = multicut_objective(&g, &p).unwrap();
            let all: f64 = g.edges().iter().map(|e| e.w).sum();
            assert!(obj <= 0.0 && obj <= all + 1e-12);
        }
    }
}
