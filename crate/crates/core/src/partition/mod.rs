//! Multicut partitioning of weighted graphs: construction from affinities,
//! the cut objective, an exhaustive oracle for tiny graphs, and the greedy
//! contraction solver with local search.

mod exact;
mod gaec;
mod graph;
mod local_search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exact::{solve_exact, EXACT_NODE_LIMIT};
pub use gaec::greedy_additive_contraction;
pub use graph::{
    build_graph, build_graph_with, logit_weight, max_weight, Edge, PartitionGraph, DEFAULT_EPSILON,
};
pub use local_search::local_search;

/// A node labeling with dense segment ids, numbered in order of first
/// appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<u32>,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels(raw: &[u32]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|&l| {
                let next = map.len() as u32;
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    pub fn joined(n: usize) -> Self {
        Self { labels: vec![0; n] }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n as u32).collect(),
        }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        self.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }
}

/// Total weight of edges whose endpoints lie in different segments.
pub fn multicut_objective(g: &PartitionGraph, p: &Partition) -> Result<f64> {
    if p.len() != g.node_count() {
        return Err(Error::LabelOutOfRange {
            labels: p.len(),
            nodes: g.node_count(),
        });
    }
    let labels = p.labels();
    Ok(g.edges()
        .iter()
        .filter(|e| labels[e.u as usize] != labels[e.v as usize])
        .map(|e| e.w)
        .sum())
}

/// Settings of the greedy solver. The contraction itself breaks ties by
/// node indices; `rng_seed` fixes the node visiting order of local search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub use_local_search: bool,
    pub max_ls_sweeps: u32,
    pub rng_seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            use_local_search: true,
            max_ls_sweeps: 20,
            rng_seed: 0,
        }
    }
}

/// Greedy additive edge contraction followed, if enabled, by local search.
pub fn solve_greedy_contract(g: &PartitionGraph, cfg: &SolverConfig) -> Partition {
    let p = greedy_additive_contraction(g);
    if cfg.use_local_search && cfg.max_ls_sweeps > 0 {
        local_search(g, &p, cfg)
    } else {
        p
    }
}
