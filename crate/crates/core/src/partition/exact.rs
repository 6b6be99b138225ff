use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionGraph};

/// Largest graph the exhaustive solver accepts (Bell(12) = 4,213,597 partitions).
pub const EXACT_NODE_LIMIT: usize = 12;

/// Global multicut optimum by enumerating every set partition as a
/// restricted growth string. Among optimal partitions the one with fewest
/// segments wins, then the lexicographically smallest label vector.
pub fn solve_exact(g: &PartitionGraph) -> Result<Partition> {
    let n = g.node_count();
    if n > EXACT_NODE_LIMIT {
        return Err(Error::TooManyNodes {
            nodes: n,
            max: EXACT_NODE_LIMIT,
        });
    }
    if n == 0 {
        return Ok(Partition::from_labels(&[]));
    }
    // Edges grouped by their later endpoint so the objective grows as
    // labels are assigned left to right.
    let mut back: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in g.edges() {
        back[e.v as usize].push((e.u as usize, e.w));
    }
    let scale: f64 = g.edges().iter().map(|e| e.w.abs()).sum();
    let mut search = Search {
        back,
        tol: 1e-12 * (1.0 + scale),
        labels: vec![0; n],
        best: None,
    };
    search.descend(1, 1, 0.0);
    let (_, _, labels) = search.best.expect("at least one partition exists");
    Ok(Partition::from_labels(&labels))
}

struct Search {
    back: Vec<Vec<(usize, f64)>>,
    tol: f64,
    labels: Vec<u32>,
    best: Option<(f64, u32, Vec<u32>)>,
}

impl Search {
    // Node 0 is fixed to label 0; `used` labels are in play so far.
    fn descend(&mut self, node: usize, used: u32, objective: f64) {
        if node == self.labels.len() {
            let better = match &self.best {
                None => true,
                Some((obj, segs, _)) => {
                    objective < obj - self.tol || (objective <= obj + self.tol && used < *segs)
                }
            };
            if better {
                self.best = Some((objective, used, self.labels.clone()));
            }
            return;
        }
        for label in 0..=used {
            self.labels[node] = label;
            let cut: f64 = self.back[node]
                .iter()
                .filter(|&&(u, _)| self.labels[u] != label)
                .map(|&(_, w)| w)
                .sum();
            let next_used = if label == used { used + 1 } else { used };
            self.descend(node + 1, next_used, objective + cut);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::multicut_objective;

    fn bell(n: usize) -> usize {
        // Bell triangle.
        let mut row = vec![1usize];
        for _ in 0..n {
            let mut next = vec![*row.last().unwrap()];
            for &v in &row {
                next.push(next.last().unwrap() + v);
            }
            row = next;
        }
        row[0]
    }

    #[test]
    fn triangle_optima() {
        let g = PartitionGraph::from_weighted_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, -0.5)])
            .unwrap();
        let p = solve_exact(&g).unwrap();
        assert_eq!(p, Partition::joined(3));
        assert_eq!(multicut_objective(&g, &p).unwrap(), 0.0);

        let g = PartitionGraph::from_weighted_edges(3, [(0, 1, 1.0), (0, 2, -2.0), (1, 2, 0.5)])
            .unwrap();
        let p = solve_exact(&g).unwrap();
        assert_eq!(p.labels(), &[0, 0, 1]);
        assert_eq!(multicut_objective(&g, &p).unwrap(), -1.5);
    }

    #[test]
    fn positive_graph_joins_everything() {
        let edges = (0..6u32).flat_map(|a| (a + 1..6).map(move |b| (a, b, 0.1 + a as f64)));
        let g = PartitionGraph::from_weighted_edges(6, edges).unwrap();
        assert_eq!(solve_exact(&g).unwrap(), Partition::joined(6));
    }

    #[test]
    fn disconnected_nodes_prefer_fewer_segments() {
        let g = PartitionGraph::from_weighted_edges(3, []).unwrap();
        assert_eq!(solve_exact(&g).unwrap(), Partition::joined(3));
    }

    #[test]
    fn too_many_nodes() {
        let g = PartitionGraph::from_weighted_edges(13, []).unwrap();
        assert!(matches!(
            solve_exact(&g),
            Err(Error::TooManyNodes { nodes: 13, max: 12 })
        ));
    }

    #[test]
    fn optimum_beats_every_enumerated_partition() {
        // Independent enumeration: iterate label vectors in base-n and keep
        // canonical ones; compare the oracle against all of them.
        let mut rng = crate::rng::SplitMix64::new(21);
        for n in 1..=6usize {
            let mut edges = Vec::new();
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    if rng.bernoulli(0.7) {
                        edges.push((a, b, rng.next_f64() * 2.0 - 1.0));
                    }
                }
            }
            let g = PartitionGraph::from_weighted_edges(n, edges).unwrap();
            let best = multicut_objective(&g, &solve_exact(&g).unwrap()).unwrap();
            let mut distinct = std::collections::HashSet::new();
            for code in 0..n.pow(n as u32) {
                let raw: Vec<u32> = (0..n).map(|i| ((code / n.pow(i as u32)) % n) as u32).collect();
                let p = Partition::from_labels(&raw);
                assert!(multicut_objective(&g, &p).unwrap() >= best - 1e-12);
                distinct.insert(p);
            }
            assert_eq!(distinct.len(), bell(n));
        }
    }
}
