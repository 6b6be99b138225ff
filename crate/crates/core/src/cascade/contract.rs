use std::collections::HashMap;

use crate::cascade::ProposalSet;
use crate::error::{Error, Result};
use crate::grid::{Grid, LabelMap, LabelKind};
use crate::partition::{Edge, Partition, PartitionGraph};

/// Collapses every proposal into one super-node.
///
/// Nodes touched by a proposal merge into it; the rest stay as they are.
/// Nodes are renumbered in order of their first original node, payloads are
/// concatenated, and the weight between two resulting nodes is the sum of
/// all original edge weights between their members. Edges inside a
/// super-node disappear.
pub fn contract_with_proposals(g: &PartitionGraph, proposals: &ProposalSet) -> Result<PartitionGraph> {
    if proposals.is_empty() {
        return Ok(g.clone());
    }
    let mut node_of: HashMap<u32, u32> = HashMap::with_capacity(g.pixel_count());
    for (node, pixels) in g.payloads().iter().enumerate() {
        for &p in pixels {
            node_of.insert(p, node as u32);
        }
    }
    let mut group: Vec<Option<u32>> = vec![None; g.node_count()];
    for (k, proposal) in proposals.proposals.iter().enumerate() {
        for &p in &proposal.pixels {
            let node = *node_of.get(&p).ok_or(Error::ProposalMasked(p))? as usize;
            match group[node] {
                Some(other) if other != k as u32 => {
                    return Err(Error::InvalidArgument(format!(
                        "pixel {p} claimed by proposals {other} and {k}"
                    )))
                }
                _ => group[node] = Some(k as u32),
            }
        }
    }
    Ok(contract_groups(g, &group))
}

/// Merges nodes sharing a group id; `None` nodes stay alone.
pub(crate) fn contract_groups(g: &PartitionGraph, group: &[Option<u32>]) -> PartitionGraph {
    let mut new_of = vec![0u32; g.node_count()];
    let mut group_node: HashMap<u32, u32> = HashMap::new();
    let mut payload: Vec<Vec<u32>> = Vec::new();
    for (node, grp) in group.iter().enumerate() {
        let id = match grp {
            Some(k) => *group_node.entry(*k).or_insert_with(|| {
                payload.push(Vec::new());
                payload.len() as u32 - 1
            }),
            None => {
                payload.push(Vec::new());
                payload.len() as u32 - 1
            }
        };
        new_of[node] = id;
        payload[id as usize].extend_from_slice(g.payload(node));
    }
    let mut slot: HashMap<(u32, u32), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    for e in g.edges() {
        let (a, b) = (new_of[e.u as usize], new_of[e.v as usize]);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        match slot.get(&key) {
            Some(&i) => edges[i].w += e.w,
            None => {
                slot.insert(key, edges.len());
                edges.push(Edge {
                    u: key.0,
                    v: key.1,
                    w: e.w,
                });
            }
        }
    }
    PartitionGraph::from_parts_unchecked(payload, edges)
}

/// Pixel-level labels induced by a partition of a (possibly contracted)
/// graph: every pixel of a node's payload takes the node's segment.
pub fn induced_pixel_labels(g: &PartitionGraph, p: &Partition) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(g.pixel_count());
    for (node, &label) in p.labels().iter().enumerate() {
        out.extend(g.payload(node).iter().map(|&px| (px, label)));
    }
    out
}

/// Relabels a raster so nonzero ids run 1, 2, ... in raster order of first
/// appearance.
pub fn canonical_labels(grid: &Grid<u32>, level: u32) -> LabelMap {
    let mut map = HashMap::new();
    let data = grid
        .as_slice()
        .iter()
        .map(|&v| {
            if v == 0 {
                0
            } else {
                let next = map.len() as u32 + 1;
                *map.entry(v).or_insert(next)
            }
        })
        .collect();
    LabelMap::new(
        level,
        LabelKind::Instances,
        Grid::from_vec(grid.height(), grid.width(), data).expect("same shape"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::Proposal;
    use crate::partition::multicut_objective;

    fn proposals(sets: &[&[u32]]) -> ProposalSet {
        ProposalSet {
            level: 0,
            height: 1,
            width: 8,
            proposals: sets
                .iter()
                .enumerate()
                .map(|(i, s)| Proposal {
                    segment: i as u32 + 1,
                    pixels: s.to_vec(),
                })
                .collect(),
        }
    }

    #[test]
    fn empty_proposals_are_identity() {
        let g = PartitionGraph::from_weighted_edges(3, [(0, 1, 1.0), (1, 2, -1.0)]).unwrap();
        assert_eq!(contract_with_proposals(&g, &proposals(&[])).unwrap(), g);
    }

    #[test]
    fn super_edge_sums_crossing_weights() {
        // Proposals {0, 1} and {2, 3}; crossing edges +1.2, -0.2, +0.5.
        let g = PartitionGraph::from_weighted_edges(
            4,
            [(0, 1, 9.0), (2, 3, 9.0), (0, 2, 1.2), (1, 2, -0.2), (1, 3, 0.5)],
        )
        .unwrap();
        let c = contract_with_proposals(&g, &proposals(&[&[0, 1], &[2, 3]])).unwrap();
        assert_eq!(c.node_count(), 2);
        assert_eq!(c.edge_count(), 1);
        assert!((c.edges()[0].w - 1.5).abs() < 1e-12);
        assert_eq!(c.payload(0), &[0, 1]);
        assert_eq!(c.payload(1), &[2, 3]);
    }

    #[test]
    fn masked_pixel_rejected() {
        let g = PartitionGraph::from_weighted_edges(2, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            contract_with_proposals(&g, &proposals(&[&[0, 5]])),
            Err(Error::ProposalMasked(5))
        ));
    }

    #[test]
    fn contracted_objective_matches_pixel_objective() {
        let g = PartitionGraph::from_weighted_edges(
            5,
            [(0, 1, 0.3), (0, 2, -1.0), (1, 3, 2.0), (2, 3, 0.7), (3, 4, -0.4), (2, 4, 1.1)],
        )
        .unwrap();
        let c = contract_with_proposals(&g, &proposals(&[&[1, 3], &[2, 4]])).unwrap();
        assert_eq!(c.node_count(), 3);
        for labels in [[0, 0, 0], [0, 1, 1], [0, 0, 1], [0, 1, 0], [0, 1, 2]] {
            let p = Partition::from_labels(&labels);
            let mut pixel = vec![0u32; 5];
            for (px, l) in induced_pixel_labels(&c, &p) {
                pixel[px as usize] = l;
            }
            let a = multicut_objective(&c, &p).unwrap();
            let b = multicut_objective(&g, &Partition::from_labels(&pixel)).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}
