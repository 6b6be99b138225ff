use std::collections::HashSet;

use crate::affinity::AffinityMap;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Default clamp on averaged affinities before the logit.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Largest edge magnitude produced under clamp `epsilon`.
pub fn max_weight(epsilon: f64) -> f64 {
    -half_logit(epsilon)
}

#[inline]
fn half_logit(t: f64) -> f64 {
    (t / (1.0 - t)).ln()
}

/// `log(alpha / (1 - alpha))` with `alpha` clamped to `[epsilon, 1 - epsilon]`.
/// Evaluated on the side of 0.5 where `alpha` lies so that
/// `logit(a) == -logit(1 - a)` holds exactly and the clamp bounds map to
/// exactly `±max_weight(epsilon)`.
#[inline]
pub fn logit_weight(alpha: f64, epsilon: f64) -> f64 {
    if alpha <= 0.5 {
        half_logit(alpha.max(epsilon))
    } else {
        -half_logit((1.0 - alpha).max(epsilon))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub w: f64,
}

/// Undirected weighted graph over nodes that each stand for a set of pixels
/// (one pixel for plain nodes, a whole proposal for super-nodes).
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionGraph {
    payload: Vec<Vec<u32>>,
    edges: Vec<Edge>,
}

impl PartitionGraph {
    /// Validates `u < v`, node bounds and pair uniqueness.
    pub fn new(payload: Vec<Vec<u32>>, edges: Vec<Edge>) -> Result<Self> {
        let n = payload.len();
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.u >= e.v || e.v as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) invalid for {n} nodes",
                    e.u, e.v
                )));
            }
            if !e.w.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) has non-finite weight",
                    e.u, e.v
                )));
            }
            if !seen.insert((e.u, e.v)) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate edge ({}, {})",
                    e.u, e.v
                )));
            }
        }
        Ok(Self { payload, edges })
    }

    /// A graph whose node `i` carries the single pixel `i`. Edge endpoints
    /// may be given in either order.
    pub fn from_weighted_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (u32, u32, f64)>,
    ) -> Result<Self> {
        let edges = edges
            .into_iter()
            .map(|(a, b, w)| Edge {
                u: a.min(b),
                v: a.max(b),
                w,
            })
            .collect();
        Self::new((0..node_count as u32).map(|i| vec![i]).collect(), edges)
    }

    pub(crate) fn from_parts_unchecked(payload: Vec<Vec<u32>>, edges: Vec<Edge>) -> Self {
        Self { payload, edges }
    }

    pub fn node_count(&self) -> usize {
        self.payload.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn payload(&self, node: usize) -> &[u32] {
        &self.payload[node]
    }

    pub fn payloads(&self) -> &[Vec<u32>] {
        &self.payload
    }

    pub fn pixel_count(&self) -> usize {
        self.payload.iter().map(Vec::len).sum()
    }

    /// Neighbour lists, each sorted by neighbour index.
    pub fn adjacency(&self) -> Vec<Vec<(u32, f64)>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for e in &self.edges {
            adj[e.u as usize].push((e.v, e.w));
            adj[e.v as usize].push((e.u, e.w));
        }
        for list in &mut adj {
            list.sort_by_key(|&(n, _)| n);
        }
        adj
    }
}

/// Pixel graph over the masked-in pixels of `aff` with edge weights from
/// averaged affinities (see [`build_graph_with`]).
pub fn build_graph(aff: &AffinityMap, node_mask: &Grid<bool>, epsilon: f64) -> Result<PartitionGraph> {
    build_graph_with(aff, node_mask, epsilon, |_, _, alpha| alpha)
}

/// Pixel graph with a hook on the averaged affinity.
///
/// Nodes are the masked-in pixels in raster order; each node's payload is its
/// pixel index. Every unordered in-window pair of nodes gets one edge whose
/// `alpha` is the mean of the two directed affinities, or the single valid
/// one when only one direction is valid; pairs with neither direction valid
/// are skipped. `adjust(u_pixel, v_pixel, alpha)` may rewrite `alpha` before
/// it is clamped to `[epsilon, 1 - epsilon]` and mapped through the logit.
pub fn build_graph_with(
    aff: &AffinityMap,
    node_mask: &Grid<bool>,
    epsilon: f64,
    adjust: impl Fn(usize, usize, f64) -> f64,
) -> Result<PartitionGraph> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} outside (0, 0.5)"
        )));
    }
    let (h, w) = (aff.height(), aff.width());
    if node_mask.height() != h || node_mask.width() != w {
        return Err(Error::ShapeMismatch(format!(
            "node mask {}x{} vs affinity {h}x{w}",
            node_mask.height(),
            node_mask.width()
        )));
    }
    let mask = node_mask.as_slice();
    let mut node_of = vec![u32::MAX; h * w];
    let mut payload = Vec::new();
    for (p, &inside) in mask.iter().enumerate() {
        if inside {
            node_of[p] = payload.len() as u32;
            payload.push(vec![p as u32]);
        }
    }
    let geometry = aff.geometry();
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if !mask[p] {
                continue;
            }
            for j in geometry.forward_channels() {
                let Some((ny, nx)) = geometry.neighbor(j, y, x, h, w) else {
                    continue;
                };
                let q = ny * w + nx;
                if !mask[q] {
                    continue;
                }
                let back = geometry.reverse(j);
                let alpha = match (aff.is_valid(j, p), aff.is_valid(back, q)) {
                    (true, true) => (aff.value(j, p) as f64 + aff.value(back, q) as f64) / 2.0,
                    (true, false) => aff.value(j, p) as f64,
                    (false, true) => aff.value(back, q) as f64,
                    (false, false) => continue,
                };
                edges.push(Edge {
                    u: node_of[p],
                    v: node_of[q],
                    w: logit_weight(adjust(p, q, alpha), epsilon),
                });
            }
        }
    }
    Ok(PartitionGraph::from_parts_unchecked(payload, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::{gt_affinity_map, WindowGeometry};
    use crate::grid::LabelMap;

    #[test]
    fn eq2_eq3_arithmetic() {
        // Two pixels side by side, r = 3: a(0 -> 1) = 0.6, a(1 -> 0) = 0.8.
        let g = WindowGeometry::new(3).unwrap();
        let mut values = vec![0.0f32; 9 * 2];
        values[5 * 2] = 0.6; // channel (0, +1) at pixel 0
        values[3 * 2 + 1] = 0.8; // channel (0, -1) at pixel 1
        let aff = AffinityMap::new(0, g, 1, 2, values).unwrap();
        let graph = build_graph(&aff, &Grid::filled(1, 2, true), DEFAULT_EPSILON).unwrap();
        assert_eq!(graph.edge_count(), 1);
        let e = graph.edges()[0];
        assert_eq!((e.u, e.v), (0, 1));
        assert!((e.w - (0.7f64 / 0.3).ln()).abs() < 1e-6);
        assert!((e.w - 0.8473).abs() < 1e-4);
    }

    #[test]
    fn logit_zero_point_and_clamp() {
        assert_eq!(logit_weight(0.5, DEFAULT_EPSILON), 0.0);
        assert_eq!(logit_weight(1.0 - 0.7, 1e-6), -logit_weight(0.7, 1e-6));
        let mut prev = f64::NEG_INFINITY;
        for i in 1..1000 {
            let w = logit_weight(i as f64 / 1000.0, DEFAULT_EPSILON);
            assert!(w > prev);
            prev = w;
        }
        let wmax = max_weight(DEFAULT_EPSILON);
        assert!((wmax - 13.815510).abs() < 1e-5);
        assert_eq!(logit_weight(1.0, DEFAULT_EPSILON), wmax);
        assert_eq!(logit_weight(0.0, DEFAULT_EPSILON), -wmax);
    }

    #[test]
    fn one_sided_validity_uses_single_direction() {
        let g = WindowGeometry::new(3).unwrap();
        let mut values = vec![0.0f32; 9 * 2];
        values[5 * 2] = 0.9;
        values[3 * 2 + 1] = 0.1;
        let mut valid = crate::affinity::geometric_validity(&g, 1, 2);
        valid[3 * 2 + 1] = false;
        let aff = AffinityMap::with_validity(0, g, 1, 2, values, valid).unwrap();
        let graph = build_graph(&aff, &Grid::filled(1, 2, true), DEFAULT_EPSILON).unwrap();
        assert!((graph.edges()[0].w - (0.9f64 / 0.1).ln()).abs() < 1e-5);
    }

    #[test]
    fn gt_weights_saturate_and_edge_count_bounded() {
        let mut rng = crate::rng::SplitMix64::new(17);
        let ids: Vec<u32> = (0..12 * 10).map(|_| rng.below(3) as u32).collect();
        let map = LabelMap::instances(Grid::from_vec(12, 10, ids).unwrap());
        let aff = gt_affinity_map(&map, &WindowGeometry::new(5).unwrap()).unwrap();
        let mask = Grid::from_vec(12, 10, (0..120).map(|i| i % 7 != 0).collect()).unwrap();
        let graph = build_graph(&aff, &mask, DEFAULT_EPSILON).unwrap();
        let wmax = max_weight(DEFAULT_EPSILON);
        assert!(graph.edge_count() <= graph.node_count() * 12);
        for e in graph.edges() {
            assert!(e.w == wmax || e.w == -wmax);
            assert!(e.u < e.v);
        }
    }

    #[test]
    fn rejects_duplicates_and_self_loops() {
        assert!(PartitionGraph::from_weighted_edges(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(PartitionGraph::from_weighted_edges(3, [(2, 2, 1.0)]).is_err());
        assert!(PartitionGraph::from_weighted_edges(3, [(0, 3, 1.0)]).is_err());
    }
}
