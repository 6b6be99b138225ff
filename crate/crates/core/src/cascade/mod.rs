//! Coarse-to-fine partitioning over an affinity pyramid.
//!
//! The coarsest configured level is partitioned pixel by pixel. Each
//! resulting segment's eroded interior is promoted to a single node at the
//! next finer level, where the contracted graph is partitioned again. The
//! cascade stops at level 1; the level-0 partition belongs to
//! [`crate::refine::final_partition`].

mod contract;
mod proposals;

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use contract::{canonical_labels, contract_with_proposals, induced_pixel_labels};
pub use proposals::{proposals_from_partition, CascadeConfig, Proposal, ProposalSet};

use crate::affinity::{AffinityMap, AffinityPyramid};
use crate::error::{Error, Result};
use crate::grid::{ClassScores, Grid, LabelMap};
use crate::partition::{build_graph_with, solve_greedy_contract, SolverConfig};

/// Work done at one level: masked pixels, nodes and edges after contraction,
/// the number of proposals contracted, and wall-clock seconds for graph
/// construction, contraction and solving.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelTiming {
    pub level: u32,
    pub pixels: usize,
    pub proposals: usize,
    pub nodes: usize,
    pub edges: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct CascadeOutput {
    /// Partitions from `init_level` down to level 1, coarsest first.
    pub levels: Vec<LabelMap>,
    /// Proposals for level 0; empty when `init_level` is 0.
    pub proposals: ProposalSet,
    pub timings: Vec<LevelTiming>,
}

/// Argmax class map at every pyramid level, subsampled from level 0.
pub fn class_pyramid(scores: &ClassScores, depth: usize) -> Vec<LabelMap> {
    let mut maps = vec![scores.argmax()];
    for _ in 1..depth {
        let next = maps.last().expect("nonempty").coarser();
        maps.push(next);
    }
    maps
}

/// One node mask per thing class present (ascending class id), or a single
/// mask over all thing pixels.
pub fn thing_masks(classes: &LabelMap, thing: &BTreeSet<u32>, per_class: bool) -> Vec<Grid<bool>> {
    if per_class {
        let present: BTreeSet<u32> = classes
            .grid
            .as_slice()
            .iter()
            .copied()
            .filter(|c| thing.contains(c))
            .collect();
        present
            .into_iter()
            .map(|c| classes.grid.map(|v| v == c))
            .collect()
    } else {
        vec![classes.grid.map(|v| thing.contains(&v))]
    }
}

/// Partitions each mask's pixels independently (in parallel), contracting
/// the proposals that fall inside it, and merges the results into one
/// canonical instance map.
pub fn partition_masks(
    aff: &AffinityMap,
    masks: &[Grid<bool>],
    proposals: &ProposalSet,
    solver: &SolverConfig,
    epsilon: f64,
    adjust: &(dyn Fn(usize, usize, f64) -> f64 + Sync),
) -> Result<(LabelMap, LevelTiming)> {
    let (h, w) = (aff.height(), aff.width());
    if !proposals.is_empty() && (proposals.height, proposals.width) != (h, w) {
        return Err(Error::ShapeMismatch(format!(
            "proposals {}x{} vs affinity {h}x{w}",
            proposals.height, proposals.width
        )));
    }
    let start = Instant::now();
    let parts = masks
        .par_iter()
        .map(|mask| {
            let g = build_graph_with(aff, mask, epsilon, adjust)?;
            let local = proposals.restrict(|p| mask.as_slice()[p as usize]);
            let c = contract_with_proposals(&g, &local)?;
            let p = solve_greedy_contract(&c, solver);
            Ok((
                induced_pixel_labels(&c, &p),
                g.node_count(),
                local.len(),
                c.node_count(),
                c.edge_count(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let seconds = start.elapsed().as_secs_f64();
    let mut raw = Grid::filled(h, w, 0u32);
    let mut timing = LevelTiming {
        level: aff.level,
        pixels: 0,
        proposals: 0,
        nodes: 0,
        edges: 0,
        seconds,
    };
    let mut offset = 0u32;
    for (assign, pixels, props, nodes, edges) in parts {
        let mut top = 0;
        for (px, label) in assign {
            raw.as_mut_slice()[px as usize] = offset + label + 1;
            top = top.max(label + 1);
        }
        offset += top;
        timing.pixels += pixels;
        timing.proposals += props;
        timing.nodes += nodes;
        timing.edges += edges;
    }
    Ok((canonical_labels(&raw, aff.level), timing))
}

/// Runs the cascade from `cfg.init_level` down to level 1 over the thing
/// pixels of `scores` (level-0 class scores).
pub fn run_cascade(
    pyramid: &AffinityPyramid,
    scores: &ClassScores,
    thing: &BTreeSet<u32>,
    cfg: &CascadeConfig,
    solver: &SolverConfig,
    epsilon: f64,
) -> Result<CascadeOutput> {
    let depth = pyramid.depth();
    if cfg.init_level as usize >= depth {
        return Err(Error::InvalidArgument(format!(
            "init_level {} needs a pyramid deeper than {depth}",
            cfg.init_level
        )));
    }
    if cfg.min_proposal_area == 0 {
        return Err(Error::InvalidArgument("min_proposal_area must be >= 1".into()));
    }
    if (scores.height(), scores.width()) != (pyramid.base_height(), pyramid.base_width()) {
        return Err(Error::ShapeMismatch(format!(
            "class scores {}x{} vs pyramid base {}x{}",
            scores.height(),
            scores.width(),
            pyramid.base_height(),
            pyramid.base_width()
        )));
    }
    let (bh, bw) = (pyramid.base_height(), pyramid.base_width());
    let mut out = CascadeOutput {
        levels: Vec::new(),
        proposals: ProposalSet::empty(0, bh, bw),
        timings: Vec::new(),
    };
    if cfg.init_level == 0 {
        return Ok(out);
    }
    let classes = class_pyramid(scores, cfg.init_level as usize + 1);
    let identity = |_: usize, _: usize, a: f64| a;
    let mut pending: Option<ProposalSet> = None;
    for level in (1..=cfg.init_level).rev() {
        let aff = pyramid.level(level as usize);
        let masks = thing_masks(&classes[level as usize], thing, cfg.per_class);
        let empty = ProposalSet::empty(level, aff.height(), aff.width());
        let props = pending.as_ref().unwrap_or(&empty);
        let (labels, timing) = partition_masks(aff, &masks, props, solver, epsilon, &identity)?;
        let finer = pyramid.level(level as usize - 1);
        pending = Some(proposals_from_partition(
            &labels,
            finer.height(),
            finer.width(),
            cfg,
        )?);
        out.levels.push(labels);
        out.timings.push(timing);
    }
    out.proposals = pending.expect("at least one cascade level");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::gt_affinity_pyramid;
    use crate::grid::LabelKind;
    use crate::synth::scores_from_classes;

    fn blocks(h: usize, w: usize) -> (LabelMap, LabelMap) {
        let mut inst = Grid::filled(h, w, 0u32);
        let mut cls = Grid::filled(h, w, 0u32);
        for y in 0..h {
            for x in 0..w {
                let id = match (y < h / 2, x < w / 3, x >= 2 * w / 3) {
                    (true, true, _) => 1,
                    (true, _, true) => 2,
                    (false, _, _) if x > 2 && x < w - 3 && y < h - 2 => 3,
                    _ => 0,
                };
                inst.set(y, x, id);
                cls.set(y, x, [0, 1, 1, 2][id as usize]);
            }
        }
        (
            LabelMap::new(0, LabelKind::Instances, inst),
            LabelMap::new(0, LabelKind::Classes, cls),
        )
    }

    fn same_up_to_permutation(a: &LabelMap, b: &LabelMap) -> bool {
        canonical_labels(&a.grid, 0).grid == canonical_labels(&b.grid, 0).grid
    }

    #[test]
    fn recovers_gt_at_level_one_for_every_init_level() {
        let (inst, cls) = blocks(48, 60);
        let pyramid = gt_affinity_pyramid(&inst, 4, 3).unwrap();
        let scores = scores_from_classes(&cls, 3, 1.0).unwrap();
        let thing: BTreeSet<u32> = [1, 2].into();
        let gt1 = inst.coarser();
        for init in 1..4 {
            let cfg = CascadeConfig {
                init_level: init,
                ..CascadeConfig::default()
            };
            let out = run_cascade(&pyramid, &scores, &thing, &cfg, &SolverConfig::default(), 1e-6)
                .unwrap();
            assert_eq!(out.levels.len(), init as usize);
            assert_eq!(out.timings.len(), init as usize);
            assert!(same_up_to_permutation(out.levels.last().unwrap(), &gt1));
            assert_eq!(out.proposals.level, 0);
        }
    }

    #[test]
    fn init_level_zero_is_empty() {
        let (inst, cls) = blocks(16, 16);
        let pyramid = gt_affinity_pyramid(&inst, 2, 3).unwrap();
        let scores = scores_from_classes(&cls, 3, 1.0).unwrap();
        let cfg = CascadeConfig {
            init_level: 0,
            ..CascadeConfig::default()
        };
        let out = run_cascade(&pyramid, &scores, &[1, 2].into(), &cfg, &SolverConfig::default(), 1e-6)
            .unwrap();
        assert!(out.levels.is_empty() && out.proposals.is_empty());
        let bad = CascadeConfig {
            init_level: 2,
            ..CascadeConfig::default()
        };
        assert!(run_cascade(&pyramid, &scores, &[1].into(), &bad, &SolverConfig::default(), 1e-6).is_err());
    }

    #[test]
    fn contraction_reduces_nodes() {
        let (inst, cls) = blocks(64, 64);
        let pyramid = gt_affinity_pyramid(&inst, 3, 3).unwrap();
        let scores = scores_from_classes(&cls, 3, 1.0).unwrap();
        let cfg = CascadeConfig::default();
        let out = run_cascade(&pyramid, &scores, &[1, 2].into(), &cfg, &SolverConfig::default(), 1e-6)
            .unwrap();
        let fine = &out.timings[1];
        assert!(fine.proposals > 0);
        assert!(fine.nodes < fine.pixels);
        assert_eq!(out.timings[0].nodes, out.timings[0].pixels);
    }

    #[test]
    fn per_class_masks_in_class_order() {
        let cls = LabelMap::new(0, LabelKind::Classes, Grid::from_vec(1, 4, vec![2, 0, 1, 3]).unwrap());
        let masks = thing_masks(&cls, &[1, 2].into(), true);
        assert_eq!(masks.len(), 2);
        assert_eq!(masks[0].as_slice(), &[false, false, true, false]);
        let joint = thing_masks(&cls, &[1, 2].into(), false);
        assert_eq!(joint[0].as_slice(), &[true, false, true, false]);
    }
}
