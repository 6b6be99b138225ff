//! Semantic refinement of level-0 affinities and the final all-foreground
//! partition.
//!
//! Every affinity is attenuated by the Jensen-Shannon divergence (natural
//! log, so in `[0, ln 2]`) between the class distributions of its two
//! pixels: `alpha' = alpha * exp(-JS(s_u, s_v))`. Pixels of different
//! predicted thing classes share one graph, so a strong affinity can still
//! join an instance whose semantics were split.

use std::collections::BTreeSet;

use crate::affinity::AffinityMap;
use crate::cascade::{partition_masks, thing_masks, LevelTiming, ProposalSet};
use crate::error::{Error, Result};
use crate::grid::{ClassScores, LabelMap};
use crate::partition::SolverConfig;

fn kl_to_mean(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / ((a + b) / 2.0)).ln())
        .sum()
}

/// Jensen-Shannon divergence with natural log; `0 * ln(0 / q)` counts as 0.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    let js = 0.5 * (kl_to_mean(p, q) + kl_to_mean(q, p));
    Ok(js.clamp(0.0, std::f64::consts::LN_2))
}

/// `alpha * exp(-JS(s_u, s_v))`.
pub fn refine_affinity(alpha: f64, s_u: &[f64], s_v: &[f64]) -> Result<f64> {
    Ok(alpha * (-js_divergence(s_u, s_v)?).exp())
}

/// Partitions all level-0 pixels whose argmax class is a thing class in one
/// graph with refined affinities, contracting `proposals` first.
pub fn final_partition(
    aff: &AffinityMap,
    proposals: &ProposalSet,
    scores: &ClassScores,
    thing: &BTreeSet<u32>,
    solver: &SolverConfig,
    epsilon: f64,
) -> Result<(LabelMap, LevelTiming)> {
    final_partition_with(aff, proposals, scores, thing, solver, epsilon, true)
}

/// [`final_partition`] with refinement optionally disabled.
pub fn final_partition_with(
    aff: &AffinityMap,
    proposals: &ProposalSet,
    scores: &ClassScores,
    thing: &BTreeSet<u32>,
    solver: &SolverConfig,
    epsilon: f64,
    refine: bool,
) -> Result<(LabelMap, LevelTiming)> {
    if aff.level != 0 {
        return Err(Error::InvalidArgument(format!(
            "final partition runs at level 0, got level {}",
            aff.level
        )));
    }
    if (scores.height(), scores.width()) != (aff.height(), aff.width()) {
        return Err(Error::ShapeMismatch(format!(
            "class scores {}x{} vs affinity {}x{}",
            scores.height(),
            scores.width(),
            aff.height(),
            aff.width()
        )));
    }
    let masks = thing_masks(&scores.argmax(), thing, false);
    if !refine {
        return partition_masks(aff, &masks, proposals, solver, epsilon, &|_, _, a| a);
    }
    let c = scores.classes();
    let dist: Vec<f64> = (0..scores.pixels())
        .flat_map(|p| scores.distribution(p))
        .collect();
    let adjust = |p: usize, q: usize, alpha: f64| {
        let (a, b) = (&dist[p * c..(p + 1) * c], &dist[q * c..(q + 1) * c]);
        if a == b {
            alpha
        } else {
            refine_affinity(alpha, a, b).expect("equal lengths")
        }
    };
    partition_masks(aff, &masks, proposals, solver, epsilon, &adjust)
}
