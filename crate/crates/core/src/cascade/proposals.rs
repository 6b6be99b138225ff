use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::LabelMap;
use crate::morphology::{connected_components, erode_labels};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CascadeConfig {
    /// Coarsest level partitioned; 0 disables the cascade.
    pub init_level: u32,
    /// Erosion radius, in pixels of the finer level.
    pub erosion_radius: usize,
    /// Eroded fragments smaller than this fall back to single-pixel nodes.
    pub min_proposal_area: usize,
    /// Partition each thing class separately at cascade levels.
    pub per_class: bool,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            init_level: 2,
            erosion_radius: 2,
            min_proposal_area: 4,
            per_class: true,
        }
    }
}

/// Pixels (at `ProposalSet::level`, raster indices, ascending) promoted to a
/// single node; `segment` is the coarse segment it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proposal {
    pub segment: u32,
    pub pixels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProposalSet {
    pub level: u32,
    pub height: usize,
    pub width: usize,
    pub proposals: Vec<Proposal>,
}

impl ProposalSet {
    pub fn empty(level: u32, height: usize, width: usize) -> Self {
        Self {
            level,
            height,
            width,
            proposals: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.proposals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.proposals.len()
    }

    /// Keeps only pixels with `keep(pixel)`; proposals left empty vanish.
    pub fn restrict(&self, keep: impl Fn(u32) -> bool) -> Self {
        let proposals = self
            .proposals
            .iter()
            .filter_map(|p| {
                let pixels: Vec<u32> = p.pixels.iter().copied().filter(|&q| keep(q)).collect();
                (!pixels.is_empty()).then_some(Proposal {
                    segment: p.segment,
                    pixels,
                })
            })
            .collect();
        Self {
            proposals,
            ..self.clone()
        }
    }
}

/// Inner regions of the segments of `labels` (level `l >= 1`) promoted to
/// level `l - 1` of size `height x width`.
///
/// Every segment is upsampled x2 by nearest neighbour, eroded with a
/// `(2 * erosion_radius + 1)^2` square against other segments and
/// background, and split into 4-connected fragments; fragments smaller than
/// `min_proposal_area` are dropped and the rest of each segment forms one
/// proposal. Proposals are ordered by segment id.
pub fn proposals_from_partition(
    labels: &LabelMap,
    height: usize,
    width: usize,
    cfg: &CascadeConfig,
) -> Result<ProposalSet> {
    if labels.level == 0 {
        return Err(Error::InvalidArgument(
            "proposals come from a level above 0".into(),
        ));
    }
    if height.div_ceil(2) != labels.height() || width.div_ceil(2) != labels.width() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} labels cannot upsample to {height}x{width}",
            labels.height(),
            labels.width()
        )));
    }
    let up = labels.grid.upsample_to(height, width);
    let eroded = erode_labels(&up, cfg.erosion_radius);
    let (components, count) = connected_components(&eroded);
    let mut area = vec![0usize; count + 1];
    for &c in components.as_slice() {
        area[c as usize] += 1;
    }
    let mut by_segment: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (p, (&seg, &comp)) in eroded
        .as_slice()
        .iter()
        .zip(components.as_slice())
        .enumerate()
    {
        if seg != 0 && area[comp as usize] >= cfg.min_proposal_area {
            by_segment.entry(seg).or_default().push(p as u32);
        }
    }
    Ok(ProposalSet {
        level: labels.level - 1,
        height,
        width,
        proposals: by_segment
            .into_iter()
            .map(|(segment, pixels)| Proposal { segment, pixels })
            .collect(),
    })
}
