//! Instance and panoptic metrics.

mod ap;
mod pq;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub use ap::{average_precision, default_thresholds, ApReport};
pub use pq::{panoptic_quality, panoptic_quality_segments, segments_from_labels, MatchResult, PqReport, Segment};

use crate::error::Result;
use crate::instances::InstanceSet;

/// `|a ∩ b| / |a ∪ b|` of two ascending pixel lists; 0 when both are empty.
pub fn iou(a: &[u32], b: &[u32]) -> f64 {
    let inter = intersection_size(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// IoU of every overlapping (left, right) pair, keyed by indices. The right
/// masks must be pairwise disjoint.
pub(crate) fn overlapping_ious(left: &[&[u32]], right: &[&[u32]]) -> HashMap<(usize, usize), f64> {
    let mut owner: HashMap<u32, usize> = HashMap::new();
    for (j, mask) in right.iter().enumerate() {
        for &p in mask.iter() {
            owner.insert(p, j);
        }
    }
    let mut out = HashMap::new();
    for (i, mask) in left.iter().enumerate() {
        let mut inter: HashMap<usize, usize> = HashMap::new();
        for p in mask.iter() {
            if let Some(&j) = owner.get(p) {
                *inter.entry(j).or_default() += 1;
            }
        }
        for (j, n) in inter {
            let union = mask.len() + right[j].len() - n;
            out.insert((i, j), n as f64 / union as f64);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ap: ApReport,
    pub panoptic: PqReport,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// AP over the default thresholds and PQ with background as one stuff
/// segment.
pub fn evaluate(pred: &InstanceSet, gt: &InstanceSet, thing: &BTreeSet<u32>) -> Result<EvalReport> {
    let ap = average_precision(pred, gt, &default_thresholds())?;
    let panoptic = panoptic_quality(
        &pred.to_label_map(),
        &pred.class_table(),
        &gt.to_label_map(),
        &gt.class_table(),
        thing,
    )?;
    Ok(EvalReport { ap, panoptic })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&[1, 2, 3], &[1, 2, 3]), 1.0);
        assert_eq!(iou(&[1, 2], &[3, 4]), 0.0);
        assert_eq!(iou(&[], &[]), 0.0);
        // 2x2 squares in a 4-wide raster shifted by one column.
        let a = [0, 1, 4, 5];
        let b = [1, 2, 5, 6];
        assert!((iou(&a, &b) - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_table_matches_iou() {
        let left: Vec<&[u32]> = vec![&[0, 1, 2], &[5, 6]];
        let right: Vec<&[u32]> = vec![&[1, 2, 3], &[6], &[9]];
        let t = overlapping_ious(&left, &right);
        assert_eq!(t.len(), 2);
        assert_eq!(t[&(0, 0)], iou(left[0], right[0]));
        assert_eq!(t[&(1, 1)], iou(left[1], right[1]));
    }
}
