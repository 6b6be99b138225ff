use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::overlapping_ious;
use crate::error::{Error, Result};
use crate::grid::LabelMap;

/// A labeled region for panoptic scoring.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub class_id: u32,
    /// Ascending raster indices.
    pub pixels: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// (prediction, ground truth, IoU).
    pub tp: Vec<(usize, usize, f64)>,
    pub fp: Vec<usize>,
    #[serde(rename = "fn")]
    pub fn_: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PqReport {
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    pub pq_th: f64,
    pub sq_th: f64,
    pub rq_th: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Segments of an instance map: id 0 becomes one class-0 segment when
/// present, every other id takes its class from `classes`.
pub fn segments_from_labels(labels: &LabelMap, classes: &BTreeMap<u32, u32>) -> Result<Vec<Segment>> {
    let mut by_id: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (p, &id) in labels.grid.as_slice().iter().enumerate() {
        by_id.entry(id).or_default().push(p as u32);
    }
    by_id
        .into_iter()
        .map(|(id, pixels)| {
            let class_id = if id == 0 {
                0
            } else {
                *classes
                    .get(&id)
                    .ok_or_else(|| Error::InvalidArgument(format!("no class for instance id {id}")))?
            };
            Ok(Segment { class_id, pixels })
        })
        .collect()
}

fn match_segments(pred: &[Segment], gt: &[Segment]) -> Result<MatchResult> {
    let pm: Vec<&[u32]> = pred.iter().map(|s| s.pixels.as_slice()).collect();
    let gm: Vec<&[u32]> = gt.iter().map(|s| s.pixels.as_slice()).collect();
    let mut tp: Vec<(usize, usize, f64)> = overlapping_ious(&pm, &gm)
        .into_iter()
        .filter(|&((i, j), v)| v > 0.5 && pred[i].class_id == gt[j].class_id)
        .map(|((i, j), v)| (i, j, v))
        .collect();
    tp.sort_by_key(|&(i, j, _)| (i, j));
    let mut pred_used = vec![false; pred.len()];
    let mut gt_used = vec![false; gt.len()];
    for &(i, j, _) in &tp {
        if std::mem::replace(&mut pred_used[i], true) {
            return Err(Error::MatchingViolation(format!("prediction {i} matched twice")));
        }
        if std::mem::replace(&mut gt_used[j], true) {
            return Err(Error::MatchingViolation(format!("ground truth {j} matched twice")));
        }
    }
    Ok(MatchResult {
        tp,
        fp: (0..pred.len()).filter(|&i| !pred_used[i]).collect(),
        fn_: (0..gt.len()).filter(|&j| !gt_used[j]).collect(),
    })
}

/// (PQ, SQ, RQ) of a match restricted to segments accepted by `keep`.
/// With no segments at all every value is 1; otherwise SQ is 0 without
/// true positives.
fn quality(
    m: &MatchResult,
    pred: &[Segment],
    gt: &[Segment],
    keep: impl Fn(u32) -> bool,
) -> (f64, f64, f64, usize, usize, usize) {
    let mut tps: Vec<f64> = m.tp.iter().filter(|t| keep(gt[t.1].class_id)).map(|t| t.2).collect();
    let fp = m.fp.iter().filter(|&&i| keep(pred[i].class_id)).count();
    let fn_ = m.fn_.iter().filter(|&&j| keep(gt[j].class_id)).count();
    let tp = tps.len();
    let denom = tp as f64 + 0.5 * fp as f64 + 0.5 * fn_ as f64;
    if denom == 0.0 {
        return (1.0, 1.0, 1.0, 0, 0, 0);
    }
    // Sorted so the sum does not depend on segment order.
    tps.sort_by(f64::total_cmp);
    let sum = tps.iter().fold(0.0, |acc, v| acc + v);
    let sq = if tp == 0 { 0.0 } else { sum / tp as f64 };
    (sum / denom, sq, tp as f64 / denom, tp, fp, fn_)
}

/// Panoptic quality pooled over all segments; the `_th` fields count only
/// segments of thing classes. Segments match when they share a class and
/// their IoU exceeds 0.5.
pub fn panoptic_quality_segments(pred: &[Segment], gt: &[Segment], thing: &BTreeSet<u32>) -> Result<PqReport> {
    let m = match_segments(pred, gt)?;
    let (pq, sq, rq, tp, fp, fn_) = quality(&m, pred, gt, |_| true);
    let (pq_th, sq_th, rq_th, ..) = quality(&m, pred, gt, |c| thing.contains(&c));
    Ok(PqReport { pq, sq, rq, pq_th, sq_th, rq_th, tp, fp, fn_ })
}

/// [`panoptic_quality_segments`] on two instance maps, background (id 0)
/// counted as a single class-0 stuff segment.
pub fn panoptic_quality(
    pred: &LabelMap,
    pred_classes: &BTreeMap<u32, u32>,
    gt: &LabelMap,
    gt_classes: &BTreeMap<u32, u32>,
    thing: &BTreeSet<u32>,
) -> Result<PqReport> {
    if (pred.height(), pred.width()) != (gt.height(), gt.width()) {
        return Err(Error::ShapeMismatch(format!(
            "prediction {}x{} vs ground truth {}x{}",
            pred.height(),
            pred.width(),
            gt.height(),
            gt.width()
        )));
    }
    panoptic_quality_segments(
        &segments_from_labels(pred, pred_classes)?,
        &segments_from_labels(gt, gt_classes)?,
        thing,
    )
}
