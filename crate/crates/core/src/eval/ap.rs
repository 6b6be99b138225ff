use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::overlapping_ious;
use crate::error::{Error, Result};
use crate::instances::InstanceSet;

/// 0.50, 0.55, ..., 0.95.
pub fn default_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub thresholds: Vec<f64>,
    /// Per ground-truth class: AP at each threshold.
    pub per_class: BTreeMap<u32, Vec<f64>>,
    /// Mean over classes at each threshold.
    pub per_threshold: Vec<f64>,
    pub mean: f64,
}

/// Area under the all-point interpolated precision-recall curve of a ranked
/// TP/FP sequence.
fn interpolated_area(hits: &[bool], num_gt: usize) -> f64 {
    let mut tp = 0usize;
    let mut points = Vec::with_capacity(hits.len());
    for (k, &hit) in hits.iter().enumerate() {
        tp += hit as usize;
        points.push((tp as f64 / num_gt as f64, tp as f64 / (k + 1) as f64));
    }
    let mut envelope = 0.0f64;
    for point in points.iter_mut().rev() {
        envelope = envelope.max(point.1);
        point.1 = envelope;
    }
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (recall, precision) in points {
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    area
}

/// Average precision per ground-truth class and threshold.
///
/// Predictions of a class are ranked by descending score (ties by mask in
/// lexicographic order); each in turn takes the still-unmatched ground
/// truth of its class with the highest IoU (ties to the earlier one) when
/// that IoU reaches the threshold. The mean runs over thresholds, then over
/// classes present in the ground truth. With no ground truth at all the
/// mean is 1 when there are no predictions and 0 otherwise.
pub fn average_precision(pred: &InstanceSet, gt: &InstanceSet, thresholds: &[f64]) -> Result<ApReport> {
    if (pred.height, pred.width) != (gt.height, gt.width) {
        return Err(Error::ShapeMismatch(format!(
            "prediction {}x{} vs ground truth {}x{}",
            pred.height, pred.width, gt.height, gt.width
        )));
    }
    let classes: BTreeSet<u32> = gt.instances.iter().map(|i| i.class_id).collect();
    let mut per_class = BTreeMap::new();
    for &c in &classes {
        let gts: Vec<&[u32]> = gt
            .instances
            .iter()
            .filter(|i| i.class_id == c)
            .map(|i| i.mask.as_slice())
            .collect();
        let mut preds: Vec<_> = pred.instances.iter().filter(|i| i.class_id == c).collect();
        preds.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.mask.cmp(&b.mask)));
        let masks: Vec<&[u32]> = preds.iter().map(|i| i.mask.as_slice()).collect();
        let overlaps = overlapping_ious(&masks, &gts);
        let mut candidates: Vec<Vec<(usize, f64)>> = vec![Vec::new(); masks.len()];
        for (&(i, j), &v) in &overlaps {
            candidates[i].push((j, v));
        }
        for list in &mut candidates {
            list.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        }
        let ap_at: Vec<f64> = thresholds
            .iter()
            .map(|&t| {
                let mut taken = vec![false; gts.len()];
                let hits: Vec<bool> = candidates
                    .iter()
                    .map(|list| {
                        match list.iter().find(|(j, _)| !taken[*j]) {
                            Some(&(j, v)) if v >= t => {
                                taken[j] = true;
                                true
                            }
                            _ => false,
                        }
                    })
                    .collect();
                interpolated_area(&hits, gts.len())
            })
            .collect();
        per_class.insert(c, ap_at);
    }
    let per_threshold: Vec<f64> = (0..thresholds.len())
        .map(|k| {
            if per_class.is_empty() {
                if pred.is_empty() { 1.0 } else { 0.0 }
            } else {
                per_class.values().map(|v: &Vec<f64>| v[k]).sum::<f64>() / per_class.len() as f64
            }
        })
        .collect();
    let mean = if per_class.is_empty() {
        if pred.is_empty() { 1.0 } else { 0.0 }
    } else {
        per_class
            .values()
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
            .sum::<f64>()
            / per_class.len() as f64
    };
    Ok(ApReport {
        thresholds: thresholds.to_vec(),
        per_class,
        per_threshold,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Instance;

    fn inst(mask: &[u32], class_id: u32, score: f64) -> Instance {
        Instance { mask: mask.to_vec(), class_id, score }
    }

    fn set(instances: Vec<Instance>) -> InstanceSet {
        InstanceSet { height: 4, width: 4, instances }
    }

    #[test]
    fn thresholds_span() {
        let t = default_thresholds();
        assert_eq!(t.len(), 10);
        assert_eq!(t[0], 0.5);
        assert_eq!(t[7], 0.85);
        assert_eq!(t[9], 0.95);
    }

    #[test]
    fn perfect_prediction() {
        let gt = set(vec![inst(&[0, 1], 1, 1.0), inst(&[4, 5, 6], 2, 1.0)]);
        let pred = set(vec![inst(&[4, 5, 6], 2, 0.1), inst(&[0, 1], 1, 0.9)]);
        assert_eq!(average_precision(&pred, &gt, &default_thresholds()).unwrap().mean, 1.0);
    }

    #[test]
    fn empty_prediction() {
        let gt = set(vec![inst(&[0, 1], 1, 1.0)]);
        assert_eq!(average_precision(&set(vec![]), &gt, &default_thresholds()).unwrap().mean, 0.0);
    }

    #[test]
    fn half_recall() {
        let gt = set(vec![inst(&[0, 1], 1, 1.0), inst(&[8, 9], 1, 1.0)]);
        let pred = set(vec![inst(&[0, 1], 1, 0.8)]);
        let r = average_precision(&pred, &gt, &default_thresholds()).unwrap();
        assert!(r.per_threshold.iter().all(|&a| a == 0.5));
        assert_eq!(r.mean, 0.5);
    }

    #[test]
    fn envelope_interpolation() {
        // Ranked hits T F T over 2 GT: points (0.5, 1), (0.5, 0.5), (1, 2/3).
        let a = interpolated_area(&[true, false, true], 2);
        assert!((a - (0.5 * 1.0 + 0.5 * 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn threshold_controls_match() {
        // IoU 2/3.
        let gt = set(vec![inst(&[0, 1, 2], 1, 1.0)]);
        let pred = set(vec![inst(&[0, 1], 1, 1.0)]);
        let r = average_precision(&pred, &gt, &default_thresholds()).unwrap();
        for (t, a) in r.thresholds.iter().zip(&r.per_threshold) {
            assert_eq!(*a, if *t <= 2.0 / 3.0 { 1.0 } else { 0.0 });
        }
    }
}
