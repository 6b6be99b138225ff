//! Instance extraction from a label map and the JSON instance format.
//!
//! A mask is stored as run lengths over the row-major raster, alternating
//! background and foreground and always starting with a (possibly empty)
//! background run.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ClassScores, Grid, LabelKind, LabelMap};

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    /// Raster indices, ascending.
    pub mask: Vec<u32>,
    pub class_id: u32,
    pub score: f64,
}

impl Instance {
    pub fn area(&self) -> usize {
        self.mask.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSet {
    pub height: usize,
    pub width: usize,
    pub instances: Vec<Instance>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    id: u32,
    class_id: u32,
    score: f64,
    area: usize,
    rle: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct InstanceSetJson {
    height: usize,
    width: usize,
    instances: Vec<InstanceJson>,
}

/// Run lengths of `mask` (ascending raster indices) over `n` pixels.
pub fn rle_encode(mask: &[u32], n: usize) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut cursor = 0u32;
    let mut i = 0;
    while i < mask.len() {
        let start = mask[i];
        let mut end = start + 1;
        i += 1;
        while i < mask.len() && mask[i] == end {
            end += 1;
            i += 1;
        }
        runs.push(start - cursor);
        runs.push(end - start);
        cursor = end;
    }
    if (cursor as usize) < n || runs.is_empty() {
        runs.push(n as u32 - cursor);
    }
    runs
}

/// Inverse of [`rle_encode`]; the runs must cover exactly `n` pixels.
pub fn rle_decode(runs: &[u32], n: usize) -> Result<Vec<u32>> {
    let mut mask = Vec::new();
    let mut cursor = 0u64;
    for (i, &len) in runs.iter().enumerate() {
        if i % 2 == 1 {
            mask.extend(cursor as u32..(cursor + len as u64) as u32);
        }
        cursor += len as u64;
        if cursor > n as u64 {
            break;
        }
    }
    if cursor != n as u64 {
        return Err(Error::InvalidArgument(format!(
            "run lengths cover {cursor} pixels, image has {n}"
        )));
    }
    Ok(mask)
}

impl InstanceSet {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Checks bounds, sortedness and pairwise disjointness of masks.
    pub fn validate(&self) -> Result<()> {
        let n = self.height * self.width;
        let mut seen = vec![false; n];
        for (k, inst) in self.instances.iter().enumerate() {
            if inst.mask.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("instance {k} mask not ascending")));
            }
            for &p in &inst.mask {
                let slot = seen
                    .get_mut(p as usize)
                    .ok_or_else(|| Error::InvalidArgument(format!("instance {k} pixel {p} out of range")))?;
                if *slot {
                    return Err(Error::InvalidArgument(format!("instance {k} overlaps another at pixel {p}")));
                }
                *slot = true;
            }
        }
        Ok(())
    }

    /// Instance map with ids 1, 2, ... in list order.
    pub fn to_label_map(&self) -> LabelMap {
        let mut g = Grid::filled(self.height, self.width, 0u32);
        for (k, inst) in self.instances.iter().enumerate() {
            for &p in &inst.mask {
                g.as_mut_slice()[p as usize] = k as u32 + 1;
            }
        }
        LabelMap::new(0, LabelKind::Instances, g)
    }

    /// Id-to-class table matching [`InstanceSet::to_label_map`].
    pub fn class_table(&self) -> BTreeMap<u32, u32> {
        self.instances
            .iter()
            .enumerate()
            .map(|(k, i)| (k as u32 + 1, i.class_id))
            .collect()
    }

    /// Ground-truth instances: one per nonzero id (ascending), class by
    /// majority of `classes` over its pixels (ties to the smaller id), score 1.
    pub fn from_ground_truth(instances: &LabelMap, classes: &LabelMap) -> Result<Self> {
        if (instances.height(), instances.width()) != (classes.height(), classes.width()) {
            return Err(Error::ShapeMismatch("instance and class maps differ in size".into()));
        }
        let mut masks: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (p, &id) in instances.grid.as_slice().iter().enumerate() {
            if id != 0 {
                masks.entry(id).or_default().push(p as u32);
            }
        }
        let cls = classes.grid.as_slice();
        Ok(Self {
            height: instances.height(),
            width: instances.width(),
            instances: masks
                .into_values()
                .map(|mask| {
                    let class_id = majority(mask.iter().map(|&p| cls[p as usize])).unwrap_or(0);
                    Instance {
                        mask,
                        class_id,
                        score: 1.0,
                    }
                })
                .collect(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let n = self.height * self.width;
        let doc = InstanceSetJson {
            height: self.height,
            width: self.width,
            instances: self
                .instances
                .iter()
                .enumerate()
                .map(|(k, i)| InstanceJson {
                    id: k as u32 + 1,
                    class_id: i.class_id,
                    score: i.score,
                    area: i.area(),
                    rle: rle_encode(&i.mask, n),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceSetJson = serde_json::from_str(text)?;
        let n = doc.height * doc.width;
        let instances = doc
            .instances
            .into_iter()
            .map(|i| {
                Ok(Instance {
                    mask: rle_decode(&i.rle, n)?,
                    class_id: i.class_id,
                    score: i.score,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let set = Self {
            height: doc.height,
            width: doc.width,
            instances,
        };
        set.validate()?;
        Ok(set)
    }
}

fn majority(values: impl Iterator<Item = u32>) -> Option<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_default() += 1;
    }
    // Strict comparison keeps the first (smallest) id on ties.
    counts
        .into_iter()
        .fold(None, |best: Option<(u32, usize)>, (id, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((id, c)),
        })
        .map(|(id, _)| id)
}

/// Turns a level-0 instance map into ranked instances.
///
/// Each instance takes the majority argmax class among its pixels whose
/// argmax is a thing class (ties to the smaller id). Instances with no thing
/// pixels or fewer than `min_area` pixels are dropped. The score is the mean
/// of the voted class's score over the instance. Instances are sorted by
/// descending score, ties by mask in lexicographic order.
pub fn postprocess(
    labels: &LabelMap,
    scores: &ClassScores,
    thing: &BTreeSet<u32>,
    min_area: usize,
) -> Result<InstanceSet> {
    if (labels.height(), labels.width()) != (scores.height(), scores.width()) {
        return Err(Error::ShapeMismatch(format!(
            "labels {}x{} vs class scores {}x{}",
            labels.height(),
            labels.width(),
            scores.height(),
            scores.width()
        )));
    }
    let argmax = scores.argmax();
    let arg = argmax.grid.as_slice();
    let mut masks: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (p, &id) in labels.grid.as_slice().iter().enumerate() {
        if id != 0 {
            masks.entry(id).or_default().push(p as u32);
        }
    }
    let mut instances: Vec<Instance> = masks
        .into_values()
        .filter(|m| m.len() >= min_area)
        .filter_map(|mask| {
            let class_id = majority(
                mask.iter()
                    .map(|&p| arg[p as usize])
                    .filter(|c| thing.contains(c)),
            )?;
            let total: f64 = mask
                .iter()
                .map(|&p| scores.score(class_id as usize, p as usize) as f64)
                .sum();
            let score = total / mask.len() as f64;
            Some(Instance {
                mask,
                class_id,
                score,
            })
        })
        .collect();
    instances.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.mask.cmp(&b.mask)));
    Ok(InstanceSet {
        height: labels.height(),
        width: labels.width(),
        instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::scores_from_classes;
    use proptest::prelude::*;

    fn map(h: usize, w: usize, v: Vec<u32>, kind: LabelKind) -> LabelMap {
        LabelMap::new(0, kind, Grid::from_vec(h, w, v).unwrap())
    }

    #[test]
    fn rle_examples() {
        assert_eq!(rle_encode(&[], 5), vec![5]);
        assert_eq!(rle_encode(&[0, 1, 4], 6), vec![0, 2, 2, 1, 1]);
        assert_eq!(rle_encode(&[3, 4], 5), vec![3, 2]);
        assert_eq!(rle_decode(&[0, 2, 2, 1, 1], 6).unwrap(), vec![0, 1, 4]);
        assert!(rle_decode(&[2, 2], 6).is_err());
    }

    proptest! {
        #[test]
        fn rle_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let mask: Vec<u32> = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u32).collect();
            let runs = rle_encode(&mask, bits.len());
            prop_assert_eq!(runs.iter().map(|&r| r as usize).sum::<usize>(), bits.len());
            prop_assert_eq!(rle_decode(&runs, bits.len()).unwrap(), mask);
        }
    }

    #[test]
    fn vote_majority_and_threshold() {
        // Instance 1: three class-2 pixels, two class-3 pixels.
        // Instance 2: five pixels.
        let labels = map(2, 5, vec![1, 1, 1, 1, 1, 2, 2, 2, 2, 2], LabelKind::Instances);
        let classes = map(2, 5, vec![2, 3, 2, 3, 2, 1, 1, 1, 1, 1], LabelKind::Classes);
        let scores = scores_from_classes(&classes, 4, 0.7).unwrap();
        let thing: BTreeSet<u32> = [1, 2, 3].into();
        let set = postprocess(&labels, &scores, &thing, 0).unwrap();
        assert_eq!(set.len(), 2);
        let classes: Vec<u32> = set.instances.iter().map(|i| i.class_id).collect();
        assert!(classes.contains(&2) && classes.contains(&1));
        assert!(postprocess(&labels, &scores, &thing, 10).unwrap().is_empty());
        assert_eq!(postprocess(&labels, &scores, &thing, 5).unwrap().len(), 2);
    }

    #[test]
    fn uniform_confidence_scores() {
        let labels = map(2, 3, vec![1, 1, 0, 2, 2, 2], LabelKind::Instances);
        let classes = map(2, 3, vec![1, 1, 0, 2, 2, 2], LabelKind::Classes);
        let scores = scores_from_classes(&classes, 3, 0.7).unwrap();
        let set = postprocess(&labels, &scores, &[1, 2].into(), 0).unwrap();
        for inst in &set.instances {
            assert!((inst.score - 0.7).abs() < 1e-6);
        }
        // Equal scores: lexicographic mask order.
        assert_eq!(set.instances[0].mask, vec![0, 1]);
    }

    #[test]
    fn vote_tie_goes_to_smaller_class() {
        assert_eq!(majority([3, 2, 3, 2].into_iter()), Some(2));
        assert_eq!(majority(std::iter::empty()), None);
    }

    #[test]
    fn json_roundtrip() {
        let labels = map(3, 3, vec![0, 1, 1, 2, 0, 1, 2, 2, 0], LabelKind::Instances);
        let classes = map(3, 3, vec![0, 1, 1, 2, 0, 1, 2, 2, 0], LabelKind::Classes);
        let set = InstanceSet::from_ground_truth(&labels, &classes).unwrap();
        let back = InstanceSet::from_json(&set.to_json().unwrap()).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.to_label_map(), labels);
    }

    #[test]
    fn overlapping_masks_rejected() {
        let set = InstanceSet {
            height: 1,
            width: 3,
            instances: vec![
                Instance { mask: vec![0, 1], class_id: 1, score: 1.0 },
                Instance { mask: vec![1, 2], class_id: 1, score: 1.0 },
            ],
        };
        assert!(set.validate().is_err());
    }
}
