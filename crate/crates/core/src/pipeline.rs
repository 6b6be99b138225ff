//! End-to-end segmentation: cascade, refined final partition and instance
//! post-processing.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::affinity::{gt_affinity_pyramid, AffinityPyramid};
use crate::cascade::{run_cascade, CascadeConfig, LevelTiming};
use crate::error::{Error, Result};
use crate::grid::{ClassScores, LabelMap};
use crate::instances::{postprocess, InstanceSet};
use crate::partition::{SolverConfig, DEFAULT_EPSILON};
use crate::refine::final_partition_with;
use crate::synth::{generate_scene, perturb_pyramid, perturb_scores, scores_from_classes, NoiseSpec, SceneSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub cascade: CascadeConfig,
    pub solver: SolverConfig,
    /// Affinity clamp before the logit.
    pub epsilon: f64,
    pub min_area: usize,
    /// Thing classes; `None` means every class except background 0.
    pub thing_classes: Option<Vec<u32>>,
    /// Attenuate level-0 affinities by the semantic divergence.
    pub refine: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            cascade: CascadeConfig::default(),
            solver: SolverConfig::default(),
            epsilon: DEFAULT_EPSILON,
            min_area: 0,
            thing_classes: None,
            refine: true,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn thing_set(&self, classes: usize) -> BTreeSet<u32> {
        match &self.thing_classes {
            Some(list) => list.iter().copied().collect(),
            None => (1..classes as u32).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SegmentOutput {
    /// Instance map with ids following the ranked instance order.
    pub labels: LabelMap,
    pub instances: InstanceSet,
    /// Cascade levels coarsest first, then level 0.
    pub timings: Vec<LevelTiming>,
}

impl SegmentOutput {
    /// Wall-clock seconds over all partition levels.
    pub fn partition_seconds(&self) -> f64 {
        self.timings.iter().map(|t| t.seconds).sum()
    }
}

pub fn segment(pyramid: &AffinityPyramid, scores: &ClassScores, cfg: &PipelineConfig) -> Result<SegmentOutput> {
    scores.validate()?;
    let thing = cfg.thing_set(scores.classes());
    if thing.contains(&0) {
        return Err(Error::InvalidArgument("background class 0 cannot be a thing class".into()));
    }
    let cascade = run_cascade(pyramid, scores, &thing, &cfg.cascade, &cfg.solver, cfg.epsilon)?;
    let (labels, timing) = final_partition_with(
        pyramid.level(0),
        &cascade.proposals,
        scores,
        &thing,
        &cfg.solver,
        cfg.epsilon,
        cfg.refine,
    )?;
    let instances = postprocess(&labels, scores, &thing, cfg.min_area)?;
    let mut timings = cascade.timings;
    timings.push(timing);
    Ok(SegmentOutput {
        labels: instances.to_label_map(),
        instances,
        timings,
    })
}

/// Window side and depth of simulated affinity pyramids, and the score
/// placed on the true class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PyramidSpec {
    pub levels: usize,
    pub r: usize,
    pub confidence: f64,
}

impl Default for PyramidSpec {
    fn default() -> Self {
        Self {
            levels: 5,
            r: 5,
            confidence: 0.9,
        }
    }
}

/// A synthetic scene with simulated network outputs and its ground truth.
#[derive(Clone, Debug)]
pub struct SyntheticCase {
    pub pyramid: AffinityPyramid,
    pub scores: ClassScores,
    pub instances: LabelMap,
    pub classes: LabelMap,
    pub ground_truth: InstanceSet,
}

/// Generates a scene, its ground-truth affinity pyramid and class scores,
/// perturbed by `noise` when given.
pub fn synthetic_case(scene: &SceneSpec, pyr: &PyramidSpec, noise: Option<&NoiseSpec>) -> Result<SyntheticCase> {
    let s = generate_scene(scene)?;
    let mut pyramid = gt_affinity_pyramid(&s.instances, pyr.levels, pyr.r)?;
    let mut scores = scores_from_classes(&s.classes, scene.class_count, pyr.confidence)?;
    if let Some(noise) = noise {
        pyramid = perturb_pyramid(&pyramid, noise)?;
        scores = perturb_scores(&scores, noise)?;
    }
    let ground_truth = InstanceSet::from_ground_truth(&s.instances, &s.classes)?;
    Ok(SyntheticCase {
        pyramid,
        scores,
        instances: s.instances,
        classes: s.classes,
        ground_truth,
    })
}
