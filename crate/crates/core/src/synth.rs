//! Synthetic scenes and simulated network outputs.
//!
//! Scenes are painted shape by shape. For instance `i` the generator draws,
//! in this order: shape kind (`below(kinds)`), thing class
//! (`1 + below(C - 1)`), height and width (`range_inclusive(min, max)`), top
//! row and left column (`range_inclusive(0, H - h)` / `(0, W - w)`), and for
//! L-shapes the removed corner (`below(4)`). A rejected placement is redrawn
//! from the same stream. With occlusion, later shapes overwrite earlier ones
//! and a placement is rejected only if it would hide an earlier instance
//! completely; without occlusion any overlap is rejected.

use serde::{Deserialize, Serialize};

use crate::affinity::{AffinityMap, AffinityPyramid};
use crate::error::{Error, Result};
use crate::grid::{ClassScores, Grid, LabelMap};
use crate::rng::SplitMix64;

/// Placement attempts per instance before giving up.
pub const RETRY_CAP: u32 = 1000;

/// Ground-truth values are pushed into `[EPS, 1 - EPS]` before noise.
pub const PERTURB_EPSILON: f64 = 1e-3;

/// Guard keeping noisy affinities strictly inside `(0, 1)` in `f32`.
const OPEN_GUARD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Rectangle,
    Ellipse,
    LShape,
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangle" | "rect" => Ok(ShapeKind::Rectangle),
            "ellipse" => Ok(ShapeKind::Ellipse),
            "l-shape" | "l" | "lshape" => Ok(ShapeKind::LShape),
            other => Err(Error::InvalidArgument(format!("unknown shape kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub num_instances: u32,
    pub shape_kinds: Vec<ShapeKind>,
    /// Number of classes including background class 0.
    pub class_count: usize,
    pub occlusion: bool,
    pub rng_seed: u64,
    /// Smallest shape side; defaults to `max(4, min(H, W) / 8)`.
    pub min_size: Option<usize>,
    /// Largest shape side; defaults to `max(min_size, min(H, W) / 3)`.
    pub max_size: Option<usize>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            height: 128,
            width: 128,
            num_instances: 5,
            shape_kinds: vec![ShapeKind::Rectangle, ShapeKind::Ellipse, ShapeKind::LShape],
            class_count: 3,
            occlusion: true,
            rng_seed: 0,
            min_size: None,
            max_size: None,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::InvalidArgument("scene must be non-empty".into()));
        }
        if self.class_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "class_count must be >= 2, got {}",
                self.class_count
            )));
        }
        if self.num_instances > 0 && self.shape_kinds.is_empty() {
            return Err(Error::InvalidArgument("no shape kinds to draw from".into()));
        }
        let (lo, hi) = self.size_range();
        if lo == 0 || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "shape size range [{lo}, {hi}] is empty"
            )));
        }
        Ok(())
    }

    /// Effective `[min, max]` shape side, clipped to the image.
    pub fn size_range(&self) -> (usize, usize) {
        let short = self.height.min(self.width);
        let lo = self.min_size.unwrap_or_else(|| (short / 8).max(4)).min(short);
        let hi = self.max_size.unwrap_or_else(|| (short / 3).max(lo)).min(short);
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub instances: LabelMap,
    pub classes: LabelMap,
    /// `instance_classes[i - 1]` is the thing class of instance `i`.
    pub instance_classes: Vec<u32>,
}

/// Pixel indices covered by a shape of kind `kind` in the box
/// `(top, left, h, w)`. `corner` picks the quadrant removed from L-shapes
/// (0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right); the removed
/// block is `h / 2 x w / 2`.
fn shape_pixels(
    kind: ShapeKind,
    top: usize,
    left: usize,
    h: usize,
    w: usize,
    corner: u64,
    width: usize,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(h * w);
    let (cy, cx) = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let (ry, rx) = (h as f64 / 2.0, w as f64 / 2.0);
    let (ch, cw) = (h / 2, w / 2);
    for dy in 0..h {
        for dx in 0..w {
            let inside = match kind {
                ShapeKind::Rectangle => true,
                ShapeKind::Ellipse => {
                    let ny = (dy as f64 - cy) / ry;
                    let nx = (dx as f64 - cx) / rx;
                    ny * ny + nx * nx <= 1.0
                }
                ShapeKind::LShape => {
                    let in_rows = if corner < 2 { dy < ch } else { dy >= h - ch };
                    let in_cols = if corner.is_multiple_of(2) { dx < cw } else { dx >= w - cw };
                    !(in_rows && in_cols)
                }
            };
            if inside {
                out.push((top + dy) * width + left + dx);
            }
        }
    }
    out
}

pub fn generate_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let (h, w) = (spec.height, spec.width);
    let (lo, hi) = spec.size_range();
    let mut rng = SplitMix64::new(spec.rng_seed);
    let mut ids = vec![0u32; h * w];
    let mut visible = vec![0usize; spec.num_instances as usize + 1];
    let mut instance_classes = Vec::with_capacity(spec.num_instances as usize);

    for id in 1..=spec.num_instances {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > RETRY_CAP {
                return Err(Error::SceneTooCrowded {
                    instance: id,
                    attempts: RETRY_CAP,
                });
            }
            let kind = spec.shape_kinds[rng.below(spec.shape_kinds.len() as u64) as usize];
            let class = 1 + rng.below(spec.class_count as u64 - 1) as u32;
            let sh = rng.range_inclusive(lo as u64, hi as u64) as usize;
            let sw = rng.range_inclusive(lo as u64, hi as u64) as usize;
            let top = rng.range_inclusive(0, (h - sh) as u64) as usize;
            let left = rng.range_inclusive(0, (w - sw) as u64) as usize;
            let corner = if kind == ShapeKind::LShape { rng.below(4) } else { 0 };
            let pixels = shape_pixels(kind, top, left, sh, sw, corner, w);
            if pixels.is_empty() {
                continue;
            }
            if !spec.occlusion {
                if pixels.iter().any(|&p| ids[p] != 0) {
                    continue;
                }
            } else {
                let mut lost = std::collections::HashMap::new();
                for &p in &pixels {
                    if ids[p] != 0 {
                        *lost.entry(ids[p]).or_insert(0usize) += 1;
                    }
                }
                if lost.iter().any(|(&old, &n)| visible[old as usize] == n) {
                    continue;
                }
                for (old, n) in lost {
                    visible[old as usize] -= n;
                }
            }
            for &p in &pixels {
                ids[p] = id;
            }
            visible[id as usize] = pixels.len();
            instance_classes.push(class);
            break;
        }
    }

    let classes: Vec<u32> = ids
        .iter()
        .map(|&i| if i == 0 { 0 } else { instance_classes[i as usize - 1] })
        .collect();
    Ok(Scene {
        instances: LabelMap::instances(Grid::from_vec(h, w, ids)?),
        classes: LabelMap::classes(Grid::from_vec(h, w, classes)?),
        instance_classes,
    })
}

/// Scores putting `confidence` on the labeled class and spreading the rest
/// evenly over the other `classes - 1`.
pub fn scores_from_classes(
    class_ids: &LabelMap,
    classes: usize,
    confidence: f64,
) -> Result<ClassScores> {
    if classes < 2 {
        return Err(Error::InvalidArgument(format!("need >= 2 classes, got {classes}")));
    }
    if !(confidence > 1.0 / classes as f64 && confidence <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence {confidence} outside (1/{classes}, 1]"
        )));
    }
    let n = class_ids.grid.len();
    let rest = ((1.0 - confidence) / (classes - 1) as f64) as f32;
    let mut data = vec![rest; classes * n];
    for (p, &c) in class_ids.grid.as_slice().iter().enumerate() {
        if c as usize >= classes {
            return Err(Error::InvalidArgument(format!(
                "class id {c} at pixel {p} exceeds class count {classes}"
            )));
        }
        data[c as usize * n + p] = confidence as f32;
    }
    ClassScores::from_vec(
        class_ids.level,
        classes,
        class_ids.height(),
        class_ids.width(),
        data,
    )
}

/// How simulated predictions deviate from ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub flip_prob: f64,
    pub logistic_sigma: f64,
    pub semantic_corrupt_prob: f64,
    pub rng_seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            flip_prob: 0.0,
            logistic_sigma: 0.0,
            semantic_corrupt_prob: 0.0,
            rng_seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("flip_prob", self.flip_prob),
            ("semantic_corrupt_prob", self.semantic_corrupt_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} {p} outside [0, 1]")));
            }
        }
        if self.logistic_sigma.is_nan() || self.logistic_sigma < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "logistic_sigma must be >= 0, got {}",
                self.logistic_sigma
            )));
        }
        Ok(())
    }
}

/// Noisy copy of an affinity map.
///
/// Channels are visited channel-major, pixel-minor; each valid channel
/// consumes one uniform draw (flip test) and, when `logistic_sigma > 0`, one
/// Gaussian draw. The value is clamped into `[1e-3, 1 - 1e-3]`, replaced by
/// `1 - y` on a flip, then shifted by `sigma * N(0, 1)` in logit space.
pub fn perturb_affinity(gt: &AffinityMap, noise: &NoiseSpec) -> Result<AffinityMap> {
    noise.validate()?;
    let mut rng = SplitMix64::new(noise.rng_seed);
    gt.map_valid(|_, _, y| {
        let mut v = (y as f64).clamp(PERTURB_EPSILON, 1.0 - PERTURB_EPSILON);
        if rng.next_f64() < noise.flip_prob {
            v = 1.0 - v;
        }
        if noise.logistic_sigma > 0.0 {
            let z = (v / (1.0 - v)).ln() + noise.logistic_sigma * rng.gaussian();
            v = (1.0 / (1.0 + (-z).exp())).clamp(OPEN_GUARD, 1.0 - OPEN_GUARD);
        }
        v as f32
    })
}

/// [`perturb_affinity`] on every level; level `l` uses seed `rng_seed + l`.
pub fn perturb_pyramid(pyramid: &AffinityPyramid, noise: &NoiseSpec) -> Result<AffinityPyramid> {
    let levels = pyramid
        .levels()
        .iter()
        .enumerate()
        .map(|(l, map)| {
            let spec = NoiseSpec {
                rng_seed: noise.rng_seed.wrapping_add(l as u64),
                ..noise.clone()
            };
            perturb_affinity(map, &spec)
        })
        .collect::<Result<Vec<_>>>()?;
    AffinityPyramid::new(levels)
}

/// Replaces each pixel's class vector, with probability
/// `semantic_corrupt_prob`, by a uniformly random probability vector
/// (normalized `-ln(u)` draws). One uniform is drawn per pixel for the test,
/// then `C` more for a replaced pixel.
pub fn perturb_scores(scores: &ClassScores, noise: &NoiseSpec) -> Result<ClassScores> {
    noise.validate()?;
    let mut rng = SplitMix64::new(noise.rng_seed);
    let mut out = scores.clone();
    let c = scores.classes();
    for p in 0..scores.pixels() {
        if rng.next_f64() >= noise.semantic_corrupt_prob {
            continue;
        }
        let draws: Vec<f64> = (0..c).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
        let total: f64 = draws.iter().sum();
        for (k, d) in draws.iter().enumerate() {
            out.set_score(k, p, (d / total) as f32);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::{gt_affinity_map, WindowGeometry};
    use std::collections::BTreeMap;

    fn spec(n: u32, occlusion: bool, kinds: Vec<ShapeKind>) -> SceneSpec {
        SceneSpec {
            height: 64,
            width: 64,
            num_instances: n,
            shape_kinds: kinds,
            class_count: 3,
            occlusion,
            rng_seed: 77,
            ..SceneSpec::default()
        }
    }

    #[test]
    fn empty_scene() {
        let s = generate_scene(&spec(0, true, vec![ShapeKind::Ellipse])).unwrap();
        assert!(s.instances.grid.as_slice().iter().all(|&v| v == 0));
        assert!(s.classes.grid.as_slice().iter().all(|&v| v == 0));
    }

    #[test]
    fn deterministic() {
        let sp = spec(6, true, SceneSpec::default().shape_kinds);
        assert_eq!(generate_scene(&sp).unwrap(), generate_scene(&sp).unwrap());
    }

    #[test]
    fn non_occluded_rectangles_are_axis_aligned_boxes() {
        let s = generate_scene(&spec(3, false, vec![ShapeKind::Rectangle])).unwrap();
        let mut boxes: BTreeMap<u32, (usize, usize, usize, usize, usize)> = BTreeMap::new();
        for y in 0..64 {
            for x in 0..64 {
                let id = s.instances.grid.get(y, x);
                if id == 0 {
                    continue;
                }
                let b = boxes.entry(id).or_insert((y, y, x, x, 0));
                b.0 = b.0.min(y);
                b.1 = b.1.max(y);
                b.2 = b.2.min(x);
                b.3 = b.3.max(x);
                b.4 += 1;
            }
        }
        assert_eq!(boxes.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3]);
        for (_, (y0, y1, x0, x1, n)) in boxes {
            assert_eq!(n, (y1 - y0 + 1) * (x1 - x0 + 1));
        }
    }

    #[test]
    fn every_instance_visible_and_classes_consistent() {
        for seed in 0..20 {
            let sp = SceneSpec {
                num_instances: 8,
                rng_seed: seed,
                ..spec(8, true, SceneSpec::default().shape_kinds)
            };
            let s = generate_scene(&sp).unwrap();
            for id in 1..=8u32 {
                assert!(s.instances.grid.as_slice().contains(&id));
            }
            for (i, c) in s.instances.grid.as_slice().iter().zip(s.classes.grid.as_slice()) {
                match i {
                    0 => assert_eq!(*c, 0),
                    i => assert_eq!(*c, s.instance_classes[*i as usize - 1]),
                }
            }
        }
    }

    #[test]
    fn crowded_scene_errors() {
        let sp = SceneSpec {
            height: 8,
            width: 8,
            num_instances: 5,
            occlusion: false,
            min_size: Some(8),
            max_size: Some(8),
            ..SceneSpec::default()
        };
        assert!(matches!(generate_scene(&sp), Err(Error::SceneTooCrowded { instance: 2, .. })));
    }

    #[test]
    fn score_examples() {
        let classes = LabelMap::classes(Grid::from_vec(1, 2, vec![0, 1]).unwrap());
        let s = scores_from_classes(&classes, 2, 1.0).unwrap();
        assert_eq!(s.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let s = scores_from_classes(&classes, 4, 0.7).unwrap();
        let v: Vec<f32> = (0..4).map(|c| s.score(c, 0)).collect();
        assert_eq!(v, vec![0.7, 0.1, 0.1, 0.1]);
        assert!(scores_from_classes(&classes, 4, 0.25).is_err());
    }

    fn halves_affinity() -> AffinityMap {
        let mut g = Grid::filled(20, 20, 1u32);
        for y in 0..20 {
            for x in 10..20 {
                g.set(y, x, 2);
            }
        }
        gt_affinity_map(&LabelMap::instances(g), &WindowGeometry::new(5).unwrap()).unwrap()
    }

    #[test]
    fn zero_noise_is_clamp() {
        let gt = halves_affinity();
        let out = perturb_affinity(&gt, &NoiseSpec::default()).unwrap();
        for (i, (&a, &y)) in out.values().iter().zip(gt.values()).enumerate() {
            if gt.validity()[i] {
                assert_eq!(a, (y as f64).clamp(1e-3, 1.0 - 1e-3) as f32);
            } else {
                assert_eq!(a, 0.0);
            }
        }
        assert_eq!(out.validity(), gt.validity());
    }

    #[test]
    fn full_flip() {
        let gt = halves_affinity();
        let noise = NoiseSpec {
            flip_prob: 1.0,
            ..NoiseSpec::default()
        };
        let out = perturb_affinity(&gt, &noise).unwrap();
        for (i, (&a, &y)) in out.values().iter().zip(gt.values()).enumerate() {
            if gt.validity()[i] {
                assert_eq!(a, (1.0 - (y as f64).clamp(1e-3, 1.0 - 1e-3)) as f32);
            }
        }
    }

    #[test]
    fn noisy_values_stay_open() {
        let gt = halves_affinity();
        let noise = NoiseSpec {
            flip_prob: 0.1,
            logistic_sigma: 4.0,
            rng_seed: 3,
            ..NoiseSpec::default()
        };
        let out = perturb_affinity(&gt, &noise).unwrap();
        assert_eq!(out, perturb_affinity(&gt, &noise).unwrap());
        for (i, &a) in out.values().iter().enumerate() {
            if gt.validity()[i] {
                assert!(a > 0.0 && a < 1.0);
            }
        }
    }

    #[test]
    fn corrupted_scores_remain_distributions() {
        let classes = LabelMap::classes(Grid::from_vec(4, 4, (0..16).map(|i| i % 3).collect()).unwrap());
        let s = scores_from_classes(&classes, 3, 0.8).unwrap();
        let noise = NoiseSpec {
            semantic_corrupt_prob: 0.5,
            rng_seed: 9,
            ..NoiseSpec::default()
        };
        let out = perturb_scores(&s, &noise).unwrap();
        out.validate().unwrap();
        assert_ne!(out, s);
    }
}
