use serde::{Deserialize, Serialize};

use crate::affinity::AffinityMap;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::keyed_unit;

/// Data balancing for [`affinity_loss`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    /// Probability of dropping a pixel whose valid ground-truth channels are all 1.
    pub drop_all_ones_prob: f64,
    /// Loss multiplier for pixels inside thing instances.
    pub object_weight: f64,
    pub rng_seed: u64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            drop_all_ones_prob: 0.8,
            object_weight: 3.0,
            rng_seed: 0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_all_ones_prob) {
            return Err(Error::InvalidArgument(format!(
                "drop_all_ones_prob {} outside [0, 1]",
                self.drop_all_ones_prob
            )));
        }
        if self.object_weight.is_nan() || self.object_weight <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "object_weight must be positive, got {}",
                self.object_weight
            )));
        }
        Ok(())
    }
}

/// Whether pixel `p` is dropped by balancing. Each pixel gets its own keyed
/// draw, so the outcome does not depend on iteration order.
pub fn is_dropped(cfg: &LossConfig, pixel: usize) -> bool {
    keyed_unit(cfg.rng_seed, pixel as u64) < cfg.drop_all_ones_prob
}

/// Weighted mean squared affinity error.
///
/// Each pixel contributes the mean of `(y - a)^2` over its valid channels.
/// Pixels whose valid ground truth is all 1 are first dropped with
/// probability `drop_all_ones_prob`; survivors inside `thing_mask` are then
/// weighted by `object_weight`, others by 1. Returns 0 when no pixel survives.
pub fn affinity_loss(
    pred: &AffinityMap,
    gt: &AffinityMap,
    thing_mask: &Grid<bool>,
    cfg: &LossConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !pred.same_shape(gt) || pred.validity() != gt.validity() {
        return Err(Error::ShapeMismatch(
            "prediction and ground truth differ in shape or validity".into(),
        ));
    }
    if thing_mask.height() != gt.height() || thing_mask.width() != gt.width() {
        return Err(Error::ShapeMismatch(format!(
            "thing mask {}x{} vs affinity {}x{}",
            thing_mask.height(),
            thing_mask.width(),
            gt.height(),
            gt.width()
        )));
    }
    let channels = gt.geometry().channels();
    let mut weighted = 0.0f64;
    let mut total_weight = 0.0f64;
    for p in 0..gt.pixels() {
        let mut sum = 0.0f64;
        let mut count = 0usize;
        let mut all_ones = true;
        for j in 0..channels {
            if !gt.is_valid(j, p) {
                continue;
            }
            let y = gt.value(j, p) as f64;
            let a = pred.value(j, p) as f64;
            all_ones &= y == 1.0;
            sum += (y - a) * (y - a);
            count += 1;
        }
        if count == 0 || (all_ones && is_dropped(cfg, p)) {
            continue;
        }
        let weight = if thing_mask.as_slice()[p] {
            cfg.object_weight
        } else {
            1.0
        };
        weighted += weight * sum / count as f64;
        total_weight += weight;
    }
    Ok(if total_weight > 0.0 {
        weighted / total_weight
    } else {
        0.0
    })
}
