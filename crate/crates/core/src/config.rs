//! One JSON document holding every configurable section. Missing sections
//! and fields take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affinity::LossConfig;
use crate::bench::BenchConfig;
use crate::error::Result;
use crate::pipeline::{PipelineConfig, PyramidSpec};
use crate::synth::{NoiseSpec, SceneSpec};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub scene: SceneSpec,
    pub noise: NoiseSpec,
    pub pyramid: PyramidSpec,
    pub loss: LossConfig,
    pub pipeline: PipelineConfig,
    pub bench: BenchConfig,
    pub palette_seed: u64,
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Sets every random seed to `seed`.
    pub fn set_seed(&mut self, seed: u64) {
        self.scene.rng_seed = seed;
        self.noise.rng_seed = seed;
        self.loss.rng_seed = seed;
        self.pipeline.solver.rng_seed = seed;
        self.bench.seed = seed;
        self.palette_seed = seed;
    }
}
