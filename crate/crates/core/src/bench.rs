//! Cascaded versus flat partitioning: wall-clock and quality per initial
//! level.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::pipeline::{segment, synthetic_case, PipelineConfig, PyramidSpec};
use crate::rng::SplitMix64;
use crate::synth::{NoiseSpec, SceneSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    /// Number of scenes drawn from `scene` with derived seeds.
    pub scenes: usize,
    pub scene: SceneSpec,
    pub noise: Option<NoiseSpec>,
    pub pyramid: PyramidSpec,
    pub init_levels: Vec<u32>,
    pub repeats: usize,
    /// Seed for the per-scene seeds.
    pub seed: u64,
    /// Run scenes concurrently; timings are then contended.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            scenes: 20,
            scene: SceneSpec {
                height: 256,
                width: 256,
                num_instances: 4,
                occlusion: false,
                min_size: Some(64),
                max_size: Some(128),
                ..SceneSpec::default()
            },
            noise: None,
            pyramid: PyramidSpec::default(),
            init_levels: vec![0, 1, 2],
            repeats: 3,
            seed: 0,
            parallel: false,
        }
    }
}

/// Work counts at one level of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: u32,
    pub pixels: usize,
    pub proposals: usize,
    pub nodes: usize,
    pub edges: usize,
    /// Median over repeats.
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scene: usize,
    pub scene_seed: u64,
    pub init_level: u32,
    /// Median over repeats of the summed partition time.
    pub seconds: f64,
    pub levels: Vec<LevelStats>,
    pub ap: f64,
    pub pq: f64,
    pub pq_th: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub init_level: u32,
    pub median_seconds: f64,
    pub mean_ap: f64,
    pub mean_pq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<BenchSummary>,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Scene specs sharing `template` with seeds drawn from `seed`.
pub fn bench_scenes(template: &SceneSpec, count: usize, seed: u64) -> Vec<SceneSpec> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| SceneSpec {
            rng_seed: rng.next_u64(),
            ..template.clone()
        })
        .collect()
}

fn bench_scene(
    index: usize,
    scene: &SceneSpec,
    cfg: &BenchConfig,
    base: &PipelineConfig,
) -> Result<Vec<BenchRow>> {
    let case = synthetic_case(scene, &cfg.pyramid, cfg.noise.as_ref())?;
    let thing = base.thing_set(scene.class_count);
    let mut runs: Vec<Vec<_>> = vec![Vec::new(); cfg.init_levels.len()];
    // Interleave configurations so slow drift hits all of them alike.
    for _ in 0..cfg.repeats {
        for (k, &init) in cfg.init_levels.iter().enumerate() {
            let mut pc = base.clone();
            pc.cascade.init_level = init;
            runs[k].push(segment(&case.pyramid, &case.scores, &pc)?);
        }
    }
    cfg.init_levels
        .iter()
        .zip(runs)
        .map(|(&init_level, outs)| {
            let first = &outs[0];
            let report = evaluate(&first.instances, &case.ground_truth, &thing)?;
            let totals: Vec<f64> = outs.iter().map(|o| o.partition_seconds()).collect();
            let levels = first
                .timings
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let secs: Vec<f64> = outs.iter().map(|o| o.timings[i].seconds).collect();
                    LevelStats {
                        level: t.level,
                        pixels: t.pixels,
                        proposals: t.proposals,
                        nodes: t.nodes,
                        edges: t.edges,
                        seconds: median(&secs),
                    }
                })
                .collect();
            Ok(BenchRow {
                scene: index,
                scene_seed: scene.rng_seed,
                init_level,
                seconds: median(&totals),
                levels,
                ap: report.ap.mean,
                pq: report.panoptic.pq,
                pq_th: report.panoptic.pq_th,
            })
        })
        .collect()
}

/// Runs the pipeline on every scene for every initial level, `repeats`
/// times each. Quality columns come from the first repeat.
pub fn bench_cascade(cfg: &BenchConfig, base: &PipelineConfig) -> Result<BenchReport> {
    if cfg.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    if cfg.init_levels.is_empty() {
        return Err(Error::InvalidArgument("no init levels given".into()));
    }
    let scenes = bench_scenes(&cfg.scene, cfg.scenes, cfg.seed);
    let per_scene: Vec<Vec<BenchRow>> = if cfg.parallel {
        scenes
            .par_iter()
            .enumerate()
            .map(|(i, s)| bench_scene(i, s, cfg, base))
            .collect::<Result<_>>()?
    } else {
        scenes
            .iter()
            .enumerate()
            .map(|(i, s)| bench_scene(i, s, cfg, base))
            .collect::<Result<_>>()?
    };
    let rows: Vec<BenchRow> = per_scene.into_iter().flatten().collect();
    let summary = cfg
        .init_levels
        .iter()
        .map(|&init_level| {
            let sel: Vec<&BenchRow> = rows.iter().filter(|r| r.init_level == init_level).collect();
            let secs: Vec<f64> = sel.iter().map(|r| r.seconds).collect();
            let n = sel.len().max(1) as f64;
            BenchSummary {
                init_level,
                median_seconds: median(&secs),
                mean_ap: sel.iter().map(|r| r.ap).sum::<f64>() / n,
                mean_pq: sel.iter().map(|r| r.pq).sum::<f64>() / n,
            }
        })
        .collect();
    Ok(BenchReport { rows, summary })
}

impl BenchReport {
    /// Aligned plain-text table: one line per row, then the summary.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>5} {:>4} {:>10} {:>8} {:>8} {:>8}  nodes per level (coarse to fine)",
            "scene", "init", "seconds", "AP", "PQ", "PQ_th"
        );
        for r in &self.rows {
            let nodes: Vec<String> = r
                .levels
                .iter()
                .map(|l| format!("L{}:{}/{}", l.level, l.nodes, l.pixels))
                .collect();
            let _ = writeln!(
                out,
                "{:>5} {:>4} {:>10.5} {:>8.4} {:>8.4} {:>8.4}  {}",
                r.scene,
                r.init_level,
                r.seconds,
                r.ap,
                r.pq,
                r.pq_th,
                nodes.join(" ")
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:>4} {:>14} {:>8} {:>8}", "init", "median seconds", "mean AP", "mean PQ");
        for s in &self.summary {
            let _ = writeln!(
                out,
                "{:>4} {:>14.5} {:>8.4} {:>8.4}",
                s.init_level, s.median_seconds, s.mean_ap, s.mean_pq
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_examples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn single_init_level_gives_one_row_per_scene() {
        let cfg = BenchConfig {
            scenes: 3,
            scene: SceneSpec {
                height: 48,
                width: 48,
                num_instances: 2,
                occlusion: false,
                ..SceneSpec::default()
            },
            pyramid: PyramidSpec { levels: 3, ..PyramidSpec::default() },
            init_levels: vec![0],
            repeats: 1,
            ..BenchConfig::default()
        };
        let report = bench_cascade(&cfg, &PipelineConfig::default()).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows.iter().all(|r| r.ap == 1.0 && r.pq == 1.0));
        let table = report.to_table();
        assert_eq!(table.lines().count(), 1 + 3 + 1 + 1 + 1);
    }
}
