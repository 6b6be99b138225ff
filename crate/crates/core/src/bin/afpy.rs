use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use afpy::affinity::gt_affinity_pyramid;
use afpy::bench::bench_cascade;
use afpy::config::AppConfig;
use afpy::eval::evaluate;
use afpy::grid::LabelKind;
use afpy::instances::InstanceSet;
use afpy::io::{read_pyramid, write_pyramid};
use afpy::pipeline::segment;
use afpy::render::render_labels;
use afpy::synth::{generate_scene, perturb_pyramid, perturb_scores, scores_from_classes, ShapeKind};
use afpy::tensor::{read_tensor, write_tensor, Tensor};
use afpy::{Error, Result};

#[derive(Parser)]
#[command(name = "afpy", version, about = "Cascaded affinity-pyramid instance segmentation")]
struct Cli {
    /// Overrides every random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scene: instance ids, class ids and class scores.
    Synth(SynthArgs),
    /// Ground-truth affinity pyramid from an instance map.
    GtAffinity(GtArgs),
    /// Add simulated prediction noise to a pyramid and/or class scores.
    Perturb(PerturbArgs),
    /// Segment instances from an affinity pyramid and class scores.
    Segment(SegmentArgs),
    /// AP and PQ of predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Compare partition time and quality across initial cascade levels.
    Bench(BenchArgs),
    /// Render an instance map as a binary PPM.
    Render(RenderArgs),
}

#[derive(Args)]
struct SceneFlags {
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    num_instances: Option<u32>,
    /// Comma-separated subset of rectangle, ellipse, l-shape.
    #[arg(long, value_delimiter = ',')]
    shapes: Option<Vec<ShapeKind>>,
    /// Classes including background.
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    occlusion: Option<bool>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    max_size: Option<usize>,
}

#[derive(Args)]
struct NoiseFlags {
    #[arg(long)]
    flip_prob: Option<f64>,
    #[arg(long)]
    logistic_sigma: Option<f64>,
    #[arg(long)]
    semantic_corrupt_prob: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    scene: SceneFlags,
    #[command(flatten)]
    noise: NoiseFlags,
    /// Score on the true class.
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GtArgs {
    #[arg(long)]
    instances: PathBuf,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    noise: NoiseFlags,
    #[arg(long)]
    affinity_dir: Option<PathBuf>,
    #[arg(long, requires = "affinity_dir")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long, requires = "scores")]
    out_scores: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    affinity_dir: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    init_level: Option<u32>,
    #[arg(long)]
    erosion_radius: Option<usize>,
    #[arg(long)]
    min_proposal_area: Option<usize>,
    #[arg(long)]
    per_class: Option<bool>,
    #[arg(long)]
    local_search: Option<bool>,
    #[arg(long)]
    max_ls_sweeps: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    min_area: Option<usize>,
    #[arg(long)]
    refine: Option<bool>,
    /// Comma-separated thing class ids (default: all but 0).
    #[arg(long, value_delimiter = ',')]
    thing_classes: Option<Vec<u32>>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Predicted instances (JSON).
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth instances as JSON ...
    #[arg(long, conflicts_with_all = ["gt_instances", "gt_classes"])]
    gt: Option<PathBuf>,
    /// ... or as instance and class id maps (AFPY).
    #[arg(long, requires = "gt_classes")]
    gt_instances: Option<PathBuf>,
    #[arg(long, requires = "gt_instances")]
    gt_classes: Option<PathBuf>,
    /// Comma-separated thing class ids (default: all ground-truth classes).
    #[arg(long, value_delimiter = ',')]
    thing_classes: Option<Vec<u32>>,
    /// Metric JSON destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scenes: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    init_levels: Option<Vec<u32>>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    num_instances: Option<u32>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_table: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    palette_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn apply_scene(cfg: &mut AppConfig, f: &SceneFlags) {
    let s = &mut cfg.scene;
    s.height = f.height.unwrap_or(s.height);
    s.width = f.width.unwrap_or(s.width);
    s.num_instances = f.num_instances.unwrap_or(s.num_instances);
    if let Some(k) = &f.shapes {
        s.shape_kinds = k.clone();
    }
    s.class_count = f.classes.unwrap_or(s.class_count);
    s.occlusion = f.occlusion.unwrap_or(s.occlusion);
    s.min_size = f.min_size.or(s.min_size);
    s.max_size = f.max_size.or(s.max_size);
}

fn apply_noise(cfg: &mut AppConfig, f: &NoiseFlags) {
    let n = &mut cfg.noise;
    n.flip_prob = f.flip_prob.unwrap_or(n.flip_prob);
    n.logistic_sigma = f.logistic_sigma.unwrap_or(n.logistic_sigma);
    n.semantic_corrupt_prob = f.semantic_corrupt_prob.unwrap_or(n.semantic_corrupt_prob);
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn synth(mut cfg: AppConfig, a: SynthArgs) -> Result<()> {
    apply_scene(&mut cfg, &a.scene);
    apply_noise(&mut cfg, &a.noise);
    let confidence = a.confidence.unwrap_or(cfg.pyramid.confidence);
    let scene = generate_scene(&cfg.scene)?;
    let scores = perturb_scores(
        &scores_from_classes(&scene.classes, cfg.scene.class_count, confidence)?,
        &cfg.noise,
    )?;
    std::fs::create_dir_all(&a.out_dir)?;
    write_tensor(a.out_dir.join("instances.afpy"), &Tensor::from_label_map(&scene.instances))?;
    write_tensor(a.out_dir.join("classes.afpy"), &Tensor::from_label_map(&scene.classes))?;
    write_tensor(a.out_dir.join("scores.afpy"), &Tensor::from_scores(&scores))?;
    Ok(())
}

fn gt_affinity(cfg: AppConfig, a: GtArgs) -> Result<()> {
    let inst = read_tensor(&a.instances)?.into_label_map(0, LabelKind::Instances)?;
    let pyr = gt_affinity_pyramid(
        &inst,
        a.levels.unwrap_or(cfg.pyramid.levels),
        a.r.unwrap_or(cfg.pyramid.r),
    )?;
    write_pyramid(&a.out_dir, &pyr)
}

fn perturb(mut cfg: AppConfig, a: PerturbArgs) -> Result<()> {
    apply_noise(&mut cfg, &a.noise);
    if a.affinity_dir.is_none() && a.scores.is_none() {
        return Err(Error::InvalidArgument("give --affinity-dir and/or --scores".into()));
    }
    if let Some(dir) = &a.affinity_dir {
        let pyr = perturb_pyramid(&read_pyramid(dir)?, &cfg.noise)?;
        write_pyramid(a.out_dir.as_deref().unwrap_or(dir), &pyr)?;
    }
    if let Some(path) = &a.scores {
        let scores = perturb_scores(&read_tensor(path)?.into_scores(0)?, &cfg.noise)?;
        write_tensor(a.out_scores.as_deref().unwrap_or(path), &Tensor::from_scores(&scores))?;
    }
    Ok(())
}

fn run_segment(mut cfg: AppConfig, a: SegmentArgs) -> Result<()> {
    let p = &mut cfg.pipeline;
    p.cascade.init_level = a.init_level.unwrap_or(p.cascade.init_level);
    p.cascade.erosion_radius = a.erosion_radius.unwrap_or(p.cascade.erosion_radius);
    p.cascade.min_proposal_area = a.min_proposal_area.unwrap_or(p.cascade.min_proposal_area);
    p.cascade.per_class = a.per_class.unwrap_or(p.cascade.per_class);
    p.solver.use_local_search = a.local_search.unwrap_or(p.solver.use_local_search);
    p.solver.max_ls_sweeps = a.max_ls_sweeps.unwrap_or(p.solver.max_ls_sweeps);
    p.epsilon = a.epsilon.unwrap_or(p.epsilon);
    p.min_area = a.min_area.unwrap_or(p.min_area);
    p.refine = a.refine.unwrap_or(p.refine);
    if a.thing_classes.is_some() {
        p.thing_classes = a.thing_classes;
    }
    let pyramid = read_pyramid(&a.affinity_dir)?;
    let scores = read_tensor(&a.scores)?.into_scores(0)?;
    let out = segment(&pyramid, &scores, &cfg.pipeline)?;
    std::fs::create_dir_all(&a.out_dir)?;
    write_tensor(a.out_dir.join("instances.afpy"), &Tensor::from_label_map(&out.labels))?;
    std::fs::write(a.out_dir.join("instances.json"), out.instances.to_json()? + "\n")?;
    write_json(&a.out_dir.join("timing.json"), &out.timings)
}

fn run_evaluate(a: EvaluateArgs) -> Result<()> {
    let pred = InstanceSet::from_json(&std::fs::read_to_string(&a.pred)?)?;
    let gt = match (&a.gt, &a.gt_instances, &a.gt_classes) {
        (Some(path), _, _) => InstanceSet::from_json(&std::fs::read_to_string(path)?)?,
        (None, Some(i), Some(c)) => InstanceSet::from_ground_truth(
            &read_tensor(i)?.into_label_map(0, LabelKind::Instances)?,
            &read_tensor(c)?.into_label_map(0, LabelKind::Classes)?,
        )?,
        _ => return Err(Error::InvalidArgument("give --gt or --gt-instances with --gt-classes".into())),
    };
    let thing: BTreeSet<u32> = match a.thing_classes {
        Some(list) => list.into_iter().collect(),
        None => gt.instances.iter().map(|i| i.class_id).collect(),
    };
    let report = evaluate(&pred, &gt, &thing)?;
    match a.out {
        Some(path) => write_json(&path, &report),
        None => {
            let text = serde_json::to_string_pretty(&report)?;
            Ok(writeln!(std::io::stdout().lock(), "{text}")?)
        }
    }
}

fn run_bench(mut cfg: AppConfig, a: BenchArgs) -> Result<()> {
    let b = &mut cfg.bench;
    b.scenes = a.scenes.unwrap_or(b.scenes);
    b.repeats = a.repeats.unwrap_or(b.repeats);
    if let Some(levels) = a.init_levels {
        b.init_levels = levels;
    }
    if let Some(size) = a.size {
        b.scene.height = size;
        b.scene.width = size;
    }
    b.scene.num_instances = a.num_instances.unwrap_or(b.scene.num_instances);
    b.scene.min_size = a.min_size.or(b.scene.min_size);
    b.scene.max_size = a.max_size.or(b.scene.max_size);
    b.parallel |= a.parallel;
    let report = bench_cascade(&cfg.bench, &cfg.pipeline)?;
    let table = report.to_table();
    if let Some(path) = &a.out_json {
        write_json(path, &report)?;
    }
    if let Some(path) = &a.out_table {
        std::fs::write(path, &table)?;
    }
    Ok(write!(std::io::stdout().lock(), "{table}")?)
}

fn render(cfg: AppConfig, a: RenderArgs) -> Result<()> {
    let labels = read_tensor(&a.labels)?.into_label_map(0, LabelKind::Instances)?;
    std::fs::write(&a.out, render_labels(&labels, a.palette_seed.unwrap_or(cfg.palette_seed)))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    match cli.command {
        Command::Synth(a) => synth(cfg, a),
        Command::GtAffinity(a) => gt_affinity(cfg, a),
        Command::Perturb(a) => perturb(cfg, a),
        Command::Segment(a) => run_segment(cfg, a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Bench(a) => run_bench(cfg, a),
        Command::Render(a) => render(cfg, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("afpy: {e}");
            ExitCode::FAILURE
        }
    }
}
