//! C ABI over the `afpy` pipeline.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every entry point returns
//! an [`AfpyStatus`]; on failure [`afpy_last_error`] describes the problem
//! for the calling thread. Panics are caught and reported as
//! [`AfpyStatus::Panic`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use afpy::affinity::{gt_affinity_pyramid, AffinityPyramid};
use afpy::eval::evaluate;
use afpy::grid::{ClassScores, Grid, LabelMap};
use afpy::instances::InstanceSet;
use afpy::partition::{multicut_objective, solve_greedy_contract, PartitionGraph, SolverConfig};
use afpy::pipeline::{segment, PipelineConfig};
use afpy::render::render_labels;
use afpy::synth::{generate_scene, perturb_pyramid, scores_from_classes, NoiseSpec, SceneSpec};
use afpy::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AfpyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Io = 4,
    Format = 5,
    Capacity = 6,
    Internal = 7,
    Panic = 8,
}

/// Instance-id or class-id raster.
pub struct AfpyLabelMap(LabelMap);
/// Per-pixel class probabilities, `classes x height x width`.
pub struct AfpyScores(ClassScores);
pub struct AfpyPyramid(AffinityPyramid);
pub struct AfpyInstances(InstanceSet);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> AfpyStatus {
    match e {
        Error::Io(_) => AfpyStatus::Io,
        Error::BadMagic(_)
        | Error::UnsupportedVersion(_)
        | Error::UnsupportedDtype(_)
        | Error::TruncatedPayload { .. }
        | Error::TruncatedHeader
        | Error::TrailingBytes(_)
        | Error::Json(_) => AfpyStatus::Format,
        Error::DimsOverflow(_) | Error::TooManyNodes { .. } | Error::SceneTooCrowded { .. } => {
            AfpyStatus::Capacity
        }
        Error::InvalidShape(_) | Error::ShapeMismatch(_) | Error::LabelOutOfRange { .. } => {
            AfpyStatus::ShapeMismatch
        }
        Error::InvalidArgument(_) | Error::ProposalMasked(_) => AfpyStatus::InvalidArgument,
        Error::MatchingViolation(_) => AfpyStatus::Internal,
    }
}

struct Failure(AfpyStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AfpyStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AfpyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AfpyStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            AfpyStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|e| Failure(AfpyStatus::Internal, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn optional_str<'a>(p: *const c_char) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|e| Failure(AfpyStatus::InvalidArgument, e.to_string()))
}

/// Message for the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn afpy_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn afpy_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies a row-major `height x width` raster into a new label map.
///
/// # Safety
/// `data` must point to `height * width` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_label_map_new(
    height: usize,
    width: usize,
    data: *const u32,
    out: *mut *mut AfpyLabelMap,
) -> AfpyStatus {
    guard(|| {
        let n = height.checked_mul(width).ok_or_else(|| Failure(AfpyStatus::Capacity, "size overflow".into()))?;
        let values = slice(data, n, "data")?.to_vec();
        put(out, AfpyLabelMap(LabelMap::instances(Grid::from_vec(height, width, values)?)))
    })
}

/// # Safety
/// `map` must be a live handle; `height` and `width` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_label_map_dims(
    map: *const AfpyLabelMap,
    height: *mut usize,
    width: *mut usize,
) -> AfpyStatus {
    guard(|| {
        let m = &borrow(map, "map")?.0;
        if height.is_null() || width.is_null() {
            return Err(null("output pointer"));
        }
        *height = m.height();
        *width = m.width();
        Ok(())
    })
}

/// Copies the raster into `out`, which must hold `len == height * width`
/// values.
///
/// # Safety
/// `map` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn afpy_label_map_read(map: *const AfpyLabelMap, out: *mut u32, len: usize) -> AfpyStatus {
    guard(|| {
        let m = &borrow(map, "map")?.0;
        let src = m.grid.as_slice();
        if len != src.len() {
            return Err(Failure(
                AfpyStatus::ShapeMismatch,
                format!("buffer holds {len} values, map has {}", src.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, len);
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afpy_label_map_free(map: *mut AfpyLabelMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Copies channel-major class scores.
///
/// # Safety
/// `data` must point to `classes * height * width` readable values; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_scores_new(
    classes: usize,
    height: usize,
    width: usize,
    data: *const f32,
    out: *mut *mut AfpyScores,
) -> AfpyStatus {
    guard(|| {
        let n = classes
            .checked_mul(height)
            .and_then(|v| v.checked_mul(width))
            .ok_or_else(|| Failure(AfpyStatus::Capacity, "size overflow".into()))?;
        let values = slice(data, n, "data")?.to_vec();
        let scores = ClassScores::from_vec(0, classes, height, width, values)?;
        scores.validate()?;
        put(out, AfpyScores(scores))
    })
}

/// Scores with `confidence` on each pixel's class in `class_ids` and the
/// remainder spread evenly.
///
/// # Safety
/// `class_ids` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_scores_from_classes(
    class_ids: *const AfpyLabelMap,
    classes: usize,
    confidence: f64,
    out: *mut *mut AfpyScores,
) -> AfpyStatus {
    guard(|| {
        let m = &borrow(class_ids, "class_ids")?.0;
        put(out, AfpyScores(scores_from_classes(m, classes, confidence)?))
    })
}

/// # Safety
/// `scores` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afpy_scores_free(scores: *mut AfpyScores) {
    if !scores.is_null() {
        drop(Box::from_raw(scores));
    }
}

/// Generates a synthetic scene with default shape sizes and all shape
/// kinds.
///
/// # Safety
/// `out_instances` and `out_classes` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_synth_scene(
    height: usize,
    width: usize,
    num_instances: u32,
    class_count: usize,
    occlusion: bool,
    seed: u64,
    out_instances: *mut *mut AfpyLabelMap,
    out_classes: *mut *mut AfpyLabelMap,
) -> AfpyStatus {
    guard(|| {
        if out_instances.is_null() || out_classes.is_null() {
            return Err(null("output pointer"));
        }
        let scene = generate_scene(&SceneSpec {
            height,
            width,
            num_instances,
            class_count,
            occlusion,
            rng_seed: seed,
            ..SceneSpec::default()
        })?;
        put(out_instances, AfpyLabelMap(scene.instances))?;
        put(out_classes, AfpyLabelMap(scene.classes))
    })
}

/// Ground-truth affinity pyramid with `levels` levels and an `r x r` window.
///
/// # Safety
/// `instances` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_gt_pyramid(
    instances: *const AfpyLabelMap,
    levels: usize,
    r: usize,
    out: *mut *mut AfpyPyramid,
) -> AfpyStatus {
    guard(|| {
        let m = &borrow(instances, "instances")?.0;
        put(out, AfpyPyramid(gt_affinity_pyramid(m, levels, r)?))
    })
}

/// Simulated prediction noise: label flips and logit-space Gaussian noise.
///
/// # Safety
/// `pyramid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_pyramid_perturb(
    pyramid: *const AfpyPyramid,
    flip_prob: f64,
    logistic_sigma: f64,
    seed: u64,
    out: *mut *mut AfpyPyramid,
) -> AfpyStatus {
    guard(|| {
        let p = &borrow(pyramid, "pyramid")?.0;
        let noise = NoiseSpec {
            flip_prob,
            logistic_sigma,
            semantic_corrupt_prob: 0.0,
            rng_seed: seed,
        };
        put(out, AfpyPyramid(perturb_pyramid(p, &noise)?))
    })
}

/// # Safety
/// `pyramid` must be a live handle; `depth` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_pyramid_depth(pyramid: *const AfpyPyramid, depth: *mut usize) -> AfpyStatus {
    guard(|| {
        let p = &borrow(pyramid, "pyramid")?.0;
        if depth.is_null() {
            return Err(null("depth"));
        }
        *depth = p.depth();
        Ok(())
    })
}

/// # Safety
/// `pyramid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afpy_pyramid_free(pyramid: *mut AfpyPyramid) {
    if !pyramid.is_null() {
        drop(Box::from_raw(pyramid));
    }
}

/// Runs the full pipeline. `config_json` is a pipeline configuration
/// document or null for defaults.
///
/// # Safety
/// Handles must be live; `config_json` must be null or NUL-terminated;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_segment(
    pyramid: *const AfpyPyramid,
    scores: *const AfpyScores,
    config_json: *const c_char,
    out: *mut *mut AfpyInstances,
) -> AfpyStatus {
    guard(|| {
        let p = &borrow(pyramid, "pyramid")?.0;
        let s = &borrow(scores, "scores")?.0;
        let cfg = match optional_str(config_json)? {
            Some(text) => PipelineConfig::from_json(text)?,
            None => PipelineConfig::default(),
        };
        put(out, AfpyInstances(segment(p, s, &cfg)?.instances))
    })
}

/// Ground-truth instances from instance and class id maps (score 1 each).
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_instances_from_ground_truth(
    instances: *const AfpyLabelMap,
    classes: *const AfpyLabelMap,
    out: *mut *mut AfpyInstances,
) -> AfpyStatus {
    guard(|| {
        let i = &borrow(instances, "instances")?.0;
        let c = &borrow(classes, "classes")?.0;
        put(out, AfpyInstances(InstanceSet::from_ground_truth(i, c)?))
    })
}

/// # Safety
/// `set` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_instances_len(set: *const AfpyInstances, len: *mut usize) -> AfpyStatus {
    guard(|| {
        let s = &borrow(set, "set")?.0;
        if len.is_null() {
            return Err(null("len"));
        }
        *len = s.len();
        Ok(())
    })
}

/// Instance map with ids 1, 2, ... in ranked order.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_instances_label_map(
    set: *const AfpyInstances,
    out: *mut *mut AfpyLabelMap,
) -> AfpyStatus {
    guard(|| {
        let s = &borrow(set, "set")?.0;
        put(out, AfpyLabelMap(s.to_label_map()))
    })
}

/// JSON document with run-length encoded masks; free with
/// [`afpy_string_free`].
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_instances_to_json(set: *const AfpyInstances, out: *mut *mut c_char) -> AfpyStatus {
    guard(|| {
        let s = &borrow(set, "set")?.0;
        put_string(out, s.to_json()?)
    })
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afpy_instances_free(set: *mut AfpyInstances) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// AP and PQ as a JSON document; free with [`afpy_string_free`].
/// `thing_classes` may be null (with `thing_len == 0`) to use every
/// ground-truth class.
///
/// # Safety
/// Handles must be live; `thing_classes` must point to `thing_len` values;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_evaluate_json(
    pred: *const AfpyInstances,
    gt: *const AfpyInstances,
    thing_classes: *const u32,
    thing_len: usize,
    out: *mut *mut c_char,
) -> AfpyStatus {
    guard(|| {
        let p = &borrow(pred, "pred")?.0;
        let g = &borrow(gt, "gt")?.0;
        let thing: BTreeSet<u32> = if thing_len == 0 {
            g.instances.iter().map(|i| i.class_id).collect()
        } else {
            slice(thing_classes, thing_len, "thing_classes")?.iter().copied().collect()
        };
        put_string(out, evaluate(p, g, &thing)?.to_json()?)
    })
}

/// Greedy additive contraction (plus local search when requested) on a
/// weighted graph with `node_count` nodes and `edge_count` edges
/// `(us[k], vs[k], ws[k])`. Writes one label per node and the objective.
///
/// # Safety
/// `us`, `vs`, `ws` must point to `edge_count` values; `labels` to
/// `node_count` writable values; `objective` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_multicut_solve(
    node_count: usize,
    edge_count: usize,
    us: *const u32,
    vs: *const u32,
    ws: *const f64,
    use_local_search: bool,
    seed: u64,
    labels: *mut u32,
    objective: *mut f64,
) -> AfpyStatus {
    guard(|| {
        let (u, v, w) = (
            slice(us, edge_count, "us")?,
            slice(vs, edge_count, "vs")?,
            slice(ws, edge_count, "ws")?,
        );
        let g = PartitionGraph::from_weighted_edges(
            node_count,
            (0..edge_count).map(|k| (u[k], v[k], w[k])),
        )?;
        let cfg = SolverConfig {
            use_local_search,
            rng_seed: seed,
            ..SolverConfig::default()
        };
        let p = solve_greedy_contract(&g, &cfg);
        if node_count > 0 && labels.is_null() {
            return Err(null("labels"));
        }
        if node_count > 0 {
            ptr::copy_nonoverlapping(p.labels().as_ptr(), labels, node_count);
        }
        if !objective.is_null() {
            *objective = multicut_objective(&g, &p)?;
        }
        Ok(())
    })
}

/// Binary PPM rendering; free with [`afpy_bytes_free`].
///
/// # Safety
/// `map` must be a live handle; `out` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afpy_render_ppm(
    map: *const AfpyLabelMap,
    palette_seed: u64,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> AfpyStatus {
    guard(|| {
        let m = &borrow(map, "map")?.0;
        if out.is_null() || out_len.is_null() {
            return Err(null("output pointer"));
        }
        let bytes = render_labels(m, palette_seed).into_boxed_slice();
        *out_len = bytes.len();
        *out = Box::into_raw(bytes).cast();
        Ok(())
    })
}

/// # Safety
/// `bytes` must be null or come from [`afpy_render_ppm`] with this `len`.
#[no_mangle]
pub unsafe extern "C" fn afpy_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn afpy_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
