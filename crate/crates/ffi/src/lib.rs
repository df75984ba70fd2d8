//! C ABI over `gmt-rect`.
//!
//! Every function returns a [`GmtStatus`]; results go through out-pointers.
//! On failure the message is available from [`gmt_last_error`] on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. Panics never cross the boundary; they surface as
//! `GMT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;
use std::sync::OnceLock;

use gmt_rect::harness::{emit_report, registry, run_experiment, ExperimentConfig, ExperimentReport, Format};
use gmt_rect::heisenberg::{koranyi_distance, HPoint, Koranyi};
use gmt_rect::jets::{stratify_critical, JetOptions};
use gmt_rect::measure::hausdorff_content;
use gmt_rect::metric_core::{Euclidean, Metric, SampledMap, SupNorm};
use gmt_rect::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidLandmark = 3,
    InconsistentData = 4,
    InsufficientDensity = 5,
    UnsupportedDomain = 6,
    UnreliableCheck = 7,
    NeedsPermutation = 8,
    StraighteningFailed = 9,
    CubeTooCoarse = 10,
    NotHorizontal = 11,
    NoPathFound = 12,
    DegenerateSystem = 13,
    UnknownExperiment = 14,
    EmptyReport = 15,
    Config = 16,
    Io = 17,
    Parse = 18,
    Panic = 99,
}

/// Target metric of a sampled map.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmtTarget {
    Euclidean = 0,
    Linf = 1,
    Heisenberg = 2,
}

/// A map sampled on an `h`-grid.
pub struct GmtSampledMap {
    inner: SampledMap,
}

/// The report of one experiment run.
pub struct GmtReport {
    inner: ExperimentReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GmtStatus {
    match e {
        Error::ContractViolation(_) => GmtStatus::InvalidArgument,
        Error::InvalidLandmark(_) => GmtStatus::InvalidLandmark,
        Error::InconsistentData(_) => GmtStatus::InconsistentData,
        Error::InsufficientDensity { .. } => GmtStatus::InsufficientDensity,
        Error::UnsupportedDomain(_) => GmtStatus::UnsupportedDomain,
        Error::UnreliableCheck { .. } => GmtStatus::UnreliableCheck,
        Error::NeedsPermutation { .. } => GmtStatus::NeedsPermutation,
        Error::StraighteningFailed { .. } => GmtStatus::StraighteningFailed,
        Error::CubeTooCoarse { .. } => GmtStatus::CubeTooCoarse,
        Error::NotHorizontal { .. } => GmtStatus::NotHorizontal,
        Error::NoPathFound { .. } => GmtStatus::NoPathFound,
        Error::DegenerateSystem(_) => GmtStatus::DegenerateSystem,
        Error::UnknownExperiment(_) => GmtStatus::UnknownExperiment,
        Error::EmptyReport(_) => GmtStatus::EmptyReport,
        Error::Config(_) => GmtStatus::Config,
        Error::Io { .. } => GmtStatus::Io,
        Error::Json(_) | Error::Toml(_) | Error::Csv(_) => GmtStatus::Parse,
    }
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GmtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GmtStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            GmtStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(msg))) => {
            set_error(msg);
            GmtStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            GmtStatus::Panic
        }
    }
}

fn nonnull<T>(p: *const T, what: &'static str) -> Result<*const T, Failure> {
    if p.is_null() {
        Err(Failure::Null(what))
    } else {
        Ok(p)
    }
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn read<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    Ok(slice::from_raw_parts(nonnull(p, what)?, len))
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    CStr::from_ptr(nonnull(s, what)?)
        .to_str()
        .map_err(|_| Failure::Invalid(format!("{what} is not UTF-8")))
}

fn metric_of(t: GmtTarget) -> &'static dyn Metric {
    match t {
        GmtTarget::Euclidean => &Euclidean,
        GmtTarget::Linf => &SupNorm,
        GmtTarget::Heisenberg => &Koranyi,
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gmt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gmt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Korányi distance between two points of `H^n`, each given as `2n + 1`
/// coordinates `(x_1..x_n, y_1..y_n, t)`.
///
/// # Safety
/// `p` and `q` must point to `2n + 1` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmt_koranyi_distance(
    p: *const f64,
    q: *const f64,
    n: usize,
    out: *mut f64,
) -> GmtStatus {
    guard(|| {
        let out = nonnull(out, "out")? as *mut f64;
        let len = 2 * n + 1;
        let p = HPoint::from_slice(read(p, len, "p")?)?;
        let q = HPoint::from_slice(read(q, len, "q")?)?;
        *out = koranyi_distance(&p, &q)?;
        Ok(())
    })
}

/// Greedy-cover estimate of the `s`-dimensional content of `count` points
/// of dimension `dim` stored row by row.
///
/// # Safety
/// `points` must hold `count * dim` doubles; `value` and `balls` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gmt_hausdorff_content(
    points: *const f64,
    count: usize,
    dim: usize,
    target: GmtTarget,
    s: f64,
    r: f64,
    value: *mut f64,
    balls: *mut usize,
) -> GmtStatus {
    guard(|| {
        let value = nonnull(value, "value")? as *mut f64;
        let balls = nonnull(balls, "balls")? as *mut usize;
        if dim == 0 {
            return Err(Failure::Invalid("dim must be positive".into()));
        }
        let flat = read(points, count * dim, "points")?;
        let pts: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let est = hausdorff_content(&pts, metric_of(target), s, r)?;
        *value = est.value;
        *balls = est.ball_count;
        Ok(())
    })
}

/// Builds a sampled map from `count` grid indices (`k` integers each, row by
/// row) and values (`target_dim` doubles each). Domain point `i` is
/// `indices[i] * h`.
///
/// # Safety
/// The arrays must have the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmt_sampled_map_new(
    k: usize,
    h: f64,
    indices: *const i64,
    values: *const f64,
    count: usize,
    target_dim: usize,
    target: GmtTarget,
    out: *mut *mut GmtSampledMap,
) -> GmtStatus {
    guard(|| {
        let out = nonnull(out, "out")? as *mut *mut GmtSampledMap;
        if k == 0 || target_dim == 0 {
            return Err(Failure::Invalid("k and target_dim must be positive".into()));
        }
        let idx = read(indices, count * k, "indices")?;
        let vals = read(values, count * target_dim, "values")?;
        let inner = SampledMap::new(
            k,
            h,
            idx.chunks(k).map(<[i64]>::to_vec).collect(),
            vals.chunks(target_dim).map(<[f64]>::to_vec).collect(),
            metric_of(target),
        )?;
        *out = Box::into_raw(Box::new(GmtSampledMap { inner }));
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a handle from [`gmt_sampled_map_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gmt_sampled_map_free(map: *mut GmtSampledMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Number of grid points and the grid Lipschitz estimate.
///
/// # Safety
/// `map` must be a live handle; `len` and `lipschitz` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmt_sampled_map_info(
    map: *const GmtSampledMap,
    len: *mut usize,
    lipschitz: *mut f64,
) -> GmtStatus {
    guard(|| {
        let map = &*nonnull(map, "map")?;
        let len = nonnull(len, "len")? as *mut usize;
        let lipschitz = nonnull(lipschitz, "lipschitz")? as *mut f64;
        *len = map.inner.len();
        *lipschitz = map.inner.lipschitz();
        Ok(())
    })
}

/// Writes the resolved jet rank of every grid point to `ranks` (`-1` for
/// unresolved points), using relative singular value cutoff `tol`.
///
/// # Safety
/// `map` must be a live handle; `ranks` must hold as many entries as the
/// map has points.
#[no_mangle]
pub unsafe extern "C" fn gmt_stratify(map: *const GmtSampledMap, tol: f64, ranks: *mut i32) -> GmtStatus {
    guard(|| {
        let map = &*nonnull(map, "map")?;
        let ranks = nonnull(ranks, "ranks")? as *mut i32;
        let opts = JetOptions {
            tol,
            ..JetOptions::default()
        };
        let s = stratify_critical(&map.inner, &opts)?;
        let out = slice::from_raw_parts_mut(ranks, map.inner.len());
        for (i, r) in out.iter_mut().enumerate() {
            *r = s.rank_of(i).map_or(-1, |v| v as i32);
        }
        Ok(())
    })
}

/// Number of registered experiments.
#[no_mangle]
pub extern "C" fn gmt_experiment_count() -> usize {
    registry().len()
}

/// Id of experiment `i` as a static string, or null when out of range.
#[no_mangle]
pub extern "C" fn gmt_experiment_id(i: usize) -> *const c_char {
    static IDS: OnceLock<Vec<CString>> = OnceLock::new();
    let ids = IDS.get_or_init(|| {
        registry()
            .iter()
            .map(|e| CString::new(e.id).expect("ids have no NUL"))
            .collect()
    });
    ids.get(i).map_or(ptr::null(), |s| s.as_ptr())
}

/// Runs experiment `id`. `config_toml` may be null (shipped parameters);
/// `seed` overrides the configured seed when `use_seed` is true.
///
/// # Safety
/// `id` must be a NUL-terminated string, `config_toml` null or one; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmt_run_experiment(
    id: *const c_char,
    config_toml: *const c_char,
    use_seed: bool,
    seed: u64,
    out: *mut *mut GmtReport,
) -> GmtStatus {
    guard(|| {
        let out = nonnull(out, "out")? as *mut *mut GmtReport;
        let id = read_str(id, "id")?;
        let user = if config_toml.is_null() {
            None
        } else {
            Some(read_str(config_toml, "config_toml")?)
        };
        let cfg = ExperimentConfig::load(id, user, use_seed.then_some(seed))?;
        let inner = run_experiment(&cfg)?;
        *out = Box::into_raw(Box::new(GmtReport { inner }));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`gmt_run_experiment`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn gmt_report_free(report: *mut GmtReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Whether every verdict of the report passed.
///
/// # Safety
/// `report` must be a live handle; `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmt_report_passed(report: *const GmtReport, passed: *mut bool) -> GmtStatus {
    guard(|| {
        let report = &*nonnull(report, "report")?;
        let passed = nonnull(passed, "passed")? as *mut bool;
        *passed = report.inner.passed();
        Ok(())
    })
}

/// The report as JSON; release with [`gmt_string_free`].
///
/// # Safety
/// `report` must be a live handle; `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gmt_report_json(report: *const GmtReport, json: *mut *mut c_char) -> GmtStatus {
    guard(|| {
        let report = &*nonnull(report, "report")?;
        let json = nonnull(json, "json")? as *mut *mut c_char;
        let text = serde_json::to_string_pretty(&report.inner).map_err(Error::from)?;
        *json = CString::new(text)
            .map_err(|_| Failure::Invalid("report contains NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// Writes `report.json`, `metrics.csv`, the side tables and `manifest.json`
/// into `dir`.
///
/// # Safety
/// `report` must be a live handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn gmt_report_write(report: *const GmtReport, dir: *const c_char) -> GmtStatus {
    guard(|| {
        let report = &*nonnull(report, "report")?;
        let dir = read_str(dir, "dir")?;
        emit_report(
            &report.inner,
            &[Format::Json, Format::Csv, Format::Tables, Format::Manifest],
            Path::new(dir),
        )?;
        Ok(())
    })
}
