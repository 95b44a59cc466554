//! C ABI for the raycut segmentation library.
//!
//! Grids and results are opaque handles owned by the caller and released with
//! the matching `*_free` function. Every fallible call returns a
//! [`RaycutStatus`]; on failure a message is available from
//! [`raycut_last_error`] on the same thread.
//!
//! Array outputs follow the usual two-call pattern: query the length, then
//! pass a buffer of at least that many elements.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use raycut::cutbuilder::{BuildConfig, RefinementSeed};
use raycut::evalbench::dice;
use raycut::imaging::{load_grid_auto, Mask, ScalarGrid};
use raycut::segmenter::{segment, Contour, SegmentationRequest, SegmentationResult};
use raycut::templates::Template;
use raycut::{Error, Point};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaycutStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    InfeasibleCut = 5,
    ConflictingRefinements = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque scalar image handle.
pub struct RaycutGrid(ScalarGrid);

/// Opaque segmentation result handle.
pub struct RaycutResult(SegmentationResult);

/// Lattice and cost-model parameters. `lat_rows == 0` picks the default
/// latitude row count for 3D templates.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RaycutConfig {
    pub delta: usize,
    pub rays: usize,
    pub nodes_per_ray: usize,
    pub lat_rows: usize,
    pub mean_radius_mm: f64,
    pub include_refinement_in_mean: bool,
}

/// Per-phase wall-clock time of one segmentation, milliseconds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RaycutTiming {
    pub ray_generation_ms: f64,
    pub sampling_ms: f64,
    pub assembly_ms: f64,
    pub solve_ms: f64,
    pub extraction_ms: f64,
    pub total_ms: f64,
}

impl From<&RaycutConfig> for BuildConfig {
    fn from(c: &RaycutConfig) -> Self {
        BuildConfig {
            delta: c.delta,
            rays: c.rays,
            nodes_per_ray: c.nodes_per_ray,
            lat_rows: (c.lat_rows > 0).then_some(c.lat_rows),
            mean_radius_mm: c.mean_radius_mm,
            include_refinement_in_mean: c.include_refinement_in_mean,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: RaycutStatus, msg: impl Into<String>) -> RaycutStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> RaycutStatus {
    let status = match &err {
        Error::Io { .. } => RaycutStatus::Io,
        Error::Format { .. } => RaycutStatus::Format,
        Error::Validation(_) => RaycutStatus::InvalidArgument,
        Error::InfeasibleCut => RaycutStatus::InfeasibleCut,
        Error::ConflictingRefinements { .. } => RaycutStatus::ConflictingRefinements,
    };
    fail(status, err.to_string())
}

/// Runs `f`, converting panics into `RaycutStatus::Panic`.
fn guard(f: impl FnOnce() -> Result<(), RaycutStatus>) -> RaycutStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RaycutStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(RaycutStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn check<T>(p: *const T, name: &str) -> Result<(), RaycutStatus> {
    if p.is_null() {
        Err(fail(RaycutStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], RaycutStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    check(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, RaycutStatus> {
    check(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RaycutStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, capacity: usize) -> Result<(), RaycutStatus> {
    if capacity < src.len() {
        return Err(fail(
            RaycutStatus::BufferTooSmall,
            format!("buffer holds {capacity} elements, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        check(out, "out")?;
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn raycut_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn raycut_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default parameters: 30 rays, 30 nodes per ray, delta 2, 5 mm mean radius.
#[no_mangle]
pub extern "C" fn raycut_config_default() -> RaycutConfig {
    let d = BuildConfig::default();
    RaycutConfig {
        delta: d.delta,
        rays: d.rays,
        nodes_per_ray: d.nodes_per_ray,
        lat_rows: d.lat_rows.unwrap_or(0),
        mean_radius_mm: d.mean_radius_mm,
        include_refinement_in_mean: d.include_refinement_in_mean,
    }
}

/// Creates a grid from `ndim` (2 or 3) dimensions and x-fastest voxel values.
/// `spacing` and `origin` may be NULL for unit spacing and zero origin.
///
/// # Safety
/// `dims` must hold `ndim` elements, `spacing`/`origin` `ndim` elements when
/// non-NULL, and `values` the product of `dims`.
#[no_mangle]
pub unsafe extern "C" fn raycut_grid_new(
    ndim: usize,
    dims: *const usize,
    spacing: *const f64,
    origin: *const f64,
    values: *const f64,
    out: *mut *mut RaycutGrid,
) -> RaycutStatus {
    guard(|| {
        check(out, "out")?;
        if !(2..=3).contains(&ndim) {
            return Err(fail(
                RaycutStatus::InvalidArgument,
                format!("ndim must be 2 or 3, got {ndim}"),
            ));
        }
        let dims = slice(dims, ndim, "dims")?.to_vec();
        let spacing = if spacing.is_null() {
            vec![1.0; ndim]
        } else {
            slice(spacing, ndim, "spacing")?.to_vec()
        };
        let origin = if origin.is_null() {
            vec![0.0; ndim]
        } else {
            slice(origin, ndim, "origin")?.to_vec()
        };
        let count = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        let count = count.ok_or_else(|| fail(RaycutStatus::InvalidArgument, "grid size overflows"))?;
        let values = slice(values, count, "values")?.to_vec();
        let grid = ScalarGrid::new(dims, spacing, origin, values).map_err(from_error)?;
        *out = Box::into_raw(Box::new(RaycutGrid(grid)));
        Ok(())
    })
}

/// Loads a grid from a file; the format is chosen by extension.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn raycut_grid_load(path: *const c_char, out: *mut *mut RaycutGrid) -> RaycutStatus {
    guard(|| {
        check(out, "out")?;
        let path = c_str(path, "path")?;
        let grid = load_grid_auto(path).map_err(from_error)?;
        *out = Box::into_raw(Box::new(RaycutGrid(grid)));
        Ok(())
    })
}

/// # Safety
/// `grid` must come from `raycut_grid_new`/`raycut_grid_load` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn raycut_grid_free(grid: *mut RaycutGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of dimensions of the grid, 0 for NULL.
///
/// # Safety
/// `grid` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn raycut_grid_ndim(grid: *const RaycutGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.ndim())
}

/// Writes the grid dimensions into `dims` (capacity `len`).
///
/// # Safety
/// `grid` must be a live handle and `dims` hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn raycut_grid_dims(grid: *const RaycutGrid, dims: *mut usize, len: usize) -> RaycutStatus {
    guard(|| {
        check(grid, "grid")?;
        copy_out((*grid).0.dims(), dims, len)
    })
}

/// Segments `grid` from a primary seed (world coordinates, mm) and
/// `refinement_count` refinement seeds stored back to back in `refinements`.
/// Each point has as many coordinates as the grid has dimensions.
/// `template_spec` uses the command-line syntax, e.g. `circle:60`,
/// `rectangle:40x30`, `sphere:50`. `config` may be NULL for the defaults.
///
/// # Safety
/// Pointers must be valid for the sizes described above.
#[no_mangle]
pub unsafe extern "C" fn raycut_segment(
    grid: *const RaycutGrid,
    template_spec: *const c_char,
    seed: *const f64,
    refinements: *const f64,
    refinement_count: usize,
    config: *const RaycutConfig,
    out: *mut *mut RaycutResult,
) -> RaycutStatus {
    guard(|| {
        check(grid, "grid")?;
        check(out, "out")?;
        let grid = &(*grid).0;
        let ndim = grid.ndim();
        let template = Template::parse(c_str(template_spec, "template_spec")?).map_err(from_error)?;
        let seed = Point::from_slice(slice(seed, ndim, "seed")?).expect("ndim is 2 or 3");
        let config = config.as_ref().map_or_else(BuildConfig::default, BuildConfig::from);
        let coords = slice(refinements, refinement_count * ndim, "refinements")?;
        let mut req = SegmentationRequest::new(template, seed, config);
        for (i, p) in coords.chunks_exact(ndim).enumerate() {
            let p = Point::from_slice(p).expect("ndim is 2 or 3");
            req.refinement_seeds
                .push(RefinementSeed::new(format!("refine{}", i + 1), p));
        }
        let result = segment(grid, &req).map_err(from_error)?;
        *out = Box::into_raw(Box::new(RaycutResult(result)));
        Ok(())
    })
}

/// # Safety
/// `result` must come from `raycut_segment` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_free(result: *mut RaycutResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of rays, which is also the length of the boundary vector.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_ray_count(result: *const RaycutResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.boundary.len())
}

/// Copies the boundary depth of every ray into `out`.
///
/// # Safety
/// `result` must be a live handle and `out` hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_boundary(
    result: *const RaycutResult,
    out: *mut usize,
    len: usize,
) -> RaycutStatus {
    guard(|| {
        check(result, "result")?;
        copy_out(&(*result).0.boundary, out, len)
    })
}

/// Value of the maximum flow (equal to the minimum cut capacity).
///
/// # Safety
/// `result` must be a live handle or NULL (NaN is returned for NULL).
#[no_mangle]
pub unsafe extern "C" fn raycut_result_flow_value(result: *const RaycutResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.flow_value)
}

/// Seed-region mean intensity used by the cost model.
///
/// # Safety
/// `result` must be a live handle or NULL (NaN is returned for NULL).
#[no_mangle]
pub unsafe extern "C" fn raycut_result_mean(result: *const RaycutResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.mean)
}

/// # Safety
/// `result` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_timing(result: *const RaycutResult, out: *mut RaycutTiming) -> RaycutStatus {
    guard(|| {
        check(result, "result")?;
        check(out, "out")?;
        let t = (*result).0.timing;
        *out = RaycutTiming {
            ray_generation_ms: t.ray_generation_ms,
            sampling_ms: t.sampling_ms,
            assembly_ms: t.assembly_ms,
            solve_ms: t.solve_ms,
            extraction_ms: t.extraction_ms,
            total_ms: t.total_ms,
        };
        Ok(())
    })
}

/// Number of voxels in the result mask (same as the input grid).
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_mask_len(result: *const RaycutResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.mask.labels().len())
}

/// Copies the mask as 0/1 bytes in x-fastest order.
///
/// # Safety
/// `result` must be a live handle and `out` hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_mask(result: *const RaycutResult, out: *mut u8, len: usize) -> RaycutStatus {
    guard(|| {
        check(result, "result")?;
        let bytes: Vec<u8> = (*result).0.mask.labels().iter().map(|&b| u8::from(b)).collect();
        copy_out(&bytes, out, len)
    })
}

/// Number of contour vertices. In 3D this includes the two pole points.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_vertex_count(result: *const RaycutResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.contour.vertices().len())
}

/// Copies contour vertices as x,y,z triples (mm); `len` counts doubles.
///
/// # Safety
/// `result` must be a live handle and `out` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_vertices(
    result: *const RaycutResult,
    out: *mut f64,
    len: usize,
) -> RaycutStatus {
    guard(|| {
        check(result, "result")?;
        let flat: Vec<f64> = (*result)
            .0
            .contour
            .vertices()
            .iter()
            .flat_map(|p| [p.x, p.y, p.z])
            .collect();
        copy_out(&flat, out, len)
    })
}

/// Number of surface triangles, 0 for 2D results.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_triangle_count(result: *const RaycutResult) -> usize {
    match result.as_ref().map(|r| &r.0.contour) {
        Some(Contour::Surface { triangles, .. }) => triangles.len(),
        _ => 0,
    }
}

/// Copies triangle vertex indices as triples; `len` counts indices.
///
/// # Safety
/// `result` must be a live handle and `out` hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_triangles(
    result: *const RaycutResult,
    out: *mut usize,
    len: usize,
) -> RaycutStatus {
    guard(|| {
        check(result, "result")?;
        let flat: Vec<usize> = match &(*result).0.contour {
            Contour::Surface { triangles, .. } => triangles.iter().flatten().copied().collect(),
            Contour::Polygon { .. } => Vec::new(),
        };
        copy_out(&flat, out, len)
    })
}

/// JSON rendering of the result. Release with `raycut_string_free`.
///
/// # Safety
/// `result` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn raycut_result_to_json(result: *const RaycutResult, out: *mut *mut c_char) -> RaycutStatus {
    guard(|| {
        check(result, "result")?;
        check(out, "out")?;
        let json = CString::new((*result).0.to_json()).expect("json has no NUL");
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn raycut_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Dice overlap of two label arrays of `len` bytes (nonzero = foreground).
/// Two all-background masks score 1; `len` must be positive.
///
/// # Safety
/// `a` and `b` must hold `len` bytes and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn raycut_dice(a: *const u8, b: *const u8, len: usize, out: *mut f64) -> RaycutStatus {
    guard(|| {
        check(out, "out")?;
        let to_mask = |s: &[u8]| Mask::new(vec![len, 1], s.iter().map(|&v| v != 0).collect()).map_err(from_error);
        let a = to_mask(slice(a, len, "a")?)?;
        let b = to_mask(slice(b, len, "b")?)?;
        *out = dice(&a, &b).map_err(from_error)?;
        Ok(())
    })
}
