//! C interface to the routing engine.
//!
//! Objects are opaque handles created by `oa_*_load`/`oa_route` and released
//! with the matching `oa_*_free`. Every fallible call returns an
//! [`OaStatus`]; on failure [`oa_last_error_message`] describes the error
//! for the calling thread. Point arrays are interleaved `x, y` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use openarea::cost::CostModel;
use openarea::geometry::Point;
use openarea::route::{route, Algorithm, RouteRequest, RouteResult};
use openarea::scene::{export_route, load_scene, SceneModel};
use openarea::trajectory::{cpd, dhaus, lcss_distance};
use openarea::RouteError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidInput = 2,
    NoPath = 3,
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OaAlgorithm {
    Full = 0,
    Hierarchical = 1,
}

/// A loaded scene.
pub struct OaScene(SceneModel);

/// Link-cost model.
pub struct OaCostModel(CostModel);

/// A computed route.
pub struct OaRoute {
    result: RouteResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), (OaStatus, String)>) -> OaStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OaStatus::Internal
        }
    }
}

fn invalid(e: impl ToString) -> (OaStatus, String) {
    (OaStatus::InvalidInput, e.to_string())
}

fn null(name: &str) -> (OaStatus, String) {
    (OaStatus::NullArgument, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (OaStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{name} is not UTF-8")))
}

unsafe fn points_arg(xy: *const f64, n: usize, name: &str) -> Result<Vec<Point>, (OaStatus, String)> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if xy.is_null() {
        return Err(null(name));
    }
    let s = std::slice::from_raw_parts(xy, 2 * n);
    Ok(s.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next `oa_*` call on the same thread.
#[no_mangle]
pub extern "C" fn oa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn oa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a GeoJSON scene document.
///
/// # Safety
/// `geojson` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oa_scene_load_geojson(geojson: *const c_char, out: *mut *mut OaScene) -> OaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = str_arg(geojson, "geojson")?;
        let scene = load_scene(doc).map_err(invalid)?;
        *out = Box::into_raw(Box::new(OaScene(scene)));
        Ok(())
    })
}

/// # Safety
/// `scene` must come from [`oa_scene_load_geojson`] or be null.
#[no_mangle]
pub unsafe extern "C" fn oa_scene_free(scene: *mut OaScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Number of walkable areas in the scene, 0 for null.
///
/// # Safety
/// `scene` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn oa_scene_area_count(scene: *const OaScene) -> usize {
    scene.as_ref().map_or(0, |s| s.0.areas.len())
}

/// The default cost model.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oa_cost_model_default(out: *mut *mut OaCostModel) -> OaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(OaCostModel(CostModel::default())));
        Ok(())
    })
}

/// Parses a cost configuration; `is_toml` selects TOML over JSON.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oa_cost_model_parse(config: *const c_char, is_toml: bool, out: *mut *mut OaCostModel) -> OaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(config, "config")?;
        let model = CostModel::parse(text, is_toml).map_err(invalid)?;
        *out = Box::into_raw(Box::new(OaCostModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from an `oa_cost_model_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn oa_cost_model_free(model: *mut OaCostModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Routes from `(sx, sy)` to `(tx, ty)` in scene coordinates. A null
/// `model` uses the default cost model.
///
/// # Safety
/// `scene` must be a live handle, `model` live or null, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn oa_route(
    scene: *const OaScene,
    model: *const OaCostModel,
    sx: f64,
    sy: f64,
    tx: f64,
    ty: f64,
    algorithm: OaAlgorithm,
    out: *mut *mut OaRoute,
) -> OaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scene = scene.as_ref().ok_or_else(|| null("scene"))?;
        let default = CostModel::default();
        let cost = model.as_ref().map_or(&default, |m| &m.0);
        let req = RouteRequest {
            origin: Point::new(sx, sy),
            destination: Point::new(tx, ty),
            algorithm: match algorithm {
                OaAlgorithm::Full => Algorithm::Full,
                OaAlgorithm::Hierarchical => Algorithm::Hierarchical,
            },
        };
        let result = route(&scene.0, &req, None, cost).map_err(|e| match e {
            RouteError::NoPathExists(_) | RouteError::TerminalUnreachable { .. } => (OaStatus::NoPath, e.to_string()),
            _ => invalid(e),
        })?;
        *out = Box::into_raw(Box::new(OaRoute { result }));
        Ok(())
    })
}

/// # Safety
/// `route` must come from [`oa_route`] or be null.
#[no_mangle]
pub unsafe extern "C" fn oa_route_free(route: *mut OaRoute) {
    if !route.is_null() {
        drop(Box::from_raw(route));
    }
}

/// Total weighted cost, NaN for null.
///
/// # Safety
/// `route` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn oa_route_cost(route: *const OaRoute) -> f64 {
    route.as_ref().map_or(f64::NAN, |r| r.result.total_cost)
}

/// Total length in meters, NaN for null.
///
/// # Safety
/// `route` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn oa_route_length(route: *const OaRoute) -> f64 {
    route.as_ref().map_or(f64::NAN, |r| r.result.total_length)
}

/// Number of polyline vertices, 0 for null.
///
/// # Safety
/// `route` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn oa_route_point_count(route: *const OaRoute) -> usize {
    route.as_ref().map_or(0, |r| r.result.polyline.len())
}

/// Copies up to `capacity` vertices into `xy` (2 doubles each) and returns
/// how many were written.
///
/// # Safety
/// `xy` must have room for `2 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn oa_route_points(route: *const OaRoute, xy: *mut f64, capacity: usize) -> usize {
    let Some(r) = route.as_ref() else { return 0 };
    if xy.is_null() {
        return 0;
    }
    let n = r.result.polyline.len().min(capacity);
    let dst = std::slice::from_raw_parts_mut(xy, 2 * n);
    for (i, p) in r.result.polyline.iter().take(n).enumerate() {
        dst[2 * i] = p.x;
        dst[2 * i + 1] = p.y;
    }
    n
}

/// The route as a GeoJSON string; release with [`oa_string_free`]. Null on
/// failure.
///
/// # Safety
/// `route` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn oa_route_to_geojson(route: *const OaRoute) -> *mut c_char {
    let Some(r) = route.as_ref() else { return ptr::null_mut() };
    match CString::new(export_route(&r.result).to_string()) {
        Ok(c) => c.into_raw(),
        Err(_) => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn oa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Closest-pair distance between two point sequences.
///
/// # Safety
/// `a` and `b` must hold `2 * na` and `2 * nb` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn oa_cpd(a: *const f64, na: usize, b: *const f64, nb: usize, out: *mut f64) -> OaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (a, b) = (points_arg(a, na, "a")?, points_arg(b, nb, "b")?);
        if a.is_empty() || b.is_empty() {
            return Err(invalid("empty point sequence"));
        }
        *out = cpd(&a, &b);
        Ok(())
    })
}

/// LCSS distance with matching threshold `eps`.
///
/// # Safety
/// As for [`oa_cpd`].
#[no_mangle]
pub unsafe extern "C" fn oa_lcss_distance(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    eps: f64,
    out: *mut f64,
) -> OaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (a, b) = (points_arg(a, na, "a")?, points_arg(b, nb, "b")?);
        if a.is_empty() || b.is_empty() || !(eps >= 0.0) {
            return Err(invalid("empty point sequence or negative eps"));
        }
        *out = lcss_distance(&a, &b, eps);
        Ok(())
    })
}

/// Directed segment-wise Hausdorff distance of two polylines sharing
/// endpoints within `tol`.
///
/// # Safety
/// As for [`oa_cpd`].
#[no_mangle]
pub unsafe extern "C" fn oa_dhaus(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    w1: f64,
    w2: f64,
    tol: f64,
    out: *mut f64,
) -> OaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (a, b) = (points_arg(a, na, "a")?, points_arg(b, nb, "b")?);
        *out = dhaus(&a, &b, w1, w2, tol).map_err(invalid)?;
        Ok(())
    })
}
