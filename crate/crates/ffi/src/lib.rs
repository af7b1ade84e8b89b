//! C ABI over `hsym-core`.
//!
//! Every fallible function returns an [`HsymStatus`]. On failure a message describing
//! the error is available from [`hsym_last_error_message`] on the calling thread until
//! the next call into the library. Points of the Heisenberg group `H^n` are passed as
//! `2n + 1` doubles `(x_1, …, x_2n, x̄)`. Panics never cross the boundary; they are
//! reported as [`HsymStatus::Panic`].
//!
//! Handles returned through out-pointers are owned by the caller and released with the
//! matching `*_free` function. Strings returned through out-pointers are released with
//! [`hsym_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hsym_core::cc::{cc_distance, SolverOptions};
use hsym_core::cli::{execute, parse_config, render_report};
use hsym_core::error::Error;
use hsym_core::flows::{flow_point, hofer_length, support_grid, time_grid, Builtin, HamiltonianField, TimeProfile};
use hsym_core::heis::{dilate, group_inv, group_mul, hnorm, HPoint, NormKind};
use hsym_core::lifting::{catalog, lift_symplectomorphism, LiftOptions, LiftedMap};

/// Result of a library call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsymStatus {
    Ok = 0,
    Io = 1,
    /// Invalid arguments or configuration.
    Validation = 2,
    /// A numerical procedure failed (no convergence, escape, infeasible search, failed selftest).
    Numerical = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Homogeneous norm selector for [`hsym_norm`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsymNorm {
    /// `|x| + |x̄|^{1/2}`.
    Sum = 0,
    /// Carnot–Carathéodory distance to the identity.
    Cc = 1,
}

/// Time profile for [`hsym_field_from_json`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsymProfile {
    Constant = 0,
    /// `4·min(t, 1 − t)` on `[0, 1]`, zero elsewhere.
    Triangular = 1,
}

/// Lift of a symplectomorphism of `R^{2n}` to a contactomorphism of `H^n`.
pub struct HsymLiftedMap(LiftedMap);

/// Compactly supported Hamiltonian on `R^{2n}`.
pub struct HsymField(HamiltonianField);

struct Failure {
    status: HsymStatus,
    message: String,
}

impl Failure {
    fn null(what: &str) -> Self {
        Failure { status: HsymStatus::NullPointer, message: format!("{what} is null") }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure { status: HsymStatus::Validation, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => HsymStatus::Io,
            e if e.is_numerical() => HsymStatus::Numerical,
            _ => HsymStatus::Validation,
        };
        Failure { status, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn guard(f: impl FnOnce() -> Outcome) -> HsymStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsymStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            HsymStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write(out: *mut f64, values: &[f64], what: &str) -> Outcome {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn write_one(out: *mut f64, v: f64, what: &str) -> Outcome {
    write(out, &[v], what)
}

unsafe fn point(n: usize, p: *const f64, what: &str) -> Result<HPoint, Failure> {
    if n == 0 {
        return Err(Failure::invalid("n must be positive"));
    }
    Ok(HPoint::from_coords(slice(p, 2 * n + 1, what)?)?)
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure::invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(h: *const T, what: &str) -> Result<&'a T, Failure> {
    h.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn give<T>(out: *mut *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hsym_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failed call on this thread, or null. The pointer stays
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn hsym_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hsym_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `out = p · q` in `H^n`.
///
/// # Safety
/// `p`, `q` and `out` must each hold `2n + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsym_group_mul(n: usize, p: *const f64, q: *const f64, out: *mut f64) -> HsymStatus {
    guard(|| {
        let r = group_mul(&point(n, p, "p")?, &point(n, q, "q")?)?;
        write(out, &r.coords(), "out")
    })
}

/// `out = p⁻¹`.
///
/// # Safety
/// `p` and `out` must each hold `2n + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsym_group_inv(n: usize, p: *const f64, out: *mut f64) -> HsymStatus {
    guard(|| write(out, &group_inv(&point(n, p, "p")?).coords(), "out"))
}

/// `out = δ_eps(p) = (eps·x, eps²·x̄)`.
///
/// # Safety
/// `p` and `out` must each hold `2n + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsym_dilate(n: usize, eps: f64, p: *const f64, out: *mut f64) -> HsymStatus {
    guard(|| write(out, &dilate(eps, &point(n, p, "p")?)?.coords(), "out"))
}

/// Homogeneous norm of `p`.
///
/// # Safety
/// `p` must hold `2n + 1` doubles; `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn hsym_norm(n: usize, p: *const f64, kind: HsymNorm, out: *mut f64) -> HsymStatus {
    guard(|| {
        let kind = match kind {
            HsymNorm::Sum => NormKind::Sum,
            HsymNorm::Cc => NormKind::CC,
        };
        write_one(out, hnorm(&point(n, p, "p")?, kind)?, "out")
    })
}

/// Carnot–Carathéodory distance between `p` and `q`, computed in closed form.
///
/// # Safety
/// `p` and `q` must each hold `2n + 1` doubles; `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn hsym_cc_distance(n: usize, p: *const f64, q: *const f64, out: *mut f64) -> HsymStatus {
    guard(|| {
        let g = cc_distance(&point(n, p, "p")?, &point(n, q, "q")?, SolverOptions::closed_form())?;
        write_one(out, g.length, "out")
    })
}

/// Lifts a catalog map (`shear`, `sine-shear`, `kick`, `rotation`, ...) with the given
/// strength. The vertical part equals `a` at `anchor`; a null anchor means the origin
/// or the lower corner of the map's support.
///
/// # Safety
/// `name` must be a NUL-terminated string; `anchor` is null or holds as many doubles as
/// the map's dimension; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hsym_lift_new(
    name: *const c_char,
    strength: f64,
    a: f64,
    anchor: *const f64,
    out: *mut *mut HsymLiftedMap,
) -> HsymStatus {
    guard(|| {
        let f = catalog::by_name(text(name, "name")?, strength)?;
        let anchor = if anchor.is_null() { None } else { Some(slice(anchor, f.dim(), "anchor")?) };
        let g = lift_symplectomorphism(&f, a, anchor, &LiftOptions::default())?;
        give(out, HsymLiftedMap(g), "out")
    })
}

/// Dimension `2n` of the base space of a lifted map, or 0 for null.
///
/// # Safety
/// `map` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hsym_lift_dim(map: *const HsymLiftedMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.base().dim())
}

/// `out = G(p)`.
///
/// # Safety
/// `map` is a live handle; `p` and `out` hold `dim + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsym_lift_apply(map: *const HsymLiftedMap, p: *const f64, out: *mut f64) -> HsymStatus {
    guard(|| {
        let g = &handle(map, "map")?.0;
        let p = point(g.base().dim() / 2, p, "p")?;
        write(out, &g.apply(&p).coords(), "out")
    })
}

/// `out = G⁻¹(p)`.
///
/// # Safety
/// `map` is a live handle; `p` and `out` hold `dim + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsym_lift_apply_inverse(map: *const HsymLiftedMap, p: *const f64, out: *mut f64) -> HsymStatus {
    guard(|| {
        let g = &handle(map, "map")?.0;
        let p = point(g.base().dim() / 2, p, "p")?;
        write(out, &g.apply_inverse(&p)?.coords(), "out")
    })
}

/// Vertical part `F(x)` of the lift, so that `G(x, x̄) = (f(x), x̄ + F(x))`.
///
/// # Safety
/// `map` is a live handle; `x` holds `dim` doubles; `out` points to one double.
#[no_mangle]
pub unsafe extern "C" fn hsym_lift_vertical(map: *const HsymLiftedMap, x: *const f64, out: *mut f64) -> HsymStatus {
    guard(|| {
        let g = &handle(map, "map")?.0;
        write_one(out, g.vertical(slice(x, g.base().dim(), "x")?), "out")
    })
}

/// Releases a lifted map. Null is ignored.
///
/// # Safety
/// `map` must come from [`hsym_lift_new`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hsym_lift_free(map: *mut HsymLiftedMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Builds a Hamiltonian from a JSON description such as
/// `{"kind": "harmonic", "n": 1, "scale": 1, "inner": 1, "outer": 3}` or
/// `{"kind": "bump", "center": [0, 0], "radius": 1, "amplitude": 1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hsym_field_from_json(
    json: *const c_char,
    profile: HsymProfile,
    out: *mut *mut HsymField,
) -> HsymStatus {
    guard(|| {
        let spec: Builtin = serde_json::from_str(text(json, "json")?)
            .map_err(|e| Failure::invalid(format!("hamiltonian description: {e}")))?;
        let profile = match profile {
            HsymProfile::Constant => TimeProfile::Constant,
            HsymProfile::Triangular => TimeProfile::Triangular,
        };
        give(out, HsymField(HamiltonianField::from_builtin(&spec, profile)?), "out")
    })
}

/// Dimension `2n` of the phase space of a field, or 0 for null.
///
/// # Safety
/// `field` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hsym_field_dim(field: *const HsymField) -> usize {
    field.as_ref().map_or(0, |f| f.0.dim())
}

/// `out = H_t(x)`.
///
/// # Safety
/// `field` is a live handle; `x` holds `dim` doubles; `out` points to one double.
#[no_mangle]
pub unsafe extern "C" fn hsym_field_value(field: *const HsymField, t: f64, x: *const f64, out: *mut f64) -> HsymStatus {
    guard(|| {
        let h = &handle(field, "field")?.0;
        write_one(out, h.value(t, slice(x, h.dim(), "x")?), "out")
    })
}

/// Image of `x0` under the time-`t0` to time-`t1` flow, with `steps` RK4 steps.
///
/// # Safety
/// `field` is a live handle; `x0` and `out` hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsym_field_flow_point(
    field: *const HsymField,
    x0: *const f64,
    t0: f64,
    t1: f64,
    steps: usize,
    out: *mut f64,
) -> HsymStatus {
    guard(|| {
        let h = &handle(field, "field")?.0;
        let y = flow_point(h, slice(x0, h.dim(), "x0")?, t0, t1, steps)?;
        write(out, &y, "out")
    })
}

/// Hofer length `∫₀^T sup|H_t| dt` on a regular grid over the support with
/// `grid_per_axis` nodes per axis and `time_samples` times.
///
/// # Safety
/// `field` is a live handle; `out` points to one double.
#[no_mangle]
pub unsafe extern "C" fn hsym_field_hofer_length(
    field: *const HsymField,
    t_end: f64,
    grid_per_axis: usize,
    time_samples: usize,
    out: *mut f64,
) -> HsymStatus {
    guard(|| {
        let h = &handle(field, "field")?.0;
        let len = hofer_length(h, &support_grid(h, grid_per_axis), &time_grid(t_end, time_samples))?;
        write_one(out, len, "out")
    })
}

/// Releases a field. Null is ignored.
///
/// # Safety
/// `field` must come from [`hsym_field_from_json`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hsym_field_free(field: *mut HsymField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Runs a scenario given as config text (the `hsym run` format) and returns its JSON
/// report in `*out_json` without writing any files. A selftest with a failing
/// criterion still produces a report and returns [`HsymStatus::Numerical`].
///
/// # Safety
/// `config` must be a NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hsym_run_config(config: *const c_char, out_json: *mut *mut c_char) -> HsymStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(Failure::null("out_json"));
        }
        let s = parse_config(text(config, "config")?)?;
        let a = execute(&s)?;
        let report = render_report(&s, &a)?;
        *out_json = CString::new(report).map_err(|_| Failure::invalid("report contains NUL"))?.into_raw();
        if a.status != 0 {
            return Err(Failure { status: HsymStatus::Numerical, message: "selftest criteria failed".into() });
        }
        Ok(())
    })
}
