//! C interface to the simulator.
//!
//! Every fallible function returns a [`SacStatus`] code; on failure the
//! message is kept per thread and read with [`sac_last_error_message`].
//! Simulations live behind an opaque [`SacSimulation`] handle created from
//! TOML text and released with [`sac_simulation_free`]. Panics never cross
//! the boundary; they are reported as [`SacStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use sacbound::certify::error_bound;
use sacbound::simulation::{Row, Simulation};
use sacbound::spectral::{lp_norm, phi_int};
use sacbound::{Error, RunConfig, SpectralField};

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    InvalidArgument = 4,
    /// The simulation already reached its final index.
    Finished = 5,
    /// No index has completed yet.
    NotReady = 6,
    /// A numerical invariant failed (support, ordering, negative radicand).
    Numerical = 7,
    Io = 8,
    Panic = 9,
}

/// Bound quantities at one index, as in a CSV row.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SacRow {
    pub m: usize,
    pub t: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
    pub e5: f64,
    pub km: f64,
    pub im: f64,
    pub bound: f64,
    pub u_l2: f64,
}

impl From<&Row> for SacRow {
    fn from(r: &Row) -> Self {
        Self {
            m: r.m,
            t: r.t,
            e1: r.e1,
            e2: r.e2,
            e3: r.e3,
            e4: r.e4,
            e5: r.e5,
            km: r.km,
            im: r.im,
            bound: r.bound,
            u_l2: r.u_l2,
        }
    }
}

/// Opaque simulation handle.
pub struct SacSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> SacStatus {
    match err {
        Error::InvalidConfig(_) | Error::ConfigParse(_) => SacStatus::InvalidConfig,
        Error::InvalidArgument(_)
        | Error::UnsupportedExponent(_)
        | Error::ModeMismatch { .. }
        | Error::GridTooCoarse { .. } => SacStatus::InvalidArgument,
        Error::PastHorizon(_) => SacStatus::Finished,
        Error::OutOfOrder { .. } | Error::SupportViolation { .. } | Error::NegativeRadicand { .. } => {
            SacStatus::Numerical
        }
        Error::Read { .. } | Error::Io(_) | Error::Json(_) => SacStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SacStatus, String)>) -> SacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SacStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SacStatus::Panic
        }
    }
}

fn lib(err: Error) -> (SacStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (SacStatus, String) {
    (SacStatus::NullPointer, format!("{name} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (SacStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SacStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
/// Passing a null `buf` only queries the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sac_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a simulation from TOML config text. Relative table paths in the
/// config resolve against `base_dir`, or the working directory if it is
/// null. On success `*out` owns a handle to free with `sac_simulation_free`.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string, `base_dir` null or a
/// NUL-terminated string, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sac_simulation_new(
    config_toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut SacSimulation,
) -> SacStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = std::ptr::null_mut();
        let text = str_arg(config_toml, "config_toml")?;
        let base = if base_dir.is_null() {
            "."
        } else {
            str_arg(base_dir, "base_dir")?
        };
        let run = RunConfig::from_toml_str(text, Path::new(base)).map_err(lib)?;
        let inner = Simulation::new(&run).map_err(lib)?;
        *out = Box::into_raw(Box::new(SacSimulation { inner }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from `sac_simulation_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sac_simulation_free(sim: *mut SacSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Takes one step. When it completes an index `m ≥ 1`, writes its row to
/// `*row` and sets `*has_row`; the first step only completes index 0.
///
/// # Safety
/// `sim` must be a live handle; `row` and `has_row` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sac_simulation_advance(
    sim: *mut SacSimulation,
    row: *mut SacRow,
    has_row: *mut bool,
) -> SacStatus {
    guard(|| {
        if sim.is_null() || row.is_null() || has_row.is_null() {
            return Err(null("sim, row or has_row"));
        }
        *has_row = false;
        if let Some(r) = (*sim).inner.advance().map_err(lib)? {
            *row = SacRow::from(&r);
            *has_row = true;
        }
        Ok(())
    })
}

/// Advances to the final index and writes its row.
///
/// # Safety
/// `sim` must be a live handle; `row` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sac_simulation_run_to_end(sim: *mut SacSimulation, row: *mut SacRow) -> SacStatus {
    guard(|| {
        if sim.is_null() || row.is_null() {
            return Err(null("sim or row"));
        }
        let s = &mut (*sim).inner;
        s.run_to_end(|_| Ok(())).map_err(lib)?;
        let last = s.last_row().ok_or((SacStatus::NotReady, "no index completed".to_string()))?;
        *row = SacRow::from(last);
        Ok(())
    })
}

/// Row of the last completed index.
///
/// # Safety
/// `sim` must be a live handle; `row` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sac_simulation_breakdown(sim: *const SacSimulation, row: *mut SacRow) -> SacStatus {
    guard(|| {
        if sim.is_null() || row.is_null() {
            return Err(null("sim or row"));
        }
        let last = (*sim)
            .inner
            .last_row()
            .ok_or((SacStatus::NotReady, "no index completed".to_string()))?;
        *row = SacRow::from(last);
        Ok(())
    })
}

/// Index `M` of the final time.
///
/// # Safety
/// `sim` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sac_simulation_final_index(sim: *const SacSimulation, out: *mut usize) -> SacStatus {
    guard(|| {
        if sim.is_null() || out.is_null() {
            return Err(null("sim or out"));
        }
        *out = (*sim).inner.final_index();
        Ok(())
    })
}

/// `q0 + 2K⁴ + 6K²√I`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sac_error_bound(q0: f64, km: f64, im: f64, out: *mut f64) -> SacStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = error_bound(q0, km, im).map_err(lib)?;
        Ok(())
    })
}

/// `L^p` norm on `[0, π]` of the sine series with `n` coefficients,
/// `p ∈ {2, 4, 12}`.
///
/// # Safety
/// `coeffs` must point to `n` readable doubles (may be null when `n = 0`);
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sac_lp_norm(coeffs: *const f64, n: usize, p: u32, out: *mut f64) -> SacStatus {
    guard(|| {
        if out.is_null() || (coeffs.is_null() && n > 0) {
            return Err(null("coeffs or out"));
        }
        let c = if n == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(coeffs, n).to_vec()
        };
        let field = SpectralField::new(c).map_err(lib)?;
        *out = lp_norm(&field, p).map_err(lib)?;
        Ok(())
    })
}

/// `∫₀¹ e^{-λs} s^j ds` for `λ ≥ 0`, `j ≤ 3`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sac_phi_int(lambda: f64, j: u32, out: *mut f64) -> SacStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if j > 3 || !lambda.is_finite() || lambda < 0.0 {
            return Err((
                SacStatus::InvalidArgument,
                format!("phi_int needs finite lambda >= 0 and j <= 3, got lambda={lambda}, j={j}"),
            ));
        }
        *out = phi_int(lambda, j);
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
