//! C ABI over `ia_feasibility`. Channels and beamformer sets are opaque
//! handles owned by the caller and released with the matching `_free`
//! function. Every fallible call returns an [`IafStatus`]; the message of
//! the last failure on the calling thread is available from
//! [`iaf_last_error_message`].
//!
//! Complex vectors cross the boundary as interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use ia_feasibility::bounds::bound_report;
use ia_feasibility::channel::{build_blocks, sample_instance, ChannelFamily, ChannelInstance};
use ia_feasibility::linalg::{CVec, C64};
use ia_feasibility::solver::{leakage, orthogonal_scheme, solve, verify, BeamformerSet, SolverConfig, Verdict};
use ia_feasibility::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IafStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Numerical = 4,
    Unsupported = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque channel instance.
pub struct IafChannel(ChannelInstance);

/// Opaque set of receive and transmit beamformers.
pub struct IafBeams(BeamformerSet);

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IafSolverConfig {
    pub max_iters: usize,
    pub restarts: usize,
    pub tol_leakage: f64,
    pub tol_margin: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IafReport {
    /// 1 when the solution is certified feasible, 0 otherwise.
    pub feasible: i32,
    pub best_leakage: f64,
    pub direct_margin: f64,
    pub iters_used: usize,
    pub restart_index: usize,
    pub wall_ms: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IafBounds {
    pub n: usize,
    pub l: usize,
    pub t: usize,
    pub upper_k: usize,
    pub achievable_k: usize,
    pub dof_upper: f64,
    pub dof_lower: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> IafStatus {
    match e {
        Error::InvalidFamilyParams(_) | Error::Config(_) | Error::DegenerateBlocks(_) => IafStatus::InvalidArgument,
        Error::DimensionMismatch(_) => IafStatus::DimensionMismatch,
        Error::EigenFailure { .. } | Error::SlotSolveFailed { .. } | Error::NotAZeroForcingSolution { .. } => {
            IafStatus::Numerical
        }
        Error::TooManyUsers { .. }
        | Error::UnsupportedFamily(_)
        | Error::TooLarge { .. }
        | Error::BudgetExceeded { .. } => IafStatus::Unsupported,
        Error::Io(_) | Error::Json(_) => IafStatus::Io,
    }
}

struct Failure(IafStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(IafStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(IafStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any failure or panic, and returns its status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IafStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IafStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            IafStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn family_arg(name: *const c_char, params: *const c_char) -> Result<ChannelFamily, Failure> {
    let name = str_arg(name, "family")?;
    let params = if params.is_null() { "" } else { str_arg(params, "params")? };
    Ok(ChannelFamily::parse(name, params)?)
}

fn config_of(cfg: &IafSolverConfig) -> SolverConfig {
    SolverConfig {
        max_iters: cfg.max_iters,
        restarts: cfg.restarts,
        tol_leakage: cfg.tol_leakage,
        tol_margin: cfg.tol_margin,
        seed: cfg.seed,
    }
}

unsafe fn read_vectors(data: *const f64, k: usize, dim: usize, what: &str) -> Result<Vec<CVec>, Failure> {
    if data.is_null() {
        return Err(null(what));
    }
    let flat = std::slice::from_raw_parts(data, 2 * k * dim);
    Ok((0..k)
        .map(|user| CVec::from_fn(dim, |i, _| C64::new(flat[2 * (user * dim + i)], flat[2 * (user * dim + i) + 1])))
        .collect())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iaf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn iaf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn iaf_solver_config_default() -> IafSolverConfig {
    let d = SolverConfig::default();
    IafSolverConfig {
        max_iters: d.max_iters,
        restarts: d.restarts,
        tol_leakage: d.tol_leakage,
        tol_margin: d.tol_margin,
        seed: d.seed,
    }
}

/// Samples a `k`-user channel of the named family. `params` may be null.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iaf_channel_sample(
    family: *const c_char,
    params: *const c_char,
    k: usize,
    seed: u64,
    out: *mut *mut IafChannel,
) -> IafStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let family = family_arg(family, params)?;
        let blocks = Arc::new(build_blocks(&family)?);
        let ch = sample_instance(&blocks, k, seed)?;
        *out = Box::into_raw(Box::new(IafChannel(ch)));
        Ok(())
    })
}

/// # Safety
/// `channel` must come from [`iaf_channel_sample`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn iaf_channel_free(channel: *mut IafChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Writes the user count and antenna dimensions of a channel.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn iaf_channel_dims(
    channel: *const IafChannel,
    k: *mut usize,
    nr: *mut usize,
    nt: *mut usize,
) -> IafStatus {
    guard(|| {
        let ch = &ref_arg(channel, "channel")?.0;
        *out_arg(k, "k")? = ch.k();
        *out_arg(nr, "nr")? = ch.nr();
        *out_arg(nt, "nt")? = ch.nt();
        Ok(())
    })
}

/// Builds a beamformer set from `k` receive vectors of length `nr` and `k`
/// transmit vectors of length `nt`, user-major and interleaved.
///
/// # Safety
/// `u` must hold `2 k nr` doubles and `v` `2 k nt` doubles.
#[no_mangle]
pub unsafe extern "C" fn iaf_beams_new(
    k: usize,
    nr: usize,
    nt: usize,
    u: *const f64,
    v: *const f64,
    out: *mut *mut IafBeams,
) -> IafStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let u = read_vectors(u, k, nr, "u")?;
        let v = read_vectors(v, k, nt, "v")?;
        *out = Box::into_raw(Box::new(IafBeams(BeamformerSet::new(u, v))));
        Ok(())
    })
}

/// # Safety
/// `beams` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn iaf_beams_free(beams: *mut IafBeams) {
    if !beams.is_null() {
        drop(Box::from_raw(beams));
    }
}

unsafe fn copy_vector(src: &CVec, out: *mut f64, out_len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    if out_len < 2 * src.len() {
        return Err(Failure(
            IafStatus::DimensionMismatch,
            format!("buffer holds {out_len} doubles, need {}", 2 * src.len()),
        ));
    }
    let dst = std::slice::from_raw_parts_mut(out, 2 * src.len());
    for (i, z) in src.iter().enumerate() {
        dst[2 * i] = z.re;
        dst[2 * i + 1] = z.im;
    }
    Ok(())
}

/// Copies the receive beamformer of `user` into `out` (`2 nr` doubles).
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn iaf_beams_receive(
    beams: *const IafBeams,
    user: usize,
    out: *mut f64,
    out_len: usize,
) -> IafStatus {
    guard(|| {
        let b = &ref_arg(beams, "beams")?.0;
        let u = b.u.get(user).ok_or_else(|| invalid(format!("user {user} out of range")))?;
        copy_vector(u, out, out_len)
    })
}

/// Copies the transmit beamformer of `user` into `out` (`2 nt` doubles).
///
/// # Safety
/// `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn iaf_beams_transmit(
    beams: *const IafBeams,
    user: usize,
    out: *mut f64,
    out_len: usize,
) -> IafStatus {
    guard(|| {
        let b = &ref_arg(beams, "beams")?.0;
        let v = b.v.get(user).ok_or_else(|| invalid(format!("user {user} out of range")))?;
        copy_vector(v, out, out_len)
    })
}

/// Runs the alternating leakage minimization. `config` may be null for the
/// defaults; `report` may be null.
///
/// # Safety
/// Pointers must be valid or null where allowed.
#[no_mangle]
pub unsafe extern "C" fn iaf_solve(
    channel: *const IafChannel,
    config: *const IafSolverConfig,
    out: *mut *mut IafBeams,
    report: *mut IafReport,
) -> IafStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let ch = &ref_arg(channel, "channel")?.0;
        let cfg = config.as_ref().map_or_else(SolverConfig::default, config_of);
        let sol = solve(ch, &cfg)?;
        if let Some(r) = report.as_mut() {
            *r = IafReport {
                feasible: (sol.report.verdict == Verdict::Feasible) as i32,
                best_leakage: sol.report.best_leakage,
                direct_margin: sol.report.direct_margin,
                iters_used: sol.report.iters_used,
                restart_index: sol.report.restart_index,
                wall_ms: sol.report.wall_ms,
            };
        }
        *out = Box::into_raw(Box::new(IafBeams(sol.beams)));
        Ok(())
    })
}

/// Builds the slot-orthogonal scheme. `config` may be null.
///
/// # Safety
/// Pointers must be valid or null where allowed.
#[no_mangle]
pub unsafe extern "C" fn iaf_orthogonal_scheme(
    channel: *const IafChannel,
    config: *const IafSolverConfig,
    out: *mut *mut IafBeams,
) -> IafStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let ch = &ref_arg(channel, "channel")?.0;
        let cfg = config.as_ref().map_or_else(SolverConfig::default, config_of);
        *out = Box::into_raw(Box::new(IafBeams(orthogonal_scheme(ch, &cfg)?)));
        Ok(())
    })
}

/// Normalized interference leakage of `beams` on `channel`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn iaf_leakage(channel: *const IafChannel, beams: *const IafBeams, out: *mut f64) -> IafStatus {
    guard(|| {
        let ch = &ref_arg(channel, "channel")?.0;
        let b = &ref_arg(beams, "beams")?.0;
        *out_arg(out, "out")? = leakage(ch, b)?;
        Ok(())
    })
}

/// Writes 1 to `out` when leakage is below `tol_leakage` and every direct
/// link exceeds `tol_margin`, 0 otherwise.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn iaf_verify(
    channel: *const IafChannel,
    beams: *const IafBeams,
    tol_leakage: f64,
    tol_margin: f64,
    out: *mut i32,
) -> IafStatus {
    guard(|| {
        let ch = &ref_arg(channel, "channel")?.0;
        let b = &ref_arg(beams, "beams")?.0;
        *out_arg(out, "out")? = verify(ch, b, tol_leakage, tol_margin)? as i32;
        Ok(())
    })
}

/// Closed-form bounds of the named family. `params` may be null.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iaf_bounds(family: *const c_char, params: *const c_char, out: *mut IafBounds) -> IafStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = bound_report(&family_arg(family, params)?, None)?;
        *out = IafBounds {
            n: r.n,
            l: r.l,
            t: r.t,
            upper_k: r.upper_k,
            achievable_k: r.achievable_k,
            dof_upper: r.dof_upper,
            dof_lower: r.dof_lower,
        };
        Ok(())
    })
}
