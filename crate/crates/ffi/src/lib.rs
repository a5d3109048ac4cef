//! C interface to `gsqg-patch`.
//!
//! Every function returns a [`GsqgStatus`]; on failure the message is kept
//! per thread and read with [`gsqg_last_error`]. Kernels and solutions are
//! opaque handles released with their `_free` functions.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use gsqg_patch::functional::{FunctionalContext, QuadratureConfig};
use gsqg_patch::green::GreenKernel;
use gsqg_patch::kr::{find_critical_points, KrConvention, VortexConfiguration};
use gsqg_patch::solver::{continue_in_eps, ContinuationOptions, ContinuationState, StopCause};
use gsqg_patch::special::{sigma, SigmaSpectrum};
use gsqg_patch::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsqgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideDomain = 3,
    InfeasibleFlux = 4,
    Geometry = 5,
    SingularJacobian = 6,
    NonConvergence = 7,
    Constraint = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

impl From<&Error> for GsqgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain { .. } | Error::Pole(_) | Error::Config(_) | Error::NotInRange(_) => GsqgStatus::InvalidArgument,
            Error::OutsideDomain { .. } => GsqgStatus::OutsideDomain,
            Error::InfeasibleFlux(_) => GsqgStatus::InfeasibleFlux,
            Error::Singular(_) | Error::Geometry { .. } => GsqgStatus::Geometry,
            Error::SingularJacobian(_) => GsqgStatus::SingularJacobian,
            Error::NonConvergence(_) => GsqgStatus::NonConvergence,
            Error::Constraint(_) => GsqgStatus::Constraint,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: GsqgStatus, msg: impl Into<String>) -> GsqgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), GsqgStatus>) -> GsqgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GsqgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(GsqgStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> GsqgStatus {
    fail(GsqgStatus::from(&e), e.to_string())
}

fn null() -> GsqgStatus {
    fail(GsqgStatus::NullPointer, "null pointer argument")
}

unsafe fn input<'a, T>(p: *const T, len: usize) -> Result<&'a [T], GsqgStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize) -> Result<&'a mut [T], GsqgStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes. Returns the full message length without the NUL.
#[no_mangle]
pub unsafe extern "C" fn gsqg_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `σ_j` for `1 < γ < 2`.
#[no_mangle]
pub unsafe extern "C" fn gsqg_sigma(gamma: f64, j: u32, out: *mut f64) -> GsqgStatus {
    guard(|| {
        let out = output(out, 1)?;
        out[0] = sigma(j, gamma).map_err(lib)?;
        Ok(())
    })
}

/// `σ_1, …, σ_n` into `out[0..n]`.
#[no_mangle]
pub unsafe extern "C" fn gsqg_spectrum(gamma: f64, n: usize, out: *mut f64) -> GsqgStatus {
    guard(|| {
        let out = output(out, n)?;
        let spec = SigmaSpectrum::new(gamma, n).map_err(lib)?;
        for (j, v) in out.iter_mut().enumerate() {
            *v = spec.get(j + 1);
        }
        Ok(())
    })
}

/// Green function of a domain for one `γ`.
pub struct GsqgKernel(GreenKernel);

unsafe fn store<T>(out: *mut *mut T, v: T) -> Result<(), GsqgStatus> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

#[no_mangle]
pub unsafe extern "C" fn gsqg_kernel_disc(radius: f64, gamma: f64, out: *mut *mut GsqgKernel) -> GsqgStatus {
    guard(|| store(out, GsqgKernel(GreenKernel::disc(radius, gamma).map_err(lib)?)))
}

#[no_mangle]
pub unsafe extern "C" fn gsqg_kernel_free_space(gamma: f64, out: *mut *mut GsqgKernel) -> GsqgStatus {
    guard(|| store(out, GsqgKernel(GreenKernel::free_space(gamma).map_err(lib)?)))
}

#[no_mangle]
pub unsafe extern "C" fn gsqg_kernel_free(kernel: *mut GsqgKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

unsafe fn configuration(points: *const f64, strengths: *const f64, m: usize) -> Result<VortexConfiguration, GsqgStatus> {
    if m == 0 {
        return Err(fail(GsqgStatus::InvalidArgument, "at least one point vortex is required"));
    }
    let xy = input(points, 2 * m)?;
    let k = input(strengths, m)?;
    VortexConfiguration::new(xy.chunks(2).map(|c| [c[0], c[1]]).collect(), k.to_vec()).map_err(lib)
}

/// Critical point of the Kirchhoff-Routh function reached from the seed
/// `points` (`x0, y0, x1, y1, …`), written to `out` (`2m` values).
#[no_mangle]
pub unsafe extern "C" fn gsqg_kr_critical(
    kernel: *const GsqgKernel,
    points: *const f64,
    strengths: *const f64,
    m: usize,
    out: *mut f64,
) -> GsqgStatus {
    guard(|| {
        let kernel = kernel.as_ref().ok_or_else(null)?;
        let seed = configuration(points, strengths, m)?;
        let out = output(out, 2 * m)?;
        let search = find_critical_points(&kernel.0, &[seed], 1e-12, KrConvention::ContourConsistent);
        let cp = search.points.first().ok_or_else(|| {
            let why = search.failures.first().map_or("no critical point", |f| f.reason.as_str());
            fail(GsqgStatus::NonConvergence, why)
        })?;
        out.copy_from_slice(&cp.config.flat());
        Ok(())
    })
}

/// A continuation curve of patch equilibria.
pub struct GsqgSolution {
    gamma: f64,
    states: Vec<ContinuationState>,
    stopped: Option<String>,
}

/// Continues from the critical point reached from `points` through
/// `eps_targets` with truncation `n` and default settings. A curve that stops
/// early is still returned, with status `Constraint` if a state left the
/// admissible set and `NonConvergence` otherwise; the reason is in
/// [`gsqg_last_error`].
#[no_mangle]
pub unsafe extern "C" fn gsqg_solve(
    kernel: *const GsqgKernel,
    points: *const f64,
    strengths: *const f64,
    m: usize,
    n: usize,
    eps_targets: *const f64,
    n_targets: usize,
    out: *mut *mut GsqgSolution,
) -> GsqgStatus {
    guard(|| {
        let kernel = kernel.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let seed = configuration(points, strengths, m)?;
        let targets = input(eps_targets, n_targets)?;
        let gamma = kernel.0.gamma();
        let search = find_critical_points(&kernel.0, &[seed], 1e-12, KrConvention::ContourConsistent);
        let cp = search.points.first().ok_or_else(|| fail(GsqgStatus::NonConvergence, "no Kirchhoff-Routh critical point from the seed"))?;
        let ctx = FunctionalContext::new(kernel.0.clone(), n, QuadratureConfig::default()).map_err(lib)?;
        let s0 = ContinuationState::from_points(&cp.config, n, gamma).map_err(lib)?;
        let run = continue_in_eps(&ctx, &s0, targets, &ContinuationOptions::default()).map_err(lib)?;
        let stopped = run.stopped.clone();
        let status = match run.stop_cause {
            Some(StopCause::Admissibility) => GsqgStatus::Constraint,
            _ => GsqgStatus::NonConvergence,
        };
        let states = run.steps.into_iter().map(|s| s.state).collect();
        store(out, GsqgSolution { gamma, states, stopped: stopped.clone() })?;
        match stopped {
            Some(why) => Err(fail(status, why)),
            None => Ok(()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsqg_solution_free(sol: *mut GsqgSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Number of solved states on the curve; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn gsqg_solution_len(sol: *const GsqgSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.states.len())
}

unsafe fn state<'a>(sol: *const GsqgSolution, k: usize) -> Result<(&'a GsqgSolution, &'a ContinuationState), GsqgStatus> {
    let sol = sol.as_ref().ok_or_else(null)?;
    let st = sol
        .states
        .get(k)
        .ok_or_else(|| fail(GsqgStatus::InvalidArgument, format!("state {k} of {}", sol.states.len())))?;
    Ok((sol, st))
}

/// `ε` of state `k`, and its centers (`2m` values) if `centers` is not null.
#[no_mangle]
pub unsafe extern "C" fn gsqg_solution_state(
    sol: *const GsqgSolution,
    k: usize,
    eps: *mut f64,
    centers: *mut f64,
    len: usize,
) -> GsqgStatus {
    guard(|| {
        let (_, st) = state(sol, k)?;
        output(eps, 1)?[0] = st.eps;
        if !centers.is_null() {
            if len < 2 * st.m() {
                return Err(fail(GsqgStatus::BufferTooSmall, format!("need {} values", 2 * st.m())));
            }
            for (c, dst) in st.centers.iter().zip(output(centers, len)?.chunks_mut(2)) {
                dst.copy_from_slice(c);
            }
        }
        Ok(())
    })
}

/// Boundary of patch `patch` of state `k` at `count` equispaced angles, as
/// `x0, y0, x1, y1, …` (`2·count` values).
#[no_mangle]
pub unsafe extern "C" fn gsqg_solution_boundary(
    sol: *const GsqgSolution,
    k: usize,
    patch: usize,
    count: usize,
    out: *mut f64,
) -> GsqgStatus {
    guard(|| {
        let (sol, st) = state(sol, k)?;
        let patches = st.patches(sol.gamma);
        let p = patches
            .get(patch)
            .ok_or_else(|| fail(GsqgStatus::InvalidArgument, format!("patch {patch} of {}", patches.len())))?;
        let out = output(out, 2 * count)?;
        for (i, dst) in out.chunks_mut(2).enumerate() {
            let z = p.boundary_point(2.0 * std::f64::consts::PI * i as f64 / count as f64);
            dst.copy_from_slice(&z);
        }
        Ok(())
    })
}

/// Writes the curve as JSON into `buf` (NUL-terminated) and its length
/// without the NUL into `needed`. With a short or null buffer only
/// `needed` is set and the status is `BufferTooSmall`.
#[no_mangle]
pub unsafe extern "C" fn gsqg_solution_json(sol: *const GsqgSolution, buf: *mut c_char, len: usize, needed: *mut usize) -> GsqgStatus {
    guard(|| {
        let sol = sol.as_ref().ok_or_else(null)?;
        let json = serde_json::json!({ "gamma": sol.gamma, "states": sol.states, "stopped": sol.stopped }).to_string();
        output(needed, 1)?[0] = json.len();
        if buf.is_null() || len <= json.len() {
            return Err(fail(GsqgStatus::BufferTooSmall, format!("need {} bytes", json.len() + 1)));
        }
        ptr::copy_nonoverlapping(json.as_ptr().cast::<c_char>(), buf, json.len());
        *buf.add(json.len()) = 0;
        Ok(())
    })
}

/// Status name as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gsqg_status_name(status: GsqgStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        GsqgStatus::Ok => b"ok\0",
        GsqgStatus::NullPointer => b"null pointer\0",
        GsqgStatus::InvalidArgument => b"invalid argument\0",
        GsqgStatus::OutsideDomain => b"outside domain\0",
        GsqgStatus::InfeasibleFlux => b"infeasible flux\0",
        GsqgStatus::Geometry => b"degenerate geometry\0",
        GsqgStatus::SingularJacobian => b"singular Jacobian\0",
        GsqgStatus::NonConvergence => b"no convergence\0",
        GsqgStatus::Constraint => b"constraint violated\0",
        GsqgStatus::BufferTooSmall => b"buffer too small\0",
        GsqgStatus::Panic => b"internal panic\0",
    };
    CStr::from_bytes_with_nul(s).expect("NUL-terminated").as_ptr()
}
