//! C ABI over `qhess`.
//!
//! Every function returns a [`QhessStatus`]; results come back through out
//! pointers. Handles are opaque and owned by the caller once returned, to be
//! released with the matching `*_free`. After a non-`Ok` status,
//! [`qhess_last_error`] describes the failure on the calling thread.

use qhess::calculus::{GridField, GridSpec};
use qhess::energy::{variational_solve, SolverOptions};
use qhess::envelope::{radial_capacity, radial_envelope, AnnulusConfig, RadialObstacle, SweepOptions};
use qhess::hessian::{hessian_density, DensityField};
use qhess::quaternion::{hyperhermitian_eigenvalues, moore_det, HyperhermitianMatrix, Quaternion};
use qhess::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QhessStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Output buffer shorter than the result.
    BufferTooSmall = 3,
    NotConverged = 4,
    Failed = 5,
    Panic = 6,
}

/// Sampled grid function.
pub struct QhessGrid(GridField);

/// Hessian density on the interior points of a grid.
pub struct QhessDensity(DensityField);

/// Hyperhermitian quaternionic matrix.
pub struct QhessMatrix(HyperhermitianMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QhessStatus {
    match e {
        Error::NonConvergence { .. } | Error::Backtracking { .. } => QhessStatus::NotConverged,
        Error::Invalid(_) | Error::Mismatch(_) | Error::NotHyperhermitian { .. } | Error::Precondition(_) => {
            QhessStatus::InvalidArgument
        }
        _ => QhessStatus::Failed,
    }
}

enum Fail {
    Status(QhessStatus, String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn null() -> Fail {
    Fail::Status(QhessStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QhessStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QhessStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            QhessStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `out` must be null or valid for `cap` writes.
unsafe fn copy_out(values: &[f64], out: *mut f64, cap: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    if cap < values.len() {
        return Err(Fail::Status(QhessStatus::BufferTooSmall, format!("need {} values, buffer holds {cap}", values.len())));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

/// Message for the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn qhess_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qhess_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Grid of `points^(4n)` values on `[-half_width, half_width]^(4n)`, row-major
/// with axis 0 slowest.
///
/// # Safety
/// `values` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_grid_new(
    n: usize,
    half_width: f64,
    points: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut QhessGrid,
) -> QhessStatus {
    guard(|| {
        let v = slice(values, len)?.to_vec();
        let g = GridField::new(GridSpec::new(n, half_width, points)?, v)?;
        write(out, Box::into_raw(Box::new(QhessGrid(g))))
    })
}

/// # Safety
/// `grid` must come from [`qhess_grid_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qhess_grid_free(grid: *mut QhessGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Density `(Δu)^m ∧ β^{n−m}` of a grid function.
///
/// # Safety
/// `grid` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_hessian_density(grid: *const QhessGrid, m: usize, out: *mut *mut QhessDensity) -> QhessStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(null)?;
        let d = hessian_density(&g.0, m)?;
        write(out, Box::into_raw(Box::new(QhessDensity(d))))
    })
}

/// # Safety
/// `density` must be a live handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_density_len(density: *const QhessDensity, len: *mut usize) -> QhessStatus {
    guard(|| write(len, density.as_ref().ok_or_else(null)?.0.len()))
}

/// Copies the density values (interior points, row-major).
///
/// # Safety
/// `density` must be a live handle; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn qhess_density_values(density: *const QhessDensity, out: *mut f64, cap: usize) -> QhessStatus {
    guard(|| copy_out(density.as_ref().ok_or_else(null)?.0.values(), out, cap))
}

/// Sum of density times cell volume over the interior points.
///
/// # Safety
/// `density` must be a live handle; `mass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_density_total_mass(density: *const QhessDensity, mass: *mut f64) -> QhessStatus {
    guard(|| write(mass, density.as_ref().ok_or_else(null)?.0.total_mass(|_| true)))
}

/// # Safety
/// `density` must come from [`qhess_hessian_density`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qhess_density_free(density: *mut QhessDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Matrix from `n·n` quaternions stored as 4 doubles each, row-major.
///
/// # Safety
/// `entries` must hold `4·n·n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_matrix_new(n: usize, entries: *const f64, out: *mut *mut QhessMatrix) -> QhessStatus {
    guard(|| {
        let e = slice(entries, 4 * n * n)?;
        let q = e.chunks_exact(4).map(|c| Quaternion::new(c[0], c[1], c[2], c[3])).collect();
        let a = HyperhermitianMatrix::new(n, q)?;
        write(out, Box::into_raw(Box::new(QhessMatrix(a))))
    })
}

/// # Safety
/// `matrix` must be a live handle; `det` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_matrix_moore_det(matrix: *const QhessMatrix, det: *mut f64) -> QhessStatus {
    guard(|| write(det, moore_det(&matrix.as_ref().ok_or_else(null)?.0)?))
}

/// The `n` real eigenvalues in ascending order.
///
/// # Safety
/// `matrix` must be a live handle; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn qhess_matrix_eigenvalues(matrix: *const QhessMatrix, out: *mut f64, cap: usize) -> QhessStatus {
    guard(|| copy_out(&hyperhermitian_eigenvalues(&matrix.as_ref().ok_or_else(null)?.0)?, out, cap))
}

/// # Safety
/// `matrix` must come from [`qhess_matrix_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qhess_matrix_free(matrix: *mut QhessMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Radial relative extremal function of the ball of radius `inner` in the
/// ball of radius `outer`, sampled at `intervals + 1` radii. `sup_error`
/// receives the distance to the closed form.
///
/// # Safety
/// `out` must hold `cap` doubles; `sup_error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_radial_extremal(
    n: usize,
    m: usize,
    inner: f64,
    outer: f64,
    intervals: usize,
    tol: f64,
    out: *mut f64,
    cap: usize,
    sup_error: *mut f64,
) -> QhessStatus {
    guard(|| {
        let cfg = AnnulusConfig::new(n, m, inner, outer)?;
        let opts = SweepOptions { tol, ..SweepOptions::default() };
        let env = radial_envelope(&RadialObstacle::ball(n, m, inner, outer, intervals)?, &opts)?;
        let err = env
            .solution
            .radii()
            .iter()
            .zip(&env.solution.values)
            .fold(0.0f64, |a, (&s, &v)| a.max((v - cfg.extremal_value(s)).abs()));
        copy_out(&env.solution.values, out, cap)?;
        write(sup_error, err)
    })
}

/// Capacity of the ball of radius `inner` relative to the ball of radius
/// `outer`, with the closed-form value alongside.
///
/// # Safety
/// `capacity` and `closed_form` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_radial_capacity(
    n: usize,
    m: usize,
    inner: f64,
    outer: f64,
    intervals: usize,
    tol: f64,
    capacity: *mut f64,
    closed_form: *mut f64,
) -> QhessStatus {
    guard(|| {
        let cfg = AnnulusConfig::new(n, m, inner, outer)?;
        let opts = SweepOptions { tol, ..SweepOptions::default() };
        let rep = radial_capacity(&RadialObstacle::ball(n, m, inner, outer, intervals)?, &opts)?;
        write(capacity, rep.capacity)?;
        write(closed_form, cfg.capacity())
    })
}

/// Radial solution of `(Δφ)^m ∧ β^{n−m} = μ` in the ball of radius `outer`
/// with `φ = 0` on the sphere. `mu` holds one density value per shell
/// (`intervals` values); `out` receives `intervals + 1` values.
///
/// # Safety
/// `mu` must hold `intervals` doubles, `out` `cap` doubles; `iterations`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn qhess_radial_solve(
    n: usize,
    m: usize,
    outer: f64,
    intervals: usize,
    mu: *const f64,
    tol: f64,
    max_iter: usize,
    out: *mut f64,
    cap: usize,
    iterations: *mut usize,
) -> QhessStatus {
    guard(|| {
        let mu = slice(mu, intervals)?;
        let start = qhess::calculus::RadialProfile::zeros(n, outer, intervals)?;
        let opts = SolverOptions { tol, max_iter, ..SolverOptions::default() };
        let rep = variational_solve(&start, mu, m, &opts)?;
        copy_out(&rep.solution.values, out, cap)?;
        write(iterations, rep.iterations)
    })
}
