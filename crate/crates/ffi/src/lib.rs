//! C ABI for the qcurv library.
//!
//! Handles are opaque; every call reports a [`QcurvStatus`]. Scenario runs
//! speak the same JSON wire format as the `qcurv` CLI, so bindings in other
//! languages get the full pipeline behind one call.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qcurv::bubble::{bubble_field, BubbleParams, Pole};
use qcurv::gjms::{apply_p, build_spectrum, GjmsSpectrum};
use qcurv::report::report_json;
use qcurv::scenario::run_scenario;
use qcurv::sphere::SphereContext;
use qcurv::zonal::{build_grid, ZonalGrid};
use qcurv::QcurvError;

/// Status codes; nonzero means the output arguments are untouched.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcurvStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidConfig = 2,
    SolverFailure = 3,
    Internal = 4,
}

fn status_of(err: &QcurvError) -> QcurvStatus {
    match err {
        QcurvError::Config(_)
        | QcurvError::Expr(_)
        | QcurvError::InvalidDimensions { .. }
        | QcurvError::BandLimitTooSmall { .. }
        | QcurvError::InvalidBeta { .. }
        | QcurvError::InvalidExponent { .. }
        | QcurvError::AsymmetricWeight { .. } => QcurvStatus::InvalidConfig,
        QcurvError::PositivityLost { .. }
        | QcurvError::MaxIterations { .. }
        | QcurvError::PositivityViolation { .. }
        | QcurvError::NodeNonConvergence { .. }
        | QcurvError::NodesOutOfOrder { .. }
        | QcurvError::NonPositiveWeight { .. }
        | QcurvError::RadialNonConvergence { .. }
        | QcurvError::ZeroField => QcurvStatus::SolverFailure,
        QcurvError::Io { .. } | QcurvError::Json(_) => QcurvStatus::Internal,
    }
}

/// Opaque handle: sphere constants, operator spectrum and the zonal grid for
/// one (n, k, band limit) triple.
pub struct QcurvContext {
    ctx: SphereContext,
    grid: ZonalGrid,
    spec: GjmsSpectrum,
}

/// Scalar constants exposed through [`qcurv_constant`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcurvConstant {
    TwoStar = 0,
    CNk = 1,
    OmegaN = 2,
    QH = 3,
    KNk = 4,
}

/// Create a context for S^n with a 2k-th order operator at band limit
/// `l_max`. On success writes an owned pointer to `out`; release it with
/// [`qcurv_context_free`].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qcurv_context_new(
    n: u32,
    k: u32,
    l_max: usize,
    out: *mut *mut QcurvContext,
) -> QcurvStatus {
    if out.is_null() {
        return QcurvStatus::InvalidArgument;
    }
    let built = catch_unwind(|| -> Result<QcurvContext, QcurvError> {
        let ctx = SphereContext::new(n, k)?;
        let grid = build_grid(&ctx, l_max)?;
        let spec = build_spectrum(&ctx, l_max)?;
        Ok(QcurvContext { ctx, grid, spec })
    });
    match built {
        Ok(Ok(handle)) => {
            unsafe { *out = Box::into_raw(Box::new(handle)) };
            QcurvStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => QcurvStatus::Internal,
    }
}

/// Release a context created by [`qcurv_context_new`]. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by
/// [`qcurv_context_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qcurv_context_free(handle: *mut QcurvContext) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Read one scalar constant of the context.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qcurv_constant(
    handle: *const QcurvContext,
    which: QcurvConstant,
    out: *mut f64,
) -> QcurvStatus {
    if handle.is_null() || out.is_null() {
        return QcurvStatus::InvalidArgument;
    }
    let ctx = &unsafe { &*handle }.ctx;
    let v = match which {
        QcurvConstant::TwoStar => ctx.two_star,
        QcurvConstant::CNk => ctx.c_nk,
        QcurvConstant::OmegaN => ctx.omega_n,
        QcurvConstant::QH => ctx.q_h,
        QcurvConstant::KNk => ctx.k_nk,
    };
    unsafe { *out = v };
    QcurvStatus::Ok
}

/// Operator eigenvalue on degree-`l` zonal harmonics.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qcurv_eigenvalue(
    handle: *const QcurvContext,
    l: usize,
    out: *mut f64,
) -> QcurvStatus {
    if handle.is_null() || out.is_null() {
        return QcurvStatus::InvalidArgument;
    }
    let h = unsafe { &*handle };
    if l >= h.spec.eigenvalues.len() {
        return QcurvStatus::InvalidArgument;
    }
    unsafe { *out = h.spec.eigenvalues[l] };
    QcurvStatus::Ok
}

/// Relative sup-norm residual of the concentration-profile equation at the
/// given `beta`, certifying the operator constants through the handle's grid.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qcurv_bubble_residual(
    handle: *const QcurvContext,
    beta: f64,
    out: *mut f64,
) -> QcurvStatus {
    if handle.is_null() || out.is_null() {
        return QcurvStatus::InvalidArgument;
    }
    let h = unsafe { &*handle };
    let computed = catch_unwind(AssertUnwindSafe(|| -> Result<f64, QcurvError> {
        let u = bubble_field(
            &h.grid,
            &BubbleParams {
                beta,
                pole: Pole::North,
            },
        )?;
        let pu = apply_p(&h.spec, &h.grid, &u);
        let e = h.ctx.two_star - 1.0;
        let mut max_res = 0.0_f64;
        let mut max_pu = 0.0_f64;
        for i in 0..h.grid.m {
            let rhs = h.ctx.c_nk * h.ctx.q_h * u.values[i].powf(e);
            max_res = max_res.max((pu.values[i] - rhs).abs());
            max_pu = max_pu.max(pu.values[i].abs());
        }
        Ok(max_res / max_pu)
    }));
    match computed {
        Ok(Ok(v)) => {
            unsafe { *out = v };
            QcurvStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => QcurvStatus::Internal,
    }
}

/// Run a full scenario from a JSON config (the CLI schema) and hand back the
/// report JSON as an owned C string; release it with [`qcurv_string_free`].
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn qcurv_run_scenario_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> QcurvStatus {
    if config_json.is_null() || out.is_null() {
        return QcurvStatus::InvalidArgument;
    }
    let text = match unsafe { CStr::from_ptr(config_json) }.to_str() {
        Ok(t) => t,
        Err(_) => return QcurvStatus::InvalidArgument,
    };
    let ran = catch_unwind(|| -> Result<String, QcurvError> {
        let cfg = serde_json::from_str(text)
            .map_err(|e| QcurvError::Config(format!("config parse: {e}")))?;
        let (report, _) = run_scenario(&cfg)?;
        report_json(&report)
    });
    match ran {
        Ok(Ok(json)) => match CString::new(json) {
            Ok(cs) => {
                unsafe { *out = cs.into_raw() };
                QcurvStatus::Ok
            }
            Err(_) => QcurvStatus::Internal,
        },
        Ok(Err(e)) => status_of(&e),
        Err(_) => QcurvStatus::Internal,
    }
}

/// Release a string returned by [`qcurv_run_scenario_json`]. Null is a no-op.
///
/// # Safety
/// `s` must be null or an unreleased string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qcurv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qcurv_status_message(status: QcurvStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        QcurvStatus::Ok => b"ok\0",
        QcurvStatus::InvalidArgument => b"invalid argument\0",
        QcurvStatus::InvalidConfig => b"invalid configuration\0",
        QcurvStatus::SolverFailure => b"solver failure\0",
        QcurvStatus::Internal => b"internal error\0",
    };
    s.as_ptr() as *const c_char
}
