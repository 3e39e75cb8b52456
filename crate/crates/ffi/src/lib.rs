//! C interface to the spectrum simulator, the cost function and the Gaussian
//! process surrogate.
//!
//! Every function returns a [`DfStatus`]. On failure the message is available
//! from [`df_last_error`] on the same thread. Output arrays are caller-owned.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dimerfit::cost::spectral_cost;
use dimerfit::gpr::{Dimension, FitOptions, GprModel, ParameterSpace, TrainingSet};
use dimerfit::model::{BasisSpec, DimerParams, MonomerParams};
use dimerfit::spectra::{simulate_dimer, simulate_monomer, FrequencyGrid, SimulationSettings, Spectrum};
use dimerfit::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfStatus {
    Ok = 0,
    /// Null pointer or inconsistent length.
    InvalidArgument = 1,
    /// Parameter, grid or basis rejected by validation.
    InvalidParameter = 2,
    /// Propagation, factorization or hyperparameter fit failed.
    Numerical = 3,
    /// Internal error; the library state is unaffected.
    Panic = 4,
}

/// Fitted surrogate model.
pub struct DfGpr {
    model: GprModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: DfStatus, msg: &str) -> DfStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> DfStatus {
    let status = if e.is_validation() || matches!(e, Error::NotNormalized { .. } | Error::GridMismatch(_)) {
        DfStatus::InvalidParameter
    } else {
        DfStatus::Numerical
    };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> DfStatus) -> DfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == DfStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(DfStatus::Panic, "internal panic"),
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize) -> Option<&'a [f64]> {
    if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, n))
    }
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize) -> Option<&'a mut [f64]> {
    if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts_mut(p, n))
    }
}

fn settings(n_max: usize) -> SimulationSettings {
    let mut basis = if n_max == 0 {
        BasisSpec::default()
    } else {
        BasisSpec::new(n_max)
    };
    basis.max_dim = basis.max_dim.max(basis.dimer_dim());
    SimulationSettings {
        basis,
        ..Default::default()
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn df_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn df_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Area-normalized monomer absorption spectrum on `n_points` equally spaced
/// frequencies from `nu_start` to `nu_end` (cm⁻¹).
///
/// `monomer` holds ε_e, ω_vib, S, γ, σ_m. `n_max` = 0 selects the default
/// truncation. `coverage` may be null.
///
/// # Safety
/// `monomer` must point to 5 doubles and `out_amp` to `n_points` doubles.
#[no_mangle]
pub unsafe extern "C" fn df_simulate_monomer(
    monomer: *const f64,
    nu_start: f64,
    nu_end: f64,
    n_points: usize,
    n_max: usize,
    out_amp: *mut f64,
    coverage: *mut f64,
) -> DfStatus {
    guard(|| {
        let (Some(m), Some(out)) = (slice(monomer, 5), slice_mut(out_amp, n_points)) else {
            return fail(DfStatus::InvalidArgument, "null pointer");
        };
        let mut run = || -> dimerfit::Result<f64> {
            let p = MonomerParams::from_slice(m)?;
            let grid = FrequencyGrid::new(nu_start, nu_end, n_points)?;
            let s = simulate_monomer(&p, &settings(n_max), &grid)?;
            out.copy_from_slice(&s.spectrum.amp);
            Ok(s.coverage)
        };
        match run() {
            Ok(c) => {
                if !coverage.is_null() {
                    *coverage = c;
                }
                DfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Dimer spectrum; as [`df_simulate_monomer`] with `dimer` holding V, δ, α (degrees), σ_d.
///
/// # Safety
/// `monomer` must point to 5 doubles, `dimer` to 4 and `out_amp` to `n_points`.
#[no_mangle]
pub unsafe extern "C" fn df_simulate_dimer(
    monomer: *const f64,
    dimer: *const f64,
    nu_start: f64,
    nu_end: f64,
    n_points: usize,
    n_max: usize,
    out_amp: *mut f64,
    coverage: *mut f64,
) -> DfStatus {
    guard(|| {
        let (Some(m), Some(d), Some(out)) = (slice(monomer, 5), slice(dimer, 4), slice_mut(out_amp, n_points)) else {
            return fail(DfStatus::InvalidArgument, "null pointer");
        };
        let mut run = || -> dimerfit::Result<f64> {
            let pm = MonomerParams::from_slice(m)?;
            let pd = DimerParams::from_slice(d)?;
            let grid = FrequencyGrid::new(nu_start, nu_end, n_points)?;
            let s = simulate_dimer(&pm, &pd, &settings(n_max), &grid)?;
            out.copy_from_slice(&s.spectrum.amp);
            Ok(s.coverage)
        };
        match run() {
            Ok(c) => {
                if !coverage.is_null() {
                    *coverage = c;
                }
                DfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// L1 distance between two spectra sampled on the same grid. Both must be
/// area-normalized; the result lies in [0, 2].
///
/// # Safety
/// `a` and `b` must point to `n_points` doubles, `out` to one.
#[no_mangle]
pub unsafe extern "C" fn df_spectral_cost(
    nu_start: f64,
    nu_end: f64,
    n_points: usize,
    a: *const f64,
    b: *const f64,
    out: *mut f64,
) -> DfStatus {
    guard(|| {
        let (Some(a), Some(b)) = (slice(a, n_points), slice(b, n_points)) else {
            return fail(DfStatus::InvalidArgument, "null pointer");
        };
        if out.is_null() {
            return fail(DfStatus::InvalidArgument, "null pointer");
        }
        let run = || -> dimerfit::Result<f64> {
            let grid = FrequencyGrid::new(nu_start, nu_end, n_points)?;
            let mut sa = Spectrum::new(grid, a.to_vec())?;
            let mut sb = Spectrum::new(grid, b.to_vec())?;
            // caller data: accept it when the area checks out
            sa.normalized = true;
            sb.normalized = true;
            Ok(spectral_cost(&sa, &sb)?.value())
        };
        match run() {
            Ok(c) => {
                *out = c;
                DfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Fit a surrogate to `n` points of dimension `dim` inside the box
/// [`lower`, `upper`]. `x` is row-major, `n`×`dim`. On success `*out` owns a
/// model that must be released with [`df_gpr_free`].
///
/// # Safety
/// `lower`/`upper` must hold `dim` doubles, `x` `n*dim`, `y` `n`; `out` non-null.
#[no_mangle]
pub unsafe extern "C" fn df_gpr_fit(
    dim: usize,
    lower: *const f64,
    upper: *const f64,
    n: usize,
    x: *const f64,
    y: *const f64,
    out: *mut *mut DfGpr,
) -> DfStatus {
    guard(|| {
        let Some(total) = n.checked_mul(dim) else {
            return fail(DfStatus::InvalidArgument, "n*dim overflows");
        };
        let (Some(lo), Some(hi), Some(x), Some(y)) = (slice(lower, dim), slice(upper, dim), slice(x, total), slice(y, n))
        else {
            return fail(DfStatus::InvalidArgument, "null pointer");
        };
        if out.is_null() {
            return fail(DfStatus::InvalidArgument, "null pointer");
        }
        if dim == 0 {
            return fail(DfStatus::InvalidArgument, "dim must be positive");
        }
        let run = || -> dimerfit::Result<GprModel> {
            let dims = (0..dim).map(|k| Dimension::new(format!("x{k}"), lo[k], hi[k], "")).collect();
            let space = ParameterSpace::new(dims)?;
            let points: Vec<Vec<f64>> = x.chunks(dim).map(<[f64]>::to_vec).collect();
            let train = TrainingSet::from_points(space, &points, y)?;
            GprModel::fit(train, &FitOptions::default(), None)
        };
        match run() {
            Ok(model) => {
                *out = Box::into_raw(Box::new(DfGpr { model }));
                DfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Posterior mean and standard deviation at `x` (`dim` doubles). Either output may be null.
///
/// # Safety
/// `gpr` must come from [`df_gpr_fit`] and not be freed.
#[no_mangle]
pub unsafe extern "C" fn df_gpr_predict(gpr: *const DfGpr, x: *const f64, mean: *mut f64, std: *mut f64) -> DfStatus {
    guard(|| {
        let Some(g) = gpr.as_ref() else {
            return fail(DfStatus::InvalidArgument, "null handle");
        };
        let Some(x) = slice(x, g.model.space().dim()) else {
            return fail(DfStatus::InvalidArgument, "null pointer");
        };
        match g.model.predict(x) {
            Ok(p) => {
                if !mean.is_null() {
                    *mean = p.mean;
                }
                if !std.is_null() {
                    *std = p.std;
                }
                DfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Fitted length scales in unit-box coordinates; `out` holds `dim` doubles.
///
/// # Safety
/// `gpr` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn df_gpr_length_scales(gpr: *const DfGpr, out: *mut f64) -> DfStatus {
    guard(|| {
        let Some(g) = gpr.as_ref() else {
            return fail(DfStatus::InvalidArgument, "null handle");
        };
        let ls = &g.model.hyper.length_scales;
        let Some(out) = slice_mut(out, ls.len()) else {
            return fail(DfStatus::InvalidArgument, "null pointer");
        };
        out.copy_from_slice(ls);
        DfStatus::Ok
    })
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `gpr` must come from [`df_gpr_fit`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn df_gpr_free(gpr: *mut DfGpr) {
    if !gpr.is_null() {
        drop(Box::from_raw(gpr));
    }
}
