//! C ABI over the chiraldyn core.
//!
//! Every fallible function returns a [`ChiraldynStatus`]; on failure the
//! message is available from [`chiraldyn_last_error`] on the same thread.
//! Matrices cross the boundary row-major in XPXP order and shot-noise units.
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use chiraldyn::chirality::{coupling_kind, BeamConfig, CouplingKind, Direction, Handedness};
use chiraldyn::dynamics::{
    build_model, drift_diffusion, output_covariance, output_noise_spectrum, steady_state_cov, DriftDiffusion,
    ModelParams, Selector, ThreeModeModel,
};
use chiraldyn::floquet::{bessel_fit, bessel_j, BesselOrder};
use chiraldyn::gaussian::{is_physical, symplectic_eigenvalues, GaussianState};
use chiraldyn::metrics::{gaussian_discord, q_from_cov, Branch, MeasuredMode};
use chiraldyn::Error;
use nalgebra::{DMatrix, DVector};

/// Result codes. `Ok` is zero; every other value is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiraldynStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    NumericFailure = 3,
    NoSteadyState = 4,
    AboveThreshold = 5,
    DataInconsistency = 6,
    UndefinedLocalOscillator = 7,
    Truncation = 8,
    FitFailure = 9,
    Validation = 10,
    Parse = 11,
    Io = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiraldynCoupling {
    Dbs = 0,
    Nhpa = 1,
}

/// Rates of the three-mode model in rad/s; `carrier_hz` in Hz.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiraldynModelParams {
    pub g1: f64,
    pub g2: f64,
    pub gamma_spin: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub delta_spin: f64,
    pub carrier_hz: f64,
}

/// Opaque Gaussian state.
pub struct ChiraldynState(GaussianState);

/// Opaque light–spin model.
pub struct ChiraldynModel {
    model: ThreeModeModel,
    dd: DriftDiffusion,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ChiraldynStatus {
    use ChiraldynStatus as S;
    match e {
        Error::InvalidArgument(_) => S::InvalidArgument,
        Error::NumericFailure(_) => S::NumericFailure,
        Error::NoSteadyState { .. } => S::NoSteadyState,
        Error::AboveThreshold { .. } => S::AboveThreshold,
        Error::DataInconsistency(_) => S::DataInconsistency,
        Error::UndefinedLocalOscillator => S::UndefinedLocalOscillator,
        Error::Truncation { .. } => S::Truncation,
        Error::FitFailure(_) => S::FitFailure,
        Error::Validation { .. } => S::Validation,
        Error::Parse { .. } => S::Parse,
        Error::Io { .. } => S::Io,
        Error::Context { source, .. } => status_of(source),
    }
}

struct Fail(ChiraldynStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult = Result<(), Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> ChiraldynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            ChiraldynStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_last_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            ChiraldynStatus::Panic
        }
    }
}

fn null(name: &str) -> Fail {
    Fail(ChiraldynStatus::NullPointer, format!("`{name}` is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(ChiraldynStatus::InvalidArgument, msg.into())
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    out(p, "out")
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn write_matrix(m: &DMatrix<f64>, dst: &mut [f64]) -> FfiResult {
    let need = m.nrows() * m.ncols();
    if dst.len() < need {
        return Err(Fail(
            ChiraldynStatus::BufferTooSmall,
            format!("buffer holds {} values, {need} needed", dst.len()),
        ));
    }
    for (i, row) in m.row_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            dst[i * m.ncols() + j] = *v;
        }
    }
    Ok(())
}

fn new_state(cov: DMatrix<f64>) -> Result<*mut ChiraldynState, Fail> {
    let s = GaussianState::from_cov(cov)?;
    Ok(Box::into_raw(Box::new(ChiraldynState(s))))
}

fn two_mode(s: &GaussianState) -> FfiResult {
    if s.n_modes() != 2 {
        return Err(invalid(format!("needs a two-mode state, got {} modes", s.n_modes())));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chiraldyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn chiraldyn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Coupling produced by two control beams. Handedness is 0 for RHCP and 1
/// for LHCP; direction is +1 for +z and -1 for -z.
///
/// # Safety
/// `out` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_coupling_kind(
    handedness1: c_int,
    direction1: c_int,
    handedness2: c_int,
    direction2: c_int,
    out: *mut ChiraldynCoupling,
) -> ChiraldynStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let beam = |h: c_int, d: c_int| -> Result<BeamConfig, Fail> {
            let h = match h {
                0 => Handedness::Rhcp,
                1 => Handedness::Lhcp,
                _ => return Err(invalid(format!("handedness must be 0 or 1, got {h}"))),
            };
            let d = match d {
                1 => Direction::PlusZ,
                -1 => Direction::MinusZ,
                _ => return Err(invalid(format!("direction must be +1 or -1, got {d}"))),
            };
            Ok(BeamConfig::new(h, d))
        };
        *out = match coupling_kind(&beam(handedness1, direction1)?, &beam(handedness2, direction2)?) {
            CouplingKind::Dbs => ChiraldynCoupling::Dbs,
            CouplingKind::Nhpa => ChiraldynCoupling::Nhpa,
        };
        Ok(())
    })
}

/// Zero-mean state from a row-major `2n × 2n` covariance.
///
/// # Safety
/// `cov` must point to `4 n_modes²` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_new(
    n_modes: usize,
    cov: *const f64,
    out: *mut *mut ChiraldynState,
) -> ChiraldynStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if n_modes == 0 {
            return Err(invalid("n_modes must be >= 1"));
        }
        let dim = 2 * n_modes;
        let data = slice(cov, dim * dim, "cov")?;
        *out = new_state(DMatrix::from_row_slice(dim, dim, data))?;
        Ok(())
    })
}

/// Same as [`chiraldyn_state_new`] with a displacement vector of length `2n`.
///
/// # Safety
/// `mean` must point to `2 n_modes` doubles and `cov` to `4 n_modes²`.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_new_displaced(
    n_modes: usize,
    mean: *const f64,
    cov: *const f64,
    out: *mut *mut ChiraldynState,
) -> ChiraldynStatus {
    guard(|| {
        let out = out_ptr(out)?;
        if n_modes == 0 {
            return Err(invalid("n_modes must be >= 1"));
        }
        let dim = 2 * n_modes;
        let mean = DVector::from_column_slice(slice(mean, dim, "mean")?);
        let cov = DMatrix::from_row_slice(dim, dim, slice(cov, dim * dim, "cov")?);
        let s = GaussianState::new(mean, cov)?;
        *out = Box::into_raw(Box::new(ChiraldynState(s)));
        Ok(())
    })
}

/// Releases a state. Null is ignored.
///
/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_free(state: *mut ChiraldynState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of modes, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_n_modes(state: *const ChiraldynState) -> usize {
    state.as_ref().map_or(0, |s| s.0.n_modes())
}

/// Copies the covariance into `buf` (row-major, `len ≥ 4n²`).
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_cov(
    state: *const ChiraldynState,
    buf: *mut f64,
    len: usize,
) -> ChiraldynStatus {
    guard(|| {
        let s = deref(state, "state")?;
        write_matrix(s.0.cov(), slice_mut(buf, len, "buf")?)
    })
}

/// Whether every symplectic eigenvalue is at least `1 - tol`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_is_physical(
    state: *const ChiraldynState,
    tol: f64,
    out: *mut bool,
) -> ChiraldynStatus {
    guard(|| {
        let s = deref(state, "state")?;
        *out_ptr(out)? = is_physical(&s.0, tol)?;
        Ok(())
    })
}

/// Symplectic eigenvalues in descending order; `len ≥ n_modes`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_symplectic_eigenvalues(
    state: *const ChiraldynState,
    buf: *mut f64,
    len: usize,
) -> ChiraldynStatus {
    guard(|| {
        let s = deref(state, "state")?;
        let nu = symplectic_eigenvalues(s.0.cov())?;
        let dst = slice_mut(buf, len, "buf")?;
        if dst.len() < nu.len() {
            return Err(Fail(
                ChiraldynStatus::BufferTooSmall,
                format!("buffer holds {} values, {} needed", dst.len(), nu.len()),
            ));
        }
        dst[..nu.len()].copy_from_slice(&nu);
        Ok(())
    })
}

/// Gaussian discord in bits of a two-mode state. `measured` is 0 for mode
/// A and 1 for mode B. `branch` (may be null) receives 1 or 2 for the
/// first or second minimization branch.
///
/// # Safety
/// `state` must be a live handle; `discord` writable; `branch` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_discord(
    state: *const ChiraldynState,
    measured: c_int,
    discord: *mut f64,
    branch: *mut c_int,
) -> ChiraldynStatus {
    guard(|| {
        let s = deref(state, "state")?;
        two_mode(&s.0)?;
        let m = match measured {
            0 => MeasuredMode::A,
            1 => MeasuredMode::B,
            _ => return Err(invalid(format!("measured must be 0 or 1, got {measured}"))),
        };
        let r = gaussian_discord(s.0.cov(), m)?;
        *out(discord, "discord")? = r.discord;
        if let Some(b) = branch.as_mut() {
            *b = match r.branch {
                Branch::First => 1,
                Branch::Second => 2,
            };
        }
        Ok(())
    })
}

/// Correlation metric `Q` of a two-mode state.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_state_q(state: *const ChiraldynState, out: *mut f64) -> ChiraldynStatus {
    guard(|| {
        let s = deref(state, "state")?;
        two_mode(&s.0)?;
        *out_ptr(out)? = q_from_cov(s.0.cov())?;
        Ok(())
    })
}

/// Builds the three-mode light–spin model. `kind` takes a
/// [`ChiraldynCoupling`] value.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_model_new(
    kind: c_int,
    params: *const ChiraldynModelParams,
    out: *mut *mut ChiraldynModel,
) -> ChiraldynStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let p = deref(params, "params")?;
        let kind = match kind {
            k if k == ChiraldynCoupling::Dbs as c_int => CouplingKind::Dbs,
            k if k == ChiraldynCoupling::Nhpa as c_int => CouplingKind::Nhpa,
            k => return Err(invalid(format!("unknown coupling kind {k}"))),
        };
        let model = build_model(
            kind,
            ModelParams {
                g1: p.g1,
                g2: p.g2,
                gamma_spin: p.gamma_spin,
                kappa1: p.kappa1,
                kappa2: p.kappa2,
                delta_spin: p.delta_spin,
                carrier_hz: p.carrier_hz,
            },
        )?;
        let dd = drift_diffusion(&model);
        *out = Box::into_raw(Box::new(ChiraldynModel { model, dd }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_model_free(model: *mut ChiraldynModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Cooperativity `4 g₁ g₂ / (γ √(κ₁κ₂))`, or NaN for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_model_cooperativity(model: *const ChiraldynModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.model.cooperativity())
}

/// Steady-state three-mode covariance (channels 1, 2, then the spin).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_model_steady_state(
    model: *const ChiraldynModel,
    out: *mut *mut ChiraldynState,
) -> ChiraldynStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let out = out_ptr(out)?;
        *out = new_state(steady_state_cov(&m.dd)?)?;
        Ok(())
    })
}

/// Two-mode covariance of the output sidebands at `freq_hz`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_model_output_state(
    model: *const ChiraldynModel,
    freq_hz: f64,
    out: *mut *mut ChiraldynState,
) -> ChiraldynStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let out = out_ptr(out)?;
        *out = new_state(output_covariance(&m.dd, freq_hz)?)?;
        Ok(())
    })
}

/// Output noise spectrum of one quadrature combination (for example
/// `"X1-X2"`) at each of `n` ascending frequencies.
///
/// # Safety
/// `selector` must be a NUL-terminated string; `freq_hz` and `values` must
/// point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_model_spectrum(
    model: *const ChiraldynModel,
    selector: *const c_char,
    freq_hz: *const f64,
    n: usize,
    resolution_bw_hz: f64,
    values: *mut f64,
) -> ChiraldynStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if selector.is_null() {
            return Err(null("selector"));
        }
        let label = CStr::from_ptr(selector)
            .to_str()
            .map_err(|_| invalid("selector is not UTF-8"))?;
        let sel = Selector::parse(label)?;
        let freq = slice(freq_hz, n, "freq_hz")?;
        let dst = slice_mut(values, n, "values")?;
        let sp = output_noise_spectrum(&m.dd, std::slice::from_ref(&sel), freq, resolution_bw_hz)?;
        dst.copy_from_slice(&sp.series[0].1);
        Ok(())
    })
}

/// Bessel function of the first kind `J_n(x)`.
#[no_mangle]
pub extern "C" fn chiraldyn_bessel_j(n: c_int, x: f64) -> f64 {
    bessel_j(n, x)
}

/// Fits `amplitude · J_order(k_u / ν₁)` to `n` points. `order` is 0 or 1.
/// `rms_residual` may be null.
///
/// # Safety
/// `nu1_hz` and `amplitudes` must point to `n` doubles; `k_u_hz` and
/// `amplitude` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chiraldyn_bessel_fit(
    order: c_int,
    nu1_hz: *const f64,
    amplitudes: *const f64,
    n: usize,
    k_u_hz: *mut f64,
    amplitude: *mut f64,
    rms_residual: *mut f64,
) -> ChiraldynStatus {
    guard(|| {
        let order = u8::try_from(order)
            .map_err(|_| invalid(format!("order must be 0 or 1, got {order}")))
            .and_then(|o| BesselOrder::try_from(o).map_err(Fail::from))?;
        let nu = slice(nu1_hz, n, "nu1_hz")?;
        let amp = slice(amplitudes, n, "amplitudes")?;
        let k = out(k_u_hz, "k_u_hz")?;
        let a = out(amplitude, "amplitude")?;
        let fit = bessel_fit(nu, amp, order)?;
        *k = fit.k_u;
        *a = fit.amplitude;
        if let Some(r) = rms_residual.as_mut() {
            *r = fit.rms_residual;
        }
        Ok(())
    })
}
