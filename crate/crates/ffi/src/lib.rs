//! C ABI over the kerrcat engine.
//!
//! Every function returns a [`KcStatus`]; on failure a description is kept
//! per thread and read with [`kc_last_error_message`]. Objects are opaque
//! handles created by `*_new` / producing calls and released by the
//! matching `*_free`. Frequencies are MHz, times µs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use kerrcat::experiments::{
    run_point, InitialState, KcqInit, ModelKind, ObservableKind, StarkModel, TransmonInit,
};
use kerrcat::fitting::{
    extract_g3_tilde, fit_damped_sinusoid, fit_stark_shift, josephson_energy_mhz,
    snail_potential_expansion, FitResult, G3Options, SnailSpec,
};
use kerrcat::lindblad::IntegratorConfig;
use kerrcat::model::SystemParams;
use kerrcat::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Integrator = 4,
    Fit = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcModel {
    Full = 0,
    Effective = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcKcqInit {
    CatPlus = 0,
    PlusZ = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcTransmonInit {
    PlusX = 0,
    PlusZ = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcObservable {
    XCat = 0,
    YCat = 1,
    ZCat = 2,
    XTransmon = 3,
    YTransmon = 4,
    ZTransmon = 5,
}

/// SNAIL circuit; `l_j_nh` is the large-junction inductance.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KcSnailSpec {
    pub e_c: f64,
    pub e_l: f64,
    pub l_j_nh: f64,
    pub asymmetry: f64,
    pub n_junctions: u32,
    pub n_snails: u32,
}

/// Expansion of the SNAIL mode about its potential minimum.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KcSnailPoint {
    pub omega: f64,
    pub g3: f64,
    pub g4: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

/// Opaque simulation parameters.
pub struct KcParams(SystemParams);

/// Opaque fit result.
pub struct KcFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KcStatus {
    match e {
        Error::IntegratorAbort { .. } | Error::InvalidState(_) => KcStatus::Integrator,
        Error::Unidentifiable(_) | Error::InsufficientData(_) | Error::NoMinimum(_) => {
            KcStatus::Fit
        }
        Error::Io(_) => KcStatus::Io,
        Error::UnknownParameter(_) => KcStatus::InvalidArgument,
        _ => KcStatus::Validation,
    }
}

struct Fail(KcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(KcStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into a status plus last-error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KcStatus::Panic
        }
    }
}

unsafe fn slice_in<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn str_in<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(KcStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn kc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn kc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Device defaults. Release with [`kc_params_free`].
#[no_mangle]
pub unsafe extern "C" fn kc_params_new(out: *mut *mut KcParams) -> KcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(Box::into_raw(Box::new(KcParams(SystemParams::default()))));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_params_free(p: *mut KcParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Sets a named parameter (`alpha`, `xi`, `phi`, `t1_a`, ...). A lifetime
/// of `INFINITY` drops its channel.
#[no_mangle]
pub unsafe extern "C" fn kc_params_set(
    p: *mut KcParams,
    name: *const c_char,
    value: f64,
) -> KcStatus {
    guard(|| {
        let p = p.as_mut().ok_or_else(|| null("params"))?;
        let name = str_in(name, "name")?;
        p.0.set(name, value)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_params_get(
    p: *const KcParams,
    name: *const c_char,
    out: *mut f64,
) -> KcStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        let v = p.0.get(str_in(name, "name")?)?;
        write_out(out, v, "out")
    })
}

/// Checks the parameters, including the Fock truncation guard.
#[no_mangle]
pub unsafe extern "C" fn kc_params_validate(p: *const KcParams) -> KcStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        p.0.validate()?;
        Ok(())
    })
}

/// Evolves one parameter point and writes `observable` at each of the
/// `n` strictly increasing `times` into `out` (length `n`). The codes take
/// the values of [`KcModel`], [`KcKcqInit`], [`KcTransmonInit`] and
/// [`KcObservable`].
#[no_mangle]
pub unsafe extern "C" fn kc_simulate(
    p: *const KcParams,
    model: u32,
    kcq: u32,
    transmon: u32,
    observable: u32,
    times: *const f64,
    n: usize,
    dt: f64,
    out: *mut f64,
) -> KcStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(|| null("params"))?;
        let times = slice_in(times, n, "times")?;
        if n == 0 {
            return Err(Fail(KcStatus::InvalidArgument, "no sample times".into()));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        p.0.validate()?;
        let pick = |v: u32, n: u32, what: &str| {
            if v < n {
                Ok(v)
            } else {
                Err(Fail(KcStatus::InvalidArgument, format!("bad {what} code {v}")))
            }
        };
        let model = [ModelKind::Full, ModelKind::Effective][pick(model, 2, "model")? as usize];
        let kcq = [KcqInit::CatPlus, KcqInit::PlusZ][pick(kcq, 2, "cat state")? as usize];
        let transmon =
            [TransmonInit::PlusX, TransmonInit::PlusZ][pick(transmon, 2, "transmon state")? as usize];
        let kind = [
            ObservableKind::XKc,
            ObservableKind::YKc,
            ObservableKind::ZKc,
            ObservableKind::XT,
            ObservableKind::YT,
            ObservableKind::ZT,
        ][pick(observable, 6, "observable")? as usize];
        let init = InitialState::new(kcq, transmon);
        let cfg = IntegratorConfig::with_dt(dt);
        let trace = run_point(&p.0, model, init, &[kind], times, &cfg)?.remove(0);
        slice::from_raw_parts_mut(out, n).copy_from_slice(&trace);
        Ok(())
    })
}

fn boxed_fit(out: *mut *mut KcFit, fit: FitResult) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { out.write(Box::into_raw(Box::new(KcFit(fit)))) };
    Ok(())
}

/// Fits `A exp(-(t - t_ref)/tau) cos(2 pi f t + phase) + offset`.
/// Parameter names: amplitude, frequency, phase, tau, offset, t_ref.
#[no_mangle]
pub unsafe extern "C" fn kc_fit_damped_sinusoid(
    t: *const f64,
    y: *const f64,
    n: usize,
    out: *mut *mut KcFit,
) -> KcStatus {
    guard(|| {
        let t = slice_in(t, n, "t")?;
        let y = slice_in(y, n, "y")?;
        boxed_fit(out, fit_damped_sinusoid(t, y)?)
    })
}

/// Fits the conversion factor `c` of `omega_a - k_a (c V)^2`.
#[no_mangle]
pub unsafe extern "C" fn kc_fit_stark_shift(
    omega_a: f64,
    k_a: f64,
    v: *const f64,
    freq: *const f64,
    n: usize,
    out: *mut *mut KcFit,
) -> KcStatus {
    guard(|| {
        let v = slice_in(v, n, "v")?;
        let f = slice_in(freq, n, "freq")?;
        let model = StarkModel { omega_a, k_a };
        boxed_fit(out, fit_stark_shift(&model, v, f)?)
    })
}

/// Slope of rate versus drive amplitude over cat size; the secant rule
/// picks the linear regime. Names: g3_tilde, intercept.
#[no_mangle]
pub unsafe extern "C" fn kc_extract_g3_tilde(
    xi: *const f64,
    omega: *const f64,
    n: usize,
    alpha: f64,
    out: *mut *mut KcFit,
) -> KcStatus {
    guard(|| {
        let xi = slice_in(xi, n, "xi")?;
        let omega = slice_in(omega, n, "omega")?;
        boxed_fit(out, extract_g3_tilde(xi, omega, alpha, &G3Options::default())?.fit)
    })
}

#[no_mangle]
pub unsafe extern "C" fn kc_fit_free(f: *mut KcFit) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Value and 1σ uncertainty of a named fit parameter; `sigma` may be null.
#[no_mangle]
pub unsafe extern "C" fn kc_fit_value(
    f: *const KcFit,
    name: *const c_char,
    value: *mut f64,
    sigma: *mut f64,
) -> KcStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("fit"))?;
        let name = str_in(name, "name")?;
        let k = f.0.index(name).ok_or_else(|| {
            Fail(KcStatus::InvalidArgument, format!("fit has no parameter `{name}`"))
        })?;
        write_out(value, f.0.values[k], "value")?;
        if !sigma.is_null() {
            sigma.write(f.0.uncertainties[k]);
        }
        Ok(())
    })
}

/// Writes 1 if the fit converged, else 0, and the residual RMS if
/// `residual_rms` is non-null.
#[no_mangle]
pub unsafe extern "C" fn kc_fit_status(
    f: *const KcFit,
    converged: *mut i32,
    residual_rms: *mut f64,
) -> KcStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("fit"))?;
        write_out(converged, i32::from(f.0.converged), "converged")?;
        if !residual_rms.is_null() {
            residual_rms.write(f.0.residual_rms);
        }
        Ok(())
    })
}

/// Mode frequency and couplings of a SNAIL chain at `flux` (flux quanta).
#[no_mangle]
pub unsafe extern "C" fn kc_snail_point(
    spec: *const KcSnailSpec,
    flux: f64,
    out: *mut KcSnailPoint,
) -> KcStatus {
    guard(|| {
        let s = spec.as_ref().ok_or_else(|| null("spec"))?;
        let spec = SnailSpec {
            e_c: s.e_c,
            e_l: s.e_l,
            e_j: josephson_energy_mhz(s.l_j_nh),
            asymmetry: s.asymmetry,
            n_junctions: s.n_junctions,
            n_snails: s.n_snails,
            phi_ext: flux,
        };
        let e = snail_potential_expansion(&spec, flux)?;
        let point = KcSnailPoint {
            omega: e.omega,
            g3: e.g3,
            g4: e.g4,
            c2: e.c2,
            c3: e.c3,
            c4: e.c4,
        };
        write_out(out, point, "out")
    })
}
