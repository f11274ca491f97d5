//! C interface. Every function returns a [`PolStatus`]; on failure a message
//! is available from [`pol_last_error_message`] on the same thread. Handles
//! are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use polariton_core::cli::parse_config;
use polariton_core::exact2p::{solve_spectrum, Band, SpectrumK0};
use polariton_core::params::{derive_params, rad_to_hz, ModelParams, PhysicalConfig};
use polariton_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Numerical = 4,
    OutOfRange = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolBand {
    BelowBand = 0,
    LowerLower = 1,
    Gap = 2,
    LowerUpper = 3,
    UpperUpper = 4,
}

impl From<Band> for PolBand {
    fn from(b: Band) -> Self {
        match b {
            Band::BelowBand => PolBand::BelowBand,
            Band::LL => PolBand::LowerLower,
            Band::Gap => PolBand::Gap,
            Band::LU => PolBand::LowerUpper,
            Band::UU => PolBand::UpperUpper,
        }
    }
}

/// Summary of one K = 0 eigenstate.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PolState {
    /// 1-based position in the spectrum.
    pub index: usize,
    /// 1-based position within its band.
    pub rho: usize,
    pub band: PolBand,
    pub energy_hz: f64,
    /// E − 2E0 (Hz).
    pub offset_hz: f64,
    /// Effective wave vector (1/m); NaN when undefined.
    pub k_eff_per_m: f64,
    pub delta_a: f64,
}

/// Derived model parameters.
pub struct PolModel {
    params: ModelParams,
}

/// A solved K = 0 spectrum.
pub struct PolSpectrum {
    spectrum: SpectrumK0,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PolStatus {
    match e {
        Error::InvalidConfig(_) | Error::Json(_) => PolStatus::InvalidConfig,
        Error::IndexOutOfRange { .. } => PolStatus::OutOfRange,
        Error::DimensionTooLarge { .. } => PolStatus::InvalidArgument,
        Error::NearPole { .. } | Error::NotARoot { .. } | Error::NearSingular { .. } | Error::Numerical(_) => PolStatus::Numerical,
        Error::Io { .. } | Error::Csv(_) => PolStatus::Io,
    }
}

struct Failure(PolStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(PolStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PolStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PolStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PolStatus::Panic
        }
    }
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn model_ref<'a>(model: *const PolModel) -> Result<&'a PolModel, Failure> {
    model.as_ref().ok_or_else(|| null("model"))
}

unsafe fn spectrum_ref<'a>(spectrum: *const PolSpectrum) -> Result<&'a PolSpectrum, Failure> {
    spectrum.as_ref().ok_or_else(|| null("spectrum"))
}

fn new_model(cfg: &PhysicalConfig) -> Result<*mut PolModel, Failure> {
    let params = derive_params(cfg)?;
    Ok(Box::into_raw(Box::new(PolModel { params })))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pol_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message including its NUL, or 0.
#[no_mangle]
pub extern "C" fn pol_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes_with_nul().len()))
}

/// Copies the last error message into `buf` (truncated, always
/// NUL-terminated when `len > 0`).
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pol_last_error_message(buf: *mut c_char, len: usize) -> PolStatus {
    if buf.is_null() || len == 0 {
        return PolStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        let n = bytes.len().min(len - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    });
    PolStatus::Ok
}

/// Rb D2 scenario with the defaults of the command-line tool.
///
/// # Safety
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn pol_model_default(out: *mut *mut PolModel) -> PolStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        write_out(out, new_model(&PhysicalConfig::rb_d2())?, "out")
    })
}

/// Model from a JSON run configuration (same keys as the CLI `--config`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pol_model_from_json(json: *const c_char, out: *mut *mut PolModel) -> PolStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(PolStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        let (cfg, _) = parse_config(text)?.physical()?;
        write_out(out, new_model(&cfg)?, "out")
    })
}

/// # Safety
/// `model` must come from a `pol_model_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pol_model_free(model: *mut PolModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pol_model_n_sites(model: *const PolModel, out: *mut usize) -> PolStatus {
    guard(|| write_out(out, model_ref(model)?.params.n, "out"))
}

/// Collective coupling G/2π (Hz).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pol_model_coupling_hz(model: *const PolModel, out: *mut f64) -> PolStatus {
    guard(|| write_out(out, rad_to_hz(model_ref(model)?.params.big_g), "out"))
}

/// Cavity detuning δ/2π (Hz).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pol_model_detuning_hz(model: *const PolModel, out: *mut f64) -> PolStatus {
    guard(|| write_out(out, rad_to_hz(model_ref(model)?.params.delta), "out"))
}

/// Solves the K = 0 two-polariton spectrum.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pol_spectrum_solve(model: *const PolModel, out: *mut *mut PolSpectrum) -> PolStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let spectrum = solve_spectrum(&m.params)?;
        write_out(out, Box::into_raw(Box::new(PolSpectrum { spectrum })), "out")
    })
}

/// # Safety
/// `spectrum` must come from [`pol_spectrum_solve`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pol_spectrum_free(spectrum: *mut PolSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of symmetric states.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pol_spectrum_len(spectrum: *const PolSpectrum, out: *mut usize) -> PolStatus {
    guard(|| write_out(out, spectrum_ref(spectrum)?.spectrum.states.len(), "out"))
}

fn state_at(s: &SpectrumK0, index: usize) -> Result<&polariton_core::exact2p::TwoPolaritonState, Failure> {
    s.states.get(index).ok_or_else(|| {
        Failure(PolStatus::OutOfRange, format!("state index {index} out of range 0..{}", s.states.len()))
    })
}

/// Summary of state `index` (0-based, ascending energy).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pol_spectrum_state(spectrum: *const PolSpectrum, index: usize, out: *mut PolState) -> PolStatus {
    guard(|| {
        let st = state_at(&spectrum_ref(spectrum)?.spectrum, index)?;
        let info = PolState {
            index: st.index,
            rho: st.rho,
            band: st.band.into(),
            energy_hz: rad_to_hz(st.energy),
            offset_hz: rad_to_hz(st.offset),
            k_eff_per_m: st.k_eff.unwrap_or(f64::NAN),
            delta_a: st.delta_a,
        };
        write_out(out, info, "out")
    })
}

/// Real-space amplitudes A(n), B(n), C(n) of state `index` for
/// n ∈ (−N/2, N/2], n = 0 at position N/2 − 1. Each buffer holds `len` = N
/// values; pass null to skip one.
///
/// # Safety
/// Non-null buffers must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pol_spectrum_real_space(
    spectrum: *const PolSpectrum,
    index: usize,
    a: *mut f64,
    b: *mut f64,
    c: *mut f64,
    len: usize,
) -> PolStatus {
    guard(|| {
        let st = state_at(&spectrum_ref(spectrum)?.spectrum, index)?;
        if len != st.a_n.len() {
            return Err(Failure(PolStatus::InvalidArgument, format!("buffer length {len}, expected {}", st.a_n.len())));
        }
        for (dst, src) in [(a, &st.a_n), (b, &st.b_n), (c, &st.c_n)] {
            if !dst.is_null() {
                std::ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
            }
        }
        Ok(())
    })
}
