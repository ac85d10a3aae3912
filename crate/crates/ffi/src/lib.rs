//! C ABI over the croqam library.
//!
//! Filters and modems are opaque heap handles created by `*_new`/`*_design`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`CroqamStatus`]; on failure a description is available from
//! [`croqam_last_error`] on the same thread. Panics never cross the boundary.
//!
//! Enumerated arguments are passed as `uint32_t` holding one of the
//! `CROQAM_*` constants so that out-of-range values are reported instead of
//! being undefined behavior.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use croqam::filters::ici_response;
use croqam::oqam::orthogonality_report;
use croqam::qam::{QamMapper, ORDER};
use croqam::{
    build_modem, Detector, Error, FilterFamily, FilterGrid, GfdmConfig, GfdmModem, ModulationMode,
    PhaseMode, PrototypeFilter, Table1Column,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CroqamStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    SingularMatrix = 4,
    DeepFade = 5,
    Unsupported = 6,
    Panic = 100,
}

/// Filter family codes.
#[repr(C)]
pub enum CroqamFilterFamily {
    Rc = 0,
    Rrc = 1,
    Crrc = 2,
    Rect = 3,
}

#[repr(C)]
pub enum CroqamDetector {
    Zf = 0,
    Mf = 1,
}

#[repr(C)]
pub enum CroqamModulation {
    Qam = 0,
    Oqam = 1,
    CrOqam = 2,
}

#[repr(C)]
pub enum CroqamPhaseMode {
    Conventional = 0,
    Cr = 1,
}

/// The three reference modems (K=64, M=7).
#[repr(C)]
pub enum CroqamReference {
    QamZf = 0,
    OqamMf = 1,
    CrOqamMf = 2,
}

/// Complex sample, layout-compatible with `double _Complex` and `double[2]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CroqamComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for CroqamComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<CroqamComplex> for Complex64 {
    fn from(z: CroqamComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Opaque prototype filter.
pub struct CroqamFilter {
    inner: PrototypeFilter,
}

/// Opaque GFDM block modem.
pub struct CroqamModem {
    inner: GfdmModem,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(CroqamStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::LengthMismatch { .. } => CroqamStatus::LengthMismatch,
            Error::SingularModulationMatrix { .. } => CroqamStatus::SingularMatrix,
            Error::DeepFade { .. } => CroqamStatus::DeepFade,
            Error::NoZeroForcingDetector | Error::Unsupported(_) => CroqamStatus::Unsupported,
            _ => CroqamStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CroqamStatus::NullPointer, format!("{what} is null"))
}

fn bad(what: &str, code: u32) -> Failure {
    Failure(
        CroqamStatus::InvalidArgument,
        format!("unknown {what} code {code}"),
    )
}

/// Runs `f`, records any failure and keeps panics on this side.
fn guarded(f: impl FnOnce() -> Result<(), Failure>) -> CroqamStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CroqamStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CroqamStatus::Panic
        }
    }
}

fn family(code: u32) -> Result<FilterFamily, Failure> {
    Ok(match code {
        0 => FilterFamily::Rc,
        1 => FilterFamily::Rrc,
        2 => FilterFamily::Crrc,
        3 => FilterFamily::Rect,
        _ => return Err(bad("filter family", code)),
    })
}

fn detector(code: u32) -> Result<Detector, Failure> {
    Ok(match code {
        0 => Detector::Zf,
        1 => Detector::Mf,
        _ => return Err(bad("detector", code)),
    })
}

fn modulation(code: u32) -> Result<ModulationMode, Failure> {
    Ok(match code {
        0 => ModulationMode::Qam,
        1 => ModulationMode::Oqam,
        2 => ModulationMode::CrOqam,
        _ => return Err(bad("modulation", code)),
    })
}

fn phase_mode(code: u32) -> Result<PhaseMode, Failure> {
    Ok(match code {
        0 => PhaseMode::Conventional,
        1 => PhaseMode::Cr,
        _ => return Err(bad("phase mode", code)),
    })
}

/// # Safety
/// `p` must be null or point to `len` readable values.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or point to `len` writable values.
unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_len(expected: usize, got: usize) -> Result<(), Failure> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got }.into())
    }
}

fn copy_out(src: &[Complex64], dst: &mut [CroqamComplex]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = (*s).into();
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn croqam_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn croqam_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn croqam_status_str(status: i32) -> *const c_char {
    let s: &'static str = match status {
        0 => "ok\0",
        1 => "null pointer\0",
        2 => "invalid argument\0",
        3 => "length mismatch\0",
        4 => "singular modulation matrix\0",
        5 => "deep fade\0",
        6 => "unsupported\0",
        100 => "internal panic\0",
        _ => "unknown status\0",
    };
    s.as_ptr().cast()
}

/// Designs a filter of `family` on a `subcarriers x bins_per_subcarrier`
/// grid. Odd `bins_per_subcarrier` is accepted with an off-grid band edge.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn croqam_filter_design(
    family_code: u32,
    rolloff: f64,
    subcarriers: usize,
    bins_per_subcarrier: usize,
    out: *mut *mut CroqamFilter,
) -> CroqamStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let grid = FilterGrid::new(subcarriers, bins_per_subcarrier)?.allowing_odd_bins();
        let inner = PrototypeFilter::design(family(family_code)?, rolloff, grid)?;
        *out = Box::into_raw(Box::new(CroqamFilter { inner }));
        Ok(())
    })
}

/// # Safety
/// `filter` must be null or a handle from [`croqam_filter_design`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn croqam_filter_free(filter: *mut CroqamFilter) {
    if !filter.is_null() {
        drop(Box::from_raw(filter));
    }
}

/// Number of bins (and time samples) of the filter; 0 for null.
///
/// # Safety
/// `filter` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn croqam_filter_len(filter: *const CroqamFilter) -> usize {
    filter.as_ref().map_or(0, |f| f.inner.grid().n_bins())
}

/// Unit-energy impulse response; `len` must equal [`croqam_filter_len`].
///
/// # Safety
/// `filter` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn croqam_filter_time_response(
    filter: *const CroqamFilter,
    out: *mut CroqamComplex,
    len: usize,
) -> CroqamStatus {
    guarded(|| {
        let f = &filter.as_ref().ok_or_else(|| null("filter"))?.inner;
        check_len(f.grid().n_bins(), len)?;
        copy_out(f.time_response(), output(out, len, "out")?);
        Ok(())
    })
}

/// Design frequency response in DFT bin order.
///
/// # Safety
/// `filter` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn croqam_filter_freq_response(
    filter: *const CroqamFilter,
    out: *mut CroqamComplex,
    len: usize,
) -> CroqamStatus {
    guarded(|| {
        let f = &filter.as_ref().ok_or_else(|| null("filter"))?.inner;
        check_len(f.grid().n_bins(), len)?;
        copy_out(f.freq_response(), output(out, len, "out")?);
        Ok(())
    })
}

/// Largest orthogonality violation of the filter under `phase_mode_code`.
///
/// # Safety
/// `filter` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn croqam_filter_orthogonality(
    filter: *const CroqamFilter,
    phase_mode_code: u32,
    out: *mut f64,
) -> CroqamStatus {
    guarded(|| {
        let f = &filter.as_ref().ok_or_else(|| null("filter"))?.inner;
        let mode = phase_mode(phase_mode_code)?;
        *out.as_mut().ok_or_else(|| null("out"))? = orthogonality_report(f, mode);
        Ok(())
    })
}

/// Time-domain ICI response towards the carrier `shift` positions away.
///
/// # Safety
/// `filter` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn croqam_filter_ici(
    filter: *const CroqamFilter,
    shift: isize,
    out: *mut CroqamComplex,
    len: usize,
) -> CroqamStatus {
    guarded(|| {
        let f = &filter.as_ref().ok_or_else(|| null("filter"))?.inner;
        check_len(f.grid().n_bins(), len)?;
        let ici = ici_response(f, shift)?;
        copy_out(&ici.time, output(out, len, "out")?);
        Ok(())
    })
}

fn emit_modem(out: *mut *mut CroqamModem, config: GfdmConfig) -> Result<(), Failure> {
    let inner = build_modem(config)?;
    // SAFETY: callers checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(CroqamModem { inner })) };
    Ok(())
}

/// Builds a `K x M` GFDM modem.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn croqam_modem_new(
    subcarriers: usize,
    subsymbols: usize,
    family_code: u32,
    rolloff: f64,
    detector_code: u32,
    modulation_code: u32,
    cp_length: usize,
    out: *mut *mut CroqamModem,
) -> CroqamStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let mut config = GfdmConfig::design(
            subcarriers,
            subsymbols,
            family(family_code)?,
            rolloff,
            detector(detector_code)?,
            modulation(modulation_code)?,
        )?;
        config.cp_length = cp_length;
        emit_modem(out, config)
    })
}

/// Builds one of the reference modems.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn croqam_modem_reference(
    reference_code: u32,
    out: *mut *mut CroqamModem,
) -> CroqamStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let column = match reference_code {
            0 => Table1Column::Qam,
            1 => Table1Column::Oqam,
            2 => Table1Column::CrOqam,
            c => return Err(bad("reference modem", c)),
        };
        emit_modem(out, column.config()?)
    })
}

/// # Safety
/// `modem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn croqam_modem_free(modem: *mut CroqamModem) {
    if !modem.is_null() {
        drop(Box::from_raw(modem));
    }
}

/// Symbols (and samples) per block, `K*M`; 0 for null.
///
/// # Safety
/// `modem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn croqam_modem_block_len(modem: *const CroqamModem) -> usize {
    modem.as_ref().map_or(0, |m| m.inner.n())
}

/// Cyclic prefix length the modem was configured with; 0 for null.
///
/// # Safety
/// `modem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn croqam_modem_cp_len(modem: *const CroqamModem) -> usize {
    modem.as_ref().map_or(0, |m| m.inner.config().cp_length)
}

/// Noise enhancement of the modem's detector in dB.
///
/// # Safety
/// `modem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn croqam_modem_xi_db(
    modem: *const CroqamModem,
    out: *mut f64,
) -> CroqamStatus {
    guarded(|| {
        let m = &modem.as_ref().ok_or_else(|| null("modem"))?.inner;
        *out.as_mut().ok_or_else(|| null("out"))? = m.xi_db();
        Ok(())
    })
}

/// One block of samples (no cyclic prefix) from `len` symbols.
///
/// # Safety
/// `symbols` and `samples` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn croqam_modem_modulate(
    modem: *const CroqamModem,
    symbols: *const CroqamComplex,
    samples: *mut CroqamComplex,
    len: usize,
) -> CroqamStatus {
    guarded(|| {
        let m = &modem.as_ref().ok_or_else(|| null("modem"))?.inner;
        check_len(m.n(), len)?;
        let d: Vec<Complex64> = input(symbols, len, "symbols")?
            .iter()
            .map(|&z| z.into())
            .collect();
        let x = m.modulate_samples(&d)?;
        copy_out(&x, output(samples, len, "samples")?);
        Ok(())
    })
}

/// Symbol estimates from one equalized block of `len` samples.
///
/// # Safety
/// `samples` and `symbols` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn croqam_modem_detect(
    modem: *const CroqamModem,
    samples: *const CroqamComplex,
    symbols: *mut CroqamComplex,
    len: usize,
) -> CroqamStatus {
    guarded(|| {
        let m = &modem.as_ref().ok_or_else(|| null("modem"))?.inner;
        check_len(m.n(), len)?;
        let y: Vec<Complex64> = input(samples, len, "samples")?
            .iter()
            .map(|&z| z.into())
            .collect();
        let d = m.detect(&y)?;
        copy_out(&d, output(symbols, len, "symbols")?);
        Ok(())
    })
}

/// Gray-mapped unit-energy 16-QAM points for indices `0..16`.
///
/// # Safety
/// `indices` and `symbols` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn croqam_qam_map(
    indices: *const u32,
    symbols: *mut CroqamComplex,
    len: usize,
) -> CroqamStatus {
    guarded(|| {
        let idx = input(indices, len, "indices")?;
        if let Some(&i) = idx.iter().find(|&&i| i as usize >= ORDER) {
            return Err(Failure(
                CroqamStatus::InvalidArgument,
                format!("symbol index {i} outside 0..{ORDER}"),
            ));
        }
        let mapper = QamMapper::new();
        for (o, &i) in output(symbols, len, "symbols")?.iter_mut().zip(idx) {
            *o = mapper.map(i as usize).into();
        }
        Ok(())
    })
}

/// Nearest-point 16-QAM decisions.
///
/// # Safety
/// `symbols` and `indices` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn croqam_qam_demap(
    symbols: *const CroqamComplex,
    indices: *mut u32,
    len: usize,
) -> CroqamStatus {
    guarded(|| {
        let s = input(symbols, len, "symbols")?;
        let mapper = QamMapper::new();
        for (o, &z) in output(indices, len, "indices")?.iter_mut().zip(s) {
            *o = mapper.demap(z.into()) as u32;
        }
        Ok(())
    })
}
