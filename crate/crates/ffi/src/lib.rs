//! C interface to the navic-gnssr simulator and receiver.
//!
//! Every function returns a [`NavicStatus`]. On failure a description is
//! kept per thread and can be fetched with [`navic_last_error_message`].
//! Handles returned through out-pointers are owned by the caller and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use navic_gnssr::acquisition::{generate_ddm, AcquisitionResult, DEFAULT_THRESHOLD_DB};
use navic_gnssr::channel::synthesize_scene;
use navic_gnssr::experiments::Receiver;
use navic_gnssr::io::{read_iq, write_iq};
use navic_gnssr::{CodeTable, Complex, DelayDopplerMap, DopplerGrid, Error, IqBuffer, ScenarioConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownPrn = 3,
    LengthMismatch = 4,
    RateMismatch = 5,
    BufferTooSmall = 6,
    Io = 7,
    Format = 8,
    Panic = 9,
}

/// Opaque complex sample buffer.
pub struct NavicIq(IqBuffer);

/// Opaque delay-Doppler map.
pub struct NavicDdm(DelayDopplerMap);

/// Scenario parameters; see [`navic_scenario_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NavicScenario {
    pub prn_id: u32,
    pub a_d: f64,
    pub a_gr: f64,
    pub k_d: u64,
    pub k_gr: u64,
    pub f_d: f64,
    pub f_gr: f64,
    /// Per-sample SNR in dB; infinity disables noise.
    pub snr_db: f64,
    pub seed: u64,
    pub sample_rate_hz: f64,
    pub n_ms: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NavicAcquisition {
    pub prn_id: u32,
    pub peak_delay_samples: u64,
    pub peak_doppler_hz: f64,
    pub peak_magnitude: f64,
    pub peak_to_floor_db: f64,
    pub detected: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NavicPairResult {
    pub ds: NavicAcquisition,
    pub grs: NavicAcquisition,
    pub delay_offset_samples: u64,
    pub range_offset_m: f64,
    /// Both channels cleared the threshold.
    pub detected: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> NavicStatus {
    match err {
        Error::Config(_) | Error::NoAcquisition { .. } => NavicStatus::InvalidArgument,
        Error::UnknownPrn { .. } => NavicStatus::UnknownPrn,
        Error::LengthMismatch { .. } => NavicStatus::LengthMismatch,
        Error::RateMismatch { .. } => NavicStatus::RateMismatch,
        Error::Io(_) => NavicStatus::Io,
        Error::Parse { .. } | Error::BadMagic { .. } | Error::Truncated { .. } | Error::CountMismatch { .. } => {
            NavicStatus::Format
        }
    }
}

struct Failure(NavicStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NavicStatus::NullPointer, format!("{what} is null"))
}

fn guard<F>(f: F) -> NavicStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NavicStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            NavicStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a, T>(p: *mut T, cap: usize, need: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if cap < need {
        return Err(Failure(
            NavicStatus::BufferTooSmall,
            format!("{what} holds {cap} elements, {need} required"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(NavicStatus::InvalidArgument, "path is not valid UTF-8".to_string()))?;
    Ok(Path::new(s))
}

fn to_usize(v: u64, what: &str) -> Result<usize, Failure> {
    usize::try_from(v).map_err(|_| Failure(NavicStatus::InvalidArgument, format!("{what} out of range")))
}

fn acquisition(r: &AcquisitionResult) -> NavicAcquisition {
    NavicAcquisition {
        prn_id: r.prn_id,
        peak_delay_samples: r.peak_delay_samples as u64,
        peak_doppler_hz: r.peak_doppler_hz,
        peak_magnitude: r.peak_magnitude,
        peak_to_floor_db: r.peak_to_floor_db,
        detected: r.detected,
    }
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn navic_last_error_message(buf: *mut c_char, len: usize) -> usize {
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

/// # Safety
/// `out` must be null or point to writable memory for one scenario.
#[no_mangle]
pub unsafe extern "C" fn navic_scenario_default(out: *mut NavicScenario) -> NavicStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = ScenarioConfig::default();
        *out = NavicScenario {
            prn_id: d.prn_id,
            a_d: d.a_d,
            a_gr: d.a_gr,
            k_d: d.k_d as u64,
            k_gr: d.k_gr as u64,
            f_d: d.f_d,
            f_gr: d.f_gr,
            snr_db: d.snr_db,
            seed: d.seed,
            sample_rate_hz: d.sample_rate_hz,
            n_ms: d.n_ms as u64,
        };
        Ok(())
    })
}

/// Synthesize the DS and GRS captures of a scenario with the built-in code
/// table.
///
/// # Safety
/// `scenario` must be null or valid; `ds` and `grs` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn navic_scene_synthesize(
    scenario: *const NavicScenario,
    ds: *mut *mut NavicIq,
    grs: *mut *mut NavicIq,
) -> NavicStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        if ds.is_null() || grs.is_null() {
            return Err(null("output handle"));
        }
        let cfg = ScenarioConfig {
            prn_id: s.prn_id,
            a_d: s.a_d,
            a_gr: s.a_gr,
            k_d: to_usize(s.k_d, "k_d")?,
            k_gr: to_usize(s.k_gr, "k_gr")?,
            f_d: s.f_d,
            f_gr: s.f_gr,
            snr_db: s.snr_db,
            seed: s.seed,
            sample_rate_hz: s.sample_rate_hz,
            n_ms: to_usize(s.n_ms, "n_ms")?,
        };
        let code = CodeTable::default().generate(cfg.prn_id)?;
        let (d, g) = synthesize_scene(&cfg, &code)?;
        *ds = Box::into_raw(Box::new(NavicIq(d)));
        *grs = Box::into_raw(Box::new(NavicIq(g)));
        Ok(())
    })
}

/// Build a buffer from `len` interleaved I/Q pairs (`2 * len` doubles).
///
/// # Safety
/// `interleaved` must be valid for `2 * len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn navic_iq_new(
    interleaved: *const f64,
    len: usize,
    sample_rate_hz: f64,
    start_index: i64,
    out: *mut *mut NavicIq,
) -> NavicStatus {
    guard(|| {
        if interleaved.is_null() {
            return Err(null("interleaved"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let raw = std::slice::from_raw_parts(interleaved, 2 * len);
        let samples = raw.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect();
        let buf = IqBuffer::new(samples, sample_rate_hz, start_index)?;
        *out = Box::into_raw(Box::new(NavicIq(buf)));
        Ok(())
    })
}

/// # Safety
/// `iq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn navic_iq_len(iq: *const NavicIq, len: *mut usize) -> NavicStatus {
    guard(|| {
        let iq = deref(iq, "iq")?;
        *len.as_mut().ok_or_else(|| null("len"))? = iq.0.len();
        Ok(())
    })
}

/// # Safety
/// `iq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn navic_iq_sample_rate(iq: *const NavicIq, rate_hz: *mut f64) -> NavicStatus {
    guard(|| {
        let iq = deref(iq, "iq")?;
        *rate_hz.as_mut().ok_or_else(|| null("rate_hz"))? = iq.0.sample_rate_hz();
        Ok(())
    })
}

/// Copy the samples as interleaved I/Q; `cap` counts doubles and must be at
/// least `2 * len`.
///
/// # Safety
/// `iq` must be a live handle and `out` valid for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn navic_iq_copy(iq: *const NavicIq, out: *mut f64, cap: usize) -> NavicStatus {
    guard(|| {
        let iq = deref(iq, "iq")?;
        let dst = out_slice(out, cap, 2 * iq.0.len(), "out")?;
        for (pair, s) in dst.chunks_exact_mut(2).zip(iq.0.samples()) {
            pair[0] = s.re;
            pair[1] = s.im;
        }
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn navic_iq_read(path: *const c_char, out: *mut *mut NavicIq) -> NavicStatus {
    guard(|| {
        let path = path_arg(path)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let buf = read_iq(path)?;
        *out = Box::into_raw(Box::new(NavicIq(buf)));
        Ok(())
    })
}

/// # Safety
/// `iq` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn navic_iq_write(iq: *const NavicIq, path: *const c_char) -> NavicStatus {
    guard(|| {
        let iq = deref(iq, "iq")?;
        write_iq(path_arg(path)?, &iq.0)?;
        Ok(())
    })
}

/// # Safety
/// `iq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn navic_iq_free(iq: *mut NavicIq) {
    if !iq.is_null() {
        drop(Box::from_raw(iq));
    }
}

/// Write the 1023 ±1 chips of a built-in PRN into `out`.
///
/// # Safety
/// `out` must be valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn navic_prn_chips(prn_id: u32, out: *mut i8, cap: usize) -> NavicStatus {
    guard(|| {
        let code = CodeTable::default().generate(prn_id)?;
        out_slice(out, cap, code.chips().len(), "out")?.copy_from_slice(code.chips());
        Ok(())
    })
}

/// DDM of a 1 ms capture against a built-in PRN over ±10 kHz at 500 Hz.
///
/// # Safety
/// `iq` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn navic_ddm_generate(iq: *const NavicIq, prn_id: u32, out: *mut *mut NavicDdm) -> NavicStatus {
    guard(|| {
        let iq = deref(iq, "iq")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let code = CodeTable::default().generate(prn_id)?;
        let ddm = generate_ddm(&iq.0, &code, &DopplerGrid::default())?;
        *out = Box::into_raw(Box::new(NavicDdm(ddm)));
        Ok(())
    })
}

/// # Safety
/// `ddm` must be a live handle; the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn navic_ddm_dims(ddm: *const NavicDdm, n_doppler: *mut usize, n_delay: *mut usize) -> NavicStatus {
    guard(|| {
        let ddm = deref(ddm, "ddm")?;
        *n_doppler.as_mut().ok_or_else(|| null("n_doppler"))? = ddm.0.n_doppler();
        *n_delay.as_mut().ok_or_else(|| null("n_delay"))? = ddm.0.n_delay();
        Ok(())
    })
}

/// Copy magnitudes, row-major by Doppler bin.
///
/// # Safety
/// `ddm` must be a live handle and `out` valid for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn navic_ddm_copy(ddm: *const NavicDdm, out: *mut f64, cap: usize) -> NavicStatus {
    guard(|| {
        let m = deref(ddm, "ddm")?.0.magnitudes();
        out_slice(out, cap, m.len(), "out")?.copy_from_slice(m);
        Ok(())
    })
}

/// # Safety
/// `ddm` must be a live handle and `out` valid for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn navic_ddm_doppler_axis(ddm: *const NavicDdm, out: *mut f64, cap: usize) -> NavicStatus {
    guard(|| {
        let axis = deref(ddm, "ddm")?.0.doppler_axis();
        out_slice(out, cap, axis.len(), "out")?.copy_from_slice(axis);
        Ok(())
    })
}

/// # Safety
/// `ddm` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn navic_ddm_free(ddm: *mut NavicDdm) {
    if !ddm.is_null() {
        drop(Box::from_raw(ddm));
    }
}

/// Identify the satellite on `ds` over the built-in codes, acquire `grs`
/// with it and estimate the range offset. A NaN threshold selects the
/// default of 13 dB.
///
/// # Safety
/// `ds` and `grs` must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn navic_acquire_pair(
    ds: *const NavicIq,
    grs: *const NavicIq,
    threshold_db: f64,
    out: *mut NavicPairResult,
) -> NavicStatus {
    guard(|| {
        let ds = deref(ds, "ds")?;
        let grs = deref(grs, "grs")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let threshold = if threshold_db.is_nan() { DEFAULT_THRESHOLD_DB } else { threshold_db };
        let rx = Receiver::from_table(&CodeTable::default())?.with_threshold(threshold);
        let res = rx.process(&ds.0, &grs.0)?;
        *out = NavicPairResult {
            ds: acquisition(&res.ds),
            grs: acquisition(&res.grs),
            delay_offset_samples: res.estimate.delay_offset_samples as u64,
            range_offset_m: res.estimate.range_offset_m,
            detected: res.detected(),
        };
        Ok(())
    })
}
