//! Bistatic target estimates from DS/GRS acquisitions, and trial metrics.

use crate::acquisition::AcquisitionResult;
use crate::channel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

/// Bistatic range offset and Dopplers recovered from one DS/GRS pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetEstimate {
    /// Wrapped GRS − DS peak delay, samples in `[0, N)`.
    pub delay_offset_samples: usize,
    pub range_offset_m: f64,
    pub doppler_ds_hz: f64,
    pub doppler_grs_hz: f64,
    pub ds_peak_to_floor_db: f64,
    pub grs_peak_to_floor_db: f64,
}

/// Estimate from two detected acquisitions of the same PRN.
///
/// `n_delay` is the DDM delay-axis length (samples per code period).
pub fn estimate_target(
    ds: &AcquisitionResult,
    grs: &AcquisitionResult,
    sample_rate_hz: f64,
    n_delay: usize,
) -> Result<TargetEstimate> {
    if !ds.detected {
        return Err(Error::NoAcquisition { channel: "DS" });
    }
    if !grs.detected {
        return Err(Error::NoAcquisition { channel: "GRS" });
    }
    if ds.prn_id != grs.prn_id {
        return Err(Error::Config(format!(
            "DS acquired PRN {} but GRS acquired PRN {}",
            ds.prn_id, grs.prn_id
        )));
    }
    estimate_from_peaks(ds, grs, sample_rate_hz, n_delay)
}

/// Same arithmetic as [`estimate_target`] without the detection checks,
/// for reporting missed trials.
pub fn estimate_from_peaks(
    ds: &AcquisitionResult,
    grs: &AcquisitionResult,
    sample_rate_hz: f64,
    n_delay: usize,
) -> Result<TargetEstimate> {
    if n_delay == 0 || ds.peak_delay_samples >= n_delay || grs.peak_delay_samples >= n_delay {
        return Err(Error::Config(format!(
            "peak delays {} / {} outside a {n_delay}-sample axis",
            ds.peak_delay_samples, grs.peak_delay_samples
        )));
    }
    let offset = (grs.peak_delay_samples + n_delay - ds.peak_delay_samples) % n_delay;
    Ok(TargetEstimate {
        delay_offset_samples: offset,
        range_offset_m: offset as f64 * SPEED_OF_LIGHT / sample_rate_hz,
        doppler_ds_hz: ds.peak_doppler_hz,
        doppler_grs_hz: grs.peak_doppler_hz,
        ds_peak_to_floor_db: ds.peak_to_floor_db,
        grs_peak_to_floor_db: grs.peak_to_floor_db,
    })
}

/// One simulated trial against its continuous ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub scenario: ScenarioConfig,
    pub estimate: TargetEstimate,
    pub truth_range_m: f64,
    pub truth_f_d: f64,
    pub truth_f_gr: f64,
    pub range_error_m: f64,
    /// Error of the bistatic (GRS) Doppler.
    pub doppler_error_hz: f64,
    pub detected: bool,
}

impl TrialReport {
    pub fn new(
        scenario: ScenarioConfig,
        estimate: TargetEstimate,
        truth_range_m: f64,
        detected: bool,
    ) -> Self {
        let truth_f_d = scenario.f_d;
        let truth_f_gr = scenario.f_gr;
        Self {
            range_error_m: estimate.range_offset_m - truth_range_m,
            doppler_error_hz: estimate.doppler_grs_hz - truth_f_gr,
            scenario,
            estimate,
            truth_range_m,
            truth_f_d,
            truth_f_gr,
            detected,
        }
    }

    pub fn doppler_ds_error_hz(&self) -> f64 {
        self.estimate.doppler_ds_hz - self.truth_f_d
    }
}

/// RMSE figures are taken over detected trials; NaN when none detected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub trials: usize,
    pub detection_rate: f64,
    pub rmse_range_m: f64,
    pub rmse_doppler_hz: f64,
    pub rmse_doppler_ds_hz: f64,
}

pub fn evaluate_trials(reports: &[TrialReport]) -> Result<TrialSummary> {
    if reports.is_empty() {
        return Err(Error::Config("no trials to evaluate".to_string()));
    }
    let detected: Vec<&TrialReport> = reports.iter().filter(|r| r.detected).collect();
    let rmse = |f: &dyn Fn(&TrialReport) -> f64| {
        if detected.is_empty() {
            return f64::NAN;
        }
        (detected.iter().map(|r| f(r).powi(2)).sum::<f64>() / detected.len() as f64).sqrt()
    };
    Ok(TrialSummary {
        trials: reports.len(),
        detection_rate: detected.len() as f64 / reports.len() as f64,
        rmse_range_m: rmse(&|r| r.range_error_m),
        rmse_doppler_hz: rmse(&|r| r.doppler_error_hz),
        rmse_doppler_ds_hz: rmse(&|r| r.doppler_ds_error_hz()),
    })
}
