//! Coarse acquisition: carrier wipeoff, circular matched filtering against
//! PRN replicas, delay-Doppler map construction and peak detection.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::prn::{resample_code, samples_for_duration, ChipSequence};
use crate::waveform::IqBuffer;
use crate::Complex;

/// Default detection threshold, peak over mean floor.
pub const DEFAULT_THRESHOLD_DB: f64 = 13.0;

/// Default half-width (in delay samples) of the window kept out of the
/// floor estimate. About one chip at 7.68 MHz.
pub const DEFAULT_FLOOR_EXCLUSION: usize = 8;

/// Doppler search bins `min_hz, min_hz + step_hz, ..., max_hz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerGrid {
    min_hz: f64,
    max_hz: f64,
    step_hz: f64,
}

impl Default for DopplerGrid {
    /// 41 bins over ±10 kHz at 500 Hz.
    fn default() -> Self {
        Self {
            min_hz: -10_000.0,
            max_hz: 10_000.0,
            step_hz: 500.0,
        }
    }
}

impl DopplerGrid {
    pub fn new(min_hz: f64, max_hz: f64, step_hz: f64) -> Result<Self> {
        let span = (max_hz - min_hz) / step_hz;
        if !(step_hz > 0.0 && max_hz >= min_hz && span.is_finite()) {
            return Err(Error::Config(format!(
                "invalid Doppler grid [{min_hz}, {max_hz}] step {step_hz}"
            )));
        }
        if (span - span.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "Doppler span {} Hz is not a multiple of step {step_hz} Hz",
                max_hz - min_hz
            )));
        }
        Ok(Self {
            min_hz,
            max_hz,
            step_hz,
        })
    }

    pub fn min_hz(&self) -> f64 {
        self.min_hz
    }

    pub fn max_hz(&self) -> f64 {
        self.max_hz
    }

    pub fn step_hz(&self) -> f64 {
        self.step_hz
    }

    pub fn bins(&self) -> usize {
        ((self.max_hz - self.min_hz) / self.step_hz).round() as usize + 1
    }

    pub fn value(&self, bin: usize) -> f64 {
        self.min_hz + bin as f64 * self.step_hz
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.value(i)).collect()
    }

    pub fn contains(&self, f_hz: f64) -> bool {
        self.values().contains(&f_hz)
    }
}

/// Correlation magnitude over (Doppler bin × delay sample), row-major by
/// Doppler bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayDopplerMap {
    magnitudes: Vec<f64>,
    n_delay: usize,
    doppler_axis: Vec<f64>,
    sample_rate_hz: f64,
    prn_id: u32,
}

impl DelayDopplerMap {
    pub fn new(
        magnitudes: Vec<f64>,
        n_delay: usize,
        doppler_axis: Vec<f64>,
        sample_rate_hz: f64,
        prn_id: u32,
    ) -> Result<Self> {
        if n_delay == 0 || doppler_axis.is_empty() || magnitudes.len() != n_delay * doppler_axis.len() {
            return Err(Error::LengthMismatch {
                expected: n_delay * doppler_axis.len(),
                actual: magnitudes.len(),
            });
        }
        if magnitudes.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Config("DDM magnitudes must be finite and >= 0".to_string()));
        }
        Ok(Self {
            magnitudes,
            n_delay,
            doppler_axis,
            sample_rate_hz,
            prn_id,
        })
    }

    pub fn prn_id(&self) -> u32 {
        self.prn_id
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn n_delay(&self) -> usize {
        self.n_delay
    }

    pub fn n_doppler(&self) -> usize {
        self.doppler_axis.len()
    }

    pub fn doppler_axis(&self) -> &[f64] {
        &self.doppler_axis
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn row(&self, doppler_bin: usize) -> &[f64] {
        &self.magnitudes[doppler_bin * self.n_delay..(doppler_bin + 1) * self.n_delay]
    }

    pub fn get(&self, doppler_bin: usize, delay: usize) -> f64 {
        self.magnitudes[doppler_bin * self.n_delay + delay]
    }
}

/// Location and height of the largest DDM cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub delay_samples: usize,
    pub doppler_bin: usize,
    pub doppler_hz: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionResult {
    pub prn_id: u32,
    pub peak_delay_samples: usize,
    pub peak_doppler_hz: f64,
    pub peak_magnitude: f64,
    pub peak_to_floor_db: f64,
    pub detected: bool,
}

/// Length-N circular correlator with cached FFT plans.
pub struct Correlator {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Correlator {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Conjugated spectrum of a real replica, reusable across inputs.
    pub fn replica_spectrum(&self, replica: &[f64]) -> Result<Vec<Complex>> {
        self.check_len(replica.len())?;
        let mut buf: Vec<Complex> = replica.iter().map(|&r| Complex::new(r, 0.0)).collect();
        self.forward.process(&mut buf);
        buf.iter_mut().for_each(|c| *c = c.conj());
        Ok(buf)
    }

    /// Correlate `iq` (consumed as a scratch buffer) against a replica given
    /// by its conjugated spectrum.
    pub fn correlate_with_spectrum(&self, mut iq: Vec<Complex>, replica_conj: &[Complex]) -> Result<Vec<Complex>> {
        self.check_len(iq.len())?;
        self.check_len(replica_conj.len())?;
        self.forward.process(&mut iq);
        let scale = 1.0 / self.n as f64;
        for (x, r) in iq.iter_mut().zip(replica_conj) {
            *x *= r * scale;
        }
        self.inverse.process(&mut iq);
        Ok(iq)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }
}

/// `out[d] = Σ_k iq[k] · replica[(k − d) mod N]`, via FFT.
pub fn circular_correlate(iq: &[Complex], replica: &[f64]) -> Result<Vec<Complex>> {
    if iq.len() != replica.len() {
        return Err(Error::LengthMismatch {
            expected: iq.len(),
            actual: replica.len(),
        });
    }
    let corr = Correlator::new(iq.len());
    let spec = corr.replica_spectrum(replica)?;
    corr.correlate_with_spectrum(iq.to_vec(), &spec)
}

/// Build the DDM of a 1 ms capture against `code` over `grid`.
pub fn generate_ddm(iq: &IqBuffer, code: &ChipSequence, grid: &DopplerGrid) -> Result<DelayDopplerMap> {
    let fs = iq.sample_rate_hz();
    let n = samples_for_duration(fs, 1e-3)?;
    if iq.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: iq.len(),
        });
    }
    let replica = resample_code(code, fs, 1e-3)?;
    let corr = Correlator::new(n);
    let spec = corr.replica_spectrum(&replica)?;
    let ts = 1.0 / fs;

    let rows: Vec<Vec<f64>> = grid
        .values()
        .par_iter()
        .map(|&f| {
            let wiped: Vec<Complex> = iq
                .samples()
                .iter()
                .enumerate()
                .map(|(k, s)| s * Complex::from_polar(1.0, -2.0 * PI * f * k as f64 * ts))
                .collect();
            corr.correlate_with_spectrum(wiped, &spec)
                .map(|c| c.iter().map(|v| v.norm()).collect())
        })
        .collect::<Result<_>>()?;

    DelayDopplerMap::new(rows.concat(), n, grid.values(), fs, code.prn_id())
}

/// Global maximum; ties go to the lowest Doppler bin, then lowest delay.
pub fn find_peak(ddm: &DelayDopplerMap) -> Peak {
    let mut best = 0;
    for (i, &m) in ddm.magnitudes().iter().enumerate() {
        if m > ddm.magnitudes()[best] {
            best = i;
        }
    }
    let doppler_bin = best / ddm.n_delay();
    Peak {
        delay_samples: best % ddm.n_delay(),
        doppler_bin,
        doppler_hz: ddm.doppler_axis()[doppler_bin],
        magnitude: ddm.magnitudes()[best],
    }
}

/// Peak over the mean of every cell whose circular delay distance from the
/// peak exceeds `exclusion`, in dB (20·log10).
pub fn peak_to_floor_db(ddm: &DelayDopplerMap, exclusion: usize) -> Result<f64> {
    let n = ddm.n_delay();
    if 2 * exclusion + 1 >= n {
        return Err(Error::Config(format!(
            "exclusion ±{exclusion} covers the whole {n}-sample delay axis"
        )));
    }
    let peak = find_peak(ddm);
    let kept = |d: usize| {
        let dist = (d + n - peak.delay_samples) % n;
        dist.min(n - dist) > exclusion
    };
    let (sum, count) = (0..ddm.n_doppler())
        .flat_map(|row| ddm.row(row).iter().enumerate())
        .filter(|(d, _)| kept(*d))
        .fold((0.0, 0usize), |(s, c), (_, &m)| (s + m, c + 1));
    let floor = sum / count as f64;
    Ok(20.0 * (peak.magnitude / floor).log10())
}

/// DDM plus peak statistics for one code.
pub fn acquire(
    iq: &IqBuffer,
    code: &ChipSequence,
    grid: &DopplerGrid,
    threshold_db: f64,
    exclusion: usize,
) -> Result<(AcquisitionResult, DelayDopplerMap)> {
    let ddm = generate_ddm(iq, code, grid)?;
    let peak = find_peak(&ddm);
    let ratio = peak_to_floor_db(&ddm, exclusion)?;
    let result = AcquisitionResult {
        prn_id: code.prn_id(),
        peak_delay_samples: peak.delay_samples,
        peak_doppler_hz: peak.doppler_hz,
        peak_magnitude: peak.magnitude,
        peak_to_floor_db: ratio,
        detected: ratio >= threshold_db,
    };
    Ok((result, ddm))
}

/// How [`detect_satellite`] chooses among candidate codes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SearchPolicy {
    /// Search every candidate and keep the one with the highest
    /// peak-to-floor ratio; ties keep the earlier candidate.
    #[default]
    Strongest,
    /// Stop at the first candidate, in list order, that clears the
    /// threshold. A wrong code whose noise or cross-correlation extreme
    /// clears the threshold ends the search early.
    FirstAboveThreshold,
}

/// Satellite search with the default [`SearchPolicy::Strongest`].
///
/// If no candidate clears the threshold the strongest one is returned with
/// `detected == false`.
pub fn detect_satellite(
    ds: &IqBuffer,
    candidates: &[ChipSequence],
    grid: &DopplerGrid,
    threshold_db: f64,
) -> Result<(AcquisitionResult, DelayDopplerMap)> {
    detect_satellite_with(ds, candidates, grid, threshold_db, SearchPolicy::default())
}

pub fn detect_satellite_with(
    ds: &IqBuffer,
    candidates: &[ChipSequence],
    grid: &DopplerGrid,
    threshold_db: f64,
    policy: SearchPolicy,
) -> Result<(AcquisitionResult, DelayDopplerMap)> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate PRN codes".to_string()));
    }
    let mut best: Option<(AcquisitionResult, DelayDopplerMap)> = None;
    for code in candidates {
        let (res, ddm) = acquire(ds, code, grid, threshold_db, DEFAULT_FLOOR_EXCLUSION)?;
        if res.detected && policy == SearchPolicy::FirstAboveThreshold {
            return Ok((res, ddm));
        }
        if best.as_ref().is_none_or(|(b, _)| res.peak_to_floor_db > b.peak_to_floor_db) {
            best = Some((res, ddm));
        }
    }
    Ok(best.expect("non-empty candidates"))
}
