//! Baseband packet synthesis and the ×8 interpolation / ÷8 decimation FIR
//! chains between the acquisition rate and the converter rate.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::prn::{resample_code, ChipSequence};
use crate::{Complex, ACQ_SAMPLE_RATE_HZ, TX_SAMPLE_RATE_HZ};

/// Tap counts of the interpolation stages, in processing order.
pub const INTERP_TAPS: [usize; 3] = [23, 15, 15];

/// Tap counts of the decimation stages, in processing order.
pub const DECIM_TAPS: [usize; 3] = [15, 15, 23];

/// Cutoff of every half-rate stage, as a fraction of the stage's Nyquist.
pub const STAGE_CUTOFF: f64 = 0.5;

/// Residual delay of either chain in output samples. Every stage trims
/// exactly its filter's (taps - 1) / 2 group delay, so nothing is left.
pub const CHAIN_GROUP_DELAY: usize = 0;

/// Complex baseband samples at a fixed rate.
///
/// `start_index` is the fast-time index of the first sample; sample `i`
/// sits at time `(start_index + i) / sample_rate_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBuffer {
    samples: Vec<Complex>,
    sample_rate_hz: f64,
    start_index: i64,
}

impl IqBuffer {
    pub fn new(samples: Vec<Complex>, sample_rate_hz: f64, start_index: i64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Config(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(pos) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::Config(format!("sample {pos} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            start_index,
        })
    }

    /// Real-valued samples with zero quadrature.
    pub fn from_real(real: &[f64], sample_rate_hz: f64) -> Result<Self> {
        Self::new(
            real.iter().map(|&r| Complex::new(r, 0.0)).collect(),
            sample_rate_hz,
            0,
        )
    }

    pub fn samples(&self) -> &[Complex] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean squared magnitude.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Same buffer with every component rounded to f32 precision, which is
    /// what the on-disk IQ format stores.
    pub fn round_to_f32(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| Complex::new(f64::from(s.re as f32), f64::from(s.im as f32)))
            .collect();
        Self {
            samples,
            ..*self
        }
    }

    /// Emulate a `bits`-wide ADC: scale the largest component to full scale,
    /// round to the integer grid and scale back.
    pub fn quantize(&self, bits: u32) -> Result<Self> {
        if !(2..=32).contains(&bits) {
            return Err(Error::Config(format!("quantizer width {bits} outside 2..=32")));
        }
        let peak = self
            .samples
            .iter()
            .map(|s| s.re.abs().max(s.im.abs()))
            .fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(self.clone());
        }
        let full_scale = f64::from((1u32 << (bits - 1)) - 1);
        let step = peak / full_scale;
        let q = |v: f64| (v / step).round() * step;
        let samples = self.samples.iter().map(|s| Complex::new(q(s.re), q(s.im))).collect();
        Ok(Self {
            samples,
            ..*self
        })
    }

    fn with_samples(&self, samples: Vec<Complex>, sample_rate_hz: f64) -> Self {
        Self {
            samples,
            sample_rate_hz,
            start_index: self.start_index,
        }
    }
}

/// Unit-amplitude real baseband packet: the resampled code tiled `n_ms` times.
pub fn synthesize_baseband(code: &ChipSequence, sample_rate_hz: f64, n_ms: usize) -> Result<IqBuffer> {
    if n_ms == 0 {
        return Err(Error::Config("packet length must be at least 1 ms".to_string()));
    }
    let period = resample_code(code, sample_rate_hz, 1e-3)?;
    let samples = period
        .iter()
        .cycle()
        .take(period.len() * n_ms)
        .map(|&c| Complex::new(c, 0.0))
        .collect();
    IqBuffer::new(samples, sample_rate_hz, 0)
}

/// One half-rate FIR stage.
#[derive(Debug, Clone, PartialEq)]
pub struct FirStage {
    coefficients: Vec<f64>,
    factor: usize,
}

impl FirStage {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn num_taps(&self) -> usize {
        self.coefficients.len()
    }

    /// Filter with the output aligned to the input: full convolution with
    /// (taps - 1) / 2 samples dropped from each end.
    fn filter_centered(&self, x: &[Complex], gain: f64) -> Vec<Complex> {
        let h = &self.coefficients;
        let half = (h.len() - 1) / 2;
        let n = x.len() as isize;
        (0..x.len())
            .map(|m| {
                let mut acc = Complex::new(0.0, 0.0);
                for (j, &c) in h.iter().enumerate() {
                    let idx = m as isize + half as isize - j as isize;
                    if (0..n).contains(&idx) {
                        acc += x[idx as usize] * c;
                    }
                }
                acc * gain
            })
            .collect()
    }

    /// Zero-stuff by the stage factor, then low-pass with gain = factor.
    pub fn interpolate(&self, x: &[Complex]) -> Vec<Complex> {
        let mut up = vec![Complex::new(0.0, 0.0); x.len() * self.factor];
        for (i, &s) in x.iter().enumerate() {
            up[i * self.factor] = s;
        }
        self.filter_centered(&up, self.factor as f64)
    }

    /// Low-pass, then keep every `factor`-th sample.
    pub fn decimate(&self, x: &[Complex]) -> Vec<Complex> {
        self.filter_centered(x, 1.0)
            .into_iter()
            .step_by(self.factor)
            .collect()
    }
}

/// Hamming-windowed sinc low-pass with unity DC gain.
///
/// `cutoff_normalized` is a fraction of Nyquist. Even- and odd-indexed taps
/// each sum to exactly 1/2.
pub fn design_lowpass(num_taps: usize, cutoff_normalized: f64) -> Result<FirStage> {
    if num_taps % 2 == 0 || num_taps < 3 {
        return Err(Error::Config(format!(
            "FIR tap count must be odd and at least 3, got {num_taps}"
        )));
    }
    if !(cutoff_normalized > 0.0 && cutoff_normalized < 1.0) {
        return Err(Error::Config(format!(
            "cutoff must be in (0, 1) of Nyquist, got {cutoff_normalized}"
        )));
    }
    let mid = (num_taps - 1) as f64 / 2.0;
    let mut h: Vec<f64> = (0..num_taps)
        .map(|n| {
            let x = n as f64 - mid;
            let ideal = if x == 0.0 {
                cutoff_normalized
            } else {
                (PI * cutoff_normalized * x).sin() / (PI * x)
            };
            let window = 0.54 - 0.46 * (2.0 * PI * n as f64 / (num_taps - 1) as f64).cos();
            ideal * window
        })
        .collect();
    // Unity DC gain split evenly between the two polyphase branches, so a
    // zero-stuffed ×2 stage reproduces DC without ripple.
    for phase in 0..2 {
        let sum: f64 = h.iter().skip(phase).step_by(2).sum();
        h.iter_mut().skip(phase).step_by(2).for_each(|c| *c *= 0.5 / sum);
    }
    // Force exact symmetry after normalization.
    for i in 0..num_taps / 2 {
        let avg = 0.5 * (h[i] + h[num_taps - 1 - i]);
        h[i] = avg;
        h[num_taps - 1 - i] = avg;
    }
    Ok(FirStage {
        coefficients: h,
        factor: 2,
    })
}

fn chain(taps: &[usize; 3]) -> Vec<FirStage> {
    taps.iter()
        .map(|&n| design_lowpass(n, STAGE_CUTOFF).expect("fixed odd tap counts"))
        .collect()
}

fn check_rate(iq: &IqBuffer, expected: f64) -> Result<()> {
    if (iq.sample_rate_hz() - expected).abs() > 1e-6 * expected {
        return Err(Error::RateMismatch {
            expected,
            actual: iq.sample_rate_hz(),
        });
    }
    Ok(())
}

/// 7.68 MHz → 61.44 MHz through three ×2 stages (23, 15, 15 taps).
pub fn interpolate_x8(iq: &IqBuffer) -> Result<IqBuffer> {
    check_rate(iq, ACQ_SAMPLE_RATE_HZ)?;
    let out = chain(&INTERP_TAPS)
        .iter()
        .fold(iq.samples().to_vec(), |x, stage| stage.interpolate(&x));
    Ok(iq.with_samples(out, TX_SAMPLE_RATE_HZ))
}

/// 61.44 MHz → 7.68 MHz through three ÷2 stages (15, 15, 23 taps).
pub fn decimate_x8(iq: &IqBuffer) -> Result<IqBuffer> {
    check_rate(iq, TX_SAMPLE_RATE_HZ)?;
    if iq.len() % 8 != 0 {
        return Err(Error::Config(format!(
            "decimation input length {} is not a multiple of 8",
            iq.len()
        )));
    }
    let out = chain(&DECIM_TAPS)
        .iter()
        .fold(iq.samples().to_vec(), |x, stage| stage.decimate(&x));
    Ok(iq.with_samples(out, ACQ_SAMPLE_RATE_HZ))
}
