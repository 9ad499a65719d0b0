//! Brute-force reference implementations used to check the fast paths.
//!
//! Nothing here is meant to be fast. Each routine evaluates its defining
//! sum literally and shares no code with the implementation it verifies,
//! so downstream users can re-run the same checks against their own data.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::waveform::IqBuffer;
use crate::Complex;

/// `out[d] = Σ_k iq[k] · replica[(k − d) mod N]`, evaluated as a double loop.
pub fn direct_circular_correlate(iq: &[Complex], replica: &[f64]) -> Result<Vec<Complex>> {
    let n = iq.len();
    if replica.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: replica.len(),
        });
    }
    let out = (0..n)
        .map(|d| {
            let mut acc = Complex::new(0.0, 0.0);
            for k in 0..n {
                acc += iq[k] * replica[(k + n - d) % n];
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Single-frequency projection power, `|Σ iq[k]·exp(−j2πf·k·T_s)|² / N²`.
pub fn measure_tone_power(iq: &IqBuffer, f_hz: f64) -> f64 {
    let n = iq.len();
    if n == 0 {
        return 0.0;
    }
    let ts = 1.0 / iq.sample_rate_hz();
    let acc: Complex = iq
        .samples()
        .iter()
        .enumerate()
        .map(|(k, s)| s * Complex::from_polar(1.0, -2.0 * PI * f_hz * k as f64 * ts))
        .sum();
    acc.norm_sqr() / (n * n) as f64
}

/// SNR in dB of `noisy` given the exact noise-free `clean` signal.
pub fn empirical_snr_db(clean: &IqBuffer, noisy: &IqBuffer) -> Result<f64> {
    if clean.len() != noisy.len() {
        return Err(Error::LengthMismatch {
            expected: clean.len(),
            actual: noisy.len(),
        });
    }
    let sig: f64 = clean.samples().iter().map(|s| s.norm_sqr()).sum();
    let noise: f64 = clean
        .samples()
        .iter()
        .zip(noisy.samples())
        .map(|(c, y)| (y - c).norm_sqr())
        .sum();
    Ok(10.0 * (sig / noise).log10())
}

/// Shift-register simulation with one `bool` per stage. `stages[0]` is
/// stage 1; taps are 1-based.
pub fn simulate_lfsr(taps: &[usize], mut stages: Vec<bool>, length: usize) -> Vec<u8> {
    let degree = stages.len();
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        out.push(u8::from(stages[degree - 1]));
        let mut fb = false;
        for &t in taps {
            fb ^= stages[t - 1];
        }
        for i in (1..degree).rev() {
            stages[i] = stages[i - 1];
        }
        stages[0] = fb;
    }
    out
}

/// Circular cross-correlation of two ±1 chip codes at every lag.
pub fn chip_cross_correlation(a: &[i8], b: &[i8]) -> Vec<i64> {
    let n = a.len();
    (0..n)
        .map(|lag| {
            (0..n)
                .map(|k| i64::from(a[k]) * i64::from(b[(k + lag) % n]))
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::circular_correlate;
    use crate::prn::{lfsr_sequence, LfsrConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn direct_correlation_small_cases() {
        let one = [Complex::new(1.0, 0.0), Complex::default(), Complex::default(), Complex::default()];
        let out = direct_circular_correlate(&one, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, one.to_vec());

        let replica: Vec<f64> = vec![1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0, 1.0];
        let shifted: Vec<Complex> = (0..8).map(|k| Complex::new(replica[(k + 8 - 3) % 8], 0.0)).collect();
        let out = direct_circular_correlate(&shifted, &replica).unwrap();
        let arg = (0..8).max_by(|&a, &b| out[a].norm().total_cmp(&out[b].norm())).unwrap();
        assert_eq!(arg, 3);

        assert!(direct_circular_correlate(&one, &[1.0]).is_err());
    }

    #[test]
    fn direct_matches_fast_path_length_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let iq: Vec<Complex> = (0..64).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let rep: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let slow = direct_circular_correlate(&iq, &rep).unwrap();
        let fast = circular_correlate(&iq, &rep).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-12));
        }
    }

    #[test]
    fn tone_power_bins() {
        let fs = 7.68e6;
        let n = 7680;
        let f = 1500.0;
        let x: Vec<Complex> = (0..n).map(|k| Complex::from_polar(1.0, 2.0 * PI * f * k as f64 / fs)).collect();
        let buf = IqBuffer::new(x, fs, 0).unwrap();
        assert!((measure_tone_power(&buf, f) - 1.0).abs() < 1e-12);
        let bin = fs / n as f64;
        assert!(measure_tone_power(&buf, f + bin) < 1e-12);
    }

    #[test]
    fn bool_simulation_agrees_with_register() {
        let init = 0b01_1010_0111u32;
        let stages: Vec<bool> = (0..10).map(|i| init >> i & 1 == 1).collect();
        let oracle = simulate_lfsr(&[2, 3, 6, 8, 9, 10], stages, 2046);
        let fast = lfsr_sequence(&LfsrConfig::g2().with_init(init), 2046).unwrap();
        assert_eq!(oracle, fast);
    }
}
