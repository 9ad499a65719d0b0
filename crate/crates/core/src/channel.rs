//! Bistatic channel emulation: produces the synchronized direct (DS) and
//! ground-reflected (GRS) captures from a scenario description.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::prn::ChipSequence;
use crate::waveform::{decimate_x8, interpolate_x8, synthesize_baseband, IqBuffer};
use crate::{Complex, ACQ_SAMPLE_RATE_HZ, SPEED_OF_LIGHT};

/// Largest Doppler magnitude a scenario may carry, Hz.
pub const MAX_DOPPLER_HZ: f64 = 10e3;

/// One bistatic experiment.
///
/// Delays are in samples at `sample_rate_hz`. `snr_db` is the per-sample
/// SNR applied independently to each channel; `f64::INFINITY` disables
/// noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub prn_id: u32,
    pub a_d: f64,
    pub a_gr: f64,
    pub k_d: usize,
    pub k_gr: usize,
    pub f_d: f64,
    pub f_gr: f64,
    pub snr_db: f64,
    pub seed: u64,
    pub sample_rate_hz: f64,
    pub n_ms: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            prn_id: 2,
            a_d: 1.0,
            a_gr: 0.5,
            k_d: 0,
            k_gr: 0,
            f_d: 0.0,
            f_gr: 0.0,
            snr_db: f64::INFINITY,
            seed: 0,
            sample_rate_hz: ACQ_SAMPLE_RATE_HZ,
            n_ms: 1,
        }
    }
}

const KEYS: [&str; 11] = [
    "prn_id",
    "a_d",
    "a_gr",
    "k_d",
    "k_gr",
    "f_d",
    "f_gr",
    "snr_db",
    "seed",
    "sample_rate_hz",
    "n_ms",
];

impl ScenarioConfig {
    pub fn samples_per_capture(&self) -> usize {
        (self.n_ms as f64 * self.sample_rate_hz / 1e3).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return fail(format!("sample_rate_hz must be positive, got {}", self.sample_rate_hz));
        }
        if self.n_ms == 0 {
            return fail("n_ms must be at least 1".to_string());
        }
        if !(self.a_d > 0.0 && self.a_gr > 0.0 && self.a_gr <= self.a_d) {
            return fail(format!(
                "amplitudes must satisfy 0 < a_gr <= a_d, got a_d={} a_gr={}",
                self.a_d, self.a_gr
            ));
        }
        let n = self.samples_per_capture();
        if !(self.k_d <= self.k_gr && self.k_gr < n) {
            return fail(format!(
                "delays must satisfy 0 <= k_d <= k_gr < {n}, got k_d={} k_gr={}",
                self.k_d, self.k_gr
            ));
        }
        for (name, f) in [("f_d", self.f_d), ("f_gr", self.f_gr)] {
            if !(f.abs() <= MAX_DOPPLER_HZ) {
                return fail(format!("{name}={f} Hz outside ±{MAX_DOPPLER_HZ} Hz"));
            }
        }
        if self.snr_db.is_nan() {
            return fail("snr_db is NaN".to_string());
        }
        Ok(())
    }

    /// Parse `key=value` lines. Every key is optional and falls back to
    /// [`ScenarioConfig::default`]; unknown keys are errors.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(perr(lineno, format!("expected key=value, got {line:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&key) = KEYS.iter().find(|&&k| k == key) else {
                return Err(perr(lineno, format!("unknown key {key:?}")));
            };
            if seen.contains(&key) {
                return Err(perr(lineno, format!("duplicate key {key:?}")));
            }
            seen.push(key);
            let bad = || perr(lineno, format!("bad value {value:?} for {key}"));
            match key {
                "prn_id" => cfg.prn_id = value.parse().map_err(|_| bad())?,
                "a_d" => cfg.a_d = value.parse().map_err(|_| bad())?,
                "a_gr" => cfg.a_gr = value.parse().map_err(|_| bad())?,
                "k_d" => cfg.k_d = value.parse().map_err(|_| bad())?,
                "k_gr" => cfg.k_gr = value.parse().map_err(|_| bad())?,
                "f_d" => cfg.f_d = value.parse().map_err(|_| bad())?,
                "f_gr" => cfg.f_gr = value.parse().map_err(|_| bad())?,
                "snr_db" => cfg.snr_db = value.parse().map_err(|_| bad())?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad())?,
                "sample_rate_hz" => cfg.sample_rate_hz = value.parse().map_err(|_| bad())?,
                "n_ms" => cfg.n_ms = value.parse().map_err(|_| bad())?,
                _ => unreachable!(),
            }
        }
        cfg.validate().map_err(|e| perr(0, e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "prn_id={}", self.prn_id);
        let _ = writeln!(s, "a_d={}", self.a_d);
        let _ = writeln!(s, "a_gr={}", self.a_gr);
        let _ = writeln!(s, "k_d={}", self.k_d);
        let _ = writeln!(s, "k_gr={}", self.k_gr);
        let _ = writeln!(s, "f_d={}", self.f_d);
        let _ = writeln!(s, "f_gr={}", self.f_gr);
        let _ = writeln!(s, "snr_db={}", self.snr_db);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "sample_rate_hz={}", self.sample_rate_hz);
        let _ = writeln!(s, "n_ms={}", self.n_ms);
        s
    }
}

/// `out[k] = a · in[(k − k0) mod N] · exp(j2π·f·k·T_s)`, with `k` the
/// absolute fast-time index.
pub fn apply_delay_doppler_gain(iq: &IqBuffer, k0: usize, f_hz: f64, a: f64) -> Result<IqBuffer> {
    let n = iq.len();
    if k0 >= n {
        return Err(Error::Config(format!(
            "delay {k0} outside buffer of {n} samples"
        )));
    }
    let ts = 1.0 / iq.sample_rate_hz();
    let x = iq.samples();
    let out = (0..n)
        .map(|i| {
            let k = iq.start_index() as f64 + i as f64;
            x[(i + n - k0) % n] * Complex::from_polar(a, 2.0 * PI * f_hz * k * ts)
        })
        .collect();
    IqBuffer::new(out, iq.sample_rate_hz(), iq.start_index())
}

/// Add circularly-symmetric complex Gaussian noise with per-sample variance
/// `mean_power(iq) / 10^(snr_db/10)`.
pub fn add_awgn(iq: &IqBuffer, snr_db: f64, seed: u64) -> Result<IqBuffer> {
    if iq.is_empty() {
        return Err(Error::Config("cannot add noise to an empty buffer".to_string()));
    }
    let variance = iq.mean_power() / 10f64.powf(snr_db / 10.0);
    if variance == 0.0 {
        return Ok(iq.clone());
    }
    let sigma = (variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = iq
        .samples()
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex::new(re, im) * sigma
        })
        .collect();
    IqBuffer::new(out, iq.sample_rate_hz(), iq.start_index())
}

/// How the transmit waveform reaches the channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SceneOptions {
    /// Route each path through `interpolate_x8` then `decimate_x8` before
    /// noise is added. Requires the 7.68 MHz acquisition rate.
    pub full_chain: bool,
}

/// DS and GRS captures for `cfg`; noise seeds are `seed` and `seed + 1`.
pub fn synthesize_scene(cfg: &ScenarioConfig, code: &ChipSequence) -> Result<(IqBuffer, IqBuffer)> {
    synthesize_scene_with(cfg, code, SceneOptions::default())
}

pub fn synthesize_scene_with(
    cfg: &ScenarioConfig,
    code: &ChipSequence,
    opts: SceneOptions,
) -> Result<(IqBuffer, IqBuffer)> {
    cfg.validate()?;
    if code.prn_id() != cfg.prn_id {
        return Err(Error::Config(format!(
            "scenario wants PRN {} but code is PRN {}",
            cfg.prn_id,
            code.prn_id()
        )));
    }
    let baseband = synthesize_baseband(code, cfg.sample_rate_hz, cfg.n_ms)?;
    let path = |k0, f, a, seed| -> Result<IqBuffer> {
        let mut y = apply_delay_doppler_gain(&baseband, k0, f, a)?;
        if opts.full_chain {
            y = decimate_x8(&interpolate_x8(&y)?)?;
        }
        add_awgn(&y, cfg.snr_db, seed)
    };
    let (ds, grs) = rayon::join(
        || path(cfg.k_d, cfg.f_d, cfg.a_d, cfg.seed),
        || path(cfg.k_gr, cfg.f_gr, cfg.a_gr, cfg.seed.wrapping_add(1)),
    );
    Ok((ds?, grs?))
}

/// Bistatic range to whole-sample delay, rounding to nearest.
pub fn range_offset_to_delay_samples(range_m: f64, sample_rate_hz: f64) -> Result<usize> {
    if !(range_m >= 0.0 && range_m.is_finite()) {
        return Err(Error::Config(format!("range must be non-negative, got {range_m}")));
    }
    Ok((range_m * sample_rate_hz / SPEED_OF_LIGHT).round() as usize)
}

pub fn delay_samples_to_range_m(samples: usize, sample_rate_hz: f64) -> f64 {
    samples as f64 * SPEED_OF_LIGHT / sample_rate_hz
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::empirical_snr_db;
    use crate::prn::CodeTable;
    use proptest::prelude::*;

    fn prn2_baseband() -> IqBuffer {
        let code = CodeTable::default().generate(2).unwrap();
        synthesize_baseband(&code, 7.68e6, 1).unwrap()
    }

    #[test]
    fn identity_and_pure_gain() {
        let x = prn2_baseband();
        assert_eq!(apply_delay_doppler_gain(&x, 0, 0.0, 1.0).unwrap(), x);
        let y = apply_delay_doppler_gain(&x, 0, 500.0, 0.5).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((b.norm() - 0.5 * a.norm()).abs() < 1e-15);
        }
        assert!(apply_delay_doppler_gain(&x, 7680, 0.0, 1.0).is_err());
    }

    #[test]
    fn circular_delay_moves_samples() {
        let x = prn2_baseband();
        let y = apply_delay_doppler_gain(&x, 102, 0.0, 1.0).unwrap();
        for k in 0..7680 {
            assert_eq!(y.samples()[(k + 102) % 7680], x.samples()[k]);
        }
    }

    #[test]
    fn awgn_edge_cases() {
        let x = prn2_baseband();
        let y = add_awgn(&x, 300.0, 1).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((a - b).norm() <= 1e-12 * a.norm());
        }
        assert_eq!(add_awgn(&x, -5.0, 9).unwrap(), add_awgn(&x, -5.0, 9).unwrap());
        assert_ne!(add_awgn(&x, -5.0, 9).unwrap(), add_awgn(&x, -5.0, 10).unwrap());
        let empty = IqBuffer::new(vec![], 1e6, 0).unwrap();
        assert!(add_awgn(&empty, 0.0, 0).is_err());
        assert_eq!(add_awgn(&x, f64::INFINITY, 3).unwrap(), x);
    }

    #[test]
    fn awgn_hits_requested_snr() {
        let x = prn2_baseband();
        let y = add_awgn(&x, -10.0, 42).unwrap();
        let snr = empirical_snr_db(&x, &y).unwrap();
        assert!((snr + 10.0).abs() <= 0.5, "{snr}");
    }

    #[test]
    fn awgn_statistics_over_seeds() {
        let x = prn2_baseband();
        let mut snr_sum = 0.0;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        let trials = 100;
        for seed in 0..trials {
            let y = add_awgn(&x, -7.0, seed).unwrap();
            snr_sum += empirical_snr_db(&x, &y).unwrap();
            for (a, b) in x.samples().iter().zip(y.samples()) {
                let e = b - a;
                sxy += e.re * e.im;
                sxx += e.re * e.re;
                syy += e.im * e.im;
            }
        }
        let mean_snr = snr_sum / trials as f64;
        assert!((mean_snr + 7.0).abs() < 0.1, "{mean_snr}");
        let rho = sxy / (sxx * syy).sqrt();
        assert!(rho.abs() < 0.05, "{rho}");
    }

    #[test]
    fn range_conversions() {
        assert_eq!(range_offset_to_delay_samples(4000.0, 7.68e6).unwrap(), 102);
        assert_eq!(delay_samples_to_range_m(102, 7.68e6), 3984.375);
        assert_eq!(range_offset_to_delay_samples(6000.0, 7.68e6).unwrap(), 154);
        assert_eq!(range_offset_to_delay_samples(8000.0, 7.68e6).unwrap(), 205);
        assert_eq!(delay_samples_to_range_m(205, 7.68e6), 8007.8125);
        assert_eq!(range_offset_to_delay_samples(0.0, 7.68e6).unwrap(), 0);
        assert_eq!(delay_samples_to_range_m(0, 7.68e6), 0.0);
        assert!(range_offset_to_delay_samples(-1.0, 7.68e6).is_err());
    }

    #[test]
    fn scene_channels_are_synchronized() {
        let code = CodeTable::default().generate(2).unwrap();
        let cfg = ScenarioConfig {
            k_gr: 102,
            f_d: 1500.0,
            f_gr: 500.0,
            snr_db: -5.0,
            seed: 11,
            ..Default::default()
        };
        let (ds, grs) = synthesize_scene(&cfg, &code).unwrap();
        assert_eq!(ds.len(), grs.len());
        assert_eq!(ds.sample_rate_hz(), grs.sample_rate_hz());
        assert_eq!(ds.start_index(), grs.start_index());

        let other = CodeTable::default().generate(5).unwrap();
        assert!(synthesize_scene(&cfg, &other).is_err());
    }

    #[test]
    fn coincident_paths() {
        let code = CodeTable::default().generate(2).unwrap();
        let cfg = ScenarioConfig {
            a_gr: 1.0,
            k_d: 40,
            k_gr: 40,
            f_d: 1000.0,
            f_gr: 1000.0,
            ..Default::default()
        };
        let (ds, grs) = synthesize_scene(&cfg, &code).unwrap();
        assert_eq!(ds, grs);
        let noisy = ScenarioConfig { snr_db: 0.0, ..cfg };
        let (ds, grs) = synthesize_scene(&noisy, &code).unwrap();
        assert_ne!(ds, grs);
    }

    #[test]
    fn full_chain_scene_keeps_length() {
        let code = CodeTable::default().generate(2).unwrap();
        let cfg = ScenarioConfig { k_gr: 10, ..Default::default() };
        let (ds, _) = synthesize_scene_with(&cfg, &code, SceneOptions { full_chain: true }).unwrap();
        assert_eq!(ds.len(), 7680);
    }

    #[test]
    fn scenario_validation() {
        let ok = ScenarioConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            ScenarioConfig { a_gr: 2.0, ..ok.clone() },
            ScenarioConfig { a_d: 0.0, ..ok.clone() },
            ScenarioConfig { k_d: 5, k_gr: 4, ..ok.clone() },
            ScenarioConfig { k_gr: 7680, ..ok.clone() },
            ScenarioConfig { f_gr: 10_500.0, ..ok.clone() },
            ScenarioConfig { n_ms: 0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn scenario_file_parsing() {
        let text = "# table row 1\nprn_id=2\nk_gr = 102\nf_d=1500 # DS\nf_gr=500\nsnr_db=-5\nseed=7\n";
        let cfg = ScenarioConfig::parse(text, Path::new("s.cfg")).unwrap();
        assert_eq!(cfg.k_gr, 102);
        assert_eq!(cfg.f_d, 1500.0);
        assert_eq!(cfg.snr_db, -5.0);
        assert_eq!(cfg.seed, 7);
        let back = ScenarioConfig::parse(&cfg.to_text(), Path::new("t")).unwrap();
        assert_eq!(back, cfg);
        let inf = ScenarioConfig::parse("snr_db=inf", Path::new("t")).unwrap();
        assert!(inf.snr_db.is_infinite());

        for (bad, line) in [("bogus=1", 1), ("k_d", 1), ("\nf_d=abc", 2), ("seed=1\nseed=2", 2)] {
            match ScenarioConfig::parse(bad, Path::new("b")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
        assert!(ScenarioConfig::parse("a_gr=3", Path::new("b")).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // Carrier phase survives a circular wrap only when the first Doppler
        // completes whole cycles per capture, so f1 is a multiple of 1 kHz.
        #[test]
        fn delay_doppler_composes(k1 in 0usize..7680, k2 in 0usize..7680,
                                  m1 in -10i32..=10, f2 in -1e4f64..1e4,
                                  a1 in 0.1f64..2.0, a2 in 0.1f64..2.0) {
            let x = prn2_baseband();
            let f1 = f64::from(m1) * 1000.0;
            let two = apply_delay_doppler_gain(&apply_delay_doppler_gain(&x, k1, f1, a1).unwrap(), k2, f2, a2).unwrap();
            let one = apply_delay_doppler_gain(&x, (k1 + k2) % 7680, f1 + f2, a1 * a2).unwrap();
            let phase = two.samples()[0] / one.samples()[0];
            prop_assert!((phase.norm() - 1.0).abs() < 1e-9);
            for (p, q) in two.samples().iter().zip(one.samples()) {
                prop_assert!((p - q * phase).norm() < 1e-9 * a1 * a2);
            }
        }

        #[test]
        fn range_quantization_bound(r in 0.0f64..150_000.0) {
            let k = range_offset_to_delay_samples(r, 7.68e6).unwrap();
            let back = delay_samples_to_range_m(k, 7.68e6);
            prop_assert!((back - r).abs() <= SPEED_OF_LIGHT / (2.0 * 7.68e6) + 1e-9);
        }
    }
}
