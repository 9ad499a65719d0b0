//! End-to-end pipelines: the two-channel receiver, the three-row target
//! table, and the Monte-Carlo SNR sweep.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::acquisition::{
    acquire, detect_satellite, AcquisitionResult, DelayDopplerMap, DopplerGrid, DEFAULT_FLOOR_EXCLUSION,
    DEFAULT_THRESHOLD_DB,
};
use crate::channel::{range_offset_to_delay_samples, synthesize_scene, ScenarioConfig, MAX_DOPPLER_HZ};
use crate::error::{Error, Result};
use crate::estimation::{estimate_from_peaks, evaluate_trials, TargetEstimate, TrialReport, TrialSummary};
use crate::prn::{ChipSequence, CodeTable};
use crate::waveform::IqBuffer;
use crate::ACQ_SAMPLE_RATE_HZ;

/// GRS amplitude used by generated scenarios (DS amplitude is 1).
pub const DEFAULT_A_GR: f64 = 0.5;

/// Largest bistatic range drawn by randomized trials, m.
pub const MAX_TRIAL_RANGE_M: f64 = 10_000.0;

/// Seed used by `table1` when none is given.
pub const DEFAULT_TABLE_SEED: u64 = 1;

/// Two-channel coarse-acquisition receiver.
#[derive(Debug, Clone)]
pub struct Receiver {
    candidates: Vec<ChipSequence>,
    grid: DopplerGrid,
    threshold_db: f64,
}

/// Everything the receiver learns from one DS/GRS capture pair.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub ds: AcquisitionResult,
    pub ds_ddm: DelayDopplerMap,
    pub grs: AcquisitionResult,
    pub grs_ddm: DelayDopplerMap,
    pub estimate: TargetEstimate,
}

impl PairOutcome {
    pub fn detected(&self) -> bool {
        self.ds.detected && self.grs.detected
    }
}

impl Receiver {
    pub fn new(candidates: Vec<ChipSequence>, grid: DopplerGrid, threshold_db: f64) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Config("receiver needs at least one PRN code".to_string()));
        }
        Ok(Self {
            candidates,
            grid,
            threshold_db,
        })
    }

    /// All codes of `table`, default grid and threshold.
    pub fn from_table(table: &CodeTable) -> Result<Self> {
        Self::new(table.generate_all()?, DopplerGrid::default(), DEFAULT_THRESHOLD_DB)
    }

    pub fn with_threshold(mut self, threshold_db: f64) -> Self {
        self.threshold_db = threshold_db;
        self
    }

    pub fn grid(&self) -> &DopplerGrid {
        &self.grid
    }

    pub fn threshold_db(&self) -> f64 {
        self.threshold_db
    }

    pub fn code(&self, prn_id: u32) -> Option<&ChipSequence> {
        self.candidates.iter().find(|c| c.prn_id() == prn_id)
    }

    /// Identify the satellite on DS, then acquire GRS with the chosen code.
    pub fn process(&self, ds: &IqBuffer, grs: &IqBuffer) -> Result<PairOutcome> {
        if ds.len() != grs.len() || ds.sample_rate_hz() != grs.sample_rate_hz() {
            return Err(Error::Config(
                "DS and GRS captures differ in length or rate".to_string(),
            ));
        }
        let (ds_res, ds_ddm) = detect_satellite(ds, &self.candidates, &self.grid, self.threshold_db)?;
        let code = self.code(ds_res.prn_id).expect("detected PRN is a candidate");
        let (grs_res, grs_ddm) = acquire(grs, code, &self.grid, self.threshold_db, DEFAULT_FLOOR_EXCLUSION)?;
        let estimate = estimate_from_peaks(&ds_res, &grs_res, ds.sample_rate_hz(), ds_ddm.n_delay())?;
        Ok(PairOutcome {
            ds: ds_res,
            ds_ddm,
            grs: grs_res,
            grs_ddm,
            estimate,
        })
    }
}

/// Continuous ground truth for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialTruth {
    pub range_m: f64,
    pub f_d: f64,
    pub f_gr: f64,
    pub k_d: usize,
}

impl TrialTruth {
    pub fn scenario(&self, prn_id: u32, snr_db: f64, seed: u64) -> Result<ScenarioConfig> {
        let offset = range_offset_to_delay_samples(self.range_m, ACQ_SAMPLE_RATE_HZ)?;
        Ok(ScenarioConfig {
            prn_id,
            a_d: 1.0,
            a_gr: DEFAULT_A_GR,
            k_d: self.k_d,
            k_gr: self.k_d + offset,
            f_d: self.f_d,
            f_gr: self.f_gr,
            snr_db,
            seed,
            ..Default::default()
        })
    }
}

/// Simulate one scenario and score the receiver against `truth`.
pub fn run_trial(
    receiver: &Receiver,
    code: &ChipSequence,
    truth: &TrialTruth,
    snr_db: f64,
    seed: u64,
) -> Result<TrialReport> {
    let scenario = truth.scenario(code.prn_id(), snr_db, seed)?;
    let (ds, grs) = synthesize_scene(&scenario, code)?;
    let out = receiver.process(&ds, &grs)?;
    let detected = out.detected() && out.ds.prn_id == code.prn_id();
    Ok(TrialReport::new(scenario, out.estimate, truth.range_m, detected))
}

/// The three published target rows: (range m, DS Doppler, GRS Doppler, SNR dB).
pub const TABLE1_ROWS: [(f64, f64, f64, f64); 3] = [
    (4000.0, 1500.0, 500.0, -5.0),
    (6000.0, 1000.0, -500.0, -10.0),
    (8000.0, 500.0, -500.0, -12.0),
];

pub fn table1_truths() -> Vec<(TrialTruth, f64)> {
    TABLE1_ROWS
        .iter()
        .map(|&(range_m, f_d, f_gr, snr)| {
            (
                TrialTruth {
                    range_m,
                    f_d,
                    f_gr,
                    k_d: 0,
                },
                snr,
            )
        })
        .collect()
}

/// Run the table rows for PRN 2 with the given noise seed.
pub fn run_table1(receiver: &Receiver, seed: u64) -> Result<Vec<TrialReport>> {
    let code = receiver
        .code(2)
        .cloned()
        .ok_or_else(|| Error::Config("receiver has no PRN 2 code".to_string()))?;
    table1_truths()
        .par_iter()
        .map(|(truth, snr)| run_trial(receiver, &code, truth, *snr, seed))
        .collect()
}

/// Meters as kilometers truncated to whole meters, e.g. 8007.8 → "8.007".
pub fn format_km(range_m: f64) -> String {
    let m = range_m.max(0.0).floor() as u64;
    format!("{}.{:03}", m / 1000, m % 1000)
}

pub const TABLE1_HEADER: &str = "snr_db,truth_range_km,truth_f_d_hz,truth_f_gr_hz,est_range_km,est_f_d_hz,est_f_gr_hz,est_range_m,ds_peak_to_floor_db,grs_peak_to_floor_db,detected";

pub fn table1_csv(reports: &[TrialReport]) -> String {
    let mut s = format!("{TABLE1_HEADER}\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{:.2},{:.2},{}",
            r.scenario.snr_db,
            format_km(r.truth_range_m),
            r.truth_f_d,
            r.truth_f_gr,
            format_km(r.estimate.range_offset_m),
            r.estimate.doppler_ds_hz,
            r.estimate.doppler_grs_hz,
            r.estimate.range_offset_m,
            r.estimate.ds_peak_to_floor_db,
            r.estimate.grs_peak_to_floor_db,
            r.detected
        );
    }
    s
}

/// Off-grid truth for trial `index`, drawn from a generator seeded with
/// `seed + index`: range uniform in [0, 10 km], both Dopplers uniform in
/// ±10 kHz, DS delay uniform over what fits in one code period.
pub fn random_truth(seed: u64, index: u64, n_delay: usize) -> Result<TrialTruth> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index));
    let range_m = rng.gen_range(0.0..=MAX_TRIAL_RANGE_M);
    let f_d = rng.gen_range(-MAX_DOPPLER_HZ..=MAX_DOPPLER_HZ);
    let f_gr = rng.gen_range(-MAX_DOPPLER_HZ..=MAX_DOPPLER_HZ);
    let offset = range_offset_to_delay_samples(range_m, ACQ_SAMPLE_RATE_HZ)?;
    let k_d = rng.gen_range(0..n_delay - offset);
    Ok(TrialTruth {
        range_m,
        f_d,
        f_gr,
        k_d,
    })
}

/// Noise seed for trial `index`; spaced by two so DS/GRS draws
/// (`s`, `s + 1`) never repeat across trials.
pub fn trial_noise_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index).wrapping_mul(2)
}

/// `trials` randomized scenes at one SNR, in trial order.
pub fn run_trials(receiver: &Receiver, code: &ChipSequence, snr_db: f64, trials: usize, seed: u64) -> Result<Vec<TrialReport>> {
    let n_delay = (ACQ_SAMPLE_RATE_HZ / 1e3).round() as usize;
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let truth = random_truth(seed, i, n_delay)?;
            run_trial(receiver, code, &truth, snr_db, trial_noise_seed(seed, i))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub summary: TrialSummary,
}

/// Integer-dB SNR steps from `from` to `to` inclusive, in either direction.
pub fn snr_steps(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && from.is_finite() && to.is_finite()) {
        return Err(Error::Config(format!("invalid SNR sweep {from}..{to} step {step}")));
    }
    let count = ((to - from).abs() / step + 1e-9).floor() as usize + 1;
    let dir = if to < from { -1.0 } else { 1.0 };
    Ok((0..count).map(|i| from + dir * step * i as f64).collect())
}

pub fn run_sweep(
    receiver: &Receiver,
    code: &ChipSequence,
    snrs: &[f64],
    trials: usize,
    seed: u64,
) -> Result<(Vec<SweepPoint>, Vec<TrialReport>)> {
    if trials == 0 {
        return Err(Error::Config("sweep needs at least one trial".to_string()));
    }
    let mut points = Vec::with_capacity(snrs.len());
    let mut all = Vec::with_capacity(snrs.len() * trials);
    for &snr in snrs {
        let reports = run_trials(receiver, code, snr, trials, seed)?;
        points.push(SweepPoint {
            snr_db: snr,
            summary: evaluate_trials(&reports)?,
        });
        all.extend(reports);
    }
    Ok((points, all))
}

pub const SWEEP_HEADER: &str = "snr_db,trials,detection_rate,rmse_range_m,rmse_doppler_hz,rmse_doppler_ds_hz";

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for p in points {
        let m = &p.summary;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            p.snr_db, m.trials, m.detection_rate, m.rmse_range_m, m.rmse_doppler_hz, m.rmse_doppler_ds_hz
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn km_truncation() {
        assert_eq!(format_km(3984.375), "3.984");
        assert_eq!(format_km(6015.625), "6.015");
        assert_eq!(format_km(8007.8125), "8.007");
        assert_eq!(format_km(4023.4375), "4.023");
        assert_eq!(format_km(0.0), "0.000");
    }

    #[test]
    fn sweep_steps() {
        assert_eq!(snr_steps(-5.0, -12.0, 1.0).unwrap(), vec![-5.0, -6.0, -7.0, -8.0, -9.0, -10.0, -11.0, -12.0]);
        assert_eq!(snr_steps(-12.0, -10.0, 1.0).unwrap(), vec![-12.0, -11.0, -10.0]);
        assert_eq!(snr_steps(3.0, 3.0, 1.0).unwrap(), vec![3.0]);
        assert!(snr_steps(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn random_truths_are_valid_scenarios() {
        for i in 0..200 {
            let t = random_truth(9, i, 7680).unwrap();
            let sc = t.scenario(2, -5.0, 0).unwrap();
            sc.validate().unwrap();
        }
        assert_eq!(random_truth(3, 4, 7680).unwrap(), random_truth(3, 4, 7680).unwrap());
    }

    #[test]
    fn noiseless_table_rows_exact() {
        let rx = Receiver::from_table(&CodeTable::default()).unwrap();
        let code = rx.code(2).unwrap().clone();
        let expected = [("3.984", 1500.0, 500.0), ("6.015", 1000.0, -500.0), ("8.007", 500.0, -500.0)];
        for ((truth, _), (km, fd, fgr)) in table1_truths().iter().zip(expected) {
            let r = run_trial(&rx, &code, truth, f64::INFINITY, 0).unwrap();
            assert!(r.detected);
            assert_eq!(format_km(r.estimate.range_offset_m), km);
            assert_eq!((r.estimate.doppler_ds_hz, r.estimate.doppler_grs_hz), (fd, fgr));
        }
    }
}
