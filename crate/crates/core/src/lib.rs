//! Simulator and coarse-acquisition receiver for passive NavIC L5
//! reflectometry.
//!
//! The transmit side synthesizes a PRN baseband packet, runs it through a
//! bistatic channel (delay, Doppler, attenuation, AWGN) and produces two
//! synchronized captures: the direct signal (DS) and the ground-reflected
//! signal (GRS). The receive side builds delay-Doppler maps against local
//! PRN replicas, identifies the satellite, and turns the DS/GRS peak
//! locations into a bistatic range offset and Doppler.
//!
//! Everything runs at complex baseband. The default acquisition rate is
//! 7.68 MHz, giving 7680 samples per 1 ms code period and 39.0625 m of
//! bistatic range per sample.

pub mod acquisition;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod io;
pub mod oracles;
pub mod prn;
pub mod waveform;

pub use acquisition::{AcquisitionResult, DelayDopplerMap, DopplerGrid, SearchPolicy};
pub use channel::ScenarioConfig;
pub use error::{Error, Result};
pub use estimation::{TargetEstimate, TrialReport, TrialSummary};
pub use prn::{ChipSequence, CodeTable, LfsrConfig};
pub use waveform::{FirStage, IqBuffer};

/// Complex sample type used throughout the pipeline.
pub type Complex = num_complex::Complex<f64>;

/// Speed of light used for all delay/range conversions, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Default acquisition sample rate, Hz.
pub const ACQ_SAMPLE_RATE_HZ: f64 = 7.68e6;

/// Rate after the transmit-side ×8 interpolation chain, Hz.
pub const TX_SAMPLE_RATE_HZ: f64 = 61.44e6;
