//! On-disk formats: the `NAVIQ1` binary IQ capture, DDM CSV export and the
//! trial report CSV.
//!
//! IQ file layout, all little-endian:
//!
//! ```text
//! offset  size  field
//!      0     6  magic "NAVIQ1"
//!      6     8  sample_rate_hz (u64)
//!     14     8  sample_count   (u64)
//!     22     8  start_index    (i64)
//!     30   8·n  interleaved f32 I, Q
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::acquisition::DelayDopplerMap;
use crate::error::{Error, Result};
use crate::estimation::TrialReport;
use crate::waveform::IqBuffer;
use crate::Complex;

pub const IQ_MAGIC: &[u8; 6] = b"NAVIQ1";
pub const IQ_HEADER_LEN: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IqFileHeader {
    pub sample_rate_hz: u64,
    pub sample_count: u64,
    pub start_index: i64,
}

impl IqFileHeader {
    pub fn to_bytes(&self) -> [u8; IQ_HEADER_LEN] {
        let mut b = [0u8; IQ_HEADER_LEN];
        b[..6].copy_from_slice(IQ_MAGIC);
        b[6..14].copy_from_slice(&self.sample_rate_hz.to_le_bytes());
        b[14..22].copy_from_slice(&self.sample_count.to_le_bytes());
        b[22..30].copy_from_slice(&self.start_index.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < 6 || &b[..6] != IQ_MAGIC {
            return Err(Error::BadMagic {
                found: b[..b.len().min(6)].to_vec(),
            });
        }
        if b.len() < IQ_HEADER_LEN {
            return Err(Error::Truncated {
                declared: 0,
                available: 0,
            });
        }
        let u = |r: std::ops::Range<usize>| u64::from_le_bytes(b[r].try_into().expect("8 bytes"));
        Ok(Self {
            sample_rate_hz: u(6..14),
            sample_count: u(14..22),
            start_index: u(22..30) as i64,
        })
    }
}

/// Serialize a buffer. Samples are narrowed to f32; the rate must be a
/// whole number of Hz.
pub fn encode_iq(buf: &IqBuffer) -> Result<Vec<u8>> {
    let rate = buf.sample_rate_hz();
    if rate.fract() != 0.0 || rate > u64::MAX as f64 {
        return Err(Error::Config(format!(
            "IQ files store integral sample rates, got {rate} Hz"
        )));
    }
    let header = IqFileHeader {
        sample_rate_hz: rate as u64,
        sample_count: buf.len() as u64,
        start_index: buf.start_index(),
    };
    let mut out = Vec::with_capacity(IQ_HEADER_LEN + 8 * buf.len());
    out.extend_from_slice(&header.to_bytes());
    for s in buf.samples() {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_iq(bytes: &[u8]) -> Result<IqBuffer> {
    let header = IqFileHeader::from_bytes(bytes)?;
    let payload = &bytes[IQ_HEADER_LEN..];
    let available = (payload.len() / 8) as u64;
    if available < header.sample_count {
        return Err(Error::Truncated {
            declared: header.sample_count,
            available,
        });
    }
    if payload.len() as u64 != header.sample_count * 8 {
        return Err(Error::CountMismatch {
            declared: header.sample_count,
            actual: available,
        });
    }
    let f = |c: &[u8]| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes")));
    let samples = payload
        .chunks_exact(8)
        .map(|c| Complex::new(f(&c[..4]), f(&c[4..])))
        .collect();
    IqBuffer::new(samples, header.sample_rate_hz as f64, header.start_index)
}

pub fn write_iq(path: &Path, buf: &IqBuffer) -> Result<()> {
    let bytes = encode_iq(buf)?;
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(&bytes)?;
    f.flush()?;
    Ok(())
}

pub fn read_iq(path: &Path) -> Result<IqBuffer> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_iq(&bytes)
}

/// DDM as CSV: one row per delay sample, one column per Doppler bin,
/// linear magnitudes with 10 significant digits.
pub fn write_ddm_csv<W: Write>(mut w: W, ddm: &DelayDopplerMap) -> Result<()> {
    let mut line = String::from("delay_samples");
    for f in ddm.doppler_axis() {
        line.push(',');
        line.push_str(&f.to_string());
    }
    writeln!(w, "{line}")?;
    for d in 0..ddm.n_delay() {
        line.clear();
        line.push_str(&d.to_string());
        for bin in 0..ddm.n_doppler() {
            line.push_str(&format!(",{:.9e}", ddm.get(bin, d)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn save_ddm_csv(path: &Path, ddm: &DelayDopplerMap) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    write_ddm_csv(&mut f, ddm)?;
    f.flush()?;
    Ok(())
}

pub const REPORT_HEADER: &str =
    "snr_db,truth_range_m,est_range_m,truth_f_d,est_f_d,truth_f_gr,est_f_gr,range_error_m,detected";

/// One report CSV line. Ground truth is optional because captures read from
/// disk carry none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub snr_db: Option<f64>,
    pub truth_range_m: Option<f64>,
    pub est_range_m: f64,
    pub truth_f_d: Option<f64>,
    pub est_f_d: f64,
    pub truth_f_gr: Option<f64>,
    pub est_f_gr: f64,
    pub detected: bool,
}

impl From<&TrialReport> for ReportRow {
    fn from(r: &TrialReport) -> Self {
        Self {
            snr_db: Some(r.scenario.snr_db),
            truth_range_m: Some(r.truth_range_m),
            est_range_m: r.estimate.range_offset_m,
            truth_f_d: Some(r.truth_f_d),
            est_f_d: r.estimate.doppler_ds_hz,
            truth_f_gr: Some(r.truth_f_gr),
            est_f_gr: r.estimate.doppler_grs_hz,
            detected: r.detected,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ReportRow {
    pub fn to_csv_line(&self) -> String {
        let err = self
            .truth_range_m
            .map(|t| self.est_range_m - t);
        format!(
            "{},{},{},{},{},{},{},{},{}",
            opt(self.snr_db),
            opt(self.truth_range_m),
            self.est_range_m,
            opt(self.truth_f_d),
            self.est_f_d,
            opt(self.truth_f_gr),
            self.est_f_gr,
            opt(err),
            self.detected
        )
    }
}

pub fn write_report_csv<W: Write>(mut w: W, rows: &[ReportRow]) -> Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prn::CodeTable;
    use crate::waveform::synthesize_baseband;
    use crate::channel::add_awgn;
    use proptest::prelude::*;

    fn sample_buffer() -> IqBuffer {
        let code = CodeTable::default().generate(2).unwrap();
        let x = synthesize_baseband(&code, 7.68e6, 1).unwrap();
        add_awgn(&x, -3.0, 1).unwrap().round_to_f32()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let x = sample_buffer();
        let back = decode_iq(&encode_iq(&x).unwrap()).unwrap();
        assert_eq!(back.len(), 7680);
        for (a, b) in x.samples().iter().zip(back.samples()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(back.sample_rate_hz(), 7.68e6);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.iq");
        let x = sample_buffer();
        write_iq(&p, &x).unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 30 + 8 * 7680);
        assert_eq!(read_iq(&p).unwrap(), x);
    }

    #[test]
    fn parse_errors_are_distinct() {
        let mut bytes = encode_iq(&sample_buffer()).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_iq(&bad), Err(Error::BadMagic { .. })));

        let short = &bytes[..bytes.len() - 8];
        assert!(matches!(
            decode_iq(short),
            Err(Error::Truncated { declared: 7680, available: 7679 })
        ));

        bytes.extend_from_slice(&[0u8; 8]);
        assert!(matches!(
            decode_iq(&bytes),
            Err(Error::CountMismatch { declared: 7680, actual: 7681 })
        ));

        assert!(matches!(decode_iq(&bytes[..20]), Err(Error::Truncated { .. })));
    }

    #[test]
    fn non_integral_rate_rejected() {
        let x = IqBuffer::new(vec![Complex::new(1.0, 0.0)], 1.5, 0).unwrap();
        assert!(encode_iq(&x).is_err());
    }

    #[test]
    fn ddm_csv_layout() {
        let ddm = DelayDopplerMap::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, vec![-500.0, 500.0], 1e6, 2).unwrap();
        let mut out = Vec::new();
        write_ddm_csv(&mut out, &ddm).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "delay_samples,-500,500");
        assert_eq!(lines[1], "0,1.000000000e0,4.000000000e0");
        assert_eq!(lines.len(), 4);
        let v: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 6.0);
    }

    #[test]
    fn report_line_with_and_without_truth() {
        let row = ReportRow {
            snr_db: Some(-5.0),
            truth_range_m: Some(4000.0),
            est_range_m: 3984.375,
            truth_f_d: Some(1500.0),
            est_f_d: 1500.0,
            truth_f_gr: Some(500.0),
            est_f_gr: 500.0,
            detected: true,
        };
        assert_eq!(row.to_csv_line(), "-5,4000,3984.375,1500,1500,500,500,-15.625,true");
        let bare = ReportRow { snr_db: None, truth_range_m: None, truth_f_d: None, truth_f_gr: None, ..row };
        assert_eq!(bare.to_csv_line(), ",,3984.375,,1500,,500,,true");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn f32_representable_buffers_round_trip(
            vals in prop::collection::vec((any::<f32>(), any::<f32>()), 0..64),
            rate in 1u64..100_000_000,
            start in any::<i64>(),
        ) {
            let samples: Vec<Complex> = vals
                .iter()
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .map(|&(a, b)| Complex::new(f64::from(a), f64::from(b)))
                .collect();
            let x = IqBuffer::new(samples, rate as f64, start).unwrap();
            let back = decode_iq(&encode_iq(&x).unwrap()).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
