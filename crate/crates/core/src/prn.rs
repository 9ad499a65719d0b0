//! PRN spreading codes: LFSR m-sequences, Gold-code combination and
//! zero-order-hold resampling to receiver rates.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Chips per code period.
pub const CODE_LENGTH: usize = 1023;

/// Chipping rate of the SPS ranging code, chips/s.
pub const CHIP_RATE_HZ: f64 = 1.023e6;

/// Feedback taps of the G1 register (1 + x^3 + x^10).
pub const G1_TAPS: [u8; 2] = [3, 10];

/// Feedback taps of the G2 register (1 + x^2 + x^3 + x^6 + x^8 + x^9 + x^10).
pub const G2_TAPS: [u8; 6] = [2, 3, 6, 8, 9, 10];

/// G2 initial states for SPS L5 PRN 1 to 7, leftmost digit is stage 1.
const DEFAULT_G2_STATES: [(u32, &str); 7] = [
    (1, "1110100111"),
    (2, "0000100110"),
    (3, "1000110100"),
    (4, "0101110010"),
    (5, "1110110000"),
    (6, "0001101011"),
    (7, "0000010100"),
];

/// Fibonacci shift register description.
///
/// Stages are numbered 1..=degree. Each clock the register outputs stage
/// `degree`, shifts every stage one place toward `degree`, and loads the XOR
/// of the tapped stages into stage 1. Bit `i - 1` of `init` holds stage `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfsrConfig {
    pub taps: Vec<u8>,
    pub init: u32,
    pub degree: u8,
}

impl LfsrConfig {
    pub fn new(taps: &[u8], init: u32, degree: u8) -> Result<Self> {
        let cfg = Self {
            taps: taps.to_vec(),
            init,
            degree,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The G1 register with all stages set.
    pub fn g1() -> Self {
        Self {
            taps: G1_TAPS.to_vec(),
            init: 0x3ff,
            degree: 10,
        }
    }

    /// The G2 register with all stages set; the code table overrides `init`.
    pub fn g2() -> Self {
        Self {
            taps: G2_TAPS.to_vec(),
            init: 0x3ff,
            degree: 10,
        }
    }

    pub fn with_init(mut self, init: u32) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 || self.degree > 31 {
            return Err(Error::Config(format!(
                "LFSR degree must be in 1..=31, got {}",
                self.degree
            )));
        }
        let mask = (1u32 << self.degree) - 1;
        if self.init & mask == 0 {
            return Err(Error::Config(
                "LFSR initial state is all zeros".to_string(),
            ));
        }
        if self.init & !mask != 0 {
            return Err(Error::Config(format!(
                "LFSR initial state {:#b} does not fit in {} stages",
                self.init, self.degree
            )));
        }
        if self.taps.is_empty() {
            return Err(Error::Config("LFSR has no feedback taps".to_string()));
        }
        if let Some(&t) = self.taps.iter().find(|&&t| t == 0 || t > self.degree) {
            return Err(Error::Config(format!(
                "LFSR tap {t} outside stages 1..={}",
                self.degree
            )));
        }
        Ok(())
    }
}

/// Clock the register `length` times and collect the output bits.
pub fn lfsr_sequence(config: &LfsrConfig, length: usize) -> Result<Vec<u8>> {
    config.validate()?;
    let degree = u32::from(config.degree);
    let out_shift = degree - 1;
    let mask = (1u32 << degree) - 1;
    let tap_mask = config
        .taps
        .iter()
        .fold(0u32, |m, &t| m | 1 << (t - 1));

    let mut state = config.init;
    let mut bits = Vec::with_capacity(length);
    for _ in 0..length {
        bits.push(((state >> out_shift) & 1) as u8);
        let feedback = (state & tap_mask).count_ones() & 1;
        state = ((state << 1) | feedback) & mask;
    }
    Ok(bits)
}

/// One period of a ±1 spreading code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipSequence {
    prn_id: u32,
    chips: Vec<i8>,
}

impl ChipSequence {
    pub fn prn_id(&self) -> u32 {
        self.prn_id
    }

    pub fn chips(&self) -> &[i8] {
        &self.chips
    }

    pub fn chip_rate_hz(&self) -> f64 {
        CHIP_RATE_HZ
    }

    /// Wrap an arbitrary chip vector. Fails unless it is 1023 chips of ±1.
    pub fn from_chips(prn_id: u32, chips: Vec<i8>) -> Result<Self> {
        if chips.len() != CODE_LENGTH {
            return Err(Error::LengthMismatch {
                expected: CODE_LENGTH,
                actual: chips.len(),
            });
        }
        if let Some(pos) = chips.iter().position(|&c| c != 1 && c != -1) {
            return Err(Error::Config(format!(
                "chip {pos} is {}, expected +1 or -1",
                chips[pos]
            )));
        }
        Ok(Self { prn_id, chips })
    }
}

/// Per-satellite G2 initial states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTable {
    entries: Vec<(u32, u32)>,
}

impl Default for CodeTable {
    fn default() -> Self {
        let entries = DEFAULT_G2_STATES
            .iter()
            .map(|&(id, bits)| (id, parse_state(bits).expect("valid built-in state")))
            .collect();
        Self { entries }
    }
}

impl CodeTable {
    /// Build a table from `(prn_id, g2_init)` pairs, keeping their order.
    pub fn new(entries: Vec<(u32, u32)>) -> Result<Self> {
        for (i, &(id, init)) in entries.iter().enumerate() {
            LfsrConfig::g2().with_init(init).validate()?;
            if entries[..i].iter().any(|&(other, _)| other == id) {
                return Err(Error::Config(format!("duplicate PRN {id} in code table")));
            }
        }
        Ok(Self { entries })
    }

    pub fn prn_ids(&self) -> Vec<u32> {
        self.entries.iter().map(|&(id, _)| id).collect()
    }

    pub fn g2_init(&self, prn_id: u32) -> Result<u32> {
        self.entries
            .iter()
            .find(|&&(id, _)| id == prn_id)
            .map(|&(_, init)| init)
            .ok_or_else(|| Error::UnknownPrn {
                prn_id,
                supported: self.prn_ids(),
            })
    }

    /// Generate the Gold code for `prn_id` with the standard G1/G2 registers.
    pub fn generate(&self, prn_id: u32) -> Result<ChipSequence> {
        generate_prn(prn_id, &LfsrConfig::g1(), &LfsrConfig::g2(), self)
    }

    /// All codes in table order.
    pub fn generate_all(&self) -> Result<Vec<ChipSequence>> {
        self.prn_ids().into_iter().map(|id| self.generate(id)).collect()
    }

    /// Parse the text form: `prn_id <whitespace> <10 binary digits>` per
    /// line, `#` comments and blank lines skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            // A comma between the fields is tolerated.
            let mut fields = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty());
            let (Some(id), Some(state), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(perr(lineno, format!("expected `prn_id state`, got {line:?}")));
            };
            let id: u32 = id
                .parse()
                .map_err(|_| perr(lineno, format!("bad PRN identifier {id:?}")))?;
            if id == 0 {
                return Err(perr(lineno, "PRN identifier must be >= 1".to_string()));
            }
            let init = parse_state(state).map_err(|msg| perr(lineno, msg))?;
            entries.push((id, init));
        }
        if entries.is_empty() {
            return Err(perr(0, "code table has no entries".to_string()));
        }
        Self::new(entries).map_err(|e| perr(0, e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# prn_id g2_initial_state (stage 1 first)\n");
        for &(id, init) in &self.entries {
            let bits: String = (0..10)
                .map(|i| if init >> i & 1 == 1 { '1' } else { '0' })
                .collect();
            let _ = writeln!(out, "{id} {bits}");
        }
        out
    }
}

fn parse_state(bits: &str) -> std::result::Result<u32, String> {
    if bits.len() != 10 || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(format!("expected 10 binary digits, got {bits:?}"));
    }
    let init = bits
        .bytes()
        .enumerate()
        .fold(0u32, |acc, (i, b)| acc | u32::from(b - b'0') << i);
    if init == 0 {
        return Err("all-zero G2 state".to_string());
    }
    Ok(init)
}

/// Gold code for `prn_id`: chip = bpsk(G1 ⊕ G2), with G2 loaded from `table`.
pub fn generate_prn(
    prn_id: u32,
    g1: &LfsrConfig,
    g2: &LfsrConfig,
    table: &CodeTable,
) -> Result<ChipSequence> {
    if g1.degree != 10 || g2.degree != 10 {
        return Err(Error::Config(format!(
            "Gold registers must have degree 10, got {} and {}",
            g1.degree, g2.degree
        )));
    }
    let init = table.g2_init(prn_id)?;
    let a = lfsr_sequence(g1, CODE_LENGTH)?;
    let b = lfsr_sequence(&g2.clone().with_init(init), CODE_LENGTH)?;
    let chips = a
        .iter()
        .zip(&b)
        .map(|(x, y)| if x ^ y == 0 { 1 } else { -1 })
        .collect();
    Ok(ChipSequence { prn_id, chips })
}

/// Number of samples in `duration_s` at `sample_rate_hz`, requiring a whole
/// number of milliseconds.
pub fn samples_for_duration(sample_rate_hz: f64, duration_s: f64) -> Result<usize> {
    let ms = duration_s * 1e3;
    if !(ms.is_finite() && ms >= 1.0 - 1e-9 && (ms - ms.round()).abs() <= 1e-9) {
        return Err(Error::Config(format!(
            "duration {duration_s} s is not a whole number of milliseconds"
        )));
    }
    Ok((duration_s * sample_rate_hz).round() as usize)
}

/// Zero-order-hold replica: sample k carries chip floor(k·Rc/fs) mod 1023.
pub fn resample_code(code: &ChipSequence, sample_rate_hz: f64, duration_s: f64) -> Result<Vec<f64>> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz >= CHIP_RATE_HZ) {
        return Err(Error::Config(format!(
            "sample rate {sample_rate_hz} Hz is below the chip rate"
        )));
    }
    let len = samples_for_duration(sample_rate_hz, duration_s)?;
    let chips = code.chips();
    let samples = if sample_rate_hz.fract() == 0.0 {
        // Exact integer index map for integral rates.
        let fs = sample_rate_hz as u64;
        (0..len as u64)
            .map(|k| f64::from(chips[((k * 1_023_000 / fs) % CODE_LENGTH as u64) as usize]))
            .collect()
    } else {
        (0..len)
            .map(|k| {
                let idx = (k as f64 * CHIP_RATE_HZ / sample_rate_hz).floor() as usize;
                f64::from(chips[idx % CODE_LENGTH])
            })
            .collect()
    };
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circular_xcorr(a: &[i8], b: &[i8], lag: usize) -> i32 {
        let n = a.len();
        (0..n)
            .map(|k| i32::from(a[k]) * i32::from(b[(k + lag) % n]))
            .sum()
    }

    #[test]
    fn m_sequence_period_and_balance() {
        let cfg = LfsrConfig::new(&[3, 10], 0x3ff, 10).unwrap();
        let bits = lfsr_sequence(&cfg, 2 * CODE_LENGTH).unwrap();
        assert_eq!(&bits[..CODE_LENGTH], &bits[CODE_LENGTH..]);
        let ones = bits[..CODE_LENGTH].iter().filter(|&&b| b == 1).count();
        assert_eq!(ones, 512);
        // No shorter period divides 1023 (3, 11, 31, 33, 93, 341).
        for p in [3usize, 11, 31, 33, 93, 341] {
            assert!((0..CODE_LENGTH).any(|k| bits[k] != bits[k + p]), "period {p}");
        }
    }

    #[test]
    fn g2_register_is_maximal() {
        let bits = lfsr_sequence(&LfsrConfig::g2(), 2 * CODE_LENGTH).unwrap();
        assert_eq!(&bits[..CODE_LENGTH], &bits[CODE_LENGTH..]);
        assert_eq!(bits[..CODE_LENGTH].iter().filter(|&&b| b == 1).count(), 512);
    }

    #[test]
    fn single_stage_self_feedback() {
        let cfg = LfsrConfig::new(&[1], 1, 1).unwrap();
        assert_eq!(lfsr_sequence(&cfg, 4).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn first_outputs_are_initial_state_from_last_stage() {
        let init = 0b10_1100_1011;
        let cfg = LfsrConfig::new(&[3, 10], init, 10).unwrap();
        let bits = lfsr_sequence(&cfg, 10).unwrap();
        let expected: Vec<u8> = (1..=10).rev().map(|stage| (init >> (stage - 1) & 1) as u8).collect();
        assert_eq!(bits, expected);
        let all_ones = lfsr_sequence(&LfsrConfig::g1(), 10).unwrap();
        assert_eq!(all_ones, vec![1; 10]);
    }

    #[test]
    fn zero_state_and_bad_taps_rejected() {
        assert!(matches!(LfsrConfig::new(&[3, 10], 0, 10), Err(Error::Config(_))));
        assert!(LfsrConfig::new(&[0, 10], 1, 10).is_err());
        assert!(LfsrConfig::new(&[3, 11], 1, 10).is_err());
        let cfg = LfsrConfig { taps: vec![3, 10], init: 0, degree: 10 };
        assert!(lfsr_sequence(&cfg, 5).is_err());
    }

    #[test]
    fn gold_codes_have_peak_and_three_valued_crosscorrelation() {
        let codes = CodeTable::default().generate_all().unwrap();
        assert_eq!(codes.len(), 7);
        for c in &codes {
            assert_eq!(c.chips().len(), CODE_LENGTH);
            assert_eq!(circular_xcorr(c.chips(), c.chips(), 0), 1023);
        }
        for (i, a) in codes.iter().enumerate() {
            for b in &codes[i + 1..] {
                for lag in 0..CODE_LENGTH {
                    let v = circular_xcorr(a.chips(), b.chips(), lag);
                    assert!(matches!(v, -1 | -65 | 63), "PRN {} vs {} lag {lag}: {v}", a.prn_id(), b.prn_id());
                }
            }
        }
    }

    #[test]
    fn unknown_prn_lists_supported() {
        let err = CodeTable::default().generate(9).unwrap_err();
        match err {
            Error::UnknownPrn { prn_id, supported } => {
                assert_eq!(prn_id, 9);
                assert_eq!(supported, vec![1, 2, 3, 4, 5, 6, 7]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn code_table_parse_and_roundtrip() {
        let text = "# comment\n2 0000100110\n\n5,1110110000\n";
        let t = CodeTable::parse(text, Path::new("t.txt")).unwrap();
        assert_eq!(t.prn_ids(), vec![2, 5]);
        assert_eq!(t.generate(2).unwrap(), CodeTable::default().generate(2).unwrap());
        let again = CodeTable::parse(&CodeTable::default().to_text(), Path::new("x")).unwrap();
        assert_eq!(again, CodeTable::default());

        for bad in ["2 000010011", "2 0000000000", "x 0000100110", "2 0000100110 extra", "2 00001001a0"] {
            assert!(
                matches!(CodeTable::parse(bad, Path::new("b")), Err(Error::Parse { line: 1, .. })),
                "{bad}"
            );
        }
        assert!(CodeTable::parse("1 1000000000\n1 0100000000", Path::new("d")).is_err());
    }

    #[test]
    fn resample_at_acquisition_rate() {
        let code = CodeTable::default().generate(2).unwrap();
        let rep = resample_code(&code, 7.68e6, 1e-3).unwrap();
        assert_eq!(rep.len(), 7680);
        // Per-sample floor computation in f64 agrees with the integer index map.
        for (k, &v) in rep.iter().enumerate() {
            let idx = ((k as f64) * 1.023e6 / 7.68e6).floor() as usize % 1023;
            assert_eq!(v, f64::from(code.chips()[idx]));
        }
        // Every chip is held for 7 or 8 samples.
        let mut counts = vec![0usize; CODE_LENGTH];
        for k in 0..7680u64 {
            counts[(k * 1023 / 7680) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c == 7 || c == 8));
        assert_eq!(rep.iter().map(|x| x * x).sum::<f64>(), 7680.0);
    }

    #[test]
    fn resample_unit_rate_and_errors() {
        let code = CodeTable::default().generate(3).unwrap();
        let rep = resample_code(&code, CHIP_RATE_HZ, 1e-3).unwrap();
        let chips: Vec<f64> = code.chips().iter().map(|&c| f64::from(c)).collect();
        assert_eq!(rep, chips);
        let two = resample_code(&code, 7.68e6, 2e-3).unwrap();
        assert_eq!(two.len(), 15360);
        assert_eq!(&two[..7680], &two[7680..]);
        assert!(resample_code(&code, 7.68e6, 1.5e-3).is_err());
        assert!(resample_code(&code, 1.0e6, 1e-3).is_err());
    }
}
