//! Windowed comparison of two long sequences with mutation flagging.
//!
//! Each window runs the strip-qubit comparison on its padded contents. Pad
//! positions hold the same base in both sequences and add exactly 1 each to
//! the per-position cosine average, so the raw score is corrected with
//! `(L·sim_raw − pads) / (L − pads)`.
//!
//! In sampled mode window `k` is sampled with seed
//! `splitmix64(seed ^ k·0x9E3779B97F4A7C15)`, where `splitmix64` is the
//! standard SplitMix64 output finalizer. Reports therefore do not depend on
//! thread count or completion order.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::{compare_exact, compare_sampled};
use crate::encoding::{AngleMap, NucleotideSeq};
use crate::error::{Error, Result};
use crate::fasta::windows;

pub const DEFAULT_WINDOW: usize = 4;
pub const DEFAULT_EXACT_THRESHOLD: f64 = 0.999;
pub const DEFAULT_SAMPLED_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum ScanMode {
    Exact,
    Sampled { shots: u64 },
}

impl ScanMode {
    pub fn default_threshold(self) -> f64 {
        match self {
            ScanMode::Exact => DEFAULT_EXACT_THRESHOLD,
            ScanMode::Sampled { .. } => DEFAULT_SAMPLED_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub window_size: usize,
    pub stride: usize,
    pub mode: ScanMode,
    pub threshold: f64,
    pub seed: u64,
    pub angles: AngleMap,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            window_size: DEFAULT_WINDOW,
            stride: DEFAULT_WINDOW,
            mode: ScanMode::Exact,
            threshold: DEFAULT_EXACT_THRESHOLD,
            seed: 0,
            angles: AngleMap::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    #[serde(rename = "window")]
    pub window_index: usize,
    pub offset: usize,
    pub real_length: usize,
    pub pad_count: usize,
    pub p1: f64,
    pub sim_raw: f64,
    pub sim_corrected: f64,
    pub flagged: bool,
    #[serde(skip)]
    pub seed_used: Option<u64>,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn window_seed(seed: u64, window_index: usize) -> u64 {
    splitmix64(seed ^ (window_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Similarity of the real bases given the score over a padded window.
pub fn padding_corrected_similarity(
    sim_raw: f64,
    padded_length: usize,
    pad_count: usize,
) -> Result<f64> {
    if pad_count >= padded_length {
        return Err(Error::OutOfRange(format!(
            "pad count {pad_count} must be below padded length {padded_length}"
        )));
    }
    let l = padded_length as f64;
    Ok((l * sim_raw - pad_count as f64) / (l - pad_count as f64))
}

pub fn scan_sequences(
    a: &NucleotideSeq,
    b: &NucleotideSeq,
    config: &ScanConfig,
) -> Result<Vec<WindowReport>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(Error::OutOfRange(format!(
            "threshold {} must lie in [0, 1]",
            config.threshold
        )));
    }
    let wa = windows(a, config.window_size, config.stride)?;
    let wb = windows(b, config.window_size, config.stride)?;

    wa.par_iter()
        .zip(wb.par_iter())
        .enumerate()
        .map(|(k, (x, y))| {
            let (result, seed_used) = match config.mode {
                ScanMode::Exact => (compare_exact(&x.bases, &y.bases, &config.angles)?, None),
                ScanMode::Sampled { shots } => {
                    let s = window_seed(config.seed, k);
                    (
                        compare_sampled(&x.bases, &y.bases, &config.angles, shots, s)?,
                        Some(s),
                    )
                }
            };
            let sim_corrected =
                padding_corrected_similarity(result.similarity, x.padded_length, x.pad_count())?;
            Ok(WindowReport {
                window_index: k,
                offset: x.offset,
                real_length: x.length,
                pad_count: x.pad_count(),
                p1: result.p1,
                sim_raw: result.similarity,
                sim_corrected,
                flagged: sim_corrected < config.threshold,
                seed_used,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(reports: &[WindowReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Format {
        line: 0,
        msg: e.to_string(),
    };
    for r in reports {
        w.serialize(r).map_err(io)?;
    }
    if reports.is_empty() {
        w.write_record([
            "window",
            "offset",
            "real_length",
            "pad_count",
            "p1",
            "sim_raw",
            "sim_corrected",
            "flagged",
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Format {
        line: 0,
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comparison::analytic_similarity;
    use crate::encoding::Nucleotide;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn seq(s: &str) -> NucleotideSeq {
        s.parse().unwrap()
    }

    #[test]
    fn identical_sequences_unflagged() {
        let s = seq("ACGTTGCAACGTTGCA");
        let r = scan_sequences(&s, &s, &ScanConfig::default()).unwrap();
        assert_eq!(r.len(), 4);
        for w in &r {
            assert!((w.sim_corrected - 1.0).abs() < 1e-12);
            assert!(!w.flagged);
        }
    }

    #[test]
    fn single_substitution_example() {
        let r = scan_sequences(&seq("ACGTACGT"), &seq("ACGTACGG"), &ScanConfig::default()).unwrap();
        assert!((r[0].sim_corrected - 1.0).abs() < 1e-12);
        let want = (3.0 + (PI / 12.0).cos()) / 4.0;
        assert!((r[1].sim_corrected - want).abs() < 1e-9);
        assert!((r[1].sim_corrected - 0.99148).abs() < 1e-5);
        assert!(!r[0].flagged && r[1].flagged);
    }

    #[test]
    fn a_versus_g_window() {
        let r = scan_sequences(&seq("AAAA"), &seq("GAAA"), &ScanConfig::default()).unwrap();
        assert!((r[0].sim_corrected - 0.75).abs() < 1e-12);
    }

    #[test]
    fn padding_correction_examples() {
        assert_eq!(padding_corrected_similarity(1.0, 8, 4).unwrap(), 1.0);
        assert!((padding_corrected_similarity(0.875, 8, 4).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(padding_corrected_similarity(0.42, 8, 0).unwrap(), 0.42);
        assert!(padding_corrected_similarity(1.0, 8, 8).is_err());
    }

    #[test]
    fn scan_errors() {
        let c = ScanConfig::default();
        assert_eq!(
            scan_sequences(&seq("ACGT"), &seq("ACG"), &c).unwrap_err(),
            Error::LengthMismatch(4, 3)
        );
        let bad = ScanConfig {
            window_size: 6,
            ..c.clone()
        };
        assert!(matches!(
            scan_sequences(&seq("ACGT"), &seq("ACGT"), &bad),
            Err(Error::InvalidWindow(_))
        ));
        let bad = ScanConfig {
            threshold: 1.5,
            ..c
        };
        assert!(scan_sequences(&seq("ACGT"), &seq("ACGT"), &bad).is_err());
    }

    #[test]
    fn seeds_are_mixed_per_window() {
        assert_ne!(window_seed(7, 0), window_seed(7, 1));
        assert_eq!(window_seed(7, 3), window_seed(7, 3));
        // SplitMix64 reference output for state 0x9E3779B97F4A7C15.
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn sampled_scan_is_deterministic_and_parallel_safe() {
        let a = seq("ACGTACGTACGTACGTACGTACGTACGTACGTACGT");
        let b = seq("ACGTACGTACGAACGTACGTACGTACCTACGTACGT");
        let cfg = ScanConfig {
            mode: ScanMode::Sampled { shots: 2000 },
            threshold: DEFAULT_SAMPLED_THRESHOLD,
            seed: 99,
            ..ScanConfig::default()
        };
        let r1 = scan_sequences(&a, &b, &cfg).unwrap();
        let r2 = scan_sequences(&a, &b, &cfg).unwrap();
        assert_eq!(r1, r2);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let r3 = single.install(|| scan_sequences(&a, &b, &cfg).unwrap());
        assert_eq!(r1, r3);
        for (k, w) in r1.iter().enumerate() {
            assert_eq!(w.window_index, k);
            assert_eq!(w.seed_used, Some(window_seed(99, k)));
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let r = scan_sequences(&seq("ACGTAC"), &seq("ACGTAA"), &ScanConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("window,offset,real_length,pad_count,p1,sim_raw,sim_corrected,flagged")
        );
        let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
        assert_eq!(&row[..4], ["1", "4", "2", "2"]);
        assert_eq!(row[7], "true");

        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("window,offset"));
    }

    fn arb_long_seq() -> impl Strategy<Value = Vec<Nucleotide>> {
        proptest::collection::vec(proptest::sample::select(Nucleotide::ALL.to_vec()), 1..60)
    }

    proptest! {
        #[test]
        fn correction_matches_unpadded_oracle(
            a in arb_long_seq(),
            b_seed in any::<u64>(),
            log in 1u32..4,
            stride_frac in 0.0f64..1.0,
        ) {
            let b: Vec<Nucleotide> = a
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    if splitmix64(b_seed ^ i as u64).is_multiple_of(5) {
                        Nucleotide::ALL[(splitmix64(b_seed.wrapping_add(i as u64)) % 4) as usize]
                    } else {
                        x
                    }
                })
                .collect();
            let sa = NucleotideSeq::new("a", a.clone()).unwrap();
            let sb = NucleotideSeq::new("b", b.clone()).unwrap();
            let size = 1usize << log;
            let stride = 1 + ((size - 1) as f64 * stride_frac) as usize;
            let cfg = ScanConfig { window_size: size, stride, ..ScanConfig::default() };
            let m = AngleMap::default();
            for w in scan_sequences(&sa, &sb, &cfg).unwrap() {
                let ra = NucleotideSeq::new("x", a[w.offset..w.offset + w.real_length].to_vec()).unwrap();
                let rb = NucleotideSeq::new("y", b[w.offset..w.offset + w.real_length].to_vec()).unwrap();
                let (oracle, _) = analytic_similarity(&ra, &rb, &m).unwrap();
                prop_assert!((w.sim_corrected - oracle).abs() <= 1e-9);
            }
        }

        #[test]
        fn substitution_is_local(
            a in arb_long_seq(),
            pos_frac in 0.0f64..1.0,
            shift in 1usize..4,
            log in 1u32..4,
            stride_frac in 0.0f64..1.0,
        ) {
            let pos = ((a.len() - 1) as f64 * pos_frac) as usize;
            let mut b = a.clone();
            let idx = Nucleotide::ALL.iter().position(|&x| x == a[pos]).unwrap();
            b[pos] = Nucleotide::ALL[(idx + shift) % 4];
            let sa = NucleotideSeq::new("a", a).unwrap();
            let sb = NucleotideSeq::new("b", b).unwrap();
            let size = 1usize << log;
            let stride = 1 + ((size - 1) as f64 * stride_frac) as usize;
            let cfg = ScanConfig { window_size: size, stride, ..ScanConfig::default() };
            for w in scan_sequences(&sa, &sb, &cfg).unwrap() {
                let covers = (w.offset..w.offset + w.real_length).contains(&pos);
                prop_assert_eq!(covers, (w.sim_corrected - 1.0).abs() > 1e-9);
                prop_assert_eq!(covers, w.flagged);
            }
        }
    }
}
