//! Nucleotide angle encoding and construction of the strip-qubit comparison
//! circuit.
//!
//! Register layout for sequences of length `N = 2^m`:
//!
//! | qubit        | label              | role                                 |
//! |--------------|--------------------|--------------------------------------|
//! | 0            | `strip0`           | selects reference (0) or compared (1)|
//! | 1 ..= m      | `idx0` … `idx{m-1}`| position, `idx k` holds bit k of i   |
//! | m + 1        | `dna0`             | value qubit, rotated by RY(θ)        |
//!
//! One classical bit receives the strip measurement.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Control, Gate, Polarity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Nucleotide {
    A,
    C,
    G,
    T,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

    /// Case-insensitive.
    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Nucleotide::A),
            'C' => Some(Nucleotide::C),
            'G' => Some(Nucleotide::G),
            'T' => Some(Nucleotide::T),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Nucleotide::A => 'A',
            Nucleotide::C => 'C',
            Nucleotide::G => 'G',
            Nucleotide::T => 'T',
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Nucleotide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A non-empty, validated A/C/G/T sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NucleotideSeq {
    id: String,
    bases: Vec<Nucleotide>,
}

impl NucleotideSeq {
    pub fn new(id: impl Into<String>, bases: Vec<Nucleotide>) -> Result<Self> {
        let id = id.into();
        if bases.is_empty() {
            return Err(Error::Usage(format!("sequence {id:?} is empty")));
        }
        Ok(Self { id, bases })
    }

    /// Parses a string of bases; lowercase is accepted.
    pub fn parse(id: impl Into<String>, text: &str) -> Result<Self> {
        let id = id.into();
        let bases = text
            .chars()
            .map(|c| {
                Nucleotide::from_char(c).ok_or_else(|| Error::InvalidBase {
                    record: id.clone(),
                    line: 1,
                    ch: c,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(id, bases)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn bases(&self) -> &[Nucleotide] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for NucleotideSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bases {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for NucleotideSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse("seq", s)
    }
}

/// RY angle per nucleotide, in radians within `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleMap {
    angles: [f64; 4],
}

impl Default for AngleMap {
    /// A → π, C → π/2, T → π/6, G → 0.
    fn default() -> Self {
        let mut angles = [0.0; 4];
        angles[Nucleotide::A.slot()] = PI;
        angles[Nucleotide::C.slot()] = PI / 2.0;
        angles[Nucleotide::T.slot()] = PI / 6.0;
        angles[Nucleotide::G.slot()] = 0.0;
        Self { angles }
    }
}

impl AngleMap {
    pub fn new(a: f64, c: f64, g: f64, t: f64) -> Result<Self> {
        let mut angles = [0.0; 4];
        for (n, v) in Nucleotide::ALL.into_iter().zip([a, c, g, t]) {
            if !(0.0..=PI).contains(&v) {
                return Err(Error::OutOfRange(format!(
                    "angle for {n} is {v}, must lie in [0, π]"
                )));
            }
            angles[n.slot()] = v;
        }
        Ok(Self { angles })
    }

    pub fn angle_of(&self, base: Nucleotide) -> f64 {
        self.angles[base.slot()]
    }
}

pub fn angle_of(base: Nucleotide, map: &AngleMap) -> f64 {
    map.angle_of(base)
}

fn ceil_log2(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros() as usize
}

/// Strip + ⌈log₂ N⌉ index qubits + one value qubit.
pub fn required_qubits(sequence_length: usize) -> usize {
    2 + ceil_log2(sequence_length.max(1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingLayout {
    pub strip_qubit: usize,
    pub index_qubits: Vec<usize>,
    pub dna_qubit: usize,
    pub n_qubits: usize,
    pub classical_bits: usize,
}

impl EncodingLayout {
    pub fn for_length(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let m = ceil_log2(n);
        Ok(Self {
            strip_qubit: 0,
            index_qubits: (1..=m).collect(),
            dna_qubit: m + 1,
            n_qubits: m + 2,
            classical_bits: 1,
        })
    }

    /// Controls selecting strip value `strip` and position `position`.
    fn controls(&self, strip: usize, position: usize) -> Vec<Control> {
        let polarity = |bit: usize| {
            if bit == 1 {
                Polarity::Closed
            } else {
                Polarity::Open
            }
        };
        std::iter::once(Control {
            qubit: self.strip_qubit,
            polarity: polarity(strip),
        })
        .chain(self.index_qubits.iter().enumerate().map(|(k, &q)| Control {
            qubit: q,
            polarity: polarity((position >> k) & 1),
        }))
        .collect()
    }
}

fn check_pair(reference: &NucleotideSeq, compared: &NucleotideSeq) -> Result<EncodingLayout> {
    if reference.len() != compared.len() {
        return Err(Error::LengthMismatch(reference.len(), compared.len()));
    }
    EncodingLayout::for_length(reference.len())
}

/// Hadamards on strip and index qubits followed by one MCRY per
/// (strip, position). This is the comparison circuit without the final
/// strip Hadamard and measurement.
pub fn encoding_stage(
    reference: &NucleotideSeq,
    compared: &NucleotideSeq,
    map: &AngleMap,
) -> Result<(Circuit, EncodingLayout)> {
    let layout = check_pair(reference, compared)?;
    let mut c = Circuit::new(layout.n_qubits, layout.classical_bits);
    c.set_label(layout.strip_qubit, "strip0")?;
    for (k, &q) in layout.index_qubits.iter().enumerate() {
        c.set_label(q, format!("idx{k}"))?;
    }
    c.set_label(layout.dna_qubit, "dna0")?;

    c.push(Gate::h(layout.strip_qubit))?;
    for &q in &layout.index_qubits {
        c.push(Gate::h(q))?;
    }
    for (strip, seq) in [reference, compared].into_iter().enumerate() {
        for (i, &base) in seq.bases().iter().enumerate() {
            c.push(Gate::mcry(
                layout.controls(strip, i),
                layout.dna_qubit,
                map.angle_of(base),
            ))?;
        }
    }
    Ok((c, layout))
}

/// Full comparison circuit: encoding stage, strip Hadamard, strip
/// measurement into classical bit 0.
pub fn build_comparison_circuit(
    reference: &NucleotideSeq,
    compared: &NucleotideSeq,
    map: &AngleMap,
) -> Result<(Circuit, EncodingLayout)> {
    let (mut c, layout) = encoding_stage(reference, compared, map)?;
    c.push(Gate::h(layout.strip_qubit))?;
    c.push(Gate::measure(layout.strip_qubit, 0))?;
    Ok((c, layout))
}

/// `(1/√N) Σᵢ (cos(θᵢ/2)|0⟩ + sin(θᵢ/2)|1⟩) ⊗ |i⟩`, flattened with the value
/// qubit as the most significant bit: entry `v·N + i`.
pub fn sequence_state(seq: &NucleotideSeq, map: &AngleMap) -> Result<Vec<Complex64>> {
    let n = seq.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
    for (i, &b) in seq.bases().iter().enumerate() {
        let (s, c) = (map.angle_of(b) / 2.0).sin_cos();
        out[i] = Complex64::new(norm * c, 0.0);
        out[n + i] = Complex64::new(norm * s, 0.0);
    }
    Ok(out)
}
