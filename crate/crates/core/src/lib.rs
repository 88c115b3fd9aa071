//! Statevector simulation of strip-qubit nucleotide sequence comparison.
//!
//! Nucleotides are encoded as RY angles on a value qubit entangled with
//! position (index) qubits, one branch per sequence selected by a strip
//! qubit. A final Hadamard on the strip turns the overlap of the two
//! branches into the probability `P₁` of reading the strip as `|1⟩`, and
//! the similarity score is `1 − 2·P₁`.
//!
//! Modules:
//! * [`sim`]: dense statevector, gate application, marginals, seeded sampling.
//! * [`circuit`]: gate/circuit model and the textual circuit format.
//! * [`lowering`]: decomposition to `{U, CNOT}` with cost and equivalence reports.
//! * [`encoding`]: nucleotide angles and comparison-circuit construction.
//! * [`comparison`]: exact and sampled comparisons plus the closed-form oracle.
//! * [`fasta`]: FASTA parsing and windowing.
//! * [`scan`]: windowed mutation scan.
//! * [`cli`]: the `strandsim` command-line front end.

pub mod circuit;
pub mod cli;
pub mod comparison;
pub mod encoding;
pub mod error;
pub mod fasta;
pub mod lowering;
pub mod scan;
pub mod sim;

pub use circuit::{Circuit, Control, Gate, GateKind, Polarity};
pub use comparison::{
    analytic_similarity, compare_exact, compare_sampled, similarity_from_p1, ComparisonResult,
    Method,
};
pub use encoding::{
    build_comparison_circuit, required_qubits, sequence_state, AngleMap, EncodingLayout,
    Nucleotide, NucleotideSeq,
};
pub use error::{Error, Result};
pub use fasta::{parse_fasta, windows, FastaRecord, Window};
pub use lowering::{check_equivalence, lower_circuit, lower_mcry, lower_toffoli, LoweringReport};
pub use scan::{scan_sequences, ScanConfig, ScanMode, WindowReport};
pub use sim::{circuit_unitary, Histogram, Statevector};
