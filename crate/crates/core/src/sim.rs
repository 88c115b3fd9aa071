//! Dense statevector simulation.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. Sampling
//! uses `Xoshiro256PlusPlus` seeded through SplitMix64
//! (`SeedableRng::seed_from_u64`), drawing one `f64` in `[0, 1)` per shot
//! and inverting the cumulative distribution of the exact marginal. Both
//! algorithms are fully specified, so histograms are reproducible on every
//! platform.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Control, Gate};
use crate::error::{Error, Result};

/// Default cap on register width for [`Statevector::new`].
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Cap on register width for [`circuit_unitary`].
pub const MAX_UNITARY_QUBITS: usize = 10;

/// States at least this long are updated in parallel.
const PAR_THRESHOLD: usize = 1 << 14;

type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

pub fn ry_matrix(theta: f64) -> Mat2 {
    u_matrix(theta, 0.0, 0.0)
}

fn h_matrix() -> Mat2 {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[r, r], [r, -r]]
}

fn x_matrix() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

/// Control condition as `(mask, value)`: fires where `index & mask == value`.
fn control_condition(controls: &[Control]) -> (usize, usize) {
    controls.iter().fold((0, 0), |(mask, value), c| {
        let bit = 1usize << c.qubit;
        (mask | bit, value | (c.polarity.active_bit() * bit))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `n_qubits` qubits, capped at [`DEFAULT_MAX_QUBITS`].
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::with_limit(n_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn with_limit(n_qubits: usize, max_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > max_qubits {
            return Err(Error::Capacity {
                what: "qubit count",
                got: n_qubits,
                limit: max_qubits,
            });
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps an amplitude vector; its length must be a power of two and its
    /// norm 1 within 1e-10.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Usage(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let norm: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Usage(format!("amplitude vector has norm² {norm}")));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// Applies `m` to `target` on every amplitude pair whose index satisfies
    /// the control condition.
    fn apply_controlled(&mut self, m: Mat2, target: usize, mask: usize, value: usize) {
        let tbit = 1usize << target;
        let update = |base: usize, chunk: &mut [Complex64]| {
            let (lo, hi) = chunk.split_at_mut(tbit);
            for (k, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                if (base + k) & mask != value {
                    continue;
                }
                let (x0, x1) = (*a0, *a1);
                *a0 = m[0][0] * x0 + m[0][1] * x1;
                *a1 = m[1][0] * x0 + m[1][1] * x1;
            }
        };
        let span = tbit << 1;
        if self.amplitudes.len() >= PAR_THRESHOLD {
            self.amplitudes
                .par_chunks_mut(span)
                .enumerate()
                .for_each(|(i, chunk)| update(i * span, chunk));
        } else {
            self.amplitudes
                .chunks_mut(span)
                .enumerate()
                .for_each(|(i, chunk)| update(i * span, chunk));
        }
    }

    /// Applies one unitary gate. Measurements are rejected.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        if gate.is_measure() {
            return Err(Error::Usage(
                "measurement is not a unitary; use probability_of or sample_measurements".into(),
            ));
        }
        gate.validate(self.n_qubits, 0)?;
        match gate {
            Gate::H { qubit } => self.apply_controlled(h_matrix(), *qubit, 0, 0),
            Gate::X { qubit } => self.apply_controlled(x_matrix(), *qubit, 0, 0),
            Gate::Ry { qubit, theta } => self.apply_controlled(ry_matrix(*theta), *qubit, 0, 0),
            Gate::U {
                qubit,
                theta,
                phi,
                lambda,
            } => self.apply_controlled(u_matrix(*theta, *phi, *lambda), *qubit, 0, 0),
            Gate::Cnot { control, target } => {
                let bit = 1 << control;
                self.apply_controlled(x_matrix(), *target, bit, bit)
            }
            Gate::Mcry {
                controls,
                target,
                theta,
            } => {
                let (mask, value) = control_condition(controls);
                self.apply_controlled(ry_matrix(*theta), *target, mask, value)
            }
            Gate::Measure { .. } => unreachable!(),
        }
        Ok(())
    }

    /// Applies every unitary gate of `circuit` in order. Trailing
    /// measurements are left for [`probability_of`](Self::probability_of)
    /// and [`sample_measurements`](Self::sample_measurements).
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::QubitCountMismatch(circuit.n_qubits(), self.n_qubits));
        }
        let end = circuit.measure_suffix_start()?;
        for g in &circuit.gates()[..end] {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Exact marginal probability that `qubit` reads `outcome`.
    pub fn probability_of(&self, qubit: usize, outcome: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        if outcome > 1 {
            return Err(Error::Usage(format!(
                "outcome must be 0 or 1, got {outcome}"
            )));
        }
        let bit = 1usize << qubit;
        let want = if outcome == 1 { bit } else { 0 };
        let p: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(p.clamp(0.0, 1.0))
    }

    /// Joint distribution over `qubits`; bit `j` of the outcome index is the
    /// value of `qubits[j]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        if qubits.is_empty() {
            return Err(Error::Usage("empty qubit list".into()));
        }
        for (i, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        let mut dist = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let outcome = qubits
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &q)| acc | (((i >> q) & 1) << j));
            dist[outcome] += a.norm_sqr();
        }
        Ok(dist)
    }

    /// Draws `shots` samples of `qubits` from the exact joint marginal.
    /// Histogram keys list the outcome of `qubits[0]` first.
    pub fn sample_measurements(
        &self,
        qubits: &[usize],
        shots: u64,
        seed: u64,
    ) -> Result<Histogram> {
        if shots == 0 {
            return Err(Error::Usage("shots must be at least 1".into()));
        }
        let dist = self.marginal(qubits)?;
        let mut cdf = Vec::with_capacity(dist.len());
        let mut acc = 0.0;
        for p in &dist {
            acc += p;
            cdf.push(acc);
        }
        let total = acc;
        let last_nonzero = dist.iter().rposition(|&p| p > 0.0).unwrap_or(0);

        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let mut tallies = vec![0u64; dist.len()];
        for _ in 0..shots {
            let u = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(last_nonzero);
            tallies[idx] += 1;
        }

        let width = qubits.len();
        let counts = tallies
            .into_iter()
            .enumerate()
            .filter(|&(_, n)| n > 0)
            .map(|(outcome, n)| {
                let key: String = (0..width)
                    .map(|j| if (outcome >> j) & 1 == 1 { '1' } else { '0' })
                    .collect();
                (key, n)
            })
            .collect();
        Ok(Histogram {
            counts,
            total_shots: shots,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: BTreeMap<String, u64>,
    pub total_shots: u64,
}

impl Histogram {
    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &str) -> f64 {
        self.count(key) as f64 / self.total_shots as f64
    }
}

/// Full `2^n × 2^n` unitary of a measurement-free circuit, column `j` being
/// the image of basis state `|j⟩`.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Array2<Complex64>> {
    let n = circuit.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::Capacity {
            what: "qubit count for unitary construction",
            got: n,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    if circuit.gates().iter().any(Gate::is_measure) {
        return Err(Error::Usage(
            "circuit_unitary requires a measurement-free circuit".into(),
        ));
    }
    let dim = 1usize << n;
    let mut out = Array2::zeros((dim, dim));
    for j in 0..dim {
        let mut amps = vec![ZERO; dim];
        amps[j] = ONE;
        let mut sv = Statevector {
            n_qubits: n,
            amplitudes: amps,
        };
        for g in circuit.gates() {
            sv.apply_gate(g)?;
        }
        for (i, a) in sv.amplitudes.into_iter().enumerate() {
            out[[i, j]] = a;
        }
    }
    Ok(out)
}
