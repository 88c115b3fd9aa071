//! Lowering of Toffoli and multi-controlled RY gates to the `{U, CNOT}`
//! basis, without ancillas.
//!
//! * CCX uses the 15-gate T/T†/H network (9 single-qubit gates, 6 CNOTs,
//!   depth 11 under ASAP layering).
//! * `C^k RY(θ)` recurses on the last control:
//!   `CRY(θ/2)`, `C^{k-1}X`, `CRY(−θ/2)`, `C^{k-1}X`, `C^{k-1}RY(θ/2)`.
//! * `C^k X` for `k ≥ 3` is `H · C^k P(π) · H`, with the multi-controlled
//!   phase recursing the same way.
//! * Open controls are X-conjugated.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Control, Gate, GateKind, Polarity};
use crate::error::{Error, Result};
use crate::sim::{circuit_unitary, MAX_UNITARY_QUBITS};

/// Largest control count accepted by [`lower_mcry`].
pub const MAX_MCRY_CONTROLS: usize = 6;

/// Deviation bound for the equivalence verdict attached to reports.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoweringReport {
    pub lowered: Circuit,
    pub single_qubit_count: usize,
    pub cnot_count: usize,
    pub depth: usize,
    /// Unitary comparison against the input; `None` when the register is too
    /// wide to build the unitary.
    pub verification: Option<Equivalence>,
}

impl LoweringReport {
    fn new(lowered: Circuit, verification: Option<Equivalence>) -> Self {
        Self {
            single_qubit_count: lowered.count_kind(GateKind::U),
            cnot_count: lowered.count_kind(GateKind::Cnot),
            depth: lowered.depth(),
            lowered,
            verification,
        }
    }

    pub fn equivalent(&self) -> Option<bool> {
        self.verification.map(|v| v.equivalent)
    }

    pub fn max_deviation(&self) -> Option<f64> {
        self.verification.map(|v| v.max_deviation)
    }
}

/// Basis-gate emitter.
#[derive(Default)]
struct Emitter {
    gates: Vec<Gate>,
}

impl Emitter {
    fn u(&mut self, q: usize, theta: f64, phi: f64, lambda: f64) {
        self.gates.push(Gate::u(q, theta, phi, lambda));
    }

    fn cx(&mut self, c: usize, t: usize) {
        self.gates.push(Gate::cnot(c, t));
    }

    fn x(&mut self, q: usize) {
        self.u(q, PI, 0.0, PI);
    }

    fn h(&mut self, q: usize) {
        self.u(q, FRAC_PI_2, 0.0, PI);
    }

    fn ry(&mut self, q: usize, theta: f64) {
        self.u(q, theta, 0.0, 0.0);
    }

    fn phase(&mut self, q: usize, lambda: f64) {
        self.u(q, 0.0, 0.0, lambda);
    }

    fn ccx(&mut self, a: usize, b: usize, t: usize) {
        self.h(t);
        self.cx(b, t);
        self.phase(t, -FRAC_PI_4);
        self.cx(a, t);
        self.phase(t, FRAC_PI_4);
        self.cx(b, t);
        self.phase(t, -FRAC_PI_4);
        self.cx(a, t);
        // T on b commutes past the CNOT controls above and slots into the
        // same layer as the T on the target.
        self.phase(b, FRAC_PI_4);
        self.phase(t, FRAC_PI_4);
        self.h(t);
        self.cx(a, b);
        self.phase(a, FRAC_PI_4);
        self.phase(b, -FRAC_PI_4);
        self.cx(a, b);
    }

    fn cphase(&mut self, lambda: f64, c: usize, t: usize) {
        self.phase(c, lambda / 2.0);
        self.cx(c, t);
        self.phase(t, -lambda / 2.0);
        self.cx(c, t);
        self.phase(t, lambda / 2.0);
    }

    fn mcphase(&mut self, lambda: f64, controls: &[usize], t: usize) {
        match controls {
            [] => self.phase(t, lambda),
            [c] => self.cphase(lambda, *c, t),
            [rest @ .., last] => {
                self.cphase(lambda / 2.0, *last, t);
                self.mcx(rest, *last);
                self.cphase(-lambda / 2.0, *last, t);
                self.mcx(rest, *last);
                self.mcphase(lambda / 2.0, rest, t);
            }
        }
    }

    fn mcx(&mut self, controls: &[usize], t: usize) {
        match controls {
            [] => self.x(t),
            [c] => self.cx(*c, t),
            [a, b] => self.ccx(*a, *b, t),
            _ => {
                self.h(t);
                self.mcphase(PI, controls, t);
                self.h(t);
            }
        }
    }

    fn cry(&mut self, theta: f64, c: usize, t: usize) {
        self.ry(t, theta / 2.0);
        self.cx(c, t);
        self.ry(t, -theta / 2.0);
        self.cx(c, t);
    }

    fn mcry_closed(&mut self, theta: f64, controls: &[usize], t: usize) {
        match controls {
            [] => self.ry(t, theta),
            [c] => self.cry(theta, *c, t),
            [rest @ .., last] => {
                self.cry(theta / 2.0, *last, t);
                self.mcx(rest, *last);
                self.cry(-theta / 2.0, *last, t);
                self.mcx(rest, *last);
                self.mcry_closed(theta / 2.0, rest, t);
            }
        }
    }

    fn mcry(&mut self, controls: &[Control], t: usize, theta: f64) {
        let open: Vec<usize> = controls
            .iter()
            .filter(|c| c.polarity == Polarity::Open)
            .map(|c| c.qubit)
            .collect();
        let qubits: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
        for &q in &open {
            self.x(q);
        }
        self.mcry_closed(theta, &qubits, t);
        for &q in &open {
            self.x(q);
        }
    }
}

fn distinct(indices: &[usize]) -> Result<()> {
    for (i, q) in indices.iter().enumerate() {
        if indices[..i].contains(q) {
            return Err(Error::DuplicateQubit(*q));
        }
    }
    Ok(())
}

fn build(n_qubits: usize, gates: Vec<Gate>) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits, 0);
    c.extend(gates)?;
    Ok(c)
}

/// Ideal CCX as a permutation matrix on `n_qubits`.
pub fn ccx_matrix(n_qubits: usize, c1: usize, c2: usize, target: usize) -> Array2<Complex64> {
    let dim = 1usize << n_qubits;
    let mut m = Array2::zeros((dim, dim));
    let ctrl = (1 << c1) | (1 << c2);
    for j in 0..dim {
        let i = if j & ctrl == ctrl {
            j ^ (1 << target)
        } else {
            j
        };
        m[[i, j]] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Decomposes CCX(c1, c2 → target) into 9 U gates and 6 CNOTs.
pub fn lower_toffoli(c1: usize, c2: usize, target: usize) -> Result<LoweringReport> {
    distinct(&[c1, c2, target])?;
    let n = c1.max(c2).max(target) + 1;
    let mut em = Emitter::default();
    em.ccx(c1, c2, target);
    let lowered = build(n, em.gates)?;
    let verification = if n <= MAX_UNITARY_QUBITS {
        let dev = max_deviation(&ccx_matrix(n, c1, c2, target), &circuit_unitary(&lowered)?);
        Some(Equivalence {
            equivalent: dev <= EQUIVALENCE_TOLERANCE,
            max_deviation: dev,
        })
    } else {
        None
    };
    Ok(LoweringReport::new(lowered, verification))
}

/// Decomposes a multi-controlled RY into basis gates.
pub fn lower_mcry(controls: &[Control], target: usize, theta: f64) -> Result<LoweringReport> {
    if controls.len() > MAX_MCRY_CONTROLS {
        return Err(Error::Capacity {
            what: "mcry control count",
            got: controls.len(),
            limit: MAX_MCRY_CONTROLS,
        });
    }
    let mut all: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
    all.push(target);
    distinct(&all)?;
    let n = all.iter().max().copied().unwrap_or(0) + 1;

    let mut em = Emitter::default();
    em.mcry(controls, target, theta);
    let lowered = build(n, em.gates)?;

    let verification = if n <= MAX_UNITARY_QUBITS {
        let reference = build(n, vec![Gate::mcry(controls.to_vec(), target, theta)])?;
        let (equivalent, max_deviation) =
            check_equivalence(&reference, &lowered, EQUIVALENCE_TOLERANCE)?;
        Some(Equivalence {
            equivalent,
            max_deviation,
        })
    } else {
        None
    };
    Ok(LoweringReport::new(lowered, verification))
}

/// Replaces every non-basis gate by its lowering. Trailing measurements are
/// kept; reported depth includes them.
pub fn lower_circuit(circuit: &Circuit) -> Result<LoweringReport> {
    let unitary_end = circuit.measure_suffix_start()?;
    let mut em = Emitter::default();
    for g in &circuit.gates()[..unitary_end] {
        match g {
            Gate::H { qubit } => em.h(*qubit),
            Gate::X { qubit } => em.x(*qubit),
            Gate::Ry { qubit, theta } => em.ry(*qubit, *theta),
            Gate::U { .. } | Gate::Cnot { .. } => em.gates.push(g.clone()),
            Gate::Mcry {
                controls,
                target,
                theta,
            } => {
                if controls.len() > MAX_MCRY_CONTROLS {
                    return Err(Error::Capacity {
                        what: "mcry control count",
                        got: controls.len(),
                        limit: MAX_MCRY_CONTROLS,
                    });
                }
                em.mcry(controls, *target, *theta)
            }
            Gate::Measure { .. } => unreachable!("measurements only in suffix"),
        }
    }
    let unitary_part = {
        let mut c = circuit.empty_like();
        c.extend(em.gates.iter().cloned())?;
        c
    };
    let verification = if circuit.n_qubits() <= MAX_UNITARY_QUBITS {
        let mut original = circuit.empty_like();
        original.extend(circuit.gates()[..unitary_end].iter().cloned())?;
        let (equivalent, max_deviation) =
            check_equivalence(&original, &unitary_part, EQUIVALENCE_TOLERANCE)?;
        Some(Equivalence {
            equivalent,
            max_deviation,
        })
    } else {
        None
    };

    let mut lowered = unitary_part;
    lowered.extend(circuit.gates()[unitary_end..].iter().cloned())?;
    Ok(LoweringReport::new(lowered, verification))
}

/// Largest elementwise deviation `|a − e^{iα} b|`, with `α` chosen so the
/// two matrices agree at the largest-modulus entry of `a`.
pub fn max_deviation(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "matrix shapes differ");
    let (pivot, _) = a.indexed_iter().fold(((0, 0), -1.0), |best, (idx, z)| {
        if z.norm() > best.1 {
            (idx, z.norm())
        } else {
            best
        }
    });
    let (ap, bp) = (a[pivot], b[pivot]);
    let phase = if bp.norm() > 0.0 && ap.norm() > 0.0 {
        let r = ap / bp;
        r / r.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - phase * y).norm())
        .fold(0.0, f64::max)
}

/// Compares two measurement-free circuits up to global phase.
pub fn check_equivalence(a: &Circuit, b: &Circuit, tol: f64) -> Result<(bool, f64)> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::QubitCountMismatch(a.n_qubits(), b.n_qubits()));
    }
    let dev = max_deviation(&circuit_unitary(a)?, &circuit_unitary(b)?);
    Ok((dev <= tol, dev))
}
