//! Gate and circuit model, plus the line-oriented textual circuit format.
//!
//! The textual format is one gate per line, preceded by a `qubits N` /
//! `cbits M` header and optional `label k name` lines:
//!
//! ```text
//! qubits 4
//! cbits 1
//! label 0 strip0
//! h q[0]
//! ry(1.570796) q[3]
//! u(1.570796,0,3.141593) q[1]
//! cx q[0],q[1]
//! mcry(3.141593) [0-,1+,2+],q[3]
//! measure q[0] -> c[0]
//! ```
//!
//! In `mcry` control lists, `+` marks a closed control (fires on `|1⟩`) and
//! `-` an open control (fires on `|0⟩`). Angles print with six decimals and
//! exact zeros print as `0`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Control fires on `|1⟩`.
    Closed,
    /// Control fires on `|0⟩`.
    Open,
}

impl Polarity {
    /// The bit value that activates this control.
    pub fn active_bit(self) -> usize {
        match self {
            Polarity::Closed => 1,
            Polarity::Open => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn closed(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Closed,
        }
    }

    pub fn open(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Open,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    H,
    X,
    Ry,
    U,
    Cnot,
    Mcry,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    H {
        qubit: usize,
    },
    X {
        qubit: usize,
    },
    Ry {
        qubit: usize,
        theta: f64,
    },
    /// `U(θ,φ,λ) = [[cos(θ/2), −e^{iλ}sin(θ/2)], [e^{iφ}sin(θ/2), e^{i(φ+λ)}cos(θ/2)]]`.
    U {
        qubit: usize,
        theta: f64,
        phi: f64,
        lambda: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// RY(θ) on `target` in the subspace selected by every control.
    Mcry {
        controls: Vec<Control>,
        target: usize,
        theta: f64,
    },
    Measure {
        qubit: usize,
        cbit: usize,
    },
}

impl Gate {
    pub fn h(qubit: usize) -> Self {
        Gate::H { qubit }
    }

    pub fn x(qubit: usize) -> Self {
        Gate::X { qubit }
    }

    pub fn ry(qubit: usize, theta: f64) -> Self {
        Gate::Ry { qubit, theta }
    }

    pub fn u(qubit: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate::U {
            qubit,
            theta,
            phi,
            lambda,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn mcry(controls: Vec<Control>, target: usize, theta: f64) -> Self {
        Gate::Mcry {
            controls,
            target,
            theta,
        }
    }

    pub fn measure(qubit: usize, cbit: usize) -> Self {
        Gate::Measure { qubit, cbit }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H { .. } => GateKind::H,
            Gate::X { .. } => GateKind::X,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::U { .. } => GateKind::U,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Mcry { .. } => GateKind::Mcry,
            Gate::Measure { .. } => GateKind::Measure,
        }
    }

    /// All qubits the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H { qubit }
            | Gate::X { qubit }
            | Gate::Ry { qubit, .. }
            | Gate::U { qubit, .. }
            | Gate::Measure { qubit, .. } => vec![*qubit],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Mcry {
                controls, target, ..
            } => controls
                .iter()
                .map(|c| c.qubit)
                .chain(std::iter::once(*target))
                .collect(),
        }
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, Gate::Measure { .. })
    }

    /// Checks index ranges and distinctness against a register shape.
    pub fn validate(&self, n_qubits: usize, n_cbits: usize) -> Result<()> {
        let qubits = self.qubits();
        for (i, &q) in qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        if let Gate::Measure { cbit, .. } = self {
            if *cbit >= n_cbits {
                return Err(Error::CbitOutOfRange {
                    index: *cbit,
                    n_cbits,
                });
            }
        }
        Ok(())
    }
}

/// Six decimals, with exact zero printed as `0`.
pub fn format_angle(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.6}")
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H { qubit } => write!(f, "h q[{qubit}]"),
            Gate::X { qubit } => write!(f, "x q[{qubit}]"),
            Gate::Ry { qubit, theta } => write!(f, "ry({}) q[{qubit}]", format_angle(*theta)),
            Gate::U {
                qubit,
                theta,
                phi,
                lambda,
            } => write!(
                f,
                "u({},{},{}) q[{qubit}]",
                format_angle(*theta),
                format_angle(*phi),
                format_angle(*lambda)
            ),
            Gate::Cnot { control, target } => write!(f, "cx q[{control}],q[{target}]"),
            Gate::Mcry {
                controls,
                target,
                theta,
            } => {
                let list: Vec<String> = controls
                    .iter()
                    .map(|c| {
                        let mark = match c.polarity {
                            Polarity::Closed => '+',
                            Polarity::Open => '-',
                        };
                        format!("{}{mark}", c.qubit)
                    })
                    .collect();
                write!(
                    f,
                    "mcry({}) [{}],q[{target}]",
                    format_angle(*theta),
                    list.join(",")
                )
            }
            Gate::Measure { qubit, cbit } => write!(f, "measure q[{qubit}] -> c[{cbit}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    n_cbits: usize,
    gates: Vec<Gate>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<usize, String>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_cbits: usize) -> Self {
        Self {
            n_qubits,
            n_cbits,
            gates: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_cbits(&self) -> usize {
        self.n_cbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn labels(&self) -> &BTreeMap<usize, String> {
        &self.labels
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits, self.n_cbits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn set_label(&mut self, qubit: usize, label: impl Into<String>) -> Result<()> {
        let label = label.into();
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        if self.labels.iter().any(|(&q, l)| q != qubit && *l == label) {
            return Err(Error::DuplicateLabel(label));
        }
        self.labels.insert(qubit, label);
        Ok(())
    }

    /// Same register and labels, no gates.
    pub fn empty_like(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            n_cbits: self.n_cbits,
            gates: Vec::new(),
            labels: self.labels.clone(),
        }
    }

    /// Index of the first gate of the trailing measurement block, or an error
    /// if a measurement is followed by a unitary gate.
    pub fn measure_suffix_start(&self) -> Result<usize> {
        let start = self
            .gates
            .iter()
            .rposition(|g| !g.is_measure())
            .map_or(0, |i| i + 1);
        if self.gates[..start].iter().any(Gate::is_measure) {
            return Err(Error::Unsupported(
                "mid-circuit measurement followed by unitary gates".into(),
            ));
        }
        Ok(start)
    }

    /// `(qubit, cbit)` pairs of the trailing measurements.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Measure { qubit, cbit } => Some((*qubit, *cbit)),
                _ => None,
            })
            .collect()
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    /// Number of layers when every gate is placed as soon as all its qubits
    /// are free.
    pub fn depth(&self) -> usize {
        asap_layers(&self.gates, self.n_qubits)
            .into_iter()
            .max()
            .unwrap_or(0)
    }

    /// Circuit text without the header, one gate per line.
    pub fn gate_lines(&self) -> Vec<String> {
        self.gates.iter().map(ToString::to_string).collect()
    }
}

/// 1-based ASAP layer of every gate.
pub fn asap_layers(gates: &[Gate], n_qubits: usize) -> Vec<usize> {
    let mut frontier = vec![0usize; n_qubits];
    gates
        .iter()
        .map(|g| {
            let qs = g.qubits();
            let layer = qs.iter().map(|&q| frontier[q]).max().unwrap_or(0) + 1;
            for q in qs {
                frontier[q] = layer;
            }
            layer
        })
        .collect()
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        writeln!(f, "cbits {}", self.n_cbits)?;
        for (q, l) in &self.labels {
            writeln!(f, "label {q} {l}")?;
        }
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

fn fmt_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

fn parse_qubit_ref(s: &str, line: usize) -> Result<usize> {
    let inner = s
        .trim()
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| fmt_err(line, format!("expected q[i], got {s:?}")))?;
    inner
        .parse()
        .map_err(|_| fmt_err(line, format!("bad qubit index {inner:?}")))
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| fmt_err(line, format!("bad number {s:?}")))
}

/// Splits `name(args) rest` into `(name, Some(args), rest)`.
fn split_op(text: &str) -> (&str, Option<&str>, &str) {
    let head_end = text.find(char::is_whitespace).unwrap_or(text.len());
    let paren = text.find('(');
    match paren {
        Some(p) if p < head_end => {
            let close = text[p..].find(')').map(|c| p + c);
            match close {
                Some(c) => (&text[..p], Some(&text[p + 1..c]), text[c + 1..].trim()),
                None => (&text[..p], None, ""),
            }
        }
        _ => (&text[..head_end], None, text[head_end..].trim()),
    }
}

fn parse_gate(text: &str, line: usize) -> Result<Gate> {
    let (name, args, rest) = split_op(text);
    let need_args = || args.ok_or_else(|| fmt_err(line, format!("{name} needs parameters")));
    match name {
        "h" => Ok(Gate::h(parse_qubit_ref(rest, line)?)),
        "x" => Ok(Gate::x(parse_qubit_ref(rest, line)?)),
        "ry" => Ok(Gate::ry(
            parse_qubit_ref(rest, line)?,
            parse_num(need_args()?, line)?,
        )),
        "u" => {
            let nums: Vec<&str> = need_args()?.split(',').collect();
            if nums.len() != 3 {
                return Err(fmt_err(line, "u takes three angles"));
            }
            Ok(Gate::u(
                parse_qubit_ref(rest, line)?,
                parse_num(nums[0], line)?,
                parse_num(nums[1], line)?,
                parse_num(nums[2], line)?,
            ))
        }
        "cx" => {
            let (c, t) = rest
                .split_once(',')
                .ok_or_else(|| fmt_err(line, "cx takes two qubits"))?;
            Ok(Gate::cnot(
                parse_qubit_ref(c, line)?,
                parse_qubit_ref(t, line)?,
            ))
        }
        "mcry" => {
            let theta = parse_num(need_args()?, line)?;
            let body = rest
                .strip_prefix('[')
                .ok_or_else(|| fmt_err(line, "mcry needs a control list"))?;
            let (list, target) = body
                .split_once("],")
                .ok_or_else(|| fmt_err(line, "mcry control list must be followed by ,q[t]"))?;
            let mut controls = Vec::new();
            for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (idx, polarity) = if let Some(i) = item.strip_suffix('+') {
                    (i, Polarity::Closed)
                } else if let Some(i) = item.strip_suffix('-') {
                    (i, Polarity::Open)
                } else {
                    return Err(fmt_err(
                        line,
                        format!("control {item:?} lacks +/- polarity"),
                    ));
                };
                let qubit = idx
                    .parse()
                    .map_err(|_| fmt_err(line, format!("bad control index {idx:?}")))?;
                controls.push(Control { qubit, polarity });
            }
            Ok(Gate::mcry(controls, parse_qubit_ref(target, line)?, theta))
        }
        "measure" => {
            let (q, c) = rest
                .split_once("->")
                .ok_or_else(|| fmt_err(line, "measure needs q[i] -> c[j]"))?;
            let cbit = c
                .trim()
                .strip_prefix("c[")
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| fmt_err(line, format!("expected c[j], got {c:?}")))?
                .parse()
                .map_err(|_| fmt_err(line, "bad classical bit index"))?;
            Ok(Gate::measure(parse_qubit_ref(q, line)?, cbit))
        }
        other => Err(fmt_err(line, format!("unknown gate {other:?}"))),
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut n_cbits = None;
        let mut circuit: Option<Circuit> = None;

        for (i, raw) in s.lines().enumerate() {
            let line = i + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') || text.starts_with("//") {
                continue;
            }
            if let Some(n) = text.strip_prefix("qubits ") {
                n_qubits = Some(
                    n.trim()
                        .parse()
                        .map_err(|_| fmt_err(line, "bad qubit count"))?,
                );
                continue;
            }
            if let Some(n) = text.strip_prefix("cbits ") {
                n_cbits = Some(
                    n.trim()
                        .parse()
                        .map_err(|_| fmt_err(line, "bad cbit count"))?,
                );
                continue;
            }
            let c = match circuit.as_mut() {
                Some(c) => c,
                None => {
                    let nq = n_qubits.ok_or_else(|| fmt_err(line, "missing `qubits N` header"))?;
                    circuit.insert(Circuit::new(nq, n_cbits.unwrap_or(0)))
                }
            };
            if let Some(rest) = text.strip_prefix("label ") {
                let (q, name) = rest
                    .trim()
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| fmt_err(line, "label needs an index and a name"))?;
                let q = q.parse().map_err(|_| fmt_err(line, "bad label index"))?;
                c.set_label(q, name.trim())?;
                continue;
            }
            c.push(parse_gate(text, line)?)?;
        }

        match circuit {
            Some(c) => Ok(c),
            None => {
                let nq = n_qubits.ok_or_else(|| fmt_err(0, "missing `qubits N` header"))?;
                Ok(Circuit::new(nq, n_cbits.unwrap_or(0)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_range_and_duplicates() {
        let mut c = Circuit::new(2, 1);
        assert!(matches!(
            c.push(Gate::h(2)),
            Err(Error::QubitOutOfRange { index: 2, .. })
        ));
        assert_eq!(
            c.push(Gate::cnot(1, 1)).unwrap_err(),
            Error::DuplicateQubit(1)
        );
        assert!(matches!(
            c.push(Gate::measure(0, 1)),
            Err(Error::CbitOutOfRange { .. })
        ));
        let dup = Gate::mcry(vec![Control::closed(0), Control::open(0)], 1, 0.3);
        assert_eq!(c.push(dup).unwrap_err(), Error::DuplicateQubit(0));
    }

    #[test]
    fn labels_are_unique() {
        let mut c = Circuit::new(3, 0);
        c.set_label(0, "strip0").unwrap();
        c.set_label(0, "strip0").unwrap();
        assert_eq!(
            c.set_label(1, "strip0").unwrap_err(),
            Error::DuplicateLabel("strip0".into())
        );
    }

    #[test]
    fn measure_suffix() {
        let mut c = Circuit::new(2, 2);
        c.extend([Gate::h(0), Gate::measure(0, 0), Gate::measure(1, 1)])
            .unwrap();
        assert_eq!(c.measure_suffix_start().unwrap(), 1);

        let mut bad = Circuit::new(2, 1);
        bad.extend([Gate::measure(0, 0), Gate::h(1)]).unwrap();
        assert!(matches!(
            bad.measure_suffix_start(),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn parses_mixed_listing() {
        let text = "qubits 4\ncbits 1\nlabel 0 strip0\nlabel 1 idx0\nlabel 2 idx1\nlabel 3 dna0\n\
h q[0]\nmcry(3.141593) [0-,1-,2-],q[3]\ncx q[0],q[1]\nu(1.570796,0,3.141593) q[2]\nmeasure q[0] -> c[0]\n";
        let c: Circuit = text.parse().unwrap();
        assert_eq!(c.gates().len(), 5);
        assert_eq!(c.labels().len(), 4);
        assert_eq!(c.to_string(), text);
    }

    #[test]
    fn text_format_lines() {
        assert_eq!(
            Gate::u(0, 1.25, 0.0, 0.0).to_string(),
            "u(1.250000,0,0) q[0]"
        );
        assert_eq!(Gate::cnot(2, 0).to_string(), "cx q[2],q[0]");
        assert_eq!(
            Gate::mcry(
                vec![Control::open(0), Control::closed(2)],
                3,
                std::f64::consts::PI
            )
            .to_string(),
            "mcry(3.141593) [0-,2+],q[3]"
        );
        assert_eq!(Gate::measure(0, 0).to_string(), "measure q[0] -> c[0]");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("h q[0]".parse::<Circuit>().is_err());
        assert!("qubits 1\nfoo q[0]".parse::<Circuit>().is_err());
        assert!("qubits 2\nmcry(1) [0],q[1]".parse::<Circuit>().is_err());
        assert!("qubits 1\nh q[1]".parse::<Circuit>().is_err());
    }

    #[test]
    fn asap_depth_counts_parallel_gates_once() {
        let mut c = Circuit::new(3, 0);
        c.extend([
            Gate::h(0),
            Gate::h(1),
            Gate::h(2),
            Gate::cnot(0, 1),
            Gate::x(2),
        ])
        .unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(Circuit::new(3, 0).depth(), 0);
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        // Angles on a 1e-6 grid so the six-decimal text form is lossless.
        let angle = (-3_141_592i64..3_141_592).prop_map(|k| k as f64 / 1e6);
        prop_oneof![
            (0..n).prop_map(Gate::h),
            (0..n).prop_map(Gate::x),
            (0..n, angle.clone()).prop_map(|(q, t)| Gate::ry(q, t)),
            (0..n, angle.clone(), angle.clone(), angle.clone())
                .prop_map(|(q, a, b, c)| Gate::u(q, a, b, c)),
            (0..n, 1..n).prop_map(move |(c, d)| Gate::cnot(c, (c + d) % n)),
            (
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
                0..n,
                proptest::collection::vec(any::<bool>(), n),
                angle
            )
                .prop_map(|(qs, k, closed, t)| {
                    let controls = qs[..k]
                        .iter()
                        .zip(closed)
                        .map(|(&q, c)| {
                            if c {
                                Control::closed(q)
                            } else {
                                Control::open(q)
                            }
                        })
                        .collect();
                    (controls, qs[k], t)
                })
                .prop_map(|(controls, target, t)| Gate::mcry(controls, target, t)),
        ]
    }

    proptest! {
        #[test]
        fn text_round_trip(gates in proptest::collection::vec(arb_gate(4), 0..20)) {
            let mut c = Circuit::new(4, 1);
            c.set_label(0, "strip0").unwrap();
            c.extend(gates).unwrap();
            c.push(Gate::measure(0, 0)).unwrap();
            let text = c.to_string();
            let back: Circuit = text.parse().unwrap();
            prop_assert_eq!(back.to_string(), text);
            prop_assert_eq!(back, c);
        }
    }
}
