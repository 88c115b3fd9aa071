//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p strandsim --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use strandsim::comparison::similarity_from_p1;
use strandsim::encoding::{build_comparison_circuit, required_qubits};
use strandsim::{
    compare_exact, compare_sampled, lower_circuit, lower_toffoli, scan_sequences, AngleMap,
    GateKind, NucleotideSeq, ScanConfig, ScanMode, Statevector,
};

const BASES: [char; 4] = ['A', 'C', 'G', 'T'];

/// Independent per-base angle table, written out by hand.
fn oracle_angle(c: char) -> f64 {
    match c {
        'A' => PI,
        'C' => PI / 2.0,
        'T' => PI / 6.0,
        'G' => 0.0,
        _ => unreachable!(),
    }
}

fn oracle_mean_cos(a: &str, b: &str) -> f64 {
    let n = a.len() as f64;
    a.chars()
        .zip(b.chars())
        .map(|(x, y)| ((oracle_angle(x) - oracle_angle(y)) / 2.0).cos())
        .sum::<f64>()
        / n
}

fn oracle_p1(a: &str, b: &str) -> f64 {
    (1.0 - oracle_mean_cos(a, b)) / 2.0
}

fn seq(s: &str) -> NucleotideSeq {
    s.parse().unwrap()
}

fn random_string(rng: &mut impl Rng, n: usize) -> String {
    (0..n).map(|_| BASES[rng.random_range(0..4)]).collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if elapsed > budget {
        o.pass = false;
    }
    o.detail = format!("{}; {:.2?} (budget {:?})", o.detail, elapsed, budget);
    o
}

fn uniform_table() -> Outcome {
    let m = AngleMap::default();
    let rows = [
        ("AAAA", 0.0),
        ("CCCC", 0.146),
        ("TTTT", 0.371),
        ("GGGG", 0.5),
    ];
    let mut pass = true;
    let mut got = Vec::new();
    for (other, rounded) in rows {
        let p1 = match compare_exact(&seq("AAAA"), &seq(other), &m) {
            Ok(r) => r.p1,
            Err(e) => return check(false, e.to_string()),
        };
        pass &= (p1 - rounded).abs() <= 5e-4;
        pass &= (p1 - oracle_p1("AAAA", other)).abs() <= 1e-9;
        got.push(format!("{other}={p1:.5}"));
    }
    check(pass, got.join(" "))
}

fn sampled_distribution() -> Outcome {
    let m = AngleMap::default();
    let (a, b) = (seq("AAAA"), seq("TTTT"));
    let mut values = Vec::with_capacity(100);
    for s in 0..100u64 {
        match compare_sampled(&a, &b, &m, 8000, s) {
            Ok(r) => values.push(r.p1),
            Err(e) => return check(false, e.to_string()),
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let worst = values
        .iter()
        .map(|p| (p - 0.3706).abs())
        .fold(0.0, f64::max);
    let hardware_in_band = (0.378f64 - 0.3706).abs() <= 0.030;
    check(
        (mean - 0.3706).abs() <= 0.002 && worst <= 0.030 && hardware_in_band,
        format!("mean {mean:.5}, max |p1 - 0.3706| {worst:.5} over 100 seeds x 8000 shots"),
    )
}

fn similarity_arithmetic() -> Outcome {
    match similarity_from_p1(0.378) {
        Ok(s) => check((s - 0.244).abs() <= 1e-12, format!("1 - 2*0.378 = {s:.6}")),
        Err(e) => check(false, e.to_string()),
    }
}

fn toffoli_lowering() -> Outcome {
    let r = match lower_toffoli(0, 1, 2) {
        Ok(r) => r,
        Err(e) => return check(false, e.to_string()),
    };
    let dev = r.max_deviation().unwrap_or(f64::INFINITY);
    let only_basis = r
        .lowered
        .gates()
        .iter()
        .all(|g| matches!(g.kind(), GateKind::U | GateKind::Cnot));
    check(
        r.single_qubit_count == 9
            && r.cnot_count == 6
            && r.depth == 11
            && dev <= 1e-10
            && only_basis,
        format!(
            "{} U, {} CNOT, depth {}, max deviation {dev:.2e}",
            r.single_qubit_count, r.cnot_count, r.depth
        ),
    )
}

fn circuit_matches_oracle() -> Outcome {
    let m = AngleMap::default();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for a in 0..16 {
        for b in 0..16 {
            let s = |k: usize| -> String { [BASES[k / 4], BASES[k % 4]].iter().collect() };
            pairs.push((s(a), s(b)));
        }
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x5eed);
    for n in [4, 8, 16] {
        for _ in 0..1000 {
            pairs.push((random_string(&mut rng, n), random_string(&mut rng, n)));
        }
    }
    let mut worst = 0.0f64;
    for (a, b) in &pairs {
        match compare_exact(&seq(a), &seq(b), &m) {
            Ok(r) => worst = worst.max((r.p1 - oracle_p1(a, b)).abs()),
            Err(e) => return check(false, format!("{a}/{b}: {e}")),
        }
    }
    check(
        worst <= 1e-9,
        format!("{} pairs, max |p1 - oracle| {worst:.2e}", pairs.len()),
    )
}

fn register_sizes() -> Outcome {
    let expect = [(1, 2), (2, 3), (4, 4), (8, 5), (16, 6), (32, 7)];
    let sizes_ok = expect.iter().all(|&(n, q)| required_qubits(n) == q);
    let (c, _) = match build_comparison_circuit(&seq("AAAA"), &seq("TTTT"), &AngleMap::default()) {
        Ok(x) => x,
        Err(e) => return check(false, e.to_string()),
    };
    let labels: Vec<&str> = c.labels().values().map(String::as_str).collect();
    check(
        sizes_ok && c.n_qubits() == 4 && labels == ["strip0", "idx0", "idx1", "dna0"],
        format!("qubits for N=1..32: {sizes_ok}; N=4 wires {labels:?}"),
    )
}

fn lowered_circuit_agrees() -> Outcome {
    let run = || -> strandsim::Result<(f64, f64, usize)> {
        let (c, layout) =
            build_comparison_circuit(&seq("AAAA"), &seq("TTTT"), &AngleMap::default())?;
        let lowered = lower_circuit(&c)?;
        let p1 = |circ: &strandsim::Circuit| -> strandsim::Result<f64> {
            let mut sv = Statevector::new(circ.n_qubits())?;
            sv.apply_circuit(circ)?;
            sv.probability_of(layout.strip_qubit, 1)
        };
        Ok((p1(&c)?, p1(&lowered.lowered)?, lowered.cnot_count))
    };
    match run() {
        Ok((raw, low, cx)) => check(
            (raw - low).abs() <= 1e-9,
            format!("unlowered {raw:.10}, lowered {low:.10} ({cx} CNOT)"),
        ),
        Err(e) => check(false, e.to_string()),
    }
}

fn scan_localizes_substitution() -> Outcome {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(64);
    let a = random_string(&mut rng, 64);
    let pos = 37;
    let original = a.as_bytes()[pos] as char;
    let replacement = BASES.iter().copied().find(|&c| c != original).unwrap();
    let mut b = a.clone();
    b.replace_range(pos..=pos, &replacement.to_string());

    let config = ScanConfig {
        window_size: 4,
        stride: 4,
        mode: ScanMode::Exact,
        ..ScanConfig::default()
    };
    let reports = match scan_sequences(&seq(&a), &seq(&b), &config) {
        Ok(r) => r,
        Err(e) => return check(false, e.to_string()),
    };
    let flagged: Vec<usize> = reports
        .iter()
        .filter(|r| r.flagged)
        .map(|r| r.offset)
        .collect();
    let worst = reports
        .iter()
        .map(|r| {
            let span = r.offset..r.offset + r.real_length;
            (r.sim_corrected - oracle_mean_cos(&a[span.clone()], &b[span])).abs()
        })
        .fold(0.0, f64::max);
    let same = match scan_sequences(&seq(&a), &seq(&a), &config) {
        Ok(r) => r.iter().filter(|r| r.flagged).count(),
        Err(e) => return check(false, e.to_string()),
    };
    check(
        flagged == [36] && worst <= 1e-9 && same == 0 && reports.len() == 16,
        format!(
            "{original}->{replacement} at {pos}: flagged offsets {flagged:?}, max |sim - oracle| {worst:.2e}, identical flags {same}"
        ),
    )
}

type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (
            "uniform-sequence P1 table",
            Box::new(|| timed(Duration::from_secs(1), uniform_table)),
        ),
        (
            "sampled P1 spread over 100 seeds",
            Box::new(|| timed(Duration::from_secs(10), sampled_distribution)),
        ),
        (
            "similarity from hardware P1",
            Box::new(similarity_arithmetic),
        ),
        (
            "Toffoli lowering cost and equivalence",
            Box::new(toffoli_lowering),
        ),
        (
            "circuit P1 matches closed form",
            Box::new(|| timed(Duration::from_secs(30), circuit_matches_oracle)),
        ),
        ("register size and wire labels", Box::new(register_sizes)),
        (
            "lowered comparison circuit agrees",
            Box::new(lowered_circuit_agrees),
        ),
        (
            "scan flags the substituted window",
            Box::new(scan_localizes_substitution),
        ),
    ];

    let mut failures = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let o = f();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {} {:<40} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
