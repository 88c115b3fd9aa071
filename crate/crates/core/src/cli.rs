//! `strandsim` command-line front end.
//!
//! Exit codes: 0 on success, 1 when `scan` flags at least one window (or
//! `lower --verify` finds a mismatch), 2 on any usage, validation or I/O
//! error. Results go to stdout, diagnostics to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::circuit::{Circuit, Control};
use crate::comparison::{compare_exact, compare_sampled, ComparisonResult, DEFAULT_SHOTS};
use crate::encoding::{build_comparison_circuit, AngleMap, NucleotideSeq};
use crate::fasta::parse_fasta;
use crate::lowering::{lower_circuit, lower_mcry, lower_toffoli, LoweringReport};
use crate::scan::{scan_sequences, write_csv, ScanConfig, ScanMode};
use crate::sim::Histogram;

pub const TOOL: &str = "strandsim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_ENV: &str = "STRANDSIM_SEED";

const HISTOGRAM_WIDTH: usize = 50;

#[derive(Debug, Parser)]
#[command(
    name = "strandsim",
    version,
    about = "Quantum strip-qubit comparison of nucleotide sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare two equal-length sequences.
    Compare(CompareArgs),
    /// Slide windows over two long sequences and flag differing regions.
    Scan(ScanArgs),
    /// Lower a CCX or multi-controlled RY to {U, CNOT}.
    Lower(LowerArgs),
    /// Dump the comparison circuit for two sequences.
    Encode(EncodeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CircuitFormat {
    Circuit,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LowerGate {
    Ccx,
    Mcry,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, conflicts_with = "fasta1", required_unless_present = "fasta1")]
    seq1: Option<String>,
    #[arg(long)]
    fasta1: Option<PathBuf>,
    #[arg(long, conflicts_with = "fasta2", required_unless_present = "fasta2")]
    seq2: Option<String>,
    #[arg(long)]
    fasta2: Option<PathBuf>,
    #[arg(long, conflicts_with = "exact")]
    shots: Option<u64>,
    /// Read P₁ from the exact marginal instead of sampling.
    #[arg(long)]
    exact: bool,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long)]
    fasta_a: PathBuf,
    #[arg(long)]
    fasta_b: PathBuf,
    #[arg(long, default_value_t = crate::scan::DEFAULT_WINDOW)]
    window: usize,
    /// Defaults to the window size.
    #[arg(long)]
    stride: Option<usize>,
    /// Defaults to 0.999 in exact mode, 0.95 when sampling.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    out: TableFormat,
}

#[derive(Debug, Args)]
struct LowerArgs {
    #[arg(long, value_enum)]
    gate: LowerGate,
    #[arg(long, default_value_t = 0)]
    controls: usize,
    #[arg(long, allow_negative_numbers = true)]
    angle: Option<f64>,
    /// Per-control polarity, one `+` (closed) or `-` (open) per control.
    #[arg(long, allow_hyphen_values = true)]
    polarity: Option<String>,
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    seq1: String,
    #[arg(long)]
    seq2: String,
    #[arg(long)]
    lowered: bool,
    #[arg(long, value_enum, default_value = "circuit")]
    format: CircuitFormat,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Compare(a) => cmd_compare(a, out),
        Command::Scan(a) => cmd_scan(a, out, err),
        Command::Lower(a) => cmd_lower(a, out),
        Command::Encode(a) => cmd_encode(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

fn envelope(command: &str, parameters: Value, result: impl Serialize) -> anyhow::Result<String> {
    let v = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "parameters": parameters,
        "result": result,
    });
    Ok(serde_json::to_string_pretty(&v)?)
}

fn first_record(path: &Path) -> anyhow::Result<NucleotideSeq> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let records = parse_fasta(std::io::BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))?;
    match records.into_iter().next() {
        Some(r) => Ok(r.sequence),
        None => bail!("{} contains no FASTA records", path.display()),
    }
}

fn sequence_arg(
    text: Option<&str>,
    path: Option<&Path>,
    id: &str,
) -> anyhow::Result<NucleotideSeq> {
    match (text, path) {
        (Some(t), _) => Ok(NucleotideSeq::parse(id, t)?),
        (None, Some(p)) => first_record(p),
        (None, None) => bail!("missing --{id} or --fasta{}", id.trim_start_matches("seq")),
    }
}

/// Six decimals, without a sign on values that round to zero.
fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn render_histogram(h: &Histogram) -> String {
    let max = h.counts.values().copied().max().unwrap_or(0).max(1);
    let mut s = String::new();
    for key in ["0", "1"] {
        let n = h.count(key);
        let bar = "#".repeat(((n as f64 / max as f64) * HISTOGRAM_WIDTH as f64).round() as usize);
        s.push_str(&format!(
            "  {key} | {bar:<width$} {n} ({})\n",
            fmt6(h.frequency(key)),
            width = HISTOGRAM_WIDTH
        ));
    }
    s
}

fn render_comparison(r: &ComparisonResult) -> String {
    let mut s = String::new();
    let method = match r.method {
        crate::comparison::Method::Exact => "exact",
        crate::comparison::Method::Sampled => "sampled",
    };
    s.push_str(&format!("method      {method}\n"));
    if let Some(shots) = r.shots {
        s.push_str(&format!("shots       {shots}\n"));
    }
    if let Some(seed) = r.seed {
        s.push_str(&format!("seed        {seed}\n"));
    }
    s.push_str(&format!("qubits      {}\n", r.n_qubits));
    s.push_str(&format!("p1          {}\n", fmt6(r.p1)));
    s.push_str(&format!("similarity  {}\n", fmt6(r.similarity)));
    if let Some(h) = &r.histogram {
        s.push_str("strip qubit histogram\n");
        s.push_str(&render_histogram(h));
    }
    s
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let s1 = sequence_arg(a.seq1.as_deref(), a.fasta1.as_deref(), "seq1")?;
    let s2 = sequence_arg(a.seq2.as_deref(), a.fasta2.as_deref(), "seq2")?;
    let map = AngleMap::default();
    let result = if a.exact {
        compare_exact(&s1, &s2, &map)?
    } else {
        compare_sampled(&s1, &s2, &map, a.shots.unwrap_or(DEFAULT_SHOTS), a.seed)?
    };
    match a.format {
        ReportFormat::Text => write!(out, "{}", render_comparison(&result))?,
        ReportFormat::Json => {
            let params = json!({
                "seq1": s1.to_string(),
                "seq2": s2.to_string(),
                "exact": a.exact,
                "shots": result.shots,
                "seed": a.seed,
            });
            writeln!(out, "{}", envelope("compare", params, &result)?)?;
        }
    }
    Ok(0)
}

fn cmd_scan(a: ScanArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let sa = first_record(&a.fasta_a)?;
    let sb = first_record(&a.fasta_b)?;
    let mode = match a.shots {
        Some(shots) if !a.exact => ScanMode::Sampled { shots },
        _ => ScanMode::Exact,
    };
    let config = ScanConfig {
        window_size: a.window,
        stride: a.stride.unwrap_or(a.window),
        mode,
        threshold: a.threshold.unwrap_or_else(|| mode.default_threshold()),
        seed: a.seed,
        angles: AngleMap::default(),
    };
    let reports = scan_sequences(&sa, &sb, &config)?;
    let flagged = reports.iter().filter(|r| r.flagged).count();
    let shots = match mode {
        ScanMode::Exact => None,
        ScanMode::Sampled { shots } => Some(shots),
    };
    let params = json!({
        "fasta_a": a.fasta_a.display().to_string(),
        "fasta_b": a.fasta_b.display().to_string(),
        "window": config.window_size,
        "stride": config.stride,
        "threshold": config.threshold,
        "exact": shots.is_none(),
        "shots": shots,
        "seed": config.seed,
    });
    match a.out {
        TableFormat::Csv => {
            write_csv(&reports, &mut *out)?;
            writeln!(err, "# {TOOL} {VERSION} scan {params}")?;
        }
        TableFormat::Json => writeln!(out, "{}", envelope("scan", params, &reports)?)?,
    }
    writeln!(err, "{flagged} of {} windows flagged", reports.len())?;
    Ok(if flagged > 0 { 1 } else { 0 })
}

fn parse_polarity(spec: Option<&str>, k: usize) -> anyhow::Result<Vec<Control>> {
    let Some(spec) = spec else {
        return Ok((0..k).map(Control::closed).collect());
    };
    if spec.chars().count() != k {
        bail!("--polarity needs exactly {k} characters, got {spec:?}");
    }
    spec.chars()
        .enumerate()
        .map(|(q, c)| match c {
            '+' => Ok(Control::closed(q)),
            '-' => Ok(Control::open(q)),
            other => bail!("polarity character {other:?} is not '+' or '-'"),
        })
        .collect()
}

fn report_lines(r: &LoweringReport, verify: bool) -> String {
    let mut s = format!(
        "# single_qubit_count {}\n# cnot_count {}\n# depth {}\n",
        r.single_qubit_count, r.cnot_count, r.depth
    );
    if verify {
        match r.verification {
            Some(v) => s.push_str(&format!(
                "# equivalent {}\n# max_deviation {:e}\n",
                v.equivalent, v.max_deviation
            )),
            None => s.push_str("# equivalent unverified (register too wide)\n"),
        }
    }
    s
}

fn report_json(r: &LoweringReport, verify: bool) -> Value {
    let mut v = json!({
        "circuit": r.lowered.to_string(),
        "single_qubit_count": r.single_qubit_count,
        "cnot_count": r.cnot_count,
        "depth": r.depth,
    });
    if verify {
        v["equivalent"] = json!(r.equivalent());
        v["max_deviation"] = json!(r.max_deviation());
    }
    v
}

fn cmd_lower(a: LowerArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let report = match a.gate {
        LowerGate::Ccx => lower_toffoli(0, 1, 2)?,
        LowerGate::Mcry => {
            let Some(angle) = a.angle else {
                bail!("--gate mcry requires --angle <radians>");
            };
            let controls = parse_polarity(a.polarity.as_deref(), a.controls)?;
            lower_mcry(&controls, a.controls, angle)?
        }
    };
    match a.format {
        ReportFormat::Text => {
            write!(out, "{}", report.lowered)?;
            write!(out, "{}", report_lines(&report, a.verify))?;
        }
        ReportFormat::Json => {
            let params = json!({
                "gate": match a.gate { LowerGate::Ccx => "ccx", LowerGate::Mcry => "mcry" },
                "controls": a.controls,
                "angle": a.angle,
                "polarity": a.polarity,
                "verify": a.verify,
            });
            writeln!(
                out,
                "{}",
                envelope("lower", params, report_json(&report, a.verify))?
            )?;
        }
    }
    let failed = a.verify && report.equivalent() == Some(false);
    Ok(if failed { 1 } else { 0 })
}

fn cmd_encode(a: EncodeArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let s1 = NucleotideSeq::parse("seq1", &a.seq1)?;
    let s2 = NucleotideSeq::parse("seq2", &a.seq2)?;
    let (circuit, layout) = build_comparison_circuit(&s1, &s2, &AngleMap::default())?;
    let lowered = if a.lowered {
        Some(lower_circuit(&circuit)?)
    } else {
        None
    };
    let shown: &Circuit = lowered.as_ref().map_or(&circuit, |r| &r.lowered);
    match a.format {
        CircuitFormat::Circuit => {
            write!(out, "{shown}")?;
            if let Some(r) = &lowered {
                write!(out, "{}", report_lines(r, false))?;
            }
        }
        CircuitFormat::Json => {
            let params = json!({
                "seq1": s1.to_string(),
                "seq2": s2.to_string(),
                "lowered": a.lowered,
            });
            let mut result = json!({
                "circuit": shown.to_string(),
                "n_qubits": shown.n_qubits(),
                "layout": layout,
            });
            if let Some(r) = &lowered {
                result["single_qubit_count"] = json!(r.single_qubit_count);
                result["cnot_count"] = json!(r.cnot_count);
                result["depth"] = json!(r.depth);
            }
            writeln!(out, "{}", envelope("encode", params, result)?)?;
        }
    }
    Ok(0)
}
