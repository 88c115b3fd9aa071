//! FASTA reading/writing and fixed-size windowing of long sequences.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::encoding::{Nucleotide, NucleotideSeq};
use crate::error::{Error, Result};

/// Base used to fill short trailing windows; its angle is zero, so identical
/// pads contribute exactly 1 to the per-position similarity average.
pub const PAD_BASE: Nucleotide = Nucleotide::G;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastaRecord {
    pub id: String,
    pub description: String,
    pub sequence: NucleotideSeq,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FastaOptions {
    /// Drop records with invalid characters (or no sequence) instead of failing.
    pub skip_invalid: bool,
}

struct Pending {
    id: String,
    description: String,
    bases: Vec<Nucleotide>,
    error: Option<Error>,
}

impl Pending {
    fn finish(self, header_line: usize, opts: FastaOptions) -> Result<Option<FastaRecord>> {
        let error = self.error.or_else(|| {
            self.bases.is_empty().then(|| Error::Format {
                line: header_line,
                msg: format!("record {:?} has no sequence", self.id),
            })
        });
        match error {
            Some(_) if opts.skip_invalid => Ok(None),
            Some(e) => Err(e),
            None => Ok(Some(FastaRecord {
                sequence: NucleotideSeq::new(self.id.clone(), self.bases)?,
                id: self.id,
                description: self.description,
            })),
        }
    }
}

pub fn parse_fasta<R: BufRead>(reader: R) -> Result<Vec<FastaRecord>> {
    parse_fasta_with(reader, FastaOptions::default())
}

pub fn parse_fasta_str(text: &str) -> Result<Vec<FastaRecord>> {
    parse_fasta(text.as_bytes())
}

pub fn parse_fasta_with<R: BufRead>(reader: R, opts: FastaOptions) -> Result<Vec<FastaRecord>> {
    let mut records = Vec::new();
    let mut current: Option<(Pending, usize)> = None;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Format {
            line: lineno,
            msg: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');

        if let Some(header) = line.strip_prefix('>') {
            if let Some((p, at)) = current.take() {
                records.extend(p.finish(at, opts)?);
            }
            let header = header.trim();
            let (id, description) = match header.split_once(char::is_whitespace) {
                Some((id, rest)) => (id, rest.trim()),
                None => (header, ""),
            };
            if id.is_empty() {
                return Err(Error::Format {
                    line: lineno,
                    msg: "header has no identifier".into(),
                });
            }
            current = Some((
                Pending {
                    id: id.to_string(),
                    description: description.to_string(),
                    bases: Vec::new(),
                    error: None,
                },
                lineno,
            ));
            continue;
        }

        let Some((pending, _)) = current.as_mut() else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Format {
                line: lineno,
                msg: "sequence data before the first '>' header".into(),
            });
        };
        if pending.error.is_some() {
            continue;
        }
        for ch in line.chars().filter(|c| !c.is_whitespace()) {
            match Nucleotide::from_char(ch) {
                Some(b) => pending.bases.push(b),
                None => {
                    pending.error = Some(Error::InvalidBase {
                        record: pending.id.clone(),
                        line: lineno,
                        ch,
                    });
                    break;
                }
            }
        }
        if pending.error.is_some() && !opts.skip_invalid {
            return Err(pending.error.take().unwrap());
        }
    }
    if let Some((p, at)) = current {
        records.extend(p.finish(at, opts)?);
    }
    Ok(records)
}

/// Serializes records with sequence lines wrapped at `width` characters.
pub fn write_fasta(records: &[FastaRecord], width: usize) -> String {
    let width = width.max(1);
    let mut out = String::new();
    for r in records {
        out.push('>');
        out.push_str(&r.id);
        if !r.description.is_empty() {
            out.push(' ');
            out.push_str(&r.description);
        }
        out.push('\n');
        let text = r.sequence.to_string();
        for chunk in text.as_bytes().chunks(width) {
            out.push_str(std::str::from_utf8(chunk).expect("ASCII bases"));
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub offset: usize,
    /// Real bases from the source.
    pub length: usize,
    pub padded_length: usize,
    pub bases: NucleotideSeq,
}

impl Window {
    pub fn pad_count(&self) -> usize {
        self.padded_length - self.length
    }
}

/// Cuts `seq` into windows starting at `0, stride, 2·stride, …`, stopping at
/// the first window that reaches the end of the sequence. Short windows are
/// padded with [`PAD_BASE`] to `window_size`.
pub fn windows(seq: &NucleotideSeq, window_size: usize, stride: usize) -> Result<Vec<Window>> {
    if window_size < 2 || !window_size.is_power_of_two() {
        return Err(Error::InvalidWindow(format!(
            "window size {window_size} must be a power of two >= 2"
        )));
    }
    if stride == 0 || stride > window_size {
        return Err(Error::InvalidWindow(format!(
            "stride {stride} must lie in 1..={window_size} so every base is covered"
        )));
    }
    let bases = seq.bases();
    let mut out = Vec::new();
    let mut offset = 0;
    loop {
        let end = (offset + window_size).min(bases.len());
        let mut w = bases[offset..end].to_vec();
        let length = w.len();
        w.resize(window_size, PAD_BASE);
        out.push(Window {
            offset,
            length,
            padded_length: window_size,
            bases: NucleotideSeq::new(format!("{}:{offset}", seq.id()), w)?,
        });
        if end == bases.len() {
            break;
        }
        offset += stride;
    }
    Ok(out)
}
