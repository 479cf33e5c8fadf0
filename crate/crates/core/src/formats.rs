//! Versioned JSON-lines and TSV output for IPF synset records.
//!
//! JSONL is the archival format: line 1 is the [`OutputHeader`], each later
//! line one record, floats written in shortest round-trip form. TSV is for
//! people and spreadsheets: `#` header lines, then one row per record with
//! six-decimal intervals and `NA` for missing values.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CategoryId, UnknownSensePolicy, WsfTable};
use crate::inventory::SynsetId;
use crate::membership::{FootprintMode, IntervalMembership, Variant};
use crate::pipeline::{IpfSynsetRecord, PipelineConfig, RecordStatus, SenseDiagnostics};

pub const FORMAT_VERSION: &str = "ipf-synsets/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("unsupported format version {0:?}")]
    UnsupportedVersion(String),
    #[error("line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("missing header line")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputHeader {
    pub format_version: String,
    pub alpha: f64,
    pub footprint_mode: FootprintMode,
    pub variants: Vec<Variant>,
    pub min_count: u64,
    pub unknown_sense_policy: String,
    pub verbose: bool,
    pub n_categories: usize,
    pub categories: Vec<String>,
    pub inventory_fingerprint: String,
    pub corpus_fingerprint: String,
}

pub fn policy_name(policy: UnknownSensePolicy) -> &'static str {
    match policy {
        UnknownSensePolicy::SkipAndTally => "skip",
        UnknownSensePolicy::Fail => "fail",
    }
}

impl OutputHeader {
    pub fn new(cfg: &PipelineConfig, wsf: &WsfTable) -> OutputHeader {
        OutputHeader {
            format_version: FORMAT_VERSION.to_string(),
            alpha: cfg.alpha,
            footprint_mode: cfg.footprint_mode,
            variants: cfg.variants.clone(),
            min_count: cfg.min_count,
            unknown_sense_policy: policy_name(cfg.unknown_sense_policy).to_string(),
            verbose: cfg.verbose,
            n_categories: wsf.n_categories(),
            categories: wsf.categories().iter().map(|c| c.to_string()).collect(),
            inventory_fingerprint: wsf.inventory_fingerprint().to_string(),
            corpus_fingerprint: wsf.fingerprint(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    synset_id: SynsetId,
    sense_key: String,
    sense_index: usize,
    status: RecordStatus,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    footprint: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    footprint_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    cumulative_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    low_1983: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    up_1983: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    low_1993: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    up_1993: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    diagnostics: Option<SenseDiagnostics>,
}

impl From<&IpfSynsetRecord> for RecordLine {
    fn from(r: &IpfSynsetRecord) -> Self {
        RecordLine {
            synset_id: r.synset_id,
            sense_key: r.sense_key.clone(),
            sense_index: r.sense_index,
            status: r.status,
            footprint: r.footprint.iter().map(|c| c.to_string()).collect(),
            footprint_size: r.is_ok().then_some(r.footprint.len()),
            cumulative_prob: r.cumulative_prob,
            low_1983: r.v1983.map(|iv| iv.low),
            up_1983: r.v1983.map(|iv| iv.up),
            low_1993: r.v1993.map(|iv| iv.low),
            up_1993: r.v1993.map(|iv| iv.up),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

impl RecordLine {
    fn into_record(self) -> Result<IpfSynsetRecord, String> {
        let footprint = self
            .footprint
            .into_iter()
            .map(|c| CategoryId::new(c).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        let footprint_size = self.footprint_size.unwrap_or(0);
        if footprint_size != footprint.len() {
            return Err("footprint_size disagrees with footprint".to_string());
        }
        let interval = |low: Option<f64>, up: Option<f64>, variant| match (low, up) {
            (Some(low), Some(up)) => Ok(Some(IntervalMembership {
                low,
                up,
                variant,
                footprint_size,
            })),
            (None, None) => Ok(None),
            _ => Err(format!("incomplete {variant} interval")),
        };
        Ok(IpfSynsetRecord {
            synset_id: self.synset_id,
            sense_key: self.sense_key,
            sense_index: self.sense_index,
            status: self.status,
            v1983: interval(self.low_1983, self.up_1983, Variant::V1983)?,
            v1993: interval(self.low_1993, self.up_1993, Variant::V1993)?,
            footprint,
            cumulative_prob: self.cumulative_prob,
            diagnostics: self.diagnostics,
        })
    }
}

struct CountingWriter<W> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Writes header and records as JSON lines; returns the byte count.
pub fn write_jsonl<W: Write>(
    records: &[IpfSynsetRecord],
    header: &OutputHeader,
    writer: W,
) -> Result<u64, FormatError> {
    let mut out = CountingWriter {
        inner: writer,
        written: 0,
    };
    serde_json::to_writer(&mut out, header).map_err(io::Error::from)?;
    out.write_all(b"\n")?;
    for r in records {
        serde_json::to_writer(&mut out, &RecordLine::from(r)).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(out.written)
}

pub const TSV_COLUMNS: [&str; 8] = [
    "synset_id",
    "sense_key",
    "status",
    "low_1983",
    "up_1983",
    "low_1993",
    "up_1993",
    "footprint_size",
];

fn tsv_value(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"))
}

pub fn write_tsv<W: Write>(
    records: &[IpfSynsetRecord],
    header: &OutputHeader,
    writer: W,
) -> Result<u64, FormatError> {
    let mut out = CountingWriter {
        inner: writer,
        written: 0,
    };
    let variants: Vec<&str> = header.variants.iter().map(|v| v.as_str()).collect();
    writeln!(out, "# format_version={}", header.format_version)?;
    writeln!(out, "# alpha={}", header.alpha)?;
    writeln!(out, "# footprint_mode={}", header.footprint_mode)?;
    writeln!(out, "# variants={}", variants.join(","))?;
    writeln!(out, "# min_count={}", header.min_count)?;
    writeln!(out, "# unknown_sense_policy={}", header.unknown_sense_policy)?;
    writeln!(out, "# n_categories={}", header.n_categories)?;
    writeln!(out, "# categories={}", header.categories.join("\t"))?;
    writeln!(out, "# inventory_fingerprint={}", header.inventory_fingerprint)?;
    writeln!(out, "# corpus_fingerprint={}", header.corpus_fingerprint)?;
    writeln!(out, "# {}", TSV_COLUMNS.join("\t"))?;
    for r in records {
        let footprint_size = if r.is_ok() {
            r.footprint.len().to_string()
        } else {
            "NA".to_string()
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.synset_id,
            r.sense_key,
            r.status.as_str(),
            tsv_value(r.v1983.map(|iv| iv.low)),
            tsv_value(r.v1983.map(|iv| iv.up)),
            tsv_value(r.v1993.map(|iv| iv.low)),
            tsv_value(r.v1993.map(|iv| iv.up)),
            footprint_size,
        )?;
    }
    out.flush()?;
    Ok(out.written)
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: String,
}

pub fn read_jsonl<R: BufRead>(
    reader: R,
) -> Result<(OutputHeader, Vec<IpfSynsetRecord>), FormatError> {
    let mut lines = reader.lines().enumerate();
    let header_line = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(FormatError::MissingHeader),
        }
    };
    let probe: VersionProbe =
        serde_json::from_str(&header_line).map_err(|e| FormatError::MalformedLine {
            line_no: 1,
            reason: e.to_string(),
        })?;
    if probe.format_version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(probe.format_version));
    }
    let header: OutputHeader =
        serde_json::from_str(&header_line).map_err(|e| FormatError::MalformedLine {
            line_no: 1,
            reason: e.to_string(),
        })?;

    let mut records = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| FormatError::MalformedLine { line_no, reason };
        let wire: RecordLine = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        records.push(wire.into_record().map_err(malformed)?);
    }
    Ok((header, records))
}
