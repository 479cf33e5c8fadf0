//! End-to-end construction of interval probabilistic fuzzy synsets.
//!
//! For every sense of every synset: per-category PMV rows give one
//! possibility (membership) value per category, the WSP row gives the
//! probability of each category, and the alpha-percent footprint of that
//! distribution reduces the `<membership, probability>` pairs to the
//! `[min, max]` of the footprint's memberships.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CategoryId, UnknownSensePolicy, WsfTable};
use crate::inventory::{SenseKey, SynsetId, SynsetInventory};
use crate::membership::{
    alpha_footprint, compute_pmv, compute_wsp, possibility_of, validate_alpha, FootprintMode,
    IntervalMembership, IpfError, PmvRow, ProbRow, Variant,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] IpfError),
    #[error("at least one variant must be requested")]
    NoVariants,
    #[error("WSF table was built against a different inventory")]
    FingerprintMismatch,
    #[error("unknown category {0}")]
    UnknownCategory(String),
    #[error("unknown synset {0}")]
    UnknownSynset(SynsetId),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub footprint_mode: FootprintMode,
    /// Sorted, without duplicates.
    pub variants: Vec<Variant>,
    pub min_count: u64,
    pub unknown_sense_policy: UnknownSensePolicy,
    /// Attach per-category PMV, WSP and possibility values to each record.
    pub verbose: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            alpha: 0.8,
            footprint_mode: FootprintMode::Inclusive,
            variants: Variant::ALL.to_vec(),
            min_count: 0,
            unknown_sense_policy: UnknownSensePolicy::SkipAndTally,
            verbose: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        validate_alpha(self.alpha)?;
        if self.variants.is_empty() {
            return Err(PipelineError::NoVariants);
        }
        Ok(())
    }

    pub fn wants(&self, variant: Variant) -> bool {
        self.variants.contains(&variant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "no-data")]
    NoData,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::NoData => "no-data",
        }
    }
}

/// Per-category values of one sense; `None` marks no data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SenseDiagnostics {
    pub pmv: Vec<Option<f64>>,
    pub wsp: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub possibility_1983: Option<Vec<Option<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub possibility_1993: Option<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpfSynsetRecord {
    pub synset_id: SynsetId,
    pub sense_key: String,
    pub sense_index: usize,
    pub status: RecordStatus,
    /// Footprint categories in selection order; empty for no-data records.
    pub footprint: Vec<CategoryId>,
    pub cumulative_prob: Option<f64>,
    pub v1983: Option<IntervalMembership>,
    pub v1993: Option<IntervalMembership>,
    pub diagnostics: Option<SenseDiagnostics>,
}

impl IpfSynsetRecord {
    pub fn interval(&self, variant: Variant) -> Option<&IntervalMembership> {
        match variant {
            Variant::V1983 => self.v1983.as_ref(),
            Variant::V1993 => self.v1993.as_ref(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }
}

fn check_fingerprint(wsf: &WsfTable, inv: &SynsetInventory) -> Result<(), PipelineError> {
    if wsf.inventory_fingerprint() != inv.fingerprint() {
        return Err(PipelineError::FingerprintMismatch);
    }
    Ok(())
}

fn filtered<'a>(wsf: &'a WsfTable, cfg: &PipelineConfig) -> Cow<'a, WsfTable> {
    if cfg.min_count > 1 {
        Cow::Owned(wsf.clone().with_min_count(cfg.min_count))
    } else {
        Cow::Borrowed(wsf)
    }
}

/// Builds one record per sense of every synset, in `(synset, sense index)`
/// order. Synsets are processed on the current rayon pool; the output does
/// not depend on the schedule.
pub fn build_ipf_synsets(
    wsf: &WsfTable,
    inv: &SynsetInventory,
    cfg: &PipelineConfig,
) -> Result<Vec<IpfSynsetRecord>, PipelineError> {
    cfg.validate()?;
    check_fingerprint(wsf, inv)?;
    let wsf = filtered(wsf, cfg);
    let synsets: Vec<(SynsetId, &[SenseKey])> = inv.iter().collect();
    let per_synset = synsets
        .par_iter()
        .map(|&(id, senses)| synset_records(&wsf, id, senses, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(per_synset.into_iter().flatten().collect())
}

/// Records for a single synset, as [`build_ipf_synsets`] would emit them.
pub fn build_synset(
    wsf: &WsfTable,
    inv: &SynsetInventory,
    id: SynsetId,
    cfg: &PipelineConfig,
) -> Result<Vec<IpfSynsetRecord>, PipelineError> {
    cfg.validate()?;
    check_fingerprint(wsf, inv)?;
    let senses = inv
        .senses_of(id)
        .map_err(|_| PipelineError::UnknownSynset(id))?;
    synset_records(&filtered(wsf, cfg), id, senses, cfg)
}

fn synset_records(
    wsf: &WsfTable,
    id: SynsetId,
    senses: &[SenseKey],
    cfg: &PipelineConfig,
) -> Result<Vec<IpfSynsetRecord>, PipelineError> {
    let n = wsf.n_categories();
    let counts = wsf.synset_counts(id);
    let pmv_rows: Vec<PmvRow> = match counts {
        Some(c) => (0..n).map(|k| compute_pmv(c.in_category(k))).collect(),
        None => vec![ProbRow::NoData(senses.len()); n],
    };

    senses
        .iter()
        .enumerate()
        .map(|(j, key)| {
            let wsp = match counts {
                Some(c) => compute_wsp(&c.across_categories(j)),
                None => ProbRow::NoData(n),
            };
            let diagnostics = cfg.verbose.then(|| diagnose(&pmv_rows, &wsp, j, cfg));
            let mut record = IpfSynsetRecord {
                synset_id: id,
                sense_key: key.raw().to_string(),
                sense_index: j,
                status: RecordStatus::NoData,
                footprint: Vec::new(),
                cumulative_prob: None,
                v1983: None,
                v1993: None,
                diagnostics,
            };
            if wsp.values().is_none() {
                return Ok(record);
            }
            let fp = alpha_footprint(&wsp, cfg.alpha, cfg.footprint_mode)?;
            for &variant in &cfg.variants {
                let values = fp
                    .categories
                    .iter()
                    .map(|&k| {
                        pmv_rows[k]
                            .values()
                            .map(|p| possibility_of(p, j, variant))
                            .ok_or_else(|| {
                                PipelineError::Invariant(format!(
                                    "{} occurs in category {} but its synset has no data there",
                                    key, wsf.categories()[k]
                                ))
                            })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let iv = IntervalMembership::span(values, variant)?;
                match variant {
                    Variant::V1983 => record.v1983 = Some(iv),
                    Variant::V1993 => record.v1993 = Some(iv),
                }
            }
            record.status = RecordStatus::Ok;
            record.footprint = fp
                .categories
                .iter()
                .map(|&k| wsf.categories()[k].clone())
                .collect();
            record.cumulative_prob = Some(fp.cumulative_prob);
            Ok(record)
        })
        .collect()
}

fn diagnose(pmv_rows: &[PmvRow], wsp: &ProbRow, j: usize, cfg: &PipelineConfig) -> SenseDiagnostics {
    let profile = |variant: Variant| {
        cfg.wants(variant).then(|| {
            pmv_rows
                .iter()
                .map(|row| row.values().map(|p| possibility_of(p, j, variant)))
                .collect()
        })
    };
    SenseDiagnostics {
        pmv: pmv_rows.iter().map(|row| row.get(j)).collect(),
        wsp: (0..wsp.len()).map(|k| wsp.get(k)).collect(),
        possibility_1983: profile(Variant::V1983),
        possibility_1993: profile(Variant::V1993),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyMembership {
    pub synset_id: SynsetId,
    pub sense_key: String,
    pub membership: f64,
}

/// Plain fuzzy synsets from a single category: each sense's possibility
/// value there. Synsets without data in the category are omitted.
pub fn build_fuzzy_synsets(
    wsf: &WsfTable,
    inv: &SynsetInventory,
    category: &CategoryId,
    variant: Variant,
) -> Result<Vec<FuzzyMembership>, PipelineError> {
    check_fingerprint(wsf, inv)?;
    let k = wsf
        .category_index(category)
        .ok_or_else(|| PipelineError::UnknownCategory(category.to_string()))?;
    let mut out = Vec::new();
    for (id, senses) in inv.iter() {
        let Some(counts) = wsf.synset_counts(id) else {
            continue;
        };
        let pmv = compute_pmv(counts.in_category(k));
        let Some(p) = pmv.values() else {
            continue;
        };
        out.extend(senses.iter().enumerate().map(|(j, key)| FuzzyMembership {
            synset_id: id,
            sense_key: key.raw().to_string(),
            membership: possibility_of(p, j, variant),
        }));
    }
    Ok(out)
}

pub const WIDTH_BINS: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VariantStats {
    pub intervals: usize,
    /// Ten equal bins over `[0, 1]`; a width of exactly 1 falls in the last.
    pub width_histogram: [u64; WIDTH_BINS],
    pub degenerate: usize,
    pub mean_low: f64,
    pub mean_up: f64,
    pub mean_width: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsReport {
    pub records: usize,
    pub ok: usize,
    pub no_data: usize,
    pub variants: BTreeMap<Variant, VariantStats>,
    pub footprint_sizes: BTreeMap<usize, usize>,
}

pub fn width_bin(width: f64) -> usize {
    ((width * WIDTH_BINS as f64).floor() as usize).min(WIDTH_BINS - 1)
}

pub fn summarize(records: &[IpfSynsetRecord]) -> StatsReport {
    let mut report = StatsReport {
        records: records.len(),
        ..StatsReport::default()
    };
    let mut sums: BTreeMap<Variant, (f64, f64, f64)> = BTreeMap::new();
    for r in records {
        match r.status {
            RecordStatus::Ok => report.ok += 1,
            RecordStatus::NoData => {
                report.no_data += 1;
                continue;
            }
        }
        *report.footprint_sizes.entry(r.footprint.len()).or_default() += 1;
        for variant in Variant::ALL {
            let Some(iv) = r.interval(variant) else {
                continue;
            };
            let stats = report.variants.entry(variant).or_default();
            stats.intervals += 1;
            stats.width_histogram[width_bin(iv.width())] += 1;
            if iv.low == iv.up {
                stats.degenerate += 1;
            }
            let s = sums.entry(variant).or_default();
            s.0 += iv.low;
            s.1 += iv.up;
            s.2 += iv.width();
        }
    }
    for (variant, (low, up, width)) in sums {
        let stats = report.variants.get_mut(&variant).expect("entry created above");
        let n = stats.intervals as f64;
        stats.mean_low = low / n;
        stats.mean_up = up / n;
        stats.mean_width = width / n;
    }
    report
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "records={} ok={} no_data={}",
            self.records, self.ok, self.no_data
        )?;
        for (variant, s) in &self.variants {
            let hist: Vec<String> = s.width_histogram.iter().map(u64::to_string).collect();
            writeln!(
                f,
                "v{variant} intervals={} degenerate={} mean_low={:.6} mean_up={:.6} mean_width={:.6} width_histogram={}",
                s.intervals,
                s.degenerate,
                s.mean_low,
                s.mean_up,
                s.mean_width,
                hist.join(",")
            )?;
        }
        let sizes: Vec<String> = self
            .footprint_sizes
            .iter()
            .map(|(size, count)| format!("{size}:{count}"))
            .collect();
        write!(f, "footprint_sizes={}", sizes.join(","))
    }
}
