//! Sense-annotated corpus ingestion and the per-category word-sense
//! frequency (WSF) table.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

use crate::inventory::{SenseSlot, SynsetId, SynsetInventory};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line_no}: {reason}")]
    MalformedLine { line_no: usize, reason: String },
    #[error("line {line_no}: negative count {value}")]
    NegativeCount { line_no: usize, value: i64 },
    #[error("unknown sense key {0}")]
    UnknownSense(String),
    #[error("invalid category name {0:?}")]
    InvalidCategory(String),
    #[error("duplicate category {0}")]
    DuplicateCategory(String),
    #[error("corpus has no categories")]
    NoCategories,
    #[error("unknown category {0}")]
    UnknownCategory(String),
    #[error("inventory fingerprints differ")]
    FingerprintMismatch,
    #[error("category lists differ")]
    CategoryMismatch,
    #[error("malformed corpus manifest: {0}")]
    MalformedManifest(String),
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CorpusError {
    fn in_file(self, path: &Path) -> CorpusError {
        CorpusError::InFile {
            path: path.to_path_buf(),
            source: Box::new(self),
        }
    }
}

/// Name of one corpus partition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryId(String);

impl CategoryId {
    pub fn new(name: impl Into<String>) -> Result<CategoryId, CorpusError> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_control) {
            return Err(CorpusError::InvalidCategory(name));
        }
        Ok(CategoryId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamFormat {
    /// `token TAB lemma TAB sense_key`, one annotation per line.
    TokenPerLine,
    /// `sense_key TAB count`.
    CountFile,
}

impl StreamFormat {
    pub fn from_path(path: &Path) -> Option<StreamFormat> {
        match path.extension()?.to_str()? {
            "tsv" => Some(StreamFormat::TokenPerLine),
            "cnt" => Some(StreamFormat::CountFile),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownSensePolicy {
    #[default]
    SkipAndTally,
    Fail,
}

/// Iterator over `(sense_key, count)` pairs of one annotated stream.
pub struct AnnotatedStream<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    format: StreamFormat,
}

pub fn read_annotated_stream<R: BufRead>(reader: R, format: StreamFormat) -> AnnotatedStream<R> {
    AnnotatedStream {
        lines: reader.lines(),
        line_no: 0,
        format,
    }
}

impl<R: BufRead> AnnotatedStream<R> {
    fn parse(&self, line: &str) -> Result<Option<(String, u64)>, CorpusError> {
        let line_no = self.line_no;
        let malformed = |reason: &str| CorpusError::MalformedLine {
            line_no,
            reason: reason.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        match self.format {
            StreamFormat::TokenPerLine => {
                if fields.len() != 3 {
                    return Err(malformed("expected token, lemma and sense key"));
                }
                let key = fields[2].trim();
                if key.is_empty() {
                    return Err(malformed("empty sense key"));
                }
                Ok(Some((key.to_string(), 1)))
            }
            StreamFormat::CountFile => {
                if fields.len() != 2 {
                    return Err(malformed("expected sense key and count"));
                }
                let key = fields[0].trim();
                if key.is_empty() {
                    return Err(malformed("empty sense key"));
                }
                let value: i64 = fields[1]
                    .trim()
                    .parse()
                    .map_err(|_| malformed("count is not an integer"))?;
                match value {
                    v if v < 0 => Err(CorpusError::NegativeCount { line_no, value: v }),
                    0 => Ok(None),
                    v => Ok(Some((key.to_string(), v as u64))),
                }
            }
        }
    }
}

impl<R: BufRead> Iterator for AnnotatedStream<R> {
    type Item = Result<(String, u64), CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match self.parse(line) {
                Ok(Some(pair)) => return Some(Ok(pair)),
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// Sparse WSF counts. Each occurring synset holds a dense
/// `categories x senses` block; synsets with no counts are absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WsfTable {
    categories: Vec<CategoryId>,
    inventory_fingerprint: String,
    counts: BTreeMap<SynsetId, Vec<u64>>,
}

/// Borrowed counts of one synset.
#[derive(Debug, Clone, Copy)]
pub struct SynsetCounts<'a> {
    cells: &'a [u64],
    n_categories: usize,
}

impl<'a> SynsetCounts<'a> {
    pub fn synset_size(&self) -> usize {
        self.cells.len() / self.n_categories
    }

    /// Counts of every sense of the synset within category `k`.
    pub fn in_category(&self, k: usize) -> &'a [u64] {
        let size = self.synset_size();
        &self.cells[k * size..(k + 1) * size]
    }

    /// Counts of sense `j` in every category, in category order.
    pub fn across_categories(&self, j: usize) -> Vec<u64> {
        (0..self.n_categories)
            .map(|k| self.in_category(k)[j])
            .collect()
    }
}

fn validate_categories(categories: &[CategoryId]) -> Result<(), CorpusError> {
    if categories.is_empty() {
        return Err(CorpusError::NoCategories);
    }
    let mut seen = std::collections::HashSet::new();
    for c in categories {
        if !seen.insert(c) {
            return Err(CorpusError::DuplicateCategory(c.0.clone()));
        }
    }
    Ok(())
}

impl WsfTable {
    pub fn empty(categories: Vec<CategoryId>, inv: &SynsetInventory) -> Result<Self, CorpusError> {
        validate_categories(&categories)?;
        Ok(WsfTable {
            categories,
            inventory_fingerprint: inv.fingerprint(),
            counts: BTreeMap::new(),
        })
    }

    pub fn categories(&self) -> &[CategoryId] {
        &self.categories
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn category_index(&self, k: &CategoryId) -> Option<usize> {
        self.categories.iter().position(|c| c == k)
    }

    pub fn inventory_fingerprint(&self) -> &str {
        &self.inventory_fingerprint
    }

    pub fn synset_counts(&self, synset: SynsetId) -> Option<SynsetCounts<'_>> {
        self.counts.get(&synset).map(|cells| SynsetCounts {
            cells,
            n_categories: self.categories.len(),
        })
    }

    pub fn count(&self, k: usize, synset: SynsetId, j: usize) -> u64 {
        self.synset_counts(synset)
            .map_or(0, |c| c.in_category(k).get(j).copied().unwrap_or(0))
    }

    /// Occurrences of all senses of `synset` within category `k`.
    pub fn category_totals(&self, synset: SynsetId, k: &CategoryId) -> u64 {
        match (self.category_index(k), self.synset_counts(synset)) {
            (Some(k), Some(c)) => c.in_category(k).iter().sum(),
            _ => 0,
        }
    }

    pub fn grand_total(&self) -> u64 {
        self.counts.values().flatten().sum()
    }

    /// Nonzero cells as `(category index, synset, sense index, count)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, SynsetId, usize, u64)> + '_ {
        let n = self.categories.len();
        self.counts.iter().flat_map(move |(&id, cells)| {
            let size = cells.len() / n;
            cells
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(move |(cell, &c)| (cell / size, id, cell % size, c))
        })
    }

    fn add(&mut self, k: usize, slot: SenseSlot, synset_size: usize, count: u64) {
        if count == 0 {
            return;
        }
        let n = self.categories.len();
        let cells = self
            .counts
            .entry(slot.synset)
            .or_insert_with(|| vec![0; n * synset_size]);
        cells[k * synset_size + slot.index] += count;
    }

    pub fn merge(mut self, other: WsfTable) -> Result<WsfTable, CorpusError> {
        if self.inventory_fingerprint != other.inventory_fingerprint {
            return Err(CorpusError::FingerprintMismatch);
        }
        if self.categories != other.categories {
            return Err(CorpusError::CategoryMismatch);
        }
        for (id, cells) in other.counts {
            match self.counts.get_mut(&id) {
                Some(mine) => mine.iter_mut().zip(cells).for_each(|(a, b)| *a += b),
                None => {
                    self.counts.insert(id, cells);
                }
            }
        }
        Ok(self)
    }

    /// Zeroes every cell below `min_count`.
    pub fn with_min_count(mut self, min_count: u64) -> WsfTable {
        if min_count <= 1 {
            return self;
        }
        self.counts.retain(|_, cells| {
            for c in cells.iter_mut() {
                if *c < min_count {
                    *c = 0;
                }
            }
            cells.iter().any(|&c| c > 0)
        });
        self
    }

    /// The table restricted to a single category.
    pub fn restrict(&self, k: &CategoryId) -> Result<WsfTable, CorpusError> {
        let idx = self
            .category_index(k)
            .ok_or_else(|| CorpusError::UnknownCategory(k.0.clone()))?;
        let n = self.categories.len();
        let counts = self
            .counts
            .iter()
            .filter_map(|(&id, cells)| {
                let size = cells.len() / n;
                let row = cells[idx * size..(idx + 1) * size].to_vec();
                row.iter().any(|&c| c > 0).then_some((id, row))
            })
            .collect();
        Ok(WsfTable {
            categories: vec![k.clone()],
            inventory_fingerprint: self.inventory_fingerprint.clone(),
            counts,
        })
    }

    /// SHA-256 over categories and nonzero counts, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.inventory_fingerprint.as_bytes());
        for c in &self.categories {
            hasher.update(b"\n");
            hasher.update(c.0.as_bytes());
        }
        for (k, id, j, count) in self.entries() {
            hasher.update(format!("\n{k}\t{id}\t{j}\t{count}").as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Sense keys that were skipped because the inventory does not know them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnknownTally {
    pub keys: BTreeMap<String, u64>,
}

impl UnknownTally {
    pub fn occurrences(&self) -> u64 {
        self.keys.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.keys.len()
    }

    pub fn merge(&mut self, other: UnknownTally) {
        for (k, c) in other.keys {
            *self.keys.entry(k).or_default() += c;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aggregation {
    pub table: WsfTable,
    pub skipped: UnknownTally,
}

/// Incremental WSF builder bound to one inventory.
pub struct WsfAccumulator<'a> {
    inv: &'a SynsetInventory,
    table: WsfTable,
    skipped: UnknownTally,
    policy: UnknownSensePolicy,
}

impl<'a> WsfAccumulator<'a> {
    pub fn new(
        inv: &'a SynsetInventory,
        categories: Vec<CategoryId>,
        policy: UnknownSensePolicy,
    ) -> Result<Self, CorpusError> {
        Ok(WsfAccumulator {
            inv,
            table: WsfTable::empty(categories, inv)?,
            skipped: UnknownTally::default(),
            policy,
        })
    }

    pub fn add_key(&mut self, k: usize, sense_key: &str, count: u64) -> Result<(), CorpusError> {
        assert!(k < self.table.n_categories(), "category index out of range");
        match self.inv.slot_of(sense_key) {
            Some(slot) => {
                let size = self.inv.senses_of(slot.synset).map_or(0, <[_]>::len);
                self.table.add(k, slot, size, count);
                Ok(())
            }
            None => match self.policy {
                UnknownSensePolicy::Fail => Err(CorpusError::UnknownSense(sense_key.to_string())),
                UnknownSensePolicy::SkipAndTally => {
                    *self.skipped.keys.entry(sense_key.to_string()).or_default() += count;
                    Ok(())
                }
            },
        }
    }

    pub fn add_stream<R: BufRead>(
        &mut self,
        k: usize,
        reader: R,
        format: StreamFormat,
    ) -> Result<(), CorpusError> {
        for item in read_annotated_stream(reader, format) {
            let (key, count) = item?;
            self.add_key(k, &key, count)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Aggregation {
        Aggregation {
            table: self.table,
            skipped: self.skipped,
        }
    }
}

/// Aggregates in-memory streams, one list per category.
pub fn aggregate_wsf<R: BufRead>(
    partition: Vec<(CategoryId, Vec<(R, StreamFormat)>)>,
    inv: &SynsetInventory,
    policy: UnknownSensePolicy,
) -> Result<Aggregation, CorpusError> {
    let categories = partition.iter().map(|(c, _)| c.clone()).collect();
    let mut acc = WsfAccumulator::new(inv, categories, policy)?;
    for (k, (_, streams)) in partition.into_iter().enumerate() {
        for (reader, format) in streams {
            acc.add_stream(k, reader, format)?;
        }
    }
    Ok(acc.finish())
}

pub fn merge_wsf(a: WsfTable, b: WsfTable) -> Result<WsfTable, CorpusError> {
    a.merge(b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFile {
    pub path: PathBuf,
    pub format: StreamFormat,
}

/// Files of a corpus grouped by category. Categories are kept in
/// lexicographic order so that category indices are stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusLayout {
    pub categories: Vec<(CategoryId, Vec<CorpusFile>)>,
}

#[derive(Deserialize)]
struct Manifest {
    categories: BTreeMap<String, Vec<PathBuf>>,
}

impl CorpusLayout {
    /// A directory is read as `<root>/<category>/...`; any other path is
    /// read as a JSON manifest.
    pub fn discover(path: &Path) -> Result<CorpusLayout, CorpusError> {
        if path.is_dir() {
            CorpusLayout::from_dir(path)
        } else {
            CorpusLayout::from_manifest(path)
        }
    }

    /// Every subdirectory of `root` is a category; `.tsv` and `.cnt` files
    /// below it (recursively) are its streams. Other files are ignored.
    pub fn from_dir(root: &Path) -> Result<CorpusLayout, CorpusError> {
        let mut categories = BTreeMap::new();
        for entry in std::fs::read_dir(root)? {
            let entry = entry?;
            if !entry.file_type()?.is_dir() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            let mut files = Vec::new();
            for file in WalkDir::new(entry.path()).sort_by_file_name() {
                let file = file.map_err(|e| CorpusError::Io(e.into()))?;
                if !file.file_type().is_file() {
                    continue;
                }
                if let Some(format) = StreamFormat::from_path(file.path()) {
                    files.push(CorpusFile {
                        path: file.path().to_path_buf(),
                        format,
                    });
                }
            }
            categories.insert(name, files);
        }
        CorpusLayout::from_map(categories)
    }

    /// Manifest: `{"categories": {"journal": ["journal/a.tsv", ...], ...}}`,
    /// paths relative to the manifest's directory.
    pub fn from_manifest(path: &Path) -> Result<CorpusLayout, CorpusError> {
        let manifest: Manifest = serde_json::from_reader(BufReader::new(File::open(path)?))
            .map_err(|e| CorpusError::MalformedManifest(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut categories = BTreeMap::new();
        for (name, paths) in manifest.categories {
            let files = paths
                .into_iter()
                .map(|p| {
                    let format = StreamFormat::from_path(&p).ok_or_else(|| {
                        CorpusError::MalformedManifest(format!(
                            "{}: expected a .tsv or .cnt file",
                            p.display()
                        ))
                    })?;
                    Ok(CorpusFile {
                        path: base.join(p),
                        format,
                    })
                })
                .collect::<Result<Vec<_>, CorpusError>>()?;
            categories.insert(name, files);
        }
        CorpusLayout::from_map(categories)
    }

    fn from_map(map: BTreeMap<String, Vec<CorpusFile>>) -> Result<CorpusLayout, CorpusError> {
        let categories = map
            .into_iter()
            .map(|(name, files)| Ok((CategoryId::new(name)?, files)))
            .collect::<Result<Vec<_>, CorpusError>>()?;
        validate_categories(
            &categories.iter().map(|(c, _)| c.clone()).collect::<Vec<_>>(),
        )?;
        Ok(CorpusLayout { categories })
    }

    pub fn category_ids(&self) -> Vec<CategoryId> {
        self.categories.iter().map(|(c, _)| c.clone()).collect()
    }

    pub fn file_count(&self) -> usize {
        self.categories.iter().map(|(_, f)| f.len()).sum()
    }

    /// Aggregates every file as an independent shard on the current rayon
    /// pool, then merges the shards. The result does not depend on the
    /// schedule; on failure the error of the first failing file (in layout
    /// order) is returned.
    pub fn aggregate(
        &self,
        inv: &SynsetInventory,
        policy: UnknownSensePolicy,
    ) -> Result<Aggregation, CorpusError> {
        let categories = self.category_ids();
        let shards: Vec<(usize, &CorpusFile)> = self
            .categories
            .iter()
            .enumerate()
            .flat_map(|(k, (_, files))| files.iter().map(move |f| (k, f)))
            .collect();
        let results: Vec<Result<Aggregation, CorpusError>> = shards
            .par_iter()
            .map(|&(k, file)| {
                let mut acc = WsfAccumulator::new(inv, categories.clone(), policy)?;
                let reader = BufReader::new(File::open(&file.path).map_err(|e| CorpusError::from(e).in_file(&file.path))?);
                acc.add_stream(k, reader, file.format)
                    .map_err(|e| e.in_file(&file.path))?;
                Ok(acc.finish())
            })
            .collect();
        let mut total = WsfAccumulator::new(inv, categories, policy)?.finish();
        for shard in results {
            let shard = shard?;
            total.table = total.table.merge(shard.table)?;
            total.skipped.merge(shard.skipped);
        }
        Ok(total)
    }
}
