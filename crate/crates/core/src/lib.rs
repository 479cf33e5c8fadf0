//! Interval probabilistic fuzzy (IPF) synsets.
//!
//! Given a synset inventory and a sense-annotated corpus split into
//! categories, every word-sense gets one fuzzy membership per category and a
//! probability for each category. The most probable categories covering more
//! than `alpha` of the sense's occurrences form its footprint, and the
//! `[min, max]` of their memberships is the sense's interval membership.
//!
//! Modules, bottom-up:
//! - [`inventory`]: sense keys, synset ids, `index.sense` and JSON inventories
//! - [`corpus`]: annotated streams and the per-category frequency table
//! - [`membership`]: normalizations, possibility transforms, footprints
//! - [`pipeline`]: record construction and summary statistics
//! - [`formats`]: JSONL and TSV output

pub mod corpus;
pub mod formats;
pub mod inventory;
pub mod membership;
pub mod pipeline;

pub use corpus::{
    aggregate_wsf, merge_wsf, read_annotated_stream, Aggregation, CategoryId, CorpusError,
    CorpusLayout, StreamFormat, UnknownSensePolicy, WsfAccumulator, WsfTable,
};
pub use formats::{read_jsonl, write_jsonl, write_tsv, FormatError, OutputHeader, FORMAT_VERSION};
pub use inventory::{
    load_index_sense, load_json_inventory, parse_sense_key, InventoryError, SenseKey, SynsetId,
    SynsetInventory,
};
pub use membership::{FootprintMode, IntervalMembership, IpfError, Variant};
pub use pipeline::{
    build_fuzzy_synsets, build_ipf_synsets, build_synset, summarize, IpfSynsetRecord,
    PipelineConfig, PipelineError, RecordStatus, StatsReport,
};
