//! `ipf` command line: build, inspect, stats and validate-inventory.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ipf_synsets::membership::FootprintMode;
use ipf_synsets::{
    build_ipf_synsets, build_synset, read_jsonl, summarize, write_jsonl, write_tsv, CorpusLayout,
    IpfSynsetRecord, OutputHeader, PipelineConfig, PipelineError, SynsetId, SynsetInventory,
    UnknownSensePolicy, Variant, WsfTable,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ipf", version, about = "Build interval probabilistic fuzzy synsets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate a corpus and write IPF synset records.
    Build(BuildArgs),
    /// Print the full diagnostics of one synset.
    Inspect(InspectArgs),
    /// Print summary statistics of a JSONL results file.
    Stats {
        #[arg(long)]
        results: PathBuf,
    },
    /// Parse an inventory and report its integrity.
    ValidateInventory {
        #[arg(long)]
        inventory: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Inclusive,
    Exclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    #[value(name = "1983")]
    V1983,
    #[value(name = "1993")]
    V1993,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Skip,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Jsonl,
    Tsv,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// `index.sense` file, or a `.json` inventory.
    #[arg(long)]
    pub inventory: PathBuf,
    /// Corpus root (`<root>/<category>/<file>`) or a JSON manifest.
    #[arg(long)]
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Inclusive)]
    pub footprint_mode: ModeArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 0)]
    pub min_count: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Skip)]
    pub unknown_sense: PolicyArg,
    /// Attach per-category PMV, WSP and possibility values to each record.
    #[arg(long)]
    pub verbose: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Jsonl)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    pub synset_id: String,
    /// Results file from an earlier build (verbose builds carry diagnostics).
    #[arg(long, conflicts_with_all = ["inventory", "corpus"])]
    pub results: Option<PathBuf>,
    #[arg(long, requires = "corpus")]
    pub inventory: Option<PathBuf>,
    #[arg(long, requires = "inventory")]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

impl PipelineArgs {
    pub fn config(&self) -> Result<PipelineConfig> {
        let cfg = PipelineConfig {
            alpha: self.alpha,
            footprint_mode: match self.footprint_mode {
                ModeArg::Inclusive => FootprintMode::Inclusive,
                ModeArg::Exclusive => FootprintMode::Exclusive,
            },
            variants: match self.variant {
                VariantArg::V1983 => vec![Variant::V1983],
                VariantArg::V1993 => vec![Variant::V1993],
                VariantArg::Both => Variant::ALL.to_vec(),
            },
            min_count: self.min_count,
            unknown_sense_policy: match self.unknown_sense {
                PolicyArg::Skip => UnknownSensePolicy::SkipAndTally,
                PolicyArg::Fail => UnknownSensePolicy::Fail,
            },
            verbose: self.verbose,
        };
        cfg.validate()?;
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n);
        }
        Ok(builder.build()?)
    }
}

pub fn load_inventory(path: &Path) -> Result<SynsetInventory> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader = BufReader::new(file);
    let inv = if path.extension().is_some_and(|e| e == "json") {
        ipf_synsets::load_json_inventory(reader)
    } else {
        ipf_synsets::load_index_sense(reader)
    };
    inv.with_context(|| format!("reading inventory {}", path.display()))
}

fn aggregate(source: &SourceArgs, inv: &SynsetInventory, cfg: &PipelineConfig) -> Result<WsfTable> {
    let layout = CorpusLayout::discover(&source.corpus)
        .with_context(|| format!("reading corpus layout {}", source.corpus.display()))?;
    let agg = layout.aggregate(inv, cfg.unknown_sense_policy)?;
    if agg.skipped.occurrences() > 0 {
        eprintln!(
            "ipf-build skipped unknown sense keys: distinct={} occurrences={}",
            agg.skipped.distinct(),
            agg.skipped.occurrences()
        );
    }
    Ok(agg.table)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn build(args: &BuildArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = args.pipeline.config()?;
    let pool = args.pipeline.pool()?;
    let inv = load_inventory(&args.source.inventory)?;
    let (wsf, records) = pool.install(|| -> Result<_> {
        let wsf = aggregate(&args.source, &inv, &cfg)?;
        let records = build_ipf_synsets(&wsf, &inv, &cfg)?;
        Ok((wsf, records))
    })?;
    let header = OutputHeader::new(&cfg, &wsf);
    let (jsonl, tsv) = match args.format {
        OutputFormat::Jsonl => (Some(args.out.clone()), None),
        OutputFormat::Tsv => (None, Some(args.out.clone())),
        OutputFormat::Both => (
            Some(args.out.with_extension("jsonl")),
            Some(args.out.with_extension("tsv")),
        ),
    };
    if let Some(path) = jsonl {
        write_jsonl(&records, &header, create(&path)?)?;
    }
    if let Some(path) = tsv {
        write_tsv(&records, &header, create(&path)?)?;
    }
    let no_data = records.iter().filter(|r| !r.is_ok()).count();
    writeln!(
        out,
        "ipf-build ok synsets={} senses={} no_data={} categories={} alpha={} mode={}",
        inv.len(),
        records.len(),
        no_data,
        wsf.n_categories(),
        cfg.alpha,
        cfg.footprint_mode
    )?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"))
}

fn print_synset(
    out: &mut dyn Write,
    id: SynsetId,
    categories: &[String],
    records: &[&IpfSynsetRecord],
) -> Result<()> {
    writeln!(out, "synset {id} senses={} categories={}", records.len(), categories.join(","))?;
    for r in records {
        let footprint: Vec<String> = r.footprint.iter().map(|c| c.to_string()).collect();
        writeln!(
            out,
            "sense {} {} status={} footprint=[{}] cumulative={}",
            r.sense_index,
            r.sense_key,
            r.status.as_str(),
            footprint.join(","),
            fmt_opt(r.cumulative_prob)
        )?;
        for v in Variant::ALL {
            if let Some(iv) = r.interval(v) {
                writeln!(out, "  v{v} [{:.6}, {:.6}]", iv.low, iv.up)?;
            }
        }
        if let Some(d) = &r.diagnostics {
            writeln!(out, "  category\tpmv\twsp\tpi_1983\tpi_1993")?;
            for (k, name) in categories.iter().enumerate() {
                let pick = |p: &Option<Vec<Option<f64>>>| p.as_ref().and_then(|p| p[k]);
                writeln!(
                    out,
                    "  {name}\t{}\t{}\t{}\t{}",
                    fmt_opt(d.pmv[k]),
                    fmt_opt(d.wsp[k]),
                    fmt_opt(pick(&d.possibility_1983)),
                    fmt_opt(pick(&d.possibility_1993)),
                )?;
            }
        }
    }
    Ok(())
}

fn read_results(path: &Path) -> Result<(OutputHeader, Vec<IpfSynsetRecord>)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_jsonl(BufReader::new(file)).with_context(|| format!("reading results {}", path.display()))
}

fn inspect(args: &InspectArgs, out: &mut dyn Write) -> Result<()> {
    let id: SynsetId = args.synset_id.parse()?;
    match (&args.results, &args.inventory, &args.corpus) {
        (Some(results), _, _) => {
            let (header, records) = read_results(results)?;
            let selected: Vec<&IpfSynsetRecord> =
                records.iter().filter(|r| r.synset_id == id).collect();
            if selected.is_empty() {
                bail!("synset {id} not found in {}", results.display());
            }
            print_synset(out, id, &header.categories, &selected)
        }
        (None, Some(inventory), Some(corpus)) => {
            let mut cfg = args.pipeline.config()?;
            cfg.verbose = true;
            let pool = args.pipeline.pool()?;
            let inv = load_inventory(inventory)?;
            let source = SourceArgs {
                inventory: inventory.clone(),
                corpus: corpus.clone(),
            };
            let (wsf, records) = pool.install(|| -> Result<_> {
                let wsf = aggregate(&source, &inv, &cfg)?;
                let records = build_synset(&wsf, &inv, id, &cfg)?;
                Ok((wsf, records))
            })?;
            let categories: Vec<String> = wsf.categories().iter().map(|c| c.to_string()).collect();
            print_synset(out, id, &categories, &records.iter().collect::<Vec<_>>())
        }
        _ => bail!("inspect needs --results, or --inventory together with --corpus"),
    }
}

fn stats(results: &Path, out: &mut dyn Write) -> Result<()> {
    let (header, records) = read_results(results)?;
    writeln!(
        out,
        "alpha={} mode={} categories={}",
        header.alpha, header.footprint_mode, header.n_categories
    )?;
    writeln!(out, "{}", summarize(&records))?;
    Ok(())
}

fn validate_inventory(path: &Path, out: &mut dyn Write) -> Result<()> {
    let inv = load_inventory(path)?;
    let singletons = inv.iter().filter(|(_, s)| s.len() == 1).count();
    let largest = inv.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    writeln!(
        out,
        "inventory ok synsets={} senses={} singleton_synsets={} largest_synset={} fingerprint={}",
        inv.len(),
        inv.sense_count(),
        singletons,
        largest,
        inv.fingerprint()
    )?;
    Ok(())
}

/// Runs one invocation, writing normal output to `out` and diagnostics to
/// stderr. Returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Build(args) => build(args, out),
        Command::Inspect(args) => inspect(args, out),
        Command::Stats { results } => stats(results, out),
        Command::ValidateInventory { inventory } => validate_inventory(inventory, out),
    };
    match result.and_then(|()| out.flush().map_err(Into::into)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    let internal = e
        .chain()
        .any(|cause| matches!(cause.downcast_ref::<PipelineError>(), Some(PipelineError::Invariant(_))));
    if internal {
        EXIT_INTERNAL
    } else {
        EXIT_INPUT
    }
}

/// Parses `args` and runs; usage errors exit with the input-error code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, &mut io::stdout().lock()),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let internal = anyhow::Error::new(PipelineError::Invariant("x".into())).context("building");
        assert_eq!(exit_code(&internal), EXIT_INTERNAL);
        let input = anyhow::Error::new(PipelineError::NoVariants);
        assert_eq!(exit_code(&input), EXIT_INPUT);
        assert_eq!(exit_code(&anyhow::anyhow!("missing file")), EXIT_INPUT);
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(main_with_args(["ipf", "--version"]), EXIT_OK);
        assert_eq!(main_with_args(["ipf", "build"]), EXIT_INPUT);
    }
}
