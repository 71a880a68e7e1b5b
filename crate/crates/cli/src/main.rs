//! `dialseg`: corpus preparation, segmentation runs, scoring and reports.

mod artifacts;
mod commands;
mod config;
mod scoring;
mod segmenters;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dialseg::corpus::ingest::Layout;
use dialseg::corpus::DataSource;
use dialseg::llm::TemplateId;

#[derive(Parser)]
#[command(name = "dialseg", version, about = "Topic segmentation benchmark toolkit for conversational text")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert raw transcripts, dialogue text or prose into document JSONL.
    Ingest(IngestArgs),
    /// Write a stratified train/valid/test manifest.
    Split(SplitArgs),
    /// Run one segmenter over a corpus.
    Segment(SegmentArgs),
    /// Merge gold segments into draft blocks for restoration.
    Corrupt(CorruptArgs),
    /// Emit segment and restore SFT pairs.
    EmitSft(EmitSftArgs),
    /// Score prediction directories against gold.
    Score(ScoreArgs),
    /// Inter-annotator agreement, adjudication and change rate.
    Agree(AgreeArgs),
    /// Export blank validation sheets for silver segmentations.
    Sheets(SheetsArgs),
    /// Corpus statistics per source.
    Stats(StatsArgs),
    /// Leave-one-source-out training sets and their result table.
    Ablate(AblateArgs),
    /// Merge and re-render score reports.
    Report(ReportArgs),
    /// Full run from a TOML or JSON config.
    Run(RunArgs),
}

#[derive(Args)]
pub struct IngestArgs {
    /// Source files; each becomes one document.
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub source: Option<DataSource>,
    #[arg(long)]
    pub language_clue: Option<String>,
    #[arg(long)]
    pub genre: Option<String>,
    #[arg(long, default_value = "auto")]
    pub layout: Layout,
    /// Document id; only with a single file (default: file stem).
    #[arg(long)]
    pub doc_id: Option<String>,
    /// JSON array of LDC stubs to hydrate instead of files.
    #[arg(long, conflicts_with_all = ["files", "source"])]
    pub ldc_stubs: Option<PathBuf>,
    /// Local directory holding the licensed LDC transcripts.
    #[arg(long, requires = "ldc_stubs")]
    pub ldc_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// train,valid,test
    #[arg(long, default_value = "0.7,0.15,0.15", value_parser = artifacts::parse_floats)]
    pub ratios: ::std::vec::Vec<f64>,
    /// Manifest file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone)]
pub struct SplitSelect {
    /// Split manifest restricting which documents are used.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Split name within the manifest.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Method {
    SingleSegment,
    Texttiling,
    C99,
    Llm,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Profile {
    Plain,
    Arabic,
    Identity,
}

#[derive(Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub select: SplitSelect,
    /// Prediction directory to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Segmenter spec file (same keys as one `[[segmenters]]` entry).
    #[arg(long, conflicts_with = "method")]
    pub spec: Option<PathBuf>,
    #[arg(long, required_unless_present = "spec")]
    pub method: Option<Method>,
    /// Label recorded in logs (default: the method name).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long)]
    pub normalization: Option<Profile>,
    #[arg(long)]
    pub block_size: Option<usize>,
    #[arg(long)]
    pub smoothing_width: Option<usize>,
    /// Keep the N deepest valleys instead of the depth cutoff.
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub rank_mask: Option<usize>,
    /// Fixed C99 segment count instead of the gradient stop.
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long)]
    pub api_key_env: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long, default_value = "segmentation")]
    pub mode: TemplateId,
    #[arg(long)]
    pub drafts: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub max_concurrency: usize,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ReadingArg {
    SpanLength,
    MergeCount,
}

#[derive(Args, Clone)]
pub struct CorruptionOpts {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Span-length probabilities for lengths 1, 2, ...
    #[arg(long, default_value = "0.6,0.2,0.15,0.05", value_parser = artifacts::parse_floats)]
    pub pmf: ::std::vec::Vec<f64>,
    #[arg(long, default_value = "span-length")]
    pub reading: ReadingArg,
}

#[derive(Args)]
pub struct CorruptArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[command(flatten)]
    pub select: SplitSelect,
    #[command(flatten)]
    pub corruption: CorruptionOpts,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EmitSftArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[command(flatten)]
    pub select: SplitSelect,
    /// Draft blocks from `corrupt`; drawn on the fly when absent.
    #[arg(long)]
    pub drafts: Option<PathBuf>,
    #[command(flatten)]
    pub corruption: CorruptionOpts,
    /// Drop every document of this source.
    #[arg(long)]
    pub leave_out: Option<DataSource>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone)]
pub struct MetricArgs {
    /// Fixed Pk/WindowDiff window; per-document default otherwise.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value = "score-one")]
    pub absent_class: AbsentArg,
    #[arg(long, default_value = "optimal")]
    pub alignment: AlignArg,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum AbsentArg {
    ScoreOne,
    ScoreZero,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum AlignArg {
    Optimal,
    Greedy,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[command(flatten)]
    pub select: SplitSelect,
    /// Model name and prediction directory, repeatable.
    #[arg(long = "pred", value_name = "NAME=DIR", required = true, value_parser = artifacts::parse_pair)]
    pub preds: Vec<(String, String)>,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct AgreeArgs {
    /// First annotator's sheets (one CSV/TSV per document).
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Third annotator resolving disagreements; enables gold output.
    #[arg(long)]
    pub adjudicator: Option<PathBuf>,
    /// Corpus for grouping documents by source.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SheetFormat {
    Csv,
    Tsv,
}

#[derive(Args)]
pub struct SheetsArgs {
    #[arg(long)]
    pub silver: PathBuf,
    /// Fills in utterance text and speakers.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, default_value = "annotator")]
    pub annotator: String,
    #[arg(long, default_value = "tsv")]
    pub format: SheetFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[command(flatten)]
    pub select: SplitSelect,
    /// Also write the statistics as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[command(flatten)]
    pub select: SplitSelect,
    #[command(flatten)]
    pub corruption: CorruptionOpts,
    /// Sources to hold out, repeatable (default: all five).
    #[arg(long)]
    pub leave_out: Vec<DataSource>,
    /// Row label and report.json of an externally trained model, repeatable.
    #[arg(long = "result", value_name = "LABEL=REPORT", value_parser = artifacts::parse_pair)]
    pub results: Vec<(String, String)>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    /// report.json files, repeatable.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Split(a) => commands::split(a),
        Command::Segment(a) => commands::segment(a),
        Command::Corrupt(a) => commands::corrupt(a),
        Command::EmitSft(a) => commands::emit_sft(a),
        Command::Score(a) => commands::score(a),
        Command::Agree(a) => commands::agree(a),
        Command::Sheets(a) => commands::sheets(a),
        Command::Stats(a) => commands::stats(a),
        Command::Ablate(a) => commands::ablate(a),
        Command::Report(a) => commands::report(a),
        Command::Run(a) => commands::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
