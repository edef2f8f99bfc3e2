//! The `modmove` command line: argument parsing, report documents and their
//! JSON and text renderings, and the benchmark harness.
//!
//! [`run`] is the whole program; the binary only forwards its arguments and
//! exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::canonical::{self, format_float};
use crate::error::{ConfigError, IngestError, ModelError};
use crate::ingest::{self, GeneratorConfig, LoadWarning, Loaded};
use crate::metrics::{self, estimate_workload, full_report, MetricsReport, WorkloadEstimate};
use crate::model::{DependencyTable, SystemModel};
use crate::parallel::{
    parallel_class_metrics, parallel_report, parallel_similarities, ClassMetrics,
};
use crate::proponent::{
    mean_thresholds, suggest_all, suggest_by_cohesion, Combine, Criterion, MoveSuggestion,
    Selection, SuggestContext, ThresholdMode, Thresholds,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

/// Version tag written into every output document.
pub const REPORT_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(
    name = "modmove",
    version,
    about = "Modularity metrics and move-method suggestions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute every metric for a facts file.
    Analyze(AnalyzeArgs),
    /// Propose move-method refactorings.
    Suggest(SuggestArgs),
    /// Time sequential and parallel analysis on generated systems.
    Bench(BenchArgs),
    /// Write a synthetic facts file.
    Generate(GenerateArgs),
    /// Check a facts file and list every violation.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Sequential,
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CombineArg {
    Union,
    Intersection,
}

impl From<CombineArg> for Combine {
    fn from(c: CombineArg) -> Self {
        match c {
            CombineArg::Union => Combine::Union,
            CombineArg::Intersection => Combine::Intersection,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Similarity,
    Cohesion,
    Coupling,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Similarity => Criterion::Similarity,
            CriterionArg::Cohesion => Criterion::Cohesion,
            CriterionArg::Coupling => Criterion::Coupling,
        }
    }
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "sequential")]
    pub engine: Engine,
    /// Worker count for the parallel engine [default: available cores]
    #[arg(long)]
    pub workers: Option<usize>,
}

impl EngineArgs {
    fn workers(&self) -> Result<usize, CliError> {
        resolve_workers(self.workers)
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Facts file to read
    #[arg(long)]
    pub facts: PathBuf,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SuggestArgs {
    /// Facts file to read
    #[arg(long)]
    pub facts: PathBuf,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Comma-separated subset of similarity, cohesion, coupling
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "similarity,cohesion,coupling"
    )]
    pub criteria: Vec<CriterionArg>,
    #[arg(long, value_enum, default_value = "union")]
    pub combine: CombineArg,
    /// Similarity threshold [default: mean of stored similarities]
    #[arg(long)]
    pub threshold_similarity: Option<f64>,
    /// LCOM threshold [default: mean over classes]
    #[arg(long)]
    pub threshold_lcom: Option<f64>,
    /// CBO threshold [default: mean over classes]
    #[arg(long)]
    pub threshold_cbo: Option<f64>,
    /// List every passing destination instead of the best one per method
    #[arg(long)]
    pub all_candidates: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    /// Generator seed
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Maximum calls per method
    #[arg(long = "kmax-calls", default_value_t = 4)]
    pub kmax_calls: usize,
    /// Maximum attribute accesses per method
    #[arg(long = "kmax-accesses", default_value_t = 3)]
    pub kmax_accesses: usize,
    /// Probability that a dependency stays inside the method's class
    #[arg(long = "intra-bias", default_value_t = 0.7)]
    pub intra_bias: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    #[arg(long, default_value_t = 80)]
    pub methods: usize,
    #[arg(long, default_value_t = 40)]
    pub attributes: usize,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Method counts, one system per entry
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub methods: Vec<usize>,
    /// Class counts; a single value applies to every size [default: m/10, at least 1]
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<usize>,
    /// Attribute count [default: m/2, at least the class count]
    #[arg(long)]
    pub attributes: Option<usize>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    /// Worker count for the parallel rows [default: available cores]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Timed runs per engine; the fastest is reported
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV destination [default: next to --out with a .csv extension]
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Facts file to read
    #[arg(long)]
    pub facts: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Validation(m) | CliError::Io(m) => {
                m
            }
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { .. } => CliError::Io(e.to_string()),
            IngestError::Parse { .. } | IngestError::UnsupportedSchema { .. } => {
                CliError::Parse(e.to_string())
            }
            IngestError::Model(m) => CliError::Validation(m.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NoWorkers => CliError::Usage(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn resolve_workers(requested: Option<usize>) -> Result<usize, CliError> {
    match requested {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(available_cores()),
    }
}

pub fn available_cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn execute(
    command: &Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        Command::Analyze(a) => cmd_analyze(a, stdout, stderr),
        Command::Suggest(a) => cmd_suggest(a, stdout, stderr),
        Command::Bench(a) => cmd_bench(a, stdout, stderr),
        Command::Generate(a) => cmd_generate(a, stdout),
        Command::Validate(a) => cmd_validate(a, stdout),
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    canonical::to_string(value).expect("report documents serialize")
}

fn load(path: &Path, stderr: &mut dyn Write) -> Result<Loaded, CliError> {
    let loaded = ingest::load_facts(path)?;
    for w in &loaded.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    Ok(loaded)
}

fn report_with(
    engine: &EngineArgs,
    model: &SystemModel,
    deps: &DependencyTable,
) -> Result<MetricsReport, CliError> {
    Ok(match engine.engine {
        Engine::Sequential => full_report(model, deps)?,
        Engine::Parallel => parallel_report(model, deps, engine.workers()?)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemCounts {
    pub classes: usize,
    pub methods: usize,
    pub attributes: usize,
}

impl SystemCounts {
    fn of(model: &SystemModel) -> Self {
        Self {
            classes: model.n_classes(),
            methods: model.n_methods(),
            attributes: model.n_attributes(),
        }
    }
}

/// JSON form of an analysis. Per-method and per-class arrays are indexed by
/// id; similarities are `[i, j, value]` triples sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub schema_version: String,
    pub system: SystemCounts,
    pub fan_in: Vec<u32>,
    pub fan_out: Vec<u32>,
    pub similarity: Vec<(u32, u32, f64)>,
    pub lcom: Vec<f64>,
    pub lcom_ck: Vec<u64>,
    pub cbo: Vec<u32>,
    pub lcom_degenerate: Vec<u32>,
    pub workload: WorkloadEstimate,
    pub warnings: Vec<String>,
}

impl AnalysisDocument {
    pub fn new(
        model: &SystemModel,
        deps: &DependencyTable,
        report: &MetricsReport,
        warnings: &[LoadWarning],
    ) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION.into(),
            system: SystemCounts::of(model),
            fan_in: report.fan_in.clone(),
            fan_out: report.fan_out.clone(),
            similarity: report
                .similarity
                .iter()
                .map(|e| (e.i.0, e.j.0, e.value))
                .collect(),
            lcom: report.lcom.clone(),
            lcom_ck: report.lcom_ck.clone(),
            cbo: report.cbo.clone(),
            lcom_degenerate: report.lcom_degenerate.iter().map(|c| c.0).collect(),
            workload: estimate_workload(model, deps),
            warnings: warnings.iter().map(ToString::to_string).collect(),
        }
    }
}

/// Left-aligned plain-text table.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut text = String::new();
        for (k, (cell, w)) in cells.zip(&widths).enumerate() {
            if k > 0 {
                text.push_str("  ");
            }
            let _ = write!(text, "{cell:<w$}");
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

fn analysis_text(model: &SystemModel, doc: &AnalysisDocument) -> String {
    let w = &doc.workload;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "system: {} classes, {} methods, {} attributes",
        doc.system.classes, doc.system.methods, doc.system.attributes
    );
    let _ = writeln!(
        out,
        "workload: n_total {} ({:.1}M) = fan {} + similarity {} + lcom {} + cbo {}",
        w.n_total,
        w.total_millions_1dp(),
        w.n_fan,
        w.n_sim,
        w.n_lcom,
        w.n_cbo
    );
    for warning in &doc.warnings {
        let _ = writeln!(out, "warning: {warning}");
    }

    out.push_str("\nclasses\n");
    let rows: Vec<Vec<String>> = model
        .classes()
        .iter()
        .map(|c| {
            let i = c.id.index();
            vec![
                c.id.0.to_string(),
                c.name.clone(),
                format_float(doc.lcom[i]),
                doc.lcom_ck[i].to_string(),
                doc.cbo[i].to_string(),
                if doc.lcom_degenerate.contains(&c.id.0) {
                    "yes"
                } else {
                    ""
                }
                .to_owned(),
            ]
        })
        .collect();
    out.push_str(&table(
        &["id", "name", "lcom", "lcom_ck", "cbo", "degenerate"],
        &rows,
    ));

    out.push_str("\nmethods\n");
    let rows: Vec<Vec<String>> = (0..doc.system.methods)
        .map(|i| {
            let id = crate::model::MethodId::from(i);
            vec![
                i.to_string(),
                model.method_name(id).to_owned(),
                model
                    .method_owner(id)
                    .map(|c| c.0.to_string())
                    .unwrap_or_default(),
                doc.fan_in[i].to_string(),
                doc.fan_out[i].to_string(),
            ]
        })
        .collect();
    out.push_str(&table(&["id", "name", "class", "fan_in", "fan_out"], &rows));

    let _ = writeln!(out, "\nsimilarity ({} nonzero pairs)", doc.similarity.len());
    let rows: Vec<Vec<String>> = doc
        .similarity
        .iter()
        .map(|&(i, j, v)| vec![i.to_string(), j.to_string(), format_float(v)])
        .collect();
    out.push_str(&table(&["i", "j", "value"], &rows));
    out
}

pub fn cmd_analyze(
    args: &AnalyzeArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let loaded = load(&args.facts, stderr)?;
    let report = report_with(&args.engine, &loaded.model, &loaded.deps)?;
    let doc = AnalysisDocument::new(&loaded.model, &loaded.deps, &report, &loaded.warnings);
    let text = match args.format {
        Format::Json => to_json(&doc),
        Format::Text => analysis_text(&loaded.model, &doc),
    };
    emit(args.out.as_deref(), &text, stdout)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionRow {
    #[serde(flatten)]
    pub suggestion: MoveSuggestion,
    pub method_name: String,
    pub origin_name: String,
    pub destination_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionDocument {
    pub schema_version: String,
    pub criteria: Vec<Criterion>,
    pub combine: Combine,
    pub thresholds: Thresholds,
    pub suggestions: Vec<SuggestionRow>,
}

impl SuggestionDocument {
    pub fn new(
        model: &SystemModel,
        criteria: Vec<Criterion>,
        combine: Combine,
        thresholds: Thresholds,
        suggestions: Vec<MoveSuggestion>,
    ) -> Self {
        let class_name = |c| model.class(c).map(|r| r.name.clone()).unwrap_or_default();
        Self {
            schema_version: REPORT_SCHEMA_VERSION.into(),
            criteria,
            combine,
            thresholds,
            suggestions: suggestions
                .into_iter()
                .map(|s| SuggestionRow {
                    method_name: model.method_name(s.method).to_owned(),
                    origin_name: class_name(s.origin),
                    destination_name: class_name(s.destination),
                    suggestion: s,
                })
                .collect(),
        }
    }
}

fn suggestion_text(doc: &SuggestionDocument) -> String {
    let t = &doc.thresholds;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "thresholds ({}): similarity {}, lcom {}, cbo {}",
        match t.mode {
            ThresholdMode::Mean => "mean",
            ThresholdMode::Explicit => "explicit",
        },
        format_float(t.similarity),
        format_float(t.lcom),
        format_float(t.cbo)
    );
    let _ = writeln!(out, "{} suggestion(s)\n", doc.suggestions.len());
    let arrow = |a: f64, b: f64| format!("{} -> {}", format_float(a), format_float(b));
    let rows: Vec<Vec<String>> = doc
        .suggestions
        .iter()
        .map(|r| {
            let s = &r.suggestion;
            let e = &s.effect;
            vec![
                format!("{} ({})", r.method_name, s.method.0),
                format!("{} ({})", r.origin_name, s.origin.0),
                format!("{} ({})", r.destination_name, s.destination.0),
                s.criteria
                    .iter()
                    .map(|c| c.as_str())
                    .collect::<Vec<_>>()
                    .join(","),
                arrow(e.lcom_origin_before, e.lcom_origin_after),
                arrow(e.lcom_dest_before, e.lcom_dest_after),
                format!("{} -> {}", e.cbo_origin_before, e.cbo_origin_after),
                format!("{} -> {}", e.cbo_dest_before, e.cbo_dest_after),
            ]
        })
        .collect();
    out.push_str(&table(
        &[
            "method",
            "origin",
            "destination",
            "criteria",
            "lcom_origin",
            "lcom_dest",
            "cbo_origin",
            "cbo_dest",
        ],
        &rows,
    ));
    out
}

pub fn cmd_suggest(
    args: &SuggestArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let loaded = load(&args.facts, stderr)?;
    let (model, deps) = (&loaded.model, &loaded.deps);
    let report = report_with(&args.engine, model, deps)?;
    let thresholds = mean_thresholds(&report).with_overrides(
        args.threshold_similarity,
        args.threshold_lcom,
        args.threshold_cbo,
    )?;
    let workers = match args.engine.engine {
        Engine::Sequential => 1,
        Engine::Parallel => args.engine.workers()?,
    };
    let selection = if args.all_candidates {
        Selection::All
    } else {
        Selection::Best
    };
    let ctx = SuggestContext::new(model, deps, &report, thresholds)
        .with_workers(workers)
        .with_selection(selection);
    let mut criteria: Vec<Criterion> = args.criteria.iter().copied().map(Criterion::from).collect();
    criteria.sort_unstable();
    criteria.dedup();
    let combine = Combine::from(args.combine);
    let suggestions = suggest_all(&ctx, &criteria, combine)?;

    let doc = SuggestionDocument::new(model, criteria, combine, thresholds, suggestions);
    let text = match args.format {
        Format::Json => to_json(&doc),
        Format::Text => suggestion_text(&doc),
    };
    emit(args.out.as_deref(), &text, stdout)
}

fn generator_config(
    g: &GeneratorArgs,
    classes: usize,
    methods: usize,
    attributes: usize,
) -> GeneratorConfig {
    GeneratorConfig {
        n_classes: classes,
        n_methods: methods,
        n_attributes: attributes,
        max_calls_per_method: g.kmax_calls,
        max_accesses_per_method: g.kmax_accesses,
        intra_class_bias: g.intra_bias,
        seed: g.seed,
    }
}

pub fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = generator_config(&args.generator, args.classes, args.methods, args.attributes);
    let (model, deps) = ingest::generate(&config)?;
    emit(
        args.out.as_deref(),
        &ingest::render_facts(&model, &deps),
        stdout,
    )
}

pub fn cmd_validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.facts)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.facts.display())))?;
    let doc: ingest::FactsDocument = serde_json::from_str(&text).map_err(|e| {
        CliError::Parse(
            IngestError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
            .to_string(),
        )
    })?;
    match ingest::from_document(doc) {
        Ok(loaded) => {
            let mut out = format!(
                "valid: {} classes, {} methods, {} attributes\n",
                loaded.model.n_classes(),
                loaded.model.n_methods(),
                loaded.model.n_attributes()
            );
            for w in &loaded.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
            emit(None, &out, stdout)
        }
        Err(IngestError::Model(ModelError::Invalid(violations))) => {
            let mut msg = format!("{} violation(s)", violations.len());
            for v in &violations {
                let _ = write!(msg, "\n  {v}");
            }
            Err(CliError::Validation(msg))
        }
        Err(e) => Err(e.into()),
    }
}

/// One timed analysis of one generated system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub m: u64,
    pub c: u64,
    pub n_total: u64,
    pub engine: String,
    pub workers: usize,
    pub wall_seconds: f64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: String,
    /// Cores reported by the operating system on the measuring machine.
    pub cores: usize,
    pub repeats: usize,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
}

pub const BENCH_CSV_HEADER: &str = "m,c,n_total,engine,workers,wall_seconds,speedup";

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(BENCH_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.m,
                r.c,
                r.n_total,
                r.engine,
                r.workers,
                format_float(r.wall_seconds),
                format_float(r.speedup)
            );
        }
        out
    }

    fn to_text(&self) -> String {
        let mut out = format!(
            "cores: {}, best of {} run(s), seed {}\n\n",
            self.cores, self.repeats, self.seed
        );
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.m.to_string(),
                    r.c.to_string(),
                    r.n_total.to_string(),
                    r.engine.clone(),
                    r.workers.to_string(),
                    format!("{:.6}", r.wall_seconds),
                    format!("{:.3}", r.speedup),
                ]
            })
            .collect();
        out.push_str(&table(
            &[
                "m",
                "c",
                "n_total",
                "engine",
                "workers",
                "wall_seconds",
                "speedup",
            ],
            &rows,
        ));
        out
    }
}

/// The timed scope: all similarities, LCOM of every class, and the what-if
/// LCOM evaluations of the cohesion criterion. Returns the number of
/// suggestions so the work cannot be optimized away.
pub fn timed_analysis(
    model: &SystemModel,
    deps: &DependencyTable,
    engine: Engine,
    workers: usize,
) -> Result<usize, ModelError> {
    let (similarity, classes) = match engine {
        Engine::Sequential => {
            let mut classes = ClassMetrics::default();
            for class in model.classes() {
                classes
                    .lcom
                    .push(metrics::lcom_normalized(class.id, model, deps, None)?);
                classes
                    .lcom_ck
                    .push(metrics::lcom_ck(class.id, model, deps, None)?);
                classes.cbo.push(metrics::cbo(class.id, model, deps, None)?);
            }
            (metrics::all_similarities(model, deps), classes)
        }
        Engine::Parallel => (
            parallel_similarities(model, deps, workers)?,
            parallel_class_metrics(model, deps, workers)?,
        ),
    };
    let report = MetricsReport {
        fan_out: metrics::fan_out(model, deps),
        similarity,
        lcom: classes.lcom,
        lcom_ck: classes.lcom_ck,
        cbo: classes.cbo,
        ..MetricsReport::default()
    };
    let ctx = SuggestContext::new(model, deps, &report, mean_thresholds(&report)).with_workers(
        if engine == Engine::Sequential {
            1
        } else {
            workers
        },
    );
    Ok(suggest_by_cohesion(&ctx)?.len())
}

/// Fastest of `repeats` runs.
pub fn time_best(
    repeats: usize,
    mut f: impl FnMut() -> Result<usize, ModelError>,
) -> Result<Duration, ModelError> {
    let mut best = Duration::MAX;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        std::hint::black_box(f()?);
        best = best.min(start.elapsed());
    }
    Ok(best)
}

pub fn run_bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    if args.methods.is_empty() {
        return Err(CliError::Usage("--methods needs at least one size".into()));
    }
    if args.classes.len() > 1 && args.classes.len() != args.methods.len() {
        return Err(CliError::Usage(format!(
            "--classes has {} values but --methods has {}",
            args.classes.len(),
            args.methods.len()
        )));
    }
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let workers = resolve_workers(args.workers)?;
    let mut rows = Vec::new();
    for (k, &m) in args.methods.iter().enumerate() {
        let c = match args.classes.as_slice() {
            [] => (m / 10).max(1),
            [one] => *one,
            many => many[k],
        };
        let attributes = args.attributes.unwrap_or((m / 2).max(c));
        let (model, deps) = ingest::generate(&generator_config(&args.generator, c, m, attributes))?;
        let n_total = estimate_workload(&model, &deps).n_total;
        let sequential = time_best(args.repeats, || {
            timed_analysis(&model, &deps, Engine::Sequential, 1)
        })?;
        let parallel = time_best(args.repeats, || {
            timed_analysis(&model, &deps, Engine::Parallel, workers)
        })?;
        let seq_s = sequential.as_secs_f64();
        let par_s = parallel.as_secs_f64();
        let row = |engine: &str, workers, wall_seconds: f64| BenchRow {
            m: m as u64,
            c: c as u64,
            n_total,
            engine: engine.into(),
            workers,
            wall_seconds,
            speedup: if wall_seconds > 0.0 {
                seq_s / wall_seconds
            } else {
                1.0
            },
        };
        rows.push(row("sequential", 1, seq_s));
        rows.push(row("parallel", workers, par_s));
    }
    Ok(BenchReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        cores: available_cores(),
        repeats: args.repeats,
        seed: args.generator.seed,
        rows,
    })
}

pub fn cmd_bench(
    args: &BenchArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let report = run_bench(args)?;
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Text => report.to_text(),
    };
    emit(args.out.as_deref(), &text, stdout)?;
    let csv_path = args
        .csv
        .clone()
        .or_else(|| args.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(path) = csv_path {
        emit(Some(&path), &report.to_csv(), stdout)?;
    }
    let _ = writeln!(stderr, "timings measured on {} core(s)", report.cores);
    Ok(())
}
