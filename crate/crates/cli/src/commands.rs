use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use dialseg::annotation::{adjudicate, agreement_stats, apply_flags, change_counts, AnnotationSheet, ChangeCounts, Task};
use dialseg::classical::{C99Params, NormalizationProfile, Termination, ThresholdPolicy, TilingParams};
use dialseg::corpus::ingest::{hydrate_ldc, ingest_file, LdcStub};
use dialseg::corpus::io::{read_corpus_dir, read_segmentation_dir, write_document, write_segmentation};
use dialseg::corpus::stats::{align, render_stats_table};
use dialseg::corpus::{check_partition, compute_stats, stratified_split, DataSource, DocMeta, SplitRatios};
use dialseg::corruption::{corrupt_with, corruption_rate, doc_seed, DraftBlocks, Reading, SpanDistribution};
use dialseg::llm::{emit_sft_pairs, LlmConfig};
use dialseg::metrics::{AbsentClass, Alignment, MetricOptions, ModelReport, ScoreReport};
use dialseg::{Document, Segmentation};
use serde::Serialize;
use serde_json::{json, Value};

use crate::artifacts::{load_docs, load_gold, read_split_manifest, write_json, write_manifest, write_text, RunLog};
use crate::config::{RunConfig, SegmenterConfig, SegmenterSpec};
use crate::scoring::{build_report, merge_reports, order_subsets, read_report, subset_of, write_report, ModelPredictions};
use crate::segmenters::{persist, segment_all};
use crate::{
    AblateArgs, AbsentArg, AgreeArgs, AlignArg, CorruptArgs, CorruptionOpts, EmitSftArgs, IngestArgs, MetricArgs, Method,
    Profile, ReadingArg, ReportArgs, RunArgs, ScoreArgs, SegmentArgs, SheetFormat, SheetsArgs, SplitArgs, SplitSelect,
    StatsArgs,
};

const FAILURES: &str = "failures.jsonl";

fn runtime() -> Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn split_name<'a>(select: &'a SplitSelect, default: &'a str) -> &'a str {
    select.split.as_deref().unwrap_or(default)
}

fn select_json(select: &SplitSelect, default: &str) -> Value {
    match &select.manifest {
        Some(m) => json!({ "manifest": m, "split": split_name(select, default) }),
        None => Value::Null,
    }
}

pub fn ingest(a: IngestArgs) -> Result<()> {
    let (docs, batch) = if let Some(stubs_path) = &a.ldc_stubs {
        let text = fs::read_to_string(stubs_path).with_context(|| format!("reading {}", stubs_path.display()))?;
        let stubs: Vec<LdcStub> = serde_json::from_str(&text).context("parsing LDC stub list")?;
        let docs = hydrate_ldc(&stubs, a.ldc_dir.as_deref())?;
        (docs, json!({ "ldc_stubs": stubs_path, "ldc_dir": a.ldc_dir }))
    } else {
        ensure!(!a.files.is_empty(), "give input files or --ldc-stubs");
        let source = a.source.context("--source is required")?;
        let clue = a.language_clue.clone().context("--language-clue is required")?;
        let genre = a.genre.clone().context("--genre is required")?;
        ensure!(a.doc_id.is_none() || a.files.len() == 1, "--doc-id needs exactly one input file");
        let mut docs = Vec::new();
        for f in &a.files {
            let id = match &a.doc_id {
                Some(id) => id.clone(),
                None => f.file_stem().context("input file has no name")?.to_string_lossy().into_owned(),
            };
            docs.push(ingest_file(f, a.layout, DocMeta::new(id, source, &clue, &genre))?);
        }
        let batch = json!({
            "files": a.files,
            "source": source,
            "language_clue": clue,
            "genre": genre,
            "layout": a.layout,
        });
        (docs, batch)
    };
    let mut ids: Vec<&str> = docs.iter().map(Document::id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        bail!("document id {} occurs twice", w[0]);
    }
    for d in &docs {
        write_document(&a.out, d)?;
    }
    // one manifest per corpus directory, one entry per ingest call
    let manifest_path = a.out.join("manifest.json");
    let mut batches: Vec<Value> = fs::read_to_string(&manifest_path)
        .ok()
        .and_then(|t| serde_json::from_str::<Value>(&t).ok())
        .and_then(|v| v["config"]["batches"].as_array().cloned())
        .unwrap_or_default();
    let mut batch = batch;
    batch["doc_ids"] = json!(docs.iter().map(Document::id).collect::<Vec<_>>());
    batches.push(batch);
    write_manifest(&a.out, "ingest", json!({ "batches": batches }))?;
    println!("wrote {} document(s) to {}", docs.len(), a.out.display());
    Ok(())
}

pub fn split(a: SplitArgs) -> Result<()> {
    let [train, valid, test] = a.ratios[..] else {
        bail!("--ratios needs three values, got {}", a.ratios.len());
    };
    let ratios = SplitRatios::new(train, valid, test)?;
    let docs = read_corpus_dir(&a.corpus)?;
    let manifest = stratified_split(&docs, ratios, a.seed)?;
    for w in &manifest.warnings {
        tracing::warn!("{w}");
    }
    write_json(&a.out, &manifest)?;
    println!(
        "train {} / valid {} / test {} -> {}",
        manifest.train.len(),
        manifest.valid.len(),
        manifest.test.len(),
        a.out.display()
    );
    Ok(())
}

fn profile(p: Option<Profile>) -> NormalizationProfile {
    match p {
        None | Some(Profile::Plain) => NormalizationProfile::plain(),
        Some(Profile::Arabic) => NormalizationProfile::arabic(),
        Some(Profile::Identity) => NormalizationProfile::identity(),
    }
}

fn segmenter_from_args(a: &SegmentArgs) -> Result<SegmenterConfig> {
    if let Some(spec) = &a.spec {
        let mut cfg = SegmenterConfig::load(spec)?;
        if let Some(name) = &a.name {
            cfg.name = name.clone();
        }
        return Ok(cfg);
    }
    let method = a.method.context("--method or --spec is required")?;
    let spec = match method {
        Method::SingleSegment => SegmenterSpec::SingleSegment,
        Method::Texttiling => {
            let mut params = TilingParams::default();
            if let Some(w) = a.block_size {
                params.block_size = w;
            }
            if let Some(s) = a.smoothing_width {
                params.smoothing_width = s;
            }
            if let Some(k) = a.top_k {
                params.threshold = ThresholdPolicy::TopK(k);
            }
            SegmenterSpec::Texttiling {
                params,
                normalization: profile(a.normalization),
            }
        }
        Method::C99 => {
            let mut params = C99Params::default();
            if let Some(m) = a.rank_mask {
                params.rank_mask = m;
            }
            if let Some(k) = a.segments {
                params.termination = Termination::FixedK(k);
            }
            SegmenterSpec::C99 {
                params,
                normalization: profile(a.normalization),
            }
        }
        Method::Llm => {
            let endpoint = a.endpoint.clone().context("--endpoint is required for llm")?;
            let model = a.model.clone().context("--model is required for llm")?;
            let mut llm = LlmConfig::new(endpoint, model);
            llm.api_key_env = a.api_key_env.clone();
            if let Some(t) = a.temperature {
                llm.temperature = t;
            }
            SegmenterSpec::Llm {
                llm,
                mode: a.mode,
                drafts: a.drafts.clone(),
                max_concurrency: a.max_concurrency,
            }
        }
    };
    let cfg = SegmenterConfig {
        name: a.name.clone().unwrap_or_else(|| spec.method().to_string()),
        spec,
    };
    cfg.spec.check()?;
    Ok(cfg)
}

fn write_failures(dir: &Path, failed: &[(String, String)]) -> Result<()> {
    let path = dir.join(FAILURES);
    if failed.is_empty() {
        if path.exists() {
            fs::remove_file(&path)?;
        }
        return Ok(());
    }
    let lines: String = failed
        .iter()
        .map(|(d, r)| json!({ "doc_id": d, "reason": r }).to_string() + "\n")
        .collect();
    write_text(&path, &lines)
}

fn read_failures(dir: &Path) -> Result<Vec<(String, String)>> {
    let path = dir.join(FAILURES);
    let Ok(text) = fs::read_to_string(&path) else {
        return Ok(Vec::new());
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Value = serde_json::from_str(l).with_context(|| format!("parsing {}", path.display()))?;
            Ok((
                v["doc_id"].as_str().unwrap_or_default().to_string(),
                v["reason"].as_str().unwrap_or_default().to_string(),
            ))
        })
        .collect()
}

pub fn segment(a: SegmentArgs) -> Result<()> {
    let cfg = segmenter_from_args(&a)?;
    let split = split_name(&a.select, "test");
    let docs = load_docs(&a.corpus, a.select.manifest.as_deref(), split)?;
    ensure!(!docs.is_empty(), "no documents to segment");
    write_manifest(
        &a.out,
        "segment",
        json!({
            "corpus": a.corpus,
            "selection": select_json(&a.select, "test"),
            "workers": a.workers,
            "segmenter": cfg,
            "documents": docs.iter().map(Document::id).collect::<Vec<_>>(),
        }),
    )?;
    let log = RunLog::open(&a.out.join("run.log"))?;
    log.event("segment_start", json!({ "segmenter": cfg.name, "documents": docs.len() }));
    let rt = runtime()?;
    let outcomes = segment_all(&cfg, &docs, a.workers, &rt)?;
    let (preds, failed) = persist(&a.out, &a.out.join("calls"), &cfg.name, outcomes, &log)?;
    write_failures(&a.out, &failed)?;
    log.event("segment_end", json!({ "segmenter": cfg.name, "ok": preds.len(), "failed": failed.len() }));
    println!("{}: {} segmented, {} failed -> {}", cfg.name, preds.len(), failed.len(), a.out.display());
    for (d, r) in &failed {
        eprintln!("  failed {d}: {r}");
    }
    Ok(())
}

fn reading(r: ReadingArg) -> Reading {
    match r {
        ReadingArg::SpanLength => Reading::SpanLength,
        ReadingArg::MergeCount => Reading::MergeCount,
    }
}

#[derive(Debug, Serialize)]
struct RateSummary {
    n: usize,
    mean: f64,
    min: f64,
    max: f64,
}

fn rate_summary(rates: &BTreeMap<String, f64>) -> Option<RateSummary> {
    if rates.is_empty() {
        return None;
    }
    let v: Vec<f64> = rates.values().copied().collect();
    Some(RateSummary {
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        min: v.iter().copied().fold(f64::INFINITY, f64::min),
        max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

fn corruption_json(c: &CorruptionOpts) -> Value {
    json!({
        "seed": c.seed,
        "pmf": c.pmf,
        "reading": reading(c.reading),
        "document_seed": "first 8 bytes (LE) of sha256(seed as u64 LE || doc_id)",
    })
}

/// Ids a split selection keeps, or `None` for everything.
fn selected_ids(select: &SplitSelect, default: &str) -> Result<Option<Vec<String>>> {
    let Some(path) = &select.manifest else {
        return Ok(None);
    };
    let m = read_split_manifest(path)?;
    let name = split_name(select, default);
    let ids = m.get(name).with_context(|| format!("unknown split {name:?}"))?;
    Ok(Some(ids.to_vec()))
}

fn check_gold(seg: &Segmentation) -> Result<()> {
    let first = seg.segments.iter().filter_map(|s| s.first()).min();
    let last = seg.segments.iter().filter_map(|s| s.last()).max();
    let (Some(first), Some(last)) = (first, last) else {
        bail!("gold for {} is empty", seg.doc_id);
    };
    let v = check_partition(&seg.segments, first, last);
    ensure!(v.is_empty(), "gold for {} is not a partition: {v:?}", seg.doc_id);
    Ok(())
}

pub fn corrupt(a: CorruptArgs) -> Result<()> {
    let dist = SpanDistribution::new(a.corruption.pmf.clone())?;
    let mut gold = read_segmentation_dir(&a.gold)?;
    if let Some(ids) = selected_ids(&a.select, "train")? {
        if let Some(missing) = ids.iter().find(|id| !gold.contains_key(*id)) {
            bail!("no gold segmentation for {missing}");
        }
        gold.retain(|id, _| ids.contains(id));
    }
    ensure!(!gold.is_empty(), "no gold segmentations selected");
    let mut rates = BTreeMap::new();
    for (id, g) in &gold {
        check_gold(g)?;
        let blocks = corrupt_with(g, &dist, reading(a.corruption.reading), doc_seed(a.corruption.seed, id));
        write_segmentation(&a.out, &blocks.to_segmentation(id))?;
        rates.insert(id.clone(), corruption_rate(g, &blocks));
    }
    let summary = rate_summary(&rates);
    write_manifest(
        &a.out,
        "corrupt",
        json!({
            "gold": a.gold,
            "selection": select_json(&a.select, "train"),
            "corruption": corruption_json(&a.corruption),
            "corruption_rate": summary,
            "documents": rates,
        }),
    )?;
    println!(
        "{} draft(s) -> {} (mean corruption rate {:.3})",
        rates.len(),
        a.out.display(),
        summary.map_or(0.0, |s| s.mean)
    );
    Ok(())
}

enum DraftSource<'a> {
    Dir(BTreeMap<String, DraftBlocks>),
    Draw(&'a CorruptionOpts, SpanDistribution),
}

impl DraftSource<'_> {
    fn get(&self, gold: &Segmentation) -> Result<DraftBlocks> {
        match self {
            DraftSource::Dir(map) => map
                .get(&gold.doc_id)
                .cloned()
                .with_context(|| format!("no draft blocks for {}", gold.doc_id)),
            DraftSource::Draw(c, dist) => Ok(corrupt_with(gold, dist, reading(c.reading), doc_seed(c.seed, &gold.doc_id))),
        }
    }
}

/// SFT JSONL for `docs` (two records each) plus per-document corruption rates.
fn build_sft(
    docs: &[&Document],
    gold: &BTreeMap<String, Segmentation>,
    drafts: &DraftSource<'_>,
) -> Result<(String, BTreeMap<String, f64>)> {
    let mut out = String::new();
    let mut rates = BTreeMap::new();
    for doc in docs {
        let g = &gold[doc.id()];
        let blocks = drafts.get(g)?;
        for rec in emit_sft_pairs(doc, g, &blocks)? {
            out.push_str(&rec.to_json_line());
            out.push('\n');
        }
        rates.insert(doc.id().to_string(), corruption_rate(g, &blocks));
    }
    Ok((out, rates))
}

fn draft_source<'a>(drafts: Option<&Path>, c: &'a CorruptionOpts) -> Result<DraftSource<'a>> {
    Ok(match drafts {
        Some(dir) => DraftSource::Dir(
            read_segmentation_dir(dir)?
                .into_iter()
                .map(|(id, s)| (id, DraftBlocks::from_segmentation(&s)))
                .collect(),
        ),
        None => DraftSource::Draw(c, SpanDistribution::new(c.pmf.clone())?),
    })
}

pub fn emit_sft(a: EmitSftArgs) -> Result<()> {
    let docs = load_docs(&a.corpus, a.select.manifest.as_deref(), split_name(&a.select, "train"))?;
    let docs: Vec<&Document> = docs
        .iter()
        .filter(|d| Some(d.meta().data_source) != a.leave_out)
        .collect();
    ensure!(!docs.is_empty(), "no documents left to emit");
    let owned: Vec<Document> = docs.iter().map(|d| (*d).clone()).collect();
    let gold = load_gold(&a.gold, &owned)?;
    let drafts = draft_source(a.drafts.as_deref(), &a.corruption)?;
    let (jsonl, rates) = build_sft(&docs, &gold, &drafts)?;
    write_text(&a.out.join("sft.jsonl"), &jsonl)?;
    write_manifest(
        &a.out,
        "emit-sft",
        json!({
            "corpus": a.corpus,
            "gold": a.gold,
            "selection": select_json(&a.select, "train"),
            "leave_out": a.leave_out,
            "drafts": a.drafts,
            "corruption": if a.drafts.is_none() { corruption_json(&a.corruption) } else { Value::Null },
            "records": docs.len() * 2,
            "corruption_rate": rate_summary(&rates),
            "documents": rates,
        }),
    )?;
    println!("{} SFT record(s) -> {}", docs.len() * 2, a.out.join("sft.jsonl").display());
    Ok(())
}

fn metric_options(m: &MetricArgs) -> MetricOptions {
    MetricOptions {
        k: m.k,
        absent_class: match m.absent_class {
            AbsentArg::ScoreOne => AbsentClass::ScoreOne,
            AbsentArg::ScoreZero => AbsentClass::ScoreZero,
        },
        alignment: match m.alignment {
            AlignArg::Optimal => Alignment::Optimal,
            AlignArg::Greedy => Alignment::Greedy,
        },
    }
}

pub fn score(a: ScoreArgs) -> Result<()> {
    let docs = load_docs(&a.corpus, a.select.manifest.as_deref(), split_name(&a.select, "test"))?;
    ensure!(!docs.is_empty(), "no documents to score");
    let gold = load_gold(&a.gold, &docs)?;
    let mut models = Vec::new();
    for (name, dir) in &a.preds {
        let dir = PathBuf::from(dir);
        models.push(ModelPredictions {
            name: name.clone(),
            predictions: read_segmentation_dir(&dir).with_context(|| format!("reading predictions for {name}"))?,
            failed: read_failures(&dir)?,
        });
    }
    let options = metric_options(&a.metrics);
    let report = build_report(&docs, &gold, models, options)?;
    write_report(&a.out, &report)?;
    write_manifest(
        &a.out,
        "score",
        json!({
            "corpus": a.corpus,
            "gold": a.gold,
            "selection": select_json(&a.select, "test"),
            "predictions": a.preds.iter().map(|(n, d)| json!({ "name": n, "dir": d })).collect::<Vec<_>>(),
            "metrics": options,
        }),
    )?;
    print!("{}", report.render_text());
    Ok(())
}

pub fn report(a: ReportArgs) -> Result<()> {
    let reports = a.inputs.iter().map(|p| read_report(p)).collect::<Result<Vec<_>>>()?;
    let merged = merge_reports(reports)?;
    write_report(&a.out, &merged)?;
    write_manifest(&a.out, "report", json!({ "inputs": a.inputs }))?;
    print!("{}", merged.render_text());
    Ok(())
}

/// `stem -> path` for every CSV/TSV sheet in `dir`.
fn sheet_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv" || e == "tsv") {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            if out.insert(stem.clone(), path).is_some() {
                bail!("{} has both a CSV and a TSV sheet for {stem}", dir.display());
            }
        }
    }
    ensure!(!out.is_empty(), "no annotation sheets in {}", dir.display());
    Ok(out)
}

fn annotator_name(dir: &Path) -> String {
    dir.file_name().map_or("annotator".into(), |n| n.to_string_lossy().into_owned())
}

/// Rows of several sheets back to back, so agreement pools over documents.
fn concat(sheets: &[&AnnotationSheet]) -> AnnotationSheet {
    AnnotationSheet {
        doc_id: "pooled".into(),
        annotator_id: sheets.first().map_or(String::new(), |s| s.annotator_id.clone()),
        rows: sheets.iter().flat_map(|s| s.rows.iter().cloned()).collect(),
    }
}

#[derive(Serialize)]
struct AgreementRow {
    label: String,
    documents: usize,
    within_segment: dialseg::annotation::Agreement,
    cross_segment: Option<dialseg::annotation::Agreement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    change: Option<ChangeCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    change_rate: Option<f64>,
}

pub fn agree(a: AgreeArgs) -> Result<()> {
    let files_a = sheet_files(&a.a)?;
    let files_b = sheet_files(&a.b)?;
    let files_c = a.adjudicator.as_deref().map(sheet_files).transpose()?;
    ensure!(
        files_a.keys().eq(files_b.keys()),
        "annotators a and b cover different documents"
    );
    if let Some(c) = &files_c {
        ensure!(files_a.keys().eq(c.keys()), "the adjudicator covers different documents");
    }
    let corpus: BTreeMap<String, Document> = match &a.corpus {
        Some(dir) => read_corpus_dir(dir)?.into_iter().map(|d| (d.id().to_string(), d)).collect(),
        None => BTreeMap::new(),
    };
    let (name_a, name_b) = (annotator_name(&a.a), annotator_name(&a.b));
    let mut groups: BTreeMap<String, Vec<(AnnotationSheet, AnnotationSheet, Option<ChangeCounts>)>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (id, path_a) in &files_a {
        let sa = AnnotationSheet::read(path_a, &name_a)?;
        let sb = AnnotationSheet::read(&files_b[id], &name_b)?;
        let silver = sa.silver()?;
        if sb.silver()? != silver {
            warnings.push(format!("{id}: sheets disagree on silver segment starts; using {name_a}'s"));
        }
        let label = match corpus.get(id) {
            Some(doc) => {
                sa.check_coverage(doc.first_line(), doc.last_line())?;
                subset_of(doc).to_string()
            }
            None if a.corpus.is_some() => bail!("document {id} is not in the corpus"),
            None => "All".to_string(),
        };
        let change = match &files_c {
            Some(c) => {
                let sc = AnnotationSheet::read(&c[id], &annotator_name(a.adjudicator.as_deref().expect("set")))?;
                let resolved = adjudicate(&sa, &sb, &sc)?;
                let applied = apply_flags(&silver, &resolved)?;
                for w in &applied.warnings {
                    warnings.push(format!("{id}: {w}"));
                }
                write_segmentation(&a.out.join("gold"), &applied.segmentation)?;
                Some(change_counts(&silver, &applied.segmentation)?)
            }
            None => None,
        };
        groups.entry(label).or_default().push((sa, sb, change));
    }
    let labels = order_subsets(groups.keys().map(String::as_str));
    let mut rows = Vec::new();
    let row = |label: &str, items: Vec<&(AnnotationSheet, AnnotationSheet, Option<ChangeCounts>)>| -> Result<AgreementRow> {
        let pa = concat(&items.iter().map(|i| &i.0).collect::<Vec<_>>());
        let pb = concat(&items.iter().map(|i| &i.1).collect::<Vec<_>>());
        let change: Option<ChangeCounts> = items.iter().map(|i| i.2).sum();
        Ok(AgreementRow {
            label: label.to_string(),
            documents: items.len(),
            within_segment: agreement_stats(&pa, &pb, Task::WithinSegment)?,
            // no segment starts at all leaves nothing to compare
            cross_segment: agreement_stats(&pa, &pb, Task::CrossSegment).ok(),
            change,
            change_rate: change.map(|c| c.rate()),
        })
    };
    for l in &labels {
        rows.push(row(l, groups[l].iter().collect())?);
    }
    if labels.len() > 1 {
        rows.push(row("Overall", groups.values().flatten().collect())?);
    }
    let mut cells = vec![["Dataset", "Task", "Po", "kappa", "AC1", "n", "changed %"].map(String::from).to_vec()];
    for r in &rows {
        for (task, ag) in [("within", Some(r.within_segment)), ("cross", r.cross_segment)] {
            let Some(ag) = ag else { continue };
            cells.push(vec![
                r.label.clone(),
                task.to_string(),
                format!("{:.2}", ag.po),
                format!("{:.2}", ag.kappa),
                format!("{:.2}", ag.ac1),
                ag.n.to_string(),
                r.change_rate.map_or("-".into(), |c| format!("{:.2}", 100.0 * c)),
            ]);
        }
    }
    let table = align(&cells);
    write_text(&a.out.join("agreement.txt"), &table)?;
    write_json(&a.out.join("agreement.json"), &json!({ "rows": rows, "warnings": warnings }))?;
    write_manifest(
        &a.out,
        "agree",
        json!({ "a": a.a, "b": a.b, "adjudicator": a.adjudicator, "corpus": a.corpus }),
    )?;
    for w in &warnings {
        tracing::warn!("{w}");
    }
    print!("{table}");
    Ok(())
}

pub fn sheets(a: SheetsArgs) -> Result<()> {
    let silver = read_segmentation_dir(&a.silver)?;
    let corpus: BTreeMap<String, Document> = match &a.corpus {
        Some(dir) => read_corpus_dir(dir)?.into_iter().map(|d| (d.id().to_string(), d)).collect(),
        None => BTreeMap::new(),
    };
    let (delim, ext) = match a.format {
        SheetFormat::Csv => (b',', "csv"),
        SheetFormat::Tsv => (b'\t', "tsv"),
    };
    for (id, seg) in &silver {
        let doc = corpus.get(id);
        if a.corpus.is_some() && doc.is_none() {
            bail!("document {id} is not in the corpus");
        }
        let sheet = AnnotationSheet::blank(seg, doc, &a.annotator);
        write_text(&a.out.join(format!("{id}.{ext}")), &sheet.to_delimited(delim))?;
    }
    println!("{} sheet(s) -> {}", silver.len(), a.out.display());
    Ok(())
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let docs = load_docs(&a.corpus, a.select.manifest.as_deref(), split_name(&a.select, "test"))?;
    ensure!(!docs.is_empty(), "no documents selected");
    let gold = load_gold(&a.gold, &docs)?;
    let labels = order_subsets(docs.iter().map(subset_of));
    let mut rows = Vec::new();
    for l in &labels {
        let pairs: Vec<(&Document, &Segmentation)> = docs
            .iter()
            .filter(|d| subset_of(d) == l)
            .map(|d| (d, &gold[d.id()]))
            .collect();
        rows.push((l.clone(), compute_stats(&pairs)?));
    }
    let all: Vec<(&Document, &Segmentation)> = docs.iter().map(|d| (d, &gold[d.id()])).collect();
    rows.push(("Overall".to_string(), compute_stats(&all)?));
    if let Some(path) = &a.json {
        let map: BTreeMap<&str, _> = rows.iter().map(|(l, s)| (l.as_str(), s)).collect();
        write_json(path, &map)?;
    }
    print!("{}", render_stats_table(&rows));
    Ok(())
}

pub fn ablate(a: AblateArgs) -> Result<()> {
    let leave_out: Vec<DataSource> = if a.leave_out.is_empty() {
        DataSource::BENCHMARK.to_vec()
    } else {
        a.leave_out.clone()
    };
    if let Some(s) = leave_out.iter().find(|s| !DataSource::BENCHMARK.contains(s)) {
        bail!("{s} is not a benchmark source; choose from opus, rewayat, mgb5, ldc, podcast");
    }
    let docs = load_docs(&a.corpus, a.select.manifest.as_deref(), split_name(&a.select, "train"))?;
    ensure!(!docs.is_empty(), "no training documents");
    let gold = load_gold(&a.gold, &docs)?;
    let drafts = draft_source(None, &a.corruption)?;

    let mut rows: Vec<(String, String, Option<DataSource>)> = vec![("All train data".into(), "all".into(), None)];
    for s in &leave_out {
        rows.push((format!("w/o {}", s.display_name()), format!("without_{}", s.as_str()), Some(*s)));
    }
    let mut sets = Vec::new();
    for (label, dir, held) in &rows {
        let keep: Vec<&Document> = docs.iter().filter(|d| Some(d.meta().data_source) != *held).collect();
        let (jsonl, rates) = build_sft(&keep, &gold, &drafts)?;
        let out = a.out.join(dir);
        write_text(&out.join("sft.jsonl"), &jsonl)?;
        write_manifest(
            &out,
            "ablate",
            json!({
                "row": label,
                "leave_out": held,
                "records": keep.len() * 2,
                "corruption": corruption_json(&a.corruption),
                "documents": rates.keys().collect::<Vec<_>>(),
            }),
        )?;
        sets.push(json!({ "row": label, "dir": dir, "documents": keep.len(), "records": keep.len() * 2 }));
    }

    let mut results: BTreeMap<String, ModelReport> = BTreeMap::new();
    let mut options = None;
    for (label, path) in &a.results {
        ensure!(
            rows.iter().any(|(l, _, _)| l == label),
            "--result label {label:?} is not an ablation row"
        );
        let r = read_report(Path::new(path))?;
        options.get_or_insert(r.options);
        let mut m = r.models.into_iter().next().with_context(|| format!("{path} has no models"))?;
        m.model = label.clone();
        results.insert(label.clone(), m);
    }
    let models = rows
        .iter()
        .map(|(label, _, _)| results.remove(label).unwrap_or_else(|| ModelReport::new(label.clone(), Vec::new(), Vec::new())))
        .collect();
    let subsets = DataSource::BENCHMARK.iter().map(|s| s.display_name().to_string()).collect();
    let table = ScoreReport::new(options.unwrap_or_default(), subsets, models).render_boundary_table();
    write_text(&a.out.join("ablation.txt"), &table)?;
    write_manifest(
        &a.out,
        "ablate",
        json!({
            "corpus": a.corpus,
            "gold": a.gold,
            "selection": select_json(&a.select, "train"),
            "corruption": corruption_json(&a.corruption),
            "sets": sets,
            "results": a.results.iter().map(|(l, p)| json!({ "row": l, "report": p })).collect::<Vec<_>>(),
        }),
    )?;
    print!("{table}");
    Ok(())
}

#[derive(Serialize)]
struct ResolvedRun<'a> {
    config: &'a RunConfig,
    split_manifest: PathBuf,
    documents: Vec<&'a str>,
}

pub fn run(a: RunArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    let log = RunLog::open(&out.join("run.log"))?;

    let all_docs = read_corpus_dir(&cfg.corpus).with_context(|| format!("reading corpus {}", cfg.corpus.display()))?;
    let manifest_path = match &cfg.split_manifest {
        Some(p) => p.clone(),
        None => {
            let [t, v, s] = cfg.ratios.0;
            let m = stratified_split(&all_docs, SplitRatios::new(t, v, s)?, cfg.seed)?;
            let p = out.join("split.json");
            write_json(&p, &m)?;
            p
        }
    };
    let split = read_split_manifest(&manifest_path)?;
    let ids = split.get(&cfg.split).expect("split name checked at load");
    let docs: Vec<Document> = all_docs.into_iter().filter(|d| ids.iter().any(|i| i == d.id())).collect();
    ensure!(docs.len() == ids.len(), "split {} lists documents missing from the corpus", cfg.split);
    ensure!(!docs.is_empty(), "split {} is empty", cfg.split);
    // every scored document needs gold before any model runs
    let gold = load_gold(&cfg.gold, &docs)?;

    write_manifest(
        out,
        "run",
        ResolvedRun {
            config: &cfg,
            split_manifest: manifest_path.clone(),
            documents: docs.iter().map(Document::id).collect(),
        },
    )?;
    log.event("run_start", json!({ "documents": docs.len(), "segmenters": cfg.segmenters.len() }));

    let rt = runtime()?;
    let mut models = Vec::new();
    for s in &cfg.segmenters {
        let outcomes = segment_all(s, &docs, cfg.workers, &rt).with_context(|| format!("segmenter {}", s.name))?;
        let pred_dir = out.join("predictions").join(&s.name);
        let (predictions, failed) = persist(&pred_dir, &out.join("calls").join(&s.name), &s.name, outcomes, &log)?;
        write_failures(&pred_dir, &failed)?;
        models.push(ModelPredictions {
            name: s.name.clone(),
            predictions,
            failed,
        });
    }
    let report = build_report(&docs, &gold, models, cfg.metrics)?;
    write_report(out, &report)?;
    log.event("run_end", json!({ "report": out.join("report.json") }));
    print!("{}", report.render_text());
    Ok(())
}
