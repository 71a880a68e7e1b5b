//! File formats: document JSONL with a `.meta.json` sidecar, and segmentation
//! JSON arrays in the `{"split_id", "topic"?, "line_ids": "1,2,3"}` schema.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{CorpusError, DocMeta, Document, LineId, Segment, Segmentation, Utterance};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Sidecar metadata path for a document JSONL file (`x.jsonl` → `x.meta.json`).
pub fn meta_path(jsonl: &Path) -> PathBuf {
    let stem = jsonl
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    jsonl.with_file_name(format!("{stem}.meta.json"))
}

pub fn read_document(jsonl: &Path) -> Result<Document, CorpusError> {
    let meta_file = meta_path(jsonl);
    let meta_text = fs::read_to_string(&meta_file).map_err(io_err(&meta_file))?;
    let meta: DocMeta = serde_json::from_str(&meta_text).map_err(|source| CorpusError::Json {
        path: meta_file.display().to_string(),
        line: 1,
        source,
    })?;
    let text = fs::read_to_string(jsonl).map_err(io_err(jsonl))?;
    let mut utterances = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let u: Utterance = serde_json::from_str(line).map_err(|source| CorpusError::Json {
            path: jsonl.display().to_string(),
            line: i + 1,
            source,
        })?;
        utterances.push(u);
    }
    Document::new(meta, utterances)
}

/// One JSON object per utterance, keys in `line_id`, `text`, `speaker` order.
pub fn utterances_jsonl(utterances: &[Utterance]) -> String {
    let mut out = String::new();
    for u in utterances {
        out.push_str(&serde_json::to_string(u).expect("utterance serializes"));
        out.push('\n');
    }
    out
}

/// Writes `<dir>/<doc_id>.jsonl` and its sidecar; returns the JSONL path.
pub fn write_document(dir: &Path, doc: &Document) -> Result<PathBuf, CorpusError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(format!("{}.jsonl", doc.id()));
    fs::write(&path, utterances_jsonl(doc.utterances())).map_err(io_err(&path))?;
    let meta = meta_path(&path);
    let body = serde_json::to_string_pretty(doc.meta()).expect("meta serializes") + "\n";
    fs::write(&meta, body).map_err(io_err(&meta))?;
    Ok(path)
}

/// Reads every `*.jsonl` document in `dir`, sorted by doc id.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<Document>, CorpusError> {
    let mut docs = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e == "jsonl") {
            docs.push(read_document(&path)?);
        }
    }
    docs.sort_by(|a, b| a.id().cmp(b.id()));
    Ok(docs)
}

fn parse_line_ids(v: &Value) -> Result<Vec<LineId>, String> {
    match v {
        Value::String(s) => {
            if s.trim().is_empty() {
                return Ok(Vec::new());
            }
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<LineId>()
                        .map_err(|_| format!("line_ids entry {:?} is not an integer", t.trim()))
                })
                .collect()
        }
        Value::Array(items) => items
            .iter()
            .map(|x| {
                x.as_u64()
                    .and_then(|n| LineId::try_from(n).ok())
                    .ok_or_else(|| format!("line_ids entry {x} is not an integer"))
            })
            .collect(),
        other => Err(format!("line_ids must be a string or array, got {other}")),
    }
}

fn parse_split_id(v: &Value) -> Result<u32, String> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| format!("split_id {n} is not a non-negative integer")),
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| format!("split_id {s:?} is not an integer")),
        other => Err(format!("split_id must be an integer, got {other}")),
    }
}

/// Converts a parsed JSON array of segment objects into segments.
///
/// Accepts `split_id` as number or numeric string and `line_ids` as a
/// comma-separated string or integer array. No partition checks happen here.
pub fn segments_from_json(value: &Value) -> Result<Vec<Segment>, String> {
    let items = value
        .as_array()
        .ok_or_else(|| "expected a JSON array of segment objects".to_string())?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let obj = item
                .as_object()
                .ok_or_else(|| format!("element {} is not an object", i + 1))?;
            let split_id = match obj.get("split_id") {
                Some(v) => parse_split_id(v)?,
                None => i as u32 + 1,
            };
            let line_ids = parse_line_ids(
                obj.get("line_ids")
                    .ok_or_else(|| format!("element {} has no line_ids", i + 1))?,
            )?;
            let topic = match obj.get("topic") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) => Some(s.clone()),
                Some(other) => Some(other.to_string()),
            };
            Ok(Segment {
                split_id,
                line_ids,
                topic,
            })
        })
        .collect()
}

fn join_ids(ids: &[LineId]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Serialises segments as a JSON array, one object per line.
///
/// Topics are emitted only when `with_topics` is set and present.
pub fn segmentation_json(seg: &Segmentation, with_topics: bool) -> String {
    if seg.segments.is_empty() {
        return "[]".to_string();
    }
    let rows: Vec<String> = seg
        .segments
        .iter()
        .map(|s| {
            let ids = serde_json::to_string(&join_ids(&s.line_ids)).expect("string serializes");
            match (&s.topic, with_topics) {
                (Some(t), true) => format!(
                    "  {{\"split_id\": {}, \"topic\": {}, \"line_ids\": {}}}",
                    s.split_id,
                    serde_json::to_string(t).expect("string serializes"),
                    ids
                ),
                _ => format!("  {{\"split_id\": {}, \"line_ids\": {}}}", s.split_id, ids),
            }
        })
        .collect();
    format!("[\n{}\n]", rows.join(",\n"))
}

pub fn parse_segmentation(text: &str, doc_id: &str) -> Result<Segmentation, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Ok(Segmentation {
        doc_id: doc_id.to_string(),
        segments: segments_from_json(&value)?,
    })
}

/// Reads a segmentation file; the doc id is the file stem.
pub fn read_segmentation(path: &Path) -> Result<Segmentation, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let doc_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_segmentation(&text, &doc_id).map_err(|message| CorpusError::Format {
        path: path.display().to_string(),
        message,
    })
}

pub fn write_segmentation(dir: &Path, seg: &Segmentation) -> Result<PathBuf, CorpusError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(format!("{}.json", seg.doc_id));
    fs::write(&path, segmentation_json(seg, true) + "\n").map_err(io_err(&path))?;
    Ok(path)
}

/// Reads every `*.json` segmentation in `dir`, keyed by doc id.
pub fn read_segmentation_dir(dir: &Path) -> Result<BTreeMap<String, Segmentation>, CorpusError> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if name.ends_with(".json") && !name.ends_with(".meta.json") && name != "manifest.json" {
            let seg = read_segmentation(&path)?;
            out.insert(seg.doc_id.clone(), seg);
        }
    }
    Ok(out)
}
