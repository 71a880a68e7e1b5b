use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use dialseg::corpus::io::{read_corpus_dir, read_segmentation_dir};
use dialseg::corpus::SplitManifest;
use dialseg::{Document, Segmentation};
use serde::Serialize;
use serde_json::{json, Value};

pub const TOOL: &str = "dialseg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `<dir>/manifest.json` with the tool version, command name and
/// fully resolved inputs. No timestamps, so reruns produce the same bytes.
pub fn write_manifest(dir: &Path, command: &str, body: impl Serialize) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let value = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "config": body,
    });
    write_json(&dir.join("manifest.json"), &value)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Append-only JSONL event log shared across worker threads.
pub struct RunLog {
    file: Mutex<File>,
}

impl RunLog {
    pub fn open(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        Ok(Self { file: Mutex::new(file) })
    }

    pub fn event(&self, kind: &str, fields: Value) {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
        let mut record = json!({ "ts_ms": ts, "event": kind });
        if let (Value::Object(r), Value::Object(f)) = (&mut record, fields) {
            r.extend(f);
        }
        let mut line = record.to_string();
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(e) = file.write_all(line.as_bytes()) {
            tracing::warn!("run log write failed: {e}");
        }
    }
}

pub fn read_split_manifest(path: &Path) -> Result<SplitManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing split manifest {}", path.display()))
}

/// Corpus documents, optionally restricted to one split of a manifest.
pub fn load_docs(corpus: &Path, manifest: Option<&Path>, split: &str) -> Result<Vec<Document>> {
    let docs = read_corpus_dir(corpus).with_context(|| format!("reading corpus {}", corpus.display()))?;
    let Some(manifest) = manifest else {
        return Ok(docs);
    };
    let m = read_split_manifest(manifest)?;
    let Some(ids) = m.get(split) else {
        bail!("unknown split {split:?}; expected train, valid or test");
    };
    let known: BTreeMap<&str, &Document> = docs.iter().map(|d| (d.id(), d)).collect();
    if let Some(missing) = ids.iter().find(|id| !known.contains_key(id.as_str())) {
        bail!("split manifest lists {missing}, which is not in {}", corpus.display());
    }
    Ok(docs.into_iter().filter(|d| ids.iter().any(|i| i == d.id())).collect())
}

/// Gold segmentations for `docs`; any missing or invalid entry is an error.
pub fn load_gold(dir: &Path, docs: &[Document]) -> Result<BTreeMap<String, Segmentation>> {
    let mut all = read_segmentation_dir(dir).with_context(|| format!("reading gold {}", dir.display()))?;
    let missing: Vec<&str> = docs.iter().map(Document::id).filter(|id| !all.contains_key(*id)).collect();
    if !missing.is_empty() {
        bail!("no gold segmentation in {} for: {}", dir.display(), missing.join(", "));
    }
    let mut out = BTreeMap::new();
    for d in docs {
        let seg = all.remove(d.id()).expect("checked above");
        let verdict = dialseg::corpus::validate_segmentation(d, &seg);
        if !verdict.is_ok() {
            bail!("gold for {} is not a valid segmentation: {:?}", d.id(), verdict.violations);
        }
        out.insert(d.id().to_string(), seg);
    }
    Ok(out)
}

/// Parses `NAME=VALUE`.
pub fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected NAME=VALUE, got {s:?}")),
    }
}

/// Parses a comma-separated list of floats.
pub fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect()
}
