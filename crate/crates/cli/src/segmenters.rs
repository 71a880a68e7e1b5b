use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use dialseg::classical::{c99, texttiling};
use dialseg::corpus::io::{read_segmentation_dir, write_segmentation};
use dialseg::corruption::DraftBlocks;
use dialseg::embedding::{tet_cls_segment, EmbeddingProvider};
use dialseg::llm::{llm_segment, CallMeta, HttpChatModel};
use dialseg::{Document, Segmentation};
use futures::stream::{self, StreamExt};
use rayon::prelude::*;
use serde_json::json;

use crate::artifacts::{write_json, RunLog};
use crate::config::{SegmenterConfig, SegmenterSpec};

/// What one segmenter produced for one document.
#[derive(Debug)]
pub struct Produced {
    pub segmentation: Segmentation,
    pub warnings: Vec<String>,
    pub call: Option<CallMeta>,
}

pub type DocOutcome = (String, Result<Produced, String>);

fn load_drafts(dir: &Path) -> Result<BTreeMap<String, DraftBlocks>> {
    let segs = read_segmentation_dir(dir).with_context(|| format!("reading drafts {}", dir.display()))?;
    Ok(segs
        .into_iter()
        .map(|(id, s)| (id, DraftBlocks::from_segmentation(&s)))
        .collect())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

/// Runs one segmenter over `docs`, preserving document order. Per-document
/// failures are returned, not raised; setup failures (bad endpoint config,
/// unreadable drafts) are errors.
pub fn segment_all(
    cfg: &SegmenterConfig,
    docs: &[Document],
    workers: usize,
    rt: &tokio::runtime::Runtime,
) -> Result<Vec<DocOutcome>> {
    let ok = |s: dialseg::classical::Segmented| Produced {
        segmentation: s.segmentation,
        warnings: s.warnings,
        call: None,
    };
    let outcomes = match &cfg.spec {
        SegmenterSpec::SingleSegment => docs
            .iter()
            .map(|d| {
                let p = Produced {
                    segmentation: Segmentation::single(d),
                    warnings: Vec::new(),
                    call: None,
                };
                (d.id().to_string(), Ok(p))
            })
            .collect(),
        SegmenterSpec::Texttiling { params, normalization } => pool(workers)?.install(|| {
            docs.par_iter()
                .map(|d| (d.id().to_string(), texttiling(d, params, normalization).map(ok).map_err(|e| e.to_string())))
                .collect()
        }),
        SegmenterSpec::C99 { params, normalization } => pool(workers)?.install(|| {
            docs.par_iter()
                .map(|d| (d.id().to_string(), c99(d, params, normalization).map(ok).map_err(|e| e.to_string())))
                .collect()
        }),
        SegmenterSpec::TetCls { embedding, params } => {
            let provider = EmbeddingProvider::from_config(embedding)?;
            let concurrency = workers.max(1);
            rt.block_on(
                stream::iter(docs)
                    .map(|d| {
                        let provider = &provider;
                        async move {
                            let r = tet_cls_segment(d, provider, params).await.map(ok).map_err(|e| e.to_string());
                            (d.id().to_string(), r)
                        }
                    })
                    .buffered(concurrency)
                    .collect(),
            )
        }
        SegmenterSpec::Llm {
            llm,
            mode,
            drafts,
            max_concurrency,
        } => {
            let model = HttpChatModel::new(llm.clone())?;
            let drafts = drafts.as_deref().map(load_drafts).transpose()?;
            rt.block_on(
                stream::iter(docs)
                    .map(|d| {
                        let (model, drafts) = (&model, &drafts);
                        async move {
                            let draft = match drafts {
                                Some(map) => match map.get(d.id()) {
                                    Some(b) => Some(b),
                                    None => return (d.id().to_string(), Err(format!("no draft blocks for {}", d.id()))),
                                },
                                None => None,
                            };
                            let r = llm_segment(d, model, *mode, draft)
                                .await
                                .map(|o| Produced {
                                    segmentation: o.segmentation,
                                    warnings: Vec::new(),
                                    call: Some(o.meta),
                                })
                                .map_err(|e| e.to_string());
                            (d.id().to_string(), r)
                        }
                    })
                    .buffered(*max_concurrency)
                    .collect(),
            )
        }
    };
    Ok(outcomes)
}

/// Writes predictions to `pred_dir` and LLM call records to `call_dir`,
/// logging each document. Returns predictions and failures.
pub fn persist(
    pred_dir: &Path,
    call_dir: &Path,
    name: &str,
    outcomes: Vec<DocOutcome>,
    log: &RunLog,
) -> Result<(BTreeMap<String, Segmentation>, Vec<(String, String)>)> {
    std::fs::create_dir_all(pred_dir)?;
    let mut preds = BTreeMap::new();
    let mut failed = Vec::new();
    for (doc_id, outcome) in outcomes {
        match outcome {
            Ok(p) => {
                write_segmentation(pred_dir, &p.segmentation)?;
                let mut fields = json!({
                    "segmenter": name,
                    "doc_id": doc_id,
                    "segments": p.segmentation.len(),
                });
                if !p.warnings.is_empty() {
                    fields["warnings"] = json!(p.warnings);
                }
                if let Some(call) = &p.call {
                    write_json(&call_dir.join(format!("{doc_id}.json")), call)?;
                    fields["resolution"] = json!(call.resolution);
                    fields["retries"] = json!(call.retries);
                    fields["flagged"] = json!(call.flagged());
                    if !call.repair_actions.is_empty() {
                        fields["repair_actions"] = json!(call.repair_actions);
                    }
                }
                log.event("segmented", fields);
                preds.insert(doc_id, p.segmentation);
            }
            Err(reason) => {
                let stale = pred_dir.join(format!("{doc_id}.json"));
                if stale.exists() {
                    std::fs::remove_file(&stale)?;
                }
                tracing::warn!(segmenter = name, doc_id, "{reason}");
                log.event("segment_failed", json!({ "segmenter": name, "doc_id": doc_id, "reason": reason }));
                failed.push((doc_id, reason));
            }
        }
    }
    Ok((preds, failed))
}
