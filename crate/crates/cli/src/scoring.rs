use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dialseg::corpus::validate_segmentation;
use dialseg::corpus::DataSource;
use dialseg::metrics::{score_document, FailedDoc, Metric, MetricOptions, ModelReport, ScoreReport};
use dialseg::{Document, Segmentation};

use crate::artifacts::{write_text, VERSION};

/// One model's predictions plus documents it failed on upstream.
pub struct ModelPredictions {
    pub name: String,
    pub predictions: BTreeMap<String, Segmentation>,
    pub failed: Vec<(String, String)>,
}

/// Subset label for a document: its data source's display name.
pub fn subset_of(doc: &Document) -> &'static str {
    doc.meta().data_source.display_name()
}

/// Subset columns in source order, restricted to labels present.
pub fn order_subsets<'a>(present: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut labels: Vec<&str> = present.into_iter().collect();
    labels.sort_by_key(|l| {
        let pos = DataSource::BENCHMARK
            .iter()
            .chain([&DataSource::Other])
            .position(|s| s.display_name() == *l)
            .unwrap_or(usize::MAX);
        (pos, l.to_string())
    });
    labels.dedup();
    labels.into_iter().map(str::to_string).collect()
}

/// Scores every document of `docs` for every model. A document with no
/// prediction, or a prediction that is not a partition of it, is listed as
/// failed for that model.
pub fn build_report(
    docs: &[Document],
    gold: &BTreeMap<String, Segmentation>,
    models: Vec<ModelPredictions>,
    options: MetricOptions,
) -> Result<ScoreReport> {
    let subsets = order_subsets(docs.iter().map(subset_of));
    let mut reports = Vec::new();
    for m in models {
        let upstream: BTreeMap<&str, &str> = m.failed.iter().map(|(d, r)| (d.as_str(), r.as_str())).collect();
        let mut scored = Vec::new();
        let mut failed = Vec::new();
        for doc in docs {
            let id = doc.id();
            let g = gold.get(id).with_context(|| format!("no gold for {id}"))?;
            let Some(pred) = m.predictions.get(id) else {
                let reason = upstream.get(id).map_or("no prediction".to_string(), |r| r.to_string());
                failed.push(FailedDoc {
                    doc_id: id.to_string(),
                    reason,
                });
                continue;
            };
            let verdict = validate_segmentation(doc, pred);
            if !verdict.is_ok() {
                failed.push(FailedDoc {
                    doc_id: id.to_string(),
                    reason: format!("invalid prediction: {:?}", verdict.violations),
                });
                continue;
            }
            scored.push(score_document(subset_of(doc), g, pred, &options)?);
        }
        reports.push(ModelReport::new(m.name, scored, failed));
    }
    Ok(ScoreReport::new(options, subsets, reports))
}

/// Writes `report.json`, `report.txt` and one `ranks_<metric>.csv` per ranked metric.
pub fn write_report(dir: &Path, report: &ScoreReport) -> Result<()> {
    write_text(&dir.join("report.json"), &report.to_json())?;
    let header = format!("dialseg {VERSION} segmentation report\n\n");
    write_text(&dir.join("report.txt"), &(header + &report.render_text()))?;
    for metric in Metric::ALL {
        if let Some(csv) = report.rank_csv(metric) {
            write_text(&dir.join(format!("ranks_{}.csv", metric.as_str())), &csv)?;
        }
    }
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ScoreReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
}

/// Combines model rows from several reports scored with the same options.
pub fn merge_reports(reports: Vec<ScoreReport>) -> Result<ScoreReport> {
    let Some(options) = reports.first().map(|r| r.options) else {
        bail!("no reports to merge");
    };
    let mut models: Vec<ModelReport> = Vec::new();
    for r in reports {
        if r.options != options {
            bail!("reports were scored with different metric options");
        }
        for m in r.models {
            if models.iter().any(|x| x.model == m.model) {
                bail!("model {} appears in more than one report", m.model);
            }
            models.push(m);
        }
    }
    let subsets = order_subsets(models.iter().flat_map(|m| m.subsets.keys().map(String::as_str)));
    Ok(ScoreReport::new(options, subsets, models))
}
