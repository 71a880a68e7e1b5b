//! Per-document scoring, subset aggregation and report rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rank::{rank_csv, rank_summary, Metric, RankStats, ScoreTable};
use super::{
    boundary_f1_macro_with, pk, topic_accuracy_with, window_diff, AbsentClass, Alignment, MetricError,
};
use crate::corpus::stats::align;
use crate::corpus::Segmentation;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricOptions {
    /// Fixed window size; `None` uses the per-document default.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub absent_class: AbsentClass,
    #[serde(default)]
    pub alignment: Alignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocScore {
    pub doc_id: String,
    pub subset: String,
    pub f1_macro: f64,
    pub pk: f64,
    pub wd: f64,
    pub topic_acc: f64,
    pub k_used: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub short_document: bool,
}

impl DocScore {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::F1Macro => self.f1_macro,
            Metric::Pk => self.pk,
            Metric::Wd => self.wd,
            Metric::TopicAcc => self.topic_acc,
        }
    }
}

/// Scores one prediction against gold. Both must partition the same line range.
pub fn score_document(
    subset: &str,
    gold: &Segmentation,
    hyp: &Segmentation,
    opts: &MetricOptions,
) -> Result<DocScore, MetricError> {
    let n = gold.n_lines();
    let r = gold.to_boundary_vector(n)?;
    let h = hyp.to_boundary_vector(hyp.n_lines())?;
    let p = pk(&r, &h, opts.k)?;
    let w = window_diff(&r, &h, opts.k)?;
    Ok(DocScore {
        doc_id: gold.doc_id.clone(),
        subset: subset.to_string(),
        f1_macro: boundary_f1_macro_with(&r, &h, opts.absent_class)?,
        pk: p.value,
        wd: w.value,
        topic_acc: topic_accuracy_with(gold, hyp, opts.alignment)?,
        k_used: p.k,
        short_document: p.degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub f1_macro: f64,
    pub pk: f64,
    pub wd: f64,
    pub topic_acc: f64,
    pub n_docs: usize,
}

impl Aggregate {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::F1Macro => self.f1_macro,
            Metric::Pk => self.pk,
            Metric::Wd => self.wd,
            Metric::TopicAcc => self.topic_acc,
        }
    }

    /// Unweighted mean of per-document scores.
    pub fn of_docs<'a>(docs: impl IntoIterator<Item = &'a DocScore>) -> Option<Self> {
        Self::mean(docs.into_iter().map(|d| ([d.f1_macro, d.pk, d.wd, d.topic_acc], 1)))
    }

    /// Unweighted mean of subset means; `n_docs` is the total.
    pub fn of_subsets<'a>(subsets: impl IntoIterator<Item = &'a Aggregate>) -> Option<Self> {
        Self::mean(subsets.into_iter().map(|a| ([a.f1_macro, a.pk, a.wd, a.topic_acc], a.n_docs)))
    }

    fn mean(items: impl Iterator<Item = ([f64; 4], usize)>) -> Option<Self> {
        let mut sum = [0.0; 4];
        let (mut count, mut n_docs) = (0usize, 0usize);
        for (v, n) in items {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            count += 1;
            n_docs += n;
        }
        (count > 0).then(|| Aggregate {
            f1_macro: sum[0] / count as f64,
            pk: sum[1] / count as f64,
            wd: sum[2] / count as f64,
            topic_acc: sum[3] / count as f64,
            n_docs,
        })
    }
}

/// A document a model produced no score for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedDoc {
    pub doc_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub documents: Vec<DocScore>,
    /// Keyed by subset label; only subsets with at least one scored document.
    pub subsets: BTreeMap<String, Aggregate>,
    pub overall: Option<Aggregate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<FailedDoc>,
}

impl ModelReport {
    pub fn new(model: impl Into<String>, documents: Vec<DocScore>, failed: Vec<FailedDoc>) -> Self {
        let mut by_subset: BTreeMap<String, Vec<&DocScore>> = BTreeMap::new();
        for d in &documents {
            by_subset.entry(d.subset.clone()).or_default().push(d);
        }
        let subsets: BTreeMap<String, Aggregate> = by_subset
            .into_iter()
            .filter_map(|(k, v)| Aggregate::of_docs(v).map(|a| (k, a)))
            .collect();
        let overall = Aggregate::of_subsets(subsets.values());
        Self {
            model: model.into(),
            documents,
            subsets,
            overall,
            failed,
        }
    }
}

fn fmt_cell(a: Option<&Aggregate>, m: Metric) -> String {
    a.map_or("-".to_string(), |a| format!("{:.2}", a.get(m)))
}

fn agg<'a>(m: &'a ModelReport, col: &str) -> Option<&'a Aggregate> {
    if col == "Overall" {
        m.overall.as_ref()
    } else {
        m.subsets.get(col)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub options: MetricOptions,
    /// Display order of subset columns.
    pub subsets: Vec<String>,
    pub models: Vec<ModelReport>,
    /// Per-metric rank summaries over subsets; present when at least two
    /// models are scored on every subset.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ranks: BTreeMap<Metric, Vec<RankStats>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_note: Option<String>,
}

impl ScoreReport {
    pub fn new(options: MetricOptions, subsets: Vec<String>, models: Vec<ModelReport>) -> Self {
        let mut report = Self {
            options,
            subsets,
            models,
            ranks: BTreeMap::new(),
            rank_note: None,
        };
        if report.models.len() < 2 {
            return report;
        }
        for metric in Metric::ALL {
            match rank_summary(&report.table(metric), metric.direction()) {
                Ok(stats) => {
                    report.ranks.insert(metric, stats);
                }
                Err(e) => {
                    report.ranks.clear();
                    report.rank_note = Some(format!("ranks skipped: {e}"));
                    break;
                }
            }
        }
        report
    }

    /// Subset means for one metric as a model × subset table.
    pub fn table(&self, metric: Metric) -> ScoreTable {
        let mut t = ScoreTable::new(
            self.models.iter().map(|m| m.model.clone()).collect(),
            self.subsets.clone(),
        );
        for (mi, m) in self.models.iter().enumerate() {
            for (si, s) in self.subsets.iter().enumerate() {
                t.cells[mi][si] = m.subsets.get(s).map(|a| a.get(metric));
            }
        }
        t
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// F1/Pk/WD per subset plus Overall, one row per model; then topic
    /// accuracy, rank summaries and failures.
    pub fn render_text(&self) -> String {
        let columns = self.columns();
        let mut out = self.render_boundary_table();

        out.push_str("\nTopic accuracy\n");
        let mut cells = vec![std::iter::once("Model".to_string()).chain(columns.iter().cloned()).collect()];
        for m in &self.models {
            let mut row = vec![m.model.clone()];
            row.extend(columns.iter().map(|c| fmt_cell(agg(m, c), Metric::TopicAcc)));
            cells.push(row);
        }
        out.push_str(&align(&cells));

        for (metric, stats) in &self.ranks {
            out.push_str(&format!("\nRanks ({})\n", metric.as_str()));
            let mut cells = vec![["Model", "median", "q1", "q3", "lo", "hi"].map(String::from).to_vec()];
            for s in stats {
                cells.push(vec![
                    s.model.clone(),
                    format!("{:.2}", s.median),
                    format!("{:.2}", s.q1),
                    format!("{:.2}", s.q3),
                    format!("{:.2}", s.whisker_lo),
                    format!("{:.2}", s.whisker_hi),
                ]);
            }
            out.push_str(&align(&cells));
        }
        if let Some(note) = &self.rank_note {
            out.push_str(&format!("\n{note}\n"));
        }
        for m in &self.models {
            for f in &m.failed {
                out.push_str(&format!("\nunscored: {} {} ({})", m.model, f.doc_id, f.reason));
            }
        }
        if self.models.iter().any(|m| !m.failed.is_empty()) {
            out.push('\n');
        }
        out
    }

    fn columns(&self) -> Vec<String> {
        let mut columns = self.subsets.clone();
        columns.push("Overall".to_string());
        columns
    }

    /// The F1/Pk/WD table alone: a column group per subset plus Overall.
    pub fn render_boundary_table(&self) -> String {
        let columns = self.columns();
        let mut cells = vec![vec![String::new()], vec!["Model".to_string()]];
        for c in &columns {
            cells[0].extend([c.clone(), String::new(), String::new()]);
            cells[1].extend(["F1", "Pk", "WD"].map(String::from));
        }
        for m in &self.models {
            let mut row = vec![m.model.clone()];
            for c in &columns {
                for metric in [Metric::F1Macro, Metric::Pk, Metric::Wd] {
                    row.push(fmt_cell(agg(m, c), metric));
                }
            }
            cells.push(row);
        }
        align(&cells)
    }

    /// Box-plot CSV for one metric's ranks, if computed.
    pub fn rank_csv(&self, metric: Metric) -> Option<String> {
        self.ranks.get(&metric).map(|s| rank_csv(s))
    }
}
