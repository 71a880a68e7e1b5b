//! Per-dataset model ranks and their box-plot summary.

use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    F1Macro,
    Pk,
    Wd,
    TopicAcc,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::F1Macro, Metric::Pk, Metric::Wd, Metric::TopicAcc];

    pub fn direction(self) -> Direction {
        match self {
            Metric::F1Macro | Metric::TopicAcc => Direction::HigherIsBetter,
            Metric::Pk | Metric::Wd => Direction::LowerIsBetter,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::F1Macro => "f1_macro",
            Metric::Pk => "pk",
            Metric::Wd => "wd",
            Metric::TopicAcc => "topic_acc",
        }
    }
}

/// Model × dataset scores; every cell must be filled before ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub models: Vec<String>,
    pub datasets: Vec<String>,
    /// `cells[model][dataset]`
    pub cells: Vec<Vec<Option<f64>>>,
}

impl ScoreTable {
    pub fn new(models: Vec<String>, datasets: Vec<String>) -> Self {
        let cells = vec![vec![None; datasets.len()]; models.len()];
        Self { models, datasets, cells }
    }

    /// Builds a complete table from rows of `(model, scores in dataset order)`.
    pub fn from_rows<M: Into<String>>(datasets: &[&str], rows: impl IntoIterator<Item = (M, Vec<f64>)>) -> Self {
        let mut t = Self::new(Vec::new(), datasets.iter().map(|d| d.to_string()).collect());
        for (m, scores) in rows {
            t.models.push(m.into());
            t.cells.push(scores.into_iter().map(Some).collect());
        }
        t
    }

    /// Sets a cell, adding the model or dataset if unseen.
    pub fn set(&mut self, model: &str, dataset: &str, value: f64) {
        let d = match self.datasets.iter().position(|x| x == dataset) {
            Some(d) => d,
            None => {
                self.datasets.push(dataset.to_string());
                for row in &mut self.cells {
                    row.push(None);
                }
                self.datasets.len() - 1
            }
        };
        let m = match self.models.iter().position(|x| x == model) {
            Some(m) => m,
            None => {
                self.models.push(model.to_string());
                self.cells.push(vec![None; self.datasets.len()]);
                self.models.len() - 1
            }
        };
        self.cells[m][d] = Some(value);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankStats {
    pub model: String,
    /// Rank on each dataset, in table order.
    pub ranks: Vec<f64>,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
}

/// Ranks of `values` (1 = best); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64], direction: Direction) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let o = values[a].total_cmp(&values[b]);
        match direction {
            Direction::LowerIsBetter => o,
            Direction::HigherIsBetter => o.reverse(),
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Quantile of ascending `sorted` data with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn rank_summary(table: &ScoreTable, direction: Direction) -> Result<Vec<RankStats>, MetricError> {
    if table.models.is_empty() || table.datasets.is_empty() {
        return Err(MetricError::EmptyTable);
    }
    let mut ranks = vec![Vec::with_capacity(table.datasets.len()); table.models.len()];
    for (d, dataset) in table.datasets.iter().enumerate() {
        let column = table
            .models
            .iter()
            .enumerate()
            .map(|(m, model)| {
                table.cells[m][d].ok_or_else(|| MetricError::MissingCell {
                    model: model.clone(),
                    dataset: dataset.clone(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        for (m, r) in average_ranks(&column, direction).into_iter().enumerate() {
            ranks[m].push(r);
        }
    }
    Ok(table
        .models
        .iter()
        .zip(ranks)
        .map(|(model, ranks)| {
            let mut sorted = ranks.clone();
            sorted.sort_by(f64::total_cmp);
            let q1 = quantile(&sorted, 0.25);
            let q3 = quantile(&sorted, 0.75);
            let iqr = q3 - q1;
            let whisker_lo = sorted.iter().copied().find(|&r| r >= q1 - 1.5 * iqr).unwrap_or(q1);
            let whisker_hi = sorted.iter().rev().copied().find(|&r| r <= q3 + 1.5 * iqr).unwrap_or(q3);
            RankStats {
                model: model.clone(),
                median: quantile(&sorted, 0.5),
                q1,
                q3,
                whisker_lo,
                whisker_hi,
                ranks,
            }
        })
        .collect())
}

/// Box-plot statistics as CSV: `model,median,q1,q3,whisker_lo,whisker_hi,ranks`.
pub fn rank_csv(stats: &[RankStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "median", "q1", "q3", "whisker_lo", "whisker_hi", "ranks"])
        .expect("in-memory write");
    for s in stats {
        let ranks: Vec<String> = s.ranks.iter().map(|r| r.to_string()).collect();
        w.write_record([
            s.model.clone(),
            s.median.to_string(),
            s.q1.to_string(),
            s.q3.to_string(),
            s.whisker_lo.to_string(),
            s.whisker_hi.to_string(),
            ranks.join(" "),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
