//! Validation sheets: applying flags to silver segmentations, adjudication,
//! inter-annotator agreement and silver-vs-gold change rates.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{check_partition, CorpusError, Document, LineId, Segment, Segmentation};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("sheet {doc_id}: {message}")]
    Coverage { doc_id: String, message: String },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("agreement needs at least one line")]
    Empty,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetRow {
    pub line_id: LineId,
    pub off_topic: bool,
    /// Meaningful on a segment's first line only.
    pub same_as_prev_segment: bool,
    pub segment_start: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSheet {
    pub doc_id: String,
    pub annotator_id: String,
    pub rows: Vec<SheetRow>,
}

const HEADER: [&str; 6] = ["topic", "topic_same_as_prev", "line_id", "text", "speaker", "off_topic"];

fn flag(cell: &str) -> Result<bool, String> {
    match cell.trim() {
        "" | "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("flag must be 0 or 1, got {other:?}")),
    }
}

impl AnnotationSheet {
    /// An all-zero sheet for a silver segmentation, with topics and text filled in.
    pub fn blank(silver: &Segmentation, doc: Option<&Document>, annotator_id: &str) -> Self {
        let utts: HashMap<LineId, (&str, &str)> = doc
            .map(|d| {
                d.utterances()
                    .iter()
                    .map(|u| (u.line_id, (u.text.as_str(), u.speaker.as_str())))
                    .collect()
            })
            .unwrap_or_default();
        let rows = silver
            .segments
            .iter()
            .flat_map(|s| {
                s.line_ids.iter().enumerate().map(|(i, &id)| SheetRow {
                    line_id: id,
                    off_topic: false,
                    same_as_prev_segment: false,
                    segment_start: i == 0,
                    topic: if i == 0 { s.topic.clone() } else { None },
                    text: utts.get(&id).map(|u| u.0.to_string()),
                    speaker: utts.get(&id).map(|u| u.1.to_string()),
                })
            })
            .collect();
        Self {
            doc_id: silver.doc_id.clone(),
            annotator_id: annotator_id.to_string(),
            rows,
        }
    }

    /// The segmentation the sheet displays: a segment opens at every
    /// `segment_start` row and at the first row.
    pub fn silver(&self) -> Result<Segmentation, AnnotationError> {
        let first = self.rows.first().ok_or(AnnotationError::Empty)?.line_id;
        let last = first + self.rows.len() as LineId - 1;
        self.check_coverage(first, last)?;
        let mut segments: Vec<Segment> = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            if i == 0 || r.segment_start {
                segments.push(Segment {
                    split_id: segments.len() as u32 + 1,
                    line_ids: Vec::new(),
                    topic: r.topic.clone(),
                });
            }
            segments.last_mut().expect("opened above").line_ids.push(r.line_id);
        }
        Ok(Segmentation {
            doc_id: self.doc_id.clone(),
            segments,
        })
    }

    fn flags(&self) -> HashMap<LineId, &SheetRow> {
        self.rows.iter().map(|r| (r.line_id, r)).collect()
    }

    fn line_ids(&self) -> Vec<LineId> {
        self.rows.iter().map(|r| r.line_id).collect()
    }

    /// Rows must be exactly `first..=last` in order.
    pub fn check_coverage(&self, first: LineId, last: LineId) -> Result<(), AnnotationError> {
        let expected: Vec<LineId> = (first..=last).collect();
        if self.line_ids() != expected {
            return Err(AnnotationError::Coverage {
                doc_id: self.doc_id.clone(),
                message: format!("rows do not cover lines {first}..={last} in order"),
            });
        }
        Ok(())
    }

    /// Parses the `topic, topic_same_as_prev, line_id, text, speaker, off_topic`
    /// layout; columns are matched by header name. A row starts a segment when
    /// its `topic` or `topic_same_as_prev` cell is non-blank.
    pub fn parse(text: &str, delimiter: u8, doc_id: &str, annotator_id: &str) -> Result<Self, AnnotationError> {
        let err = |message: String| AnnotationError::Format {
            path: doc_id.to_string(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .flexible(true)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_lowercase()).collect();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let line_col = col("line_id").ok_or_else(|| err("missing line_id column".into()))?;
        let off_col = col("off_topic").ok_or_else(|| err("missing off_topic column".into()))?;
        let same_col = col("topic_same_as_prev");
        let topic_col = col("topic");
        let text_col = col("text");
        let speaker_col = col("speaker");
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let cell = |c: Option<usize>| c.and_then(|c| record.get(c)).unwrap_or("");
            let at = |m: String| err(format!("row {}: {m}", i + 2));
            let line_id = cell(Some(line_col))
                .trim()
                .parse::<LineId>()
                .map_err(|e| at(format!("line_id: {e}")))?;
            let same = cell(same_col);
            let topic = cell(topic_col).trim();
            rows.push(SheetRow {
                line_id,
                off_topic: flag(cell(Some(off_col))).map_err(at)?,
                same_as_prev_segment: flag(same).map_err(at)?,
                segment_start: !same.trim().is_empty() || !topic.is_empty(),
                topic: (!topic.is_empty()).then(|| topic.to_string()),
                text: text_col.map(|_| cell(text_col).to_string()),
                speaker: speaker_col.map(|_| cell(speaker_col).to_string()),
            });
        }
        Ok(Self {
            doc_id: doc_id.to_string(),
            annotator_id: annotator_id.to_string(),
            rows,
        })
    }

    /// Reads a `.csv` or `.tsv` sheet; the document id is the file stem.
    pub fn read(path: &Path, annotator_id: &str) -> Result<Self, AnnotationError> {
        let text = std::fs::read_to_string(path).map_err(|source| AnnotationError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let delimiter = if path.extension().is_some_and(|e| e == "tsv") { b'\t' } else { b',' };
        let doc_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::parse(&text, delimiter, &doc_id, annotator_id)
    }

    pub fn to_delimited(&self, delimiter: u8) -> String {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for r in &self.rows {
            let b = |v: bool| if v { "1" } else { "0" };
            w.write_record([
                r.topic.as_deref().unwrap_or(""),
                if r.segment_start { b(r.same_as_prev_segment) } else { "" },
                &r.line_id.to_string(),
                r.text.as_deref().unwrap_or(""),
                r.speaker.as_deref().unwrap_or(""),
                b(r.off_topic),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// A segmentation with warnings raised while applying flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub segmentation: Segmentation,
    pub warnings: Vec<String>,
}

/// Merges segments flagged same-as-previous, then splits maximal off-topic
/// runs out of their host segments.
pub fn apply_flags(silver: &Segmentation, sheet: &AnnotationSheet) -> Result<Applied, AnnotationError> {
    let first = silver.segments.iter().filter_map(Segment::first).min();
    let last = silver.segments.iter().filter_map(Segment::last).max();
    let (Some(first), Some(last)) = (first, last) else {
        return Err(AnnotationError::Coverage {
            doc_id: silver.doc_id.clone(),
            message: "silver segmentation is empty".into(),
        });
    };
    let violations = check_partition(&silver.segments, first, last);
    if !violations.is_empty() {
        return Err(CorpusError::InvalidSegmentation {
            doc_id: silver.doc_id.clone(),
            violations,
        }
        .into());
    }
    sheet.check_coverage(first, last)?;
    let flags = sheet.flags();
    let mut warnings = Vec::new();

    let mut merged: Vec<(Vec<LineId>, Option<String>)> = Vec::new();
    for (i, s) in silver.segments.iter().enumerate() {
        for &id in &s.line_ids[1..] {
            if flags[&id].same_as_prev_segment {
                warnings.push(format!("line {id}: same-as-previous flag on a non-initial line ignored"));
            }
        }
        let start = s.line_ids[0];
        if flags[&start].same_as_prev_segment {
            if i == 0 {
                warnings.push(format!("line {start}: first segment cannot merge with a predecessor"));
            } else {
                merged.last_mut().expect("i > 0").0.extend(&s.line_ids);
                continue;
            }
        }
        merged.push((s.line_ids.clone(), s.topic.clone()));
    }

    let mut segments = Vec::new();
    for (lines, topic) in merged {
        let mut run: Vec<LineId> = Vec::new();
        let mut run_off = flags[&lines[0]].off_topic;
        let mut flush = |run: &mut Vec<LineId>, off: bool| {
            segments.push(Segment {
                split_id: segments.len() as u32 + 1,
                line_ids: std::mem::take(run),
                topic: if off { None } else { topic.clone() },
            });
        };
        for id in lines {
            let off = flags[&id].off_topic;
            if off != run_off {
                flush(&mut run, run_off);
                run_off = off;
            }
            run.push(id);
        }
        flush(&mut run, run_off);
    }
    for w in &warnings {
        tracing::warn!(doc_id = silver.doc_id.as_str(), "{w}");
    }
    Ok(Applied {
        segmentation: Segmentation {
            doc_id: silver.doc_id.clone(),
            segments,
        },
        warnings,
    })
}

/// Pointwise: the shared value where `a` and `b` agree, the adjudicator's otherwise.
pub fn adjudicate(
    a: &AnnotationSheet,
    b: &AnnotationSheet,
    adjudicator: &AnnotationSheet,
) -> Result<AnnotationSheet, AnnotationError> {
    if a.line_ids() != b.line_ids() || a.line_ids() != adjudicator.line_ids() {
        return Err(AnnotationError::Coverage {
            doc_id: a.doc_id.clone(),
            message: "annotator sheets cover different lines".into(),
        });
    }
    let pick = |x: bool, y: bool, z: bool| if x == y { x } else { z };
    let rows = a
        .rows
        .iter()
        .zip(&b.rows)
        .zip(&adjudicator.rows)
        .map(|((ra, rb), rc)| SheetRow {
            off_topic: pick(ra.off_topic, rb.off_topic, rc.off_topic),
            same_as_prev_segment: pick(ra.same_as_prev_segment, rb.same_as_prev_segment, rc.same_as_prev_segment),
            ..ra.clone()
        })
        .collect();
    Ok(AnnotationSheet {
        doc_id: a.doc_id.clone(),
        annotator_id: format!("adjudicated({},{},{})", a.annotator_id, b.annotator_id, adjudicator.annotator_id),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// `off_topic`, compared on every line.
    WithinSegment,
    /// `same_as_prev_segment`, compared on segment-start lines.
    CrossSegment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub po: f64,
    pub kappa: f64,
    pub ac1: f64,
    pub n: usize,
}

/// Observed agreement, Cohen's kappa (0 when Pe = 1) and Gwet's AC1 for two label sequences.
pub fn agreement_from_labels(a: &[bool], b: &[bool]) -> Result<Agreement, AnnotationError> {
    if a.is_empty() || a.len() != b.len() {
        return Err(AnnotationError::Empty);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pa1 = a.iter().filter(|x| **x).count() as f64 / n;
    let pb1 = b.iter().filter(|x| **x).count() as f64 / n;
    let po = agree / n;
    let pe = pa1 * pb1 + (1.0 - pa1) * (1.0 - pb1);
    let kappa = if pe == 1.0 { 0.0 } else { (po - pe) / (1.0 - pe) };
    let pi = (pa1 + pb1) / 2.0;
    let pg = 2.0 * pi * (1.0 - pi);
    let ac1 = (po - pg) / (1.0 - pg);
    Ok(Agreement {
        po,
        kappa,
        ac1,
        n: a.len(),
    })
}

pub fn agreement_stats(a: &AnnotationSheet, b: &AnnotationSheet, task: Task) -> Result<Agreement, AnnotationError> {
    if a.line_ids() != b.line_ids() {
        return Err(AnnotationError::Coverage {
            doc_id: a.doc_id.clone(),
            message: "annotator sheets cover different lines".into(),
        });
    }
    let (la, lb): (Vec<bool>, Vec<bool>) = a
        .rows
        .iter()
        .zip(&b.rows)
        .filter(|(ra, rb)| task == Task::WithinSegment || ra.segment_start || rb.segment_start)
        .map(|(ra, rb)| match task {
            Task::WithinSegment => (ra.off_topic, rb.off_topic),
            Task::CrossSegment => (ra.same_as_prev_segment, rb.same_as_prev_segment),
        })
        .unzip();
    agreement_from_labels(&la, &lb)
}

/// Differing and total gap positions between two segmentations of one document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeCounts {
    pub differing: usize,
    pub positions: usize,
}

impl ChangeCounts {
    pub fn rate(&self) -> f64 {
        if self.positions == 0 {
            0.0
        } else {
            self.differing as f64 / self.positions as f64
        }
    }
}

impl std::ops::Add for ChangeCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            differing: self.differing + o.differing,
            positions: self.positions + o.positions,
        }
    }
}

impl std::iter::Sum for ChangeCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

pub fn change_counts(silver: &Segmentation, gold: &Segmentation) -> Result<ChangeCounts, AnnotationError> {
    let n = gold.n_lines();
    let s = silver.to_boundary_vector(n)?;
    let g = gold.to_boundary_vector(n)?;
    Ok(ChangeCounts {
        differing: s.bits().iter().zip(g.bits()).filter(|(x, y)| x != y).count(),
        positions: n.saturating_sub(1),
    })
}

/// Fraction of gap positions whose boundary status differs; pool documents
/// by summing [`change_counts`].
pub fn change_rate(silver: &Segmentation, gold: &Segmentation) -> Result<f64, AnnotationError> {
    Ok(change_counts(silver, gold)?.rate())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example3() -> (Segmentation, AnnotationSheet) {
        let silver = Segmentation {
            doc_id: "ex3".into(),
            segments: vec![
                Segment {
                    split_id: 1,
                    line_ids: vec![400, 401, 402],
                    topic: Some("project timeline".into()),
                },
                Segment {
                    split_id: 2,
                    line_ids: vec![403, 404, 405],
                    topic: Some("delivery schedule".into()),
                },
            ],
        };
        let tsv = "topic\ttopic_same_as_prev\tline_id\ttext\tspeaker\toff_topic\n\
            project timeline\t0\t400\tPrototype by May 12 and beta by June 30.\tA\t0\n\
            \t\t401\tQA window is two weeks after beta.\tB\t0\n\
            \t\t402\tDesign sign-off must happen before QA starts.\tA\t0\n\
            delivery schedule\t1\t403\tI'll circulate the calendar this afternoon.\tB\t0\n\
            \t\t404\tWe should add a one-week buffer for cert.\tA\t0\n\
            \t\t405\tDoorbell, give me ten seconds.\tB\t1\n";
        (silver, AnnotationSheet::parse(tsv, b'\t', "ex3", "a1").unwrap())
    }

    #[test]
    fn guideline_example_three() {
        let (silver, sheet) = example3();
        assert_eq!(sheet.rows.iter().filter(|r| r.segment_start).count(), 2);
        let out = apply_flags(&silver, &sheet).unwrap().segmentation;
        let lines: Vec<Vec<LineId>> = out.segments.iter().map(|s| s.line_ids.clone()).collect();
        assert_eq!(lines, vec![vec![400, 401, 402, 403, 404], vec![405]]);
        assert_eq!(out.segments[0].topic.as_deref(), Some("project timeline"));
        assert_eq!(out.segments[1].split_id, 2);
    }

    #[test]
    fn zero_flags_are_identity() {
        let (silver, _) = example3();
        let sheet = AnnotationSheet::blank(&silver, None, "x");
        assert_eq!(apply_flags(&silver, &sheet).unwrap().segmentation, silver);
    }

    #[test]
    fn first_segment_merge_is_ignored() {
        let (silver, mut sheet) = example3();
        sheet.rows[0].same_as_prev_segment = true;
        sheet.rows[3].same_as_prev_segment = false;
        sheet.rows[5].off_topic = false;
        let out = apply_flags(&silver, &sheet).unwrap();
        assert_eq!(out.segmentation, silver);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn interior_off_topic_run_splits_host_twice() {
        let silver = Segmentation::from_lengths("d", 1, &[5]);
        let mut sheet = AnnotationSheet::blank(&silver, None, "x");
        sheet.rows[1].off_topic = true;
        sheet.rows[2].off_topic = true;
        let out = apply_flags(&silver, &sheet).unwrap().segmentation;
        assert_eq!(out.lengths(), vec![1, 2, 2]);
    }

    #[test]
    fn sheet_round_trip() {
        let (_, sheet) = example3();
        let tsv = sheet.to_delimited(b'\t');
        assert_eq!(AnnotationSheet::parse(&tsv, b'\t', "ex3", "a1").unwrap(), sheet);
        let csv = sheet.to_delimited(b',');
        assert_eq!(AnnotationSheet::parse(&csv, b',', "ex3", "a1").unwrap(), sheet);
    }

    #[test]
    fn bad_flag_is_reported() {
        let e = AnnotationSheet::parse("line_id,off_topic\n1,2\n", b',', "d", "a").unwrap_err();
        assert!(e.to_string().contains("row 2"), "{e}");
    }

    #[test]
    fn adjudication_rule() {
        let (_, a) = example3();
        let mut b = a.clone();
        b.rows[2].off_topic = true;
        let mut c = a.clone();
        c.rows[2].off_topic = true;
        c.rows[0].off_topic = true;
        let out = adjudicate(&a, &b, &c).unwrap();
        assert!(out.rows[2].off_topic);
        assert!(!out.rows[0].off_topic);
        assert_eq!(adjudicate(&a, &a, &c).unwrap().rows, a.rows);
    }

    #[test]
    fn agreement_examples() {
        let zeros = vec![false; 10];
        let g = agreement_from_labels(&zeros, &zeros).unwrap();
        assert_eq!((g.po, g.kappa, g.ac1), (1.0, 0.0, 1.0));
        let mixed = [true, false, true, false];
        let g = agreement_from_labels(&mixed, &mixed).unwrap();
        assert_eq!((g.po, g.kappa, g.ac1), (1.0, 1.0, 1.0));
        assert!(agreement_from_labels(&[], &[]).is_err());
    }

    #[test]
    fn change_rate_examples() {
        let one = Segmentation::from_lengths("d", 1, &[10]);
        let two = Segmentation::from_lengths("d", 1, &[5, 5]);
        assert_eq!(change_rate(&one, &one).unwrap(), 0.0);
        assert!((change_rate(&one, &two).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        let all = Segmentation::from_lengths("d", 1, &[1; 5]);
        assert_eq!(change_rate(&all, &Segmentation::from_lengths("d", 1, &[5])).unwrap(), 1.0);
        let pooled: ChangeCounts = [change_counts(&one, &two).unwrap(), change_counts(&one, &one).unwrap()]
            .into_iter()
            .sum();
        assert_eq!(pooled, ChangeCounts { differing: 1, positions: 18 });
    }
}
