//! Descriptive corpus statistics (token, utterance and segment counts).

use serde::{Deserialize, Serialize};

use super::{tokenize, validate_segmentation, CorpusError, Document, Segmentation};

/// Average, minimum and maximum of a per-item count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub avg: f64,
    pub min: usize,
    pub max: usize,
}

impl Spread {
    fn of(values: impl IntoIterator<Item = usize>) -> Self {
        let mut n = 0usize;
        let mut sum = 0usize;
        let mut min = usize::MAX;
        let mut max = 0usize;
        for v in values {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        Self {
            avg: sum as f64 / n as f64,
            min,
            max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub tokens: usize,
    pub tokens_per_utterance: Spread,
    pub utterances: usize,
    pub utterances_per_sample: Spread,
    pub segments: usize,
    pub segments_per_sample: Spread,
    pub samples: usize,
}

/// Token, utterance and segment totals with per-utterance / per-sample spreads.
pub fn compute_stats(docs: &[(&Document, &Segmentation)]) -> Result<CorpusStats, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    for (doc, seg) in docs {
        let verdict = validate_segmentation(doc, seg);
        if !verdict.is_ok() {
            return Err(CorpusError::InvalidSegmentation {
                doc_id: doc.id().to_string(),
                violations: verdict.violations,
            });
        }
    }
    let utt_tokens: Vec<usize> = docs
        .iter()
        .flat_map(|(d, _)| d.texts().map(|t| tokenize(t).len()))
        .collect();
    let tokens = utt_tokens.iter().sum();
    let utterances = utt_tokens.len();
    let segments = docs.iter().map(|(_, s)| s.len()).sum();
    Ok(CorpusStats {
        tokens,
        tokens_per_utterance: Spread {
            avg: tokens as f64 / utterances as f64,
            ..Spread::of(utt_tokens.iter().copied())
        },
        utterances,
        utterances_per_sample: Spread::of(docs.iter().map(|(d, _)| d.len())),
        segments,
        segments_per_sample: Spread::of(docs.iter().map(|(_, s)| s.len())),
        samples: docs.len(),
    })
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Aligned text table in the Toks / Toks-per-Utt / Utts / ... layout.
pub fn render_stats_table(rows: &[(String, CorpusStats)]) -> String {
    let header = [
        "Dataset", "Toks.", "T/U avg", "min", "max", "Utts.", "U/S avg", "min", "max", "Segs.",
        "S/S avg", "min", "max", "Samples",
    ];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for (label, s) in rows {
        cells.push(vec![
            label.clone(),
            thousands(s.tokens),
            format!("{:.2}", s.tokens_per_utterance.avg),
            s.tokens_per_utterance.min.to_string(),
            s.tokens_per_utterance.max.to_string(),
            thousands(s.utterances),
            format!("{:.2}", s.utterances_per_sample.avg),
            s.utterances_per_sample.min.to_string(),
            s.utterances_per_sample.max.to_string(),
            thousands(s.segments),
            format!("{:.2}", s.segments_per_sample.avg),
            s.segments_per_sample.min.to_string(),
            s.segments_per_sample.max.to_string(),
            thousands(s.samples),
        ]);
    }
    align(&cells)
}

/// Left-aligns the first column and right-aligns the rest, two spaces apart.
pub fn align(cells: &[Vec<String>]) -> String {
    let cols = cells.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            cells
                .iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                let pad = widths[c] - s.chars().count();
                if c == 0 {
                    format!("{s}{}", " ".repeat(pad))
                } else {
                    format!("{}{s}", " ".repeat(pad))
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DataSource, DocMeta};

    fn doc(id: &str, texts: &[&str]) -> Document {
        Document::from_turns(
            DocMeta::new(id, DataSource::Other, "MSA", "news"),
            texts.iter().map(|t| ("A", *t)),
        )
        .unwrap()
    }

    #[test]
    fn single_document_arithmetic() {
        let d = doc("a", &["one two three", "a b c d e"]);
        let s = Segmentation::single(&d);
        let st = compute_stats(&[(&d, &s)]).unwrap();
        assert_eq!(st.tokens, 8);
        assert_eq!(st.tokens_per_utterance, Spread { avg: 4.0, min: 3, max: 5 });
        assert_eq!(st.utterances_per_sample, Spread { avg: 2.0, min: 2, max: 2 });
        assert_eq!(st.segments_per_sample, Spread { avg: 1.0, min: 1, max: 1 });
        assert_eq!(st.samples, 1);
    }

    #[test]
    fn segments_per_sample_spread() {
        let a = doc("a", &["x"; 4]);
        let b = doc("b", &["y"; 4]);
        let sa = Segmentation::from_lengths("a", 1, &[2, 2]);
        let sb = Segmentation::from_lengths("b", 1, &[1, 1, 1, 1]);
        let st = compute_stats(&[(&a, &sa), (&b, &sb)]).unwrap();
        assert_eq!(st.segments_per_sample, Spread { avg: 3.0, min: 2, max: 4 });
        assert_eq!(st.segments, 6);
    }

    #[test]
    fn rejects_empty_and_invalid() {
        assert!(compute_stats(&[]).is_err());
        let a = doc("a", &["x", "y"]);
        let bad = Segmentation::from_lengths("a", 1, &[1]);
        assert!(compute_stats(&[(&a, &bad)]).is_err());
    }

    #[test]
    fn table_uses_thousands_separators() {
        assert_eq!(thousands(371354), "371,354");
        assert_eq!(thousands(999), "999");
    }
}
