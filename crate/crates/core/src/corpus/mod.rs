//! Unified conversational document model.
//!
//! A [`Document`] is an ordered list of utterances with consecutive line ids.
//! A [`Segmentation`] partitions those line ids into contiguous segments, and
//! a [`BoundaryVector`] is the equivalent n−1 gap view used by the metrics.

pub mod ingest;
pub mod io;
pub mod split;
pub mod stats;
pub mod synthetic;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use split::{stratified_split, SplitManifest, SplitRatios};
pub use stats::{compute_stats, CorpusStats, Spread};

pub type LineId = u32;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("document {0} has no utterances")]
    EmptyDocument(String),
    #[error("document {doc_id}: line_id must be >= 1")]
    ZeroLineId { doc_id: String },
    #[error("document {doc_id}: expected line_id {expected}, found {found}")]
    NonConsecutive {
        doc_id: String,
        expected: LineId,
        found: LineId,
    },
    #[error("document {doc_id}: line {line_id} has empty text")]
    EmptyText { doc_id: String, line_id: LineId },
    #[error("segmentation for {doc_id} is invalid: {}", join_violations(.violations))]
    InvalidSegmentation {
        doc_id: String,
        violations: Vec<Violation>,
    },
    #[error("boundary vector for {n} utterances needs {} bits, got {got}", .n.saturating_sub(1))]
    BoundaryLength { n: usize, got: usize },
    #[error("invalid boundary bit {0:?}; expected '0' or '1'")]
    BoundaryChar(char),
    #[error("unknown data source {0:?}")]
    UnknownSource(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("invalid split ratios: {0}")]
    Ratios(String),
    #[error("corpus is empty")]
    EmptyCorpus,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Returns whitespace-delimited tokens.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub line_id: LineId,
    pub text: String,
    pub speaker: String,
}

/// Speaker label used for prose sources where each sentence is an utterance.
pub const PROSE_SPEAKER: &str = "-";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Opus,
    Rewayat,
    Mgb5,
    Ldc,
    Podcast,
    Other,
}

impl DataSource {
    /// The five benchmark sources, in table order.
    pub const BENCHMARK: [DataSource; 5] = [
        DataSource::Opus,
        DataSource::Rewayat,
        DataSource::Mgb5,
        DataSource::Ldc,
        DataSource::Podcast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DataSource::Opus => "opus",
            DataSource::Rewayat => "rewayat",
            DataSource::Mgb5 => "mgb5",
            DataSource::Ldc => "ldc",
            DataSource::Podcast => "podcast",
            DataSource::Other => "other",
        }
    }

    /// Human-readable name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            DataSource::Opus => "OPUS",
            DataSource::Rewayat => "Rewayat",
            DataSource::Mgb5 => "MGB-5",
            DataSource::Ldc => "LDC",
            DataSource::Podcast => "Podcasts",
            DataSource::Other => "Other",
        }
    }
}

impl fmt::Display for DataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DataSource {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "opus" => Ok(DataSource::Opus),
            "rewayat" => Ok(DataSource::Rewayat),
            "mgb5" | "mgb-5" => Ok(DataSource::Mgb5),
            "ldc" => Ok(DataSource::Ldc),
            "podcast" | "podcasts" => Ok(DataSource::Podcast),
            "other" => Ok(DataSource::Other),
            _ => Err(CorpusError::UnknownSource(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageVariant {
    #[default]
    Original,
    MtEn,
    MtMsa,
}

/// Where a document's utterances came from before line ids were normalised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub original_line_ids: Vec<u64>,
}

/// Sidecar metadata stored next to a document's utterance JSONL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub doc_id: String,
    pub data_source: DataSource,
    pub language_clue: String,
    pub genre: String,
    #[serde(default)]
    pub language_variant: LanguageVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl DocMeta {
    pub fn new(
        doc_id: impl Into<String>,
        data_source: DataSource,
        language_clue: impl Into<String>,
        genre: impl Into<String>,
    ) -> Self {
        Self {
            doc_id: doc_id.into(),
            data_source,
            language_clue: language_clue.into(),
            genre: genre.into(),
            language_variant: LanguageVariant::Original,
            provenance: None,
        }
    }
}

/// An ordered list of utterances with consecutive line ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    meta: DocMeta,
    utterances: Vec<Utterance>,
}

impl Document {
    /// Builds a document, checking that line ids are consecutive and texts non-empty.
    pub fn new(meta: DocMeta, utterances: Vec<Utterance>) -> Result<Self, CorpusError> {
        let doc_id = &meta.doc_id;
        let first = utterances
            .first()
            .ok_or_else(|| CorpusError::EmptyDocument(doc_id.clone()))?
            .line_id;
        if first == 0 {
            return Err(CorpusError::ZeroLineId {
                doc_id: doc_id.clone(),
            });
        }
        for (offset, u) in utterances.iter().enumerate() {
            let expected = first + offset as LineId;
            if u.line_id != expected {
                return Err(CorpusError::NonConsecutive {
                    doc_id: doc_id.clone(),
                    expected,
                    found: u.line_id,
                });
            }
            if u.text.trim().is_empty() {
                return Err(CorpusError::EmptyText {
                    doc_id: doc_id.clone(),
                    line_id: u.line_id,
                });
            }
        }
        Ok(Self { meta, utterances })
    }

    /// Builds a document from `(speaker, text)` turns, numbering lines from 1.
    pub fn from_turns<S, T>(
        meta: DocMeta,
        turns: impl IntoIterator<Item = (S, T)>,
    ) -> Result<Self, CorpusError>
    where
        S: Into<String>,
        T: Into<String>,
    {
        let utterances = turns
            .into_iter()
            .enumerate()
            .map(|(i, (speaker, text))| Utterance {
                line_id: i as LineId + 1,
                text: text.into(),
                speaker: speaker.into(),
            })
            .collect();
        Self::new(meta, utterances)
    }

    pub fn id(&self) -> &str {
        &self.meta.doc_id
    }

    pub fn meta(&self) -> &DocMeta {
        &self.meta
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn first_line(&self) -> LineId {
        self.utterances[0].line_id
    }

    pub fn last_line(&self) -> LineId {
        self.utterances[self.utterances.len() - 1].line_id
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.utterances.iter().map(|u| u.text.as_str())
    }

    /// Boundary vector of `seg` against this document, rejecting invalid segmentations.
    pub fn boundary_vector(&self, seg: &Segmentation) -> Result<BoundaryVector, CorpusError> {
        let verdict = validate_segmentation(self, seg);
        if !verdict.is_ok() {
            return Err(CorpusError::InvalidSegmentation {
                doc_id: seg.doc_id.clone(),
                violations: verdict.violations,
            });
        }
        Ok(BoundaryVector::from_valid(seg, self.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub split_id: u32,
    pub line_ids: Vec<LineId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
}

impl Segment {
    pub fn first(&self) -> Option<LineId> {
        self.line_ids.first().copied()
    }

    pub fn last(&self) -> Option<LineId> {
        self.line_ids.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    pub doc_id: String,
    pub segments: Vec<Segment>,
}

impl Segmentation {
    /// Whole-document segmentation.
    pub fn single(doc: &Document) -> Self {
        Self::from_lengths(doc.id(), doc.first_line(), &[doc.len()])
    }

    /// Builds consecutive segments of the given lengths starting at `first`.
    pub fn from_lengths(doc_id: impl Into<String>, first: LineId, lengths: &[usize]) -> Self {
        let mut next = first;
        let segments = lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                let line_ids: Vec<LineId> = (next..next + len as LineId).collect();
                next += len as LineId;
                Segment {
                    split_id: i as u32 + 1,
                    line_ids,
                    topic: None,
                }
            })
            .collect();
        Self {
            doc_id: doc_id.into(),
            segments,
        }
    }

    /// Builds a segmentation of `first..=last` whose segments begin at `starts`.
    ///
    /// `starts` must be sorted, unique, inside the range and begin with `first`.
    pub fn from_starts(doc_id: impl Into<String>, first: LineId, last: LineId, starts: &[LineId]) -> Self {
        debug_assert!(starts.first() == Some(&first));
        let segments = starts
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let end = starts.get(i + 1).map_or(last, |n| n - 1);
                Segment {
                    split_id: i as u32 + 1,
                    line_ids: (s..=end).collect(),
                    topic: None,
                }
            })
            .collect();
        Self {
            doc_id: doc_id.into(),
            segments,
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Total number of line ids across segments.
    pub fn n_lines(&self) -> usize {
        self.segments.iter().map(|s| s.line_ids.len()).sum()
    }

    /// First line id of every segment.
    pub fn starts(&self) -> Vec<LineId> {
        self.segments.iter().filter_map(Segment::first).collect()
    }

    /// Segment lengths in order.
    pub fn lengths(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.line_ids.len()).collect()
    }

    /// Same segmentation with topics removed.
    pub fn without_topics(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.segments {
            s.topic = None;
        }
        out
    }

    /// Boundary vector for an `n`-utterance document starting at this
    /// segmentation's first line id.
    pub fn to_boundary_vector(&self, n: usize) -> Result<BoundaryVector, CorpusError> {
        let first = self
            .segments
            .iter()
            .flat_map(|s| s.line_ids.iter().copied())
            .min()
            .unwrap_or(1);
        let last = first + n as LineId - 1;
        let violations = check_partition(&self.segments, first, last);
        if !violations.is_empty() {
            return Err(CorpusError::InvalidSegmentation {
                doc_id: self.doc_id.clone(),
                violations,
            });
        }
        Ok(BoundaryVector::from_valid(self, n))
    }
}

/// Binary boundary/non-boundary view over the n−1 gaps of a document.
///
/// `bits[i]` is true when a boundary falls between utterance `i+1` and `i+2`
/// (1-based positions).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundaryVector {
    n_utterances: usize,
    bits: Vec<bool>,
}

impl BoundaryVector {
    pub fn new(n_utterances: usize, bits: Vec<bool>) -> Result<Self, CorpusError> {
        if n_utterances == 0 || bits.len() != n_utterances - 1 {
            return Err(CorpusError::BoundaryLength {
                n: n_utterances,
                got: bits.len(),
            });
        }
        Ok(Self { n_utterances, bits })
    }

    /// No boundaries at all.
    pub fn empty(n_utterances: usize) -> Self {
        Self {
            n_utterances,
            bits: vec![false; n_utterances.saturating_sub(1)],
        }
    }

    /// Builds from 0-based gap positions (gap `g` sits after utterance `g+1`).
    pub fn from_gaps(n_utterances: usize, gaps: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::empty(n_utterances);
        for g in gaps {
            v.bits[g] = true;
        }
        v
    }

    fn from_valid(seg: &Segmentation, n: usize) -> Self {
        let mut v = Self::empty(n);
        let mut pos = 0usize;
        for s in &seg.segments[..seg.segments.len() - 1] {
            pos += s.line_ids.len();
            v.bits[pos - 1] = true;
        }
        v
    }

    pub fn n_utterances(&self) -> usize {
        self.n_utterances
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn segment_count(&self) -> usize {
        self.count() + 1
    }

    /// 0-based gap indices carrying a boundary.
    pub fn gaps(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    /// The document reversed end to front.
    pub fn reversed(&self) -> Self {
        let mut bits = self.bits.clone();
        bits.reverse();
        Self {
            n_utterances: self.n_utterances,
            bits,
        }
    }

    pub fn to_segmentation(&self, doc_id: impl Into<String>, first: LineId) -> Segmentation {
        let mut lengths = Vec::with_capacity(self.count() + 1);
        let mut run = 1usize;
        for &b in &self.bits {
            if b {
                lengths.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        lengths.push(run);
        Segmentation::from_lengths(doc_id, first, &lengths)
    }
}

impl fmt::Display for BoundaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BoundaryVector {
    type Err = CorpusError;

    /// Parses a bit string such as `"000010"` (n−1 characters).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CorpusError::BoundaryChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n = bits.len() + 1;
        Self::new(n, bits)
    }
}

/// A single way in which a segmentation fails to partition its document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DocIdMismatch { expected: String, found: String },
    NoSegments,
    EmptySegment { split_id: u32 },
    SplitIdSequence { position: usize, found: u32 },
    NonConsecutive { split_id: u32, after: LineId, found: LineId },
    OutOfRange { split_id: u32, line_id: LineId },
    Duplicate { split_id: u32, line_id: LineId },
    Overlap { line_id: LineId, first_split: u32, second_split: u32 },
    Gap { from: LineId, to: LineId },
    Misordered { split_id: u32 },
    BlockBorderNotPreserved { line_id: LineId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DocIdMismatch { expected, found } => {
                write!(f, "doc_id mismatch: expected {expected}, found {found}")
            }
            Violation::NoSegments => f.write_str("no segments"),
            Violation::EmptySegment { split_id } => write!(f, "segment {split_id} is empty"),
            Violation::SplitIdSequence { position, found } => {
                write!(f, "split_id {found} at position {} (expected {})", position + 1, position + 1)
            }
            Violation::NonConsecutive { split_id, after, found } => write!(
                f,
                "segment {split_id} is not consecutive: {found} follows {after}"
            ),
            Violation::OutOfRange { split_id, line_id } => {
                write!(f, "line {line_id} in segment {split_id} is out of range")
            }
            Violation::Duplicate { split_id, line_id } => {
                write!(f, "line {line_id} repeated in segment {split_id}")
            }
            Violation::Overlap {
                line_id,
                first_split,
                second_split,
            } => write!(
                f,
                "overlap at {line_id} (segments {first_split} and {second_split})"
            ),
            Violation::Gap { from, to } if from == to => write!(f, "gap at {from}"),
            Violation::Gap { from, to } => write!(f, "gap at {from}-{to}"),
            Violation::Misordered { split_id } => {
                write!(f, "segment {split_id} starts before the previous segment")
            }
            Violation::BlockBorderNotPreserved { line_id } => {
                write!(f, "block border not preserved at {line_id}")
            }
        }
    }
}

/// Outcome of [`validate_segmentation`]: empty violations means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every partition invariant of `seg` against `doc`.
pub fn validate_segmentation(doc: &Document, seg: &Segmentation) -> Verdict {
    let mut violations = Vec::new();
    if seg.doc_id != doc.id() {
        violations.push(Violation::DocIdMismatch {
            expected: doc.id().to_string(),
            found: seg.doc_id.clone(),
        });
    }
    violations.extend(check_partition(
        &seg.segments,
        doc.first_line(),
        doc.last_line(),
    ));
    Verdict { violations }
}

/// Checks that `segments` tile `first..=last` in order with consecutive ids.
pub fn check_partition(segments: &[Segment], first: LineId, last: LineId) -> Vec<Violation> {
    let mut out = Vec::new();
    if segments.is_empty() {
        out.push(Violation::NoSegments);
        return out;
    }
    let span = (last - first + 1) as usize;
    let mut owner: Vec<Option<u32>> = vec![None; span];
    let mut prev: Option<&Segment> = None;

    for (pos, seg) in segments.iter().enumerate() {
        if seg.split_id as usize != pos + 1 {
            out.push(Violation::SplitIdSequence {
                position: pos,
                found: seg.split_id,
            });
        }
        if seg.line_ids.is_empty() {
            out.push(Violation::EmptySegment {
                split_id: seg.split_id,
            });
            continue;
        }
        if let Some(pair) = seg.line_ids.windows(2).find(|w| w[1] != w[0] + 1) {
            out.push(Violation::NonConsecutive {
                split_id: seg.split_id,
                after: pair[0],
                found: pair[1],
            });
        }
        let mut seen = HashSet::new();
        for &id in &seg.line_ids {
            if !seen.insert(id) {
                out.push(Violation::Duplicate {
                    split_id: seg.split_id,
                    line_id: id,
                });
                continue;
            }
            if id < first || id > last {
                out.push(Violation::OutOfRange {
                    split_id: seg.split_id,
                    line_id: id,
                });
                continue;
            }
            let slot = &mut owner[(id - first) as usize];
            match slot {
                None => *slot = Some(seg.split_id),
                Some(prev) => out.push(Violation::Overlap {
                    line_id: id,
                    first_split: *prev,
                    second_split: seg.split_id,
                }),
            }
        }
        // interleaving with the previous segment without sharing a line
        let start = seg.line_ids.iter().copied().min().unwrap_or(first);
        if let Some(p) = prev {
            let p_max = p.line_ids.iter().copied().max().unwrap_or(0);
            if start <= p_max && !p.line_ids.contains(&start) {
                out.push(Violation::Misordered {
                    split_id: seg.split_id,
                });
            }
        }
        prev = Some(seg);
    }

    let mut i = 0;
    while i < span {
        if owner[i].is_none() {
            let from = i;
            while i < span && owner[i].is_none() {
                i += 1;
            }
            out.push(Violation::Gap {
                from: first + from as LineId,
                to: first + i as LineId - 1,
            });
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(n: usize) -> Document {
        Document::from_turns(
            DocMeta::new("d", DataSource::Other, "MSA", "news"),
            (0..n).map(|i| ("A", format!("line {i}"))),
        )
        .unwrap()
    }

    fn seg(parts: &[&[LineId]]) -> Segmentation {
        Segmentation {
            doc_id: "d".into(),
            segments: parts
                .iter()
                .enumerate()
                .map(|(i, ids)| Segment {
                    split_id: i as u32 + 1,
                    line_ids: ids.to_vec(),
                    topic: None,
                })
                .collect(),
        }
    }

    #[test]
    fn phone_call_segmentation_is_valid() {
        let d = doc(7);
        assert!(validate_segmentation(&d, &seg(&[&[1, 2, 3, 4, 5], &[6, 7]])).is_ok());
        assert!(validate_segmentation(&d, &seg(&[&[1, 2, 3, 4, 5, 6, 7]])).is_ok());
    }

    #[test]
    fn gap_is_reported_with_location() {
        let v = validate_segmentation(&doc(7), &seg(&[&[1, 2], &[4, 5, 6, 7]]));
        assert_eq!(v.violations, vec![Violation::Gap { from: 3, to: 3 }]);
        assert_eq!(v.violations[0].to_string(), "gap at 3");
    }

    #[test]
    fn overlap_duplicate_and_range_are_reported() {
        let v = validate_segmentation(&doc(5), &seg(&[&[1, 2, 3], &[3, 4, 5, 6]]));
        assert!(v.violations.contains(&Violation::Overlap {
            line_id: 3,
            first_split: 1,
            second_split: 2
        }));
        assert!(v.violations.contains(&Violation::OutOfRange {
            split_id: 2,
            line_id: 6
        }));
        let v = validate_segmentation(&doc(3), &seg(&[&[1, 1, 2, 3]]));
        assert!(v.violations.contains(&Violation::Duplicate {
            split_id: 1,
            line_id: 1
        }));
    }

    #[test]
    fn non_consecutive_and_misordered() {
        let v = validate_segmentation(&doc(4), &seg(&[&[1, 3, 4], &[2]]));
        assert!(v.violations.iter().any(|v| matches!(v, Violation::NonConsecutive { split_id: 1, .. })));
        assert!(v.violations.contains(&Violation::Misordered { split_id: 2 }));
    }

    #[test]
    fn doc_id_mismatch() {
        let mut s = seg(&[&[1, 2]]);
        s.doc_id = "other".into();
        assert!(!validate_segmentation(&doc(2), &s).is_ok());
    }

    #[test]
    fn boundary_vector_examples() {
        let s = seg(&[&[1, 2, 3, 4, 5], &[6, 7]]);
        let v = s.to_boundary_vector(7).unwrap();
        assert_eq!(v.to_string(), "000010");
        assert_eq!(v.segment_count(), 2);
        assert_eq!(v.to_segmentation("d", 1), s);
        let whole = seg(&[&[1, 2, 3, 4, 5, 6, 7]]);
        assert_eq!(whole.to_boundary_vector(7).unwrap().to_string(), "000000");
        assert!(seg(&[&[1, 2], &[4]]).to_boundary_vector(4).is_err());
    }

    #[test]
    fn boundary_vector_parse() {
        let v: BoundaryVector = "0101".parse().unwrap();
        assert_eq!(v.n_utterances(), 5);
        assert_eq!(v.gaps().collect::<Vec<_>>(), vec![1, 3]);
        assert!("01x".parse::<BoundaryVector>().is_err());
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Salam, I am calling").len(), 4);
        assert_eq!(tokenize("").len(), 0);
        assert_eq!(tokenize("  مرحبا كيف حالك ").len(), 3);
    }

    #[test]
    fn document_rejects_bad_ids() {
        let meta = DocMeta::new("x", DataSource::Other, "MSA", "news");
        let u = |id, t: &str| Utterance {
            line_id: id,
            text: t.into(),
            speaker: "A".into(),
        };
        assert!(Document::new(meta.clone(), vec![]).is_err());
        assert!(Document::new(meta.clone(), vec![u(0, "a")]).is_err());
        assert!(Document::new(meta.clone(), vec![u(1, "a"), u(3, "b")]).is_err());
        assert!(Document::new(meta.clone(), vec![u(1, "  ")]).is_err());
        let d = Document::new(meta, vec![u(400, "a"), u(401, "b")]).unwrap();
        assert_eq!((d.first_line(), d.last_line()), (400, 401));
    }

    #[test]
    fn data_source_names() {
        assert_eq!("MGB-5".parse::<DataSource>().unwrap(), DataSource::Mgb5);
        assert_eq!("podcasts".parse::<DataSource>().unwrap(), DataSource::Podcast);
        assert!("wiki".parse::<DataSource>().is_err());
        assert_eq!(
            serde_json::to_string(&DataSource::Mgb5).unwrap(),
            "\"mgb5\""
        );
    }
}
