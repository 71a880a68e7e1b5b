//! Segmentation metrics over boundary vectors and segmentations.
//!
//! * [`boundary_f1_macro`]: unweighted mean of the boundary and non-boundary
//!   class F1 over the n−1 gap positions.
//! * [`pk`] and [`window_diff`]: windowed error rates; `k` defaults to half
//!   the mean reference segment length, floor 2.
//! * [`topic_accuracy`]: utterances whose hypothesis segment is aligned to
//!   their reference segment under a one-to-one maximum-overlap assignment.

mod assignment;
pub mod rank;
pub mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{BoundaryVector, CorpusError, Segmentation};

pub use rank::{rank_summary, Direction, Metric, RankStats, ScoreTable};
pub use report::{score_document, Aggregate, DocScore, FailedDoc, MetricOptions, ModelReport, ScoreReport};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("reference has {reference} utterances but hypothesis has {hypothesis}")]
    LengthMismatch { reference: usize, hypothesis: usize },
    #[error("window size k must be >= 1")]
    ZeroK,
    #[error("missing score for model {model:?} on dataset {dataset:?}")]
    MissingCell { model: String, dataset: String },
    #[error("score table is empty")]
    EmptyTable,
    #[error(transparent)]
    Segmentation(#[from] CorpusError),
}

/// How a class that never occurs in reference or hypothesis is scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsentClass {
    /// Perfect prediction of a single-class document scores 1.
    #[default]
    ScoreOne,
    ScoreZero,
}

fn check_lengths(reference: &BoundaryVector, hypothesis: &BoundaryVector) -> Result<(), MetricError> {
    if reference.n_utterances() != hypothesis.n_utterances() {
        return Err(MetricError::LengthMismatch {
            reference: reference.n_utterances(),
            hypothesis: hypothesis.n_utterances(),
        });
    }
    Ok(())
}

fn class_f1(tp: usize, fp: usize, fn_: usize, absent: AbsentClass) -> f64 {
    if tp + fp + fn_ == 0 {
        return match absent {
            AbsentClass::ScoreOne => 1.0,
            AbsentClass::ScoreZero => 0.0,
        };
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

/// Macro F1 over {boundary, non-boundary} with the absent-class-scores-1 convention.
pub fn boundary_f1_macro(reference: &BoundaryVector, hypothesis: &BoundaryVector) -> Result<f64, MetricError> {
    boundary_f1_macro_with(reference, hypothesis, AbsentClass::ScoreOne)
}

pub fn boundary_f1_macro_with(
    reference: &BoundaryVector,
    hypothesis: &BoundaryVector,
    absent: AbsentClass,
) -> Result<f64, MetricError> {
    check_lengths(reference, hypothesis)?;
    let (mut tt, mut tf, mut ft, mut ff) = (0, 0, 0, 0);
    for (&r, &h) in reference.bits().iter().zip(hypothesis.bits()) {
        match (r, h) {
            (true, true) => tt += 1,
            (true, false) => tf += 1,
            (false, true) => ft += 1,
            (false, false) => ff += 1,
        }
    }
    let boundary = class_f1(tt, ft, tf, absent);
    let non_boundary = class_f1(ff, tf, ft, absent);
    Ok((boundary + non_boundary) / 2.0)
}

/// `max(2, round(n / (2 · reference segment count)))`.
pub fn default_k(reference: &BoundaryVector) -> usize {
    let n = reference.n_utterances() as f64;
    let segs = reference.segment_count() as f64;
    ((n / (2.0 * segs)).round() as usize).max(2)
}

/// A windowed error rate together with the window size used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub value: f64,
    pub k: usize,
    /// Set when the document is no longer than `k`; the value is then 0 for
    /// identical segmentations and 1 otherwise.
    pub degenerate: bool,
}

fn prefix_counts(v: &BoundaryVector) -> Vec<usize> {
    let mut p = Vec::with_capacity(v.bits().len() + 1);
    p.push(0);
    let mut acc = 0;
    for &b in v.bits() {
        acc += b as usize;
        p.push(acc);
    }
    p
}

fn windowed(
    reference: &BoundaryVector,
    hypothesis: &BoundaryVector,
    k: Option<usize>,
    disagree: impl Fn(usize, usize) -> bool,
) -> Result<WindowScore, MetricError> {
    check_lengths(reference, hypothesis)?;
    let k = match k {
        Some(0) => return Err(MetricError::ZeroK),
        Some(k) => k,
        None => default_k(reference),
    };
    let n = reference.n_utterances();
    if n <= k {
        tracing::warn!(n, k, "document not longer than window; scoring by identity");
        let value = if reference == hypothesis { 0.0 } else { 1.0 };
        return Ok(WindowScore {
            value,
            k,
            degenerate: true,
        });
    }
    let pr = prefix_counts(reference);
    let ph = prefix_counts(hypothesis);
    // window starting at utterance i (0-based) spans gaps i..i+k-1
    let errors = (0..n - k)
        .filter(|&i| disagree(pr[i + k] - pr[i], ph[i + k] - ph[i]))
        .count();
    Ok(WindowScore {
        value: errors as f64 / (n - k) as f64,
        k,
        degenerate: false,
    })
}

/// Fraction of probes `(i, i+k)` on which reference and hypothesis disagree
/// about whether both utterances share a segment.
pub fn pk(reference: &BoundaryVector, hypothesis: &BoundaryVector, k: Option<usize>) -> Result<WindowScore, MetricError> {
    windowed(reference, hypothesis, k, |r, h| (r == 0) != (h == 0))
}

/// Fraction of windows `(i, i+k)` whose boundary counts differ.
pub fn window_diff(
    reference: &BoundaryVector,
    hypothesis: &BoundaryVector,
    k: Option<usize>,
) -> Result<WindowScore, MetricError> {
    windowed(reference, hypothesis, k, |r, h| r != h)
}

/// How hypothesis segments are matched to reference segments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Maximum total overlap one-to-one assignment.
    #[default]
    Optimal,
    /// Repeatedly pair the largest remaining overlap.
    Greedy,
}

/// Overlap counts: `matrix[h][r]` is the number of utterances shared by
/// hypothesis segment `h` and reference segment `r`.
pub fn overlap_matrix(reference: &Segmentation, hypothesis: &Segmentation) -> Result<Vec<Vec<usize>>, MetricError> {
    let n = reference.n_lines();
    let r_vec = reference.to_boundary_vector(n)?;
    let h_vec = hypothesis.to_boundary_vector(hypothesis.n_lines())?;
    check_lengths(&r_vec, &h_vec)?;
    let label = |v: &BoundaryVector| {
        let mut out = vec![0usize; n];
        for i in 1..n {
            out[i] = out[i - 1] + v.bits()[i - 1] as usize;
        }
        out
    };
    let (rl, hl) = (label(&r_vec), label(&h_vec));
    let mut m = vec![vec![0usize; reference.len()]; hypothesis.len()];
    for i in 0..n {
        m[hl[i]][rl[i]] += 1;
    }
    Ok(m)
}

pub fn topic_accuracy(reference: &Segmentation, hypothesis: &Segmentation) -> Result<f64, MetricError> {
    topic_accuracy_with(reference, hypothesis, Alignment::Optimal)
}

pub fn topic_accuracy_with(
    reference: &Segmentation,
    hypothesis: &Segmentation,
    alignment: Alignment,
) -> Result<f64, MetricError> {
    let m = overlap_matrix(reference, hypothesis)?;
    let n = reference.n_lines();
    let correct = match alignment {
        Alignment::Optimal => assignment::max_weight_matching(&m),
        Alignment::Greedy => assignment::greedy_matching(&m),
    };
    Ok(correct as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BoundaryVector {
        s.parse().unwrap()
    }

    fn segs(lengths: &[usize]) -> Segmentation {
        Segmentation::from_lengths("d", 1, lengths)
    }

    #[test]
    fn f1_examples() {
        assert_eq!(boundary_f1_macro(&bv("010010"), &bv("010010")).unwrap(), 1.0);
        let m = boundary_f1_macro(&bv("000010"), &bv("000000")).unwrap();
        assert!((m - 5.0 / 11.0).abs() < 1e-15);
        assert_eq!(boundary_f1_macro(&bv("000000"), &bv("000000")).unwrap(), 1.0);
        assert_eq!(
            boundary_f1_macro_with(&bv("000"), &bv("000"), AbsentClass::ScoreZero).unwrap(),
            0.5
        );
        assert!(boundary_f1_macro(&bv("00"), &bv("000")).is_err());
    }

    #[test]
    fn pk_and_wd_examples() {
        let r = bv("000010000");
        let single = bv("000000000");
        let every = bv("111111111");
        let shifted = bv("000100000");
        assert_eq!(pk(&r, &r, Some(2)).unwrap().value, 0.0);
        assert_eq!(pk(&r, &single, Some(2)).unwrap().value, 0.25);
        assert_eq!(window_diff(&r, &single, Some(2)).unwrap().value, 0.25);
        assert_eq!(pk(&r, &every, Some(2)).unwrap().value, 0.75);
        assert_eq!(pk(&r, &shifted, Some(2)).unwrap().value, 0.25);
        assert_eq!(window_diff(&r, &shifted, Some(2)).unwrap().value, 0.25);
    }

    #[test]
    fn default_k_rule() {
        assert_eq!(default_k(&bv("000010000")), 3); // 10 / (2*2) = 2.5 -> 3
        assert_eq!(default_k(&bv("0101")), 2);
        assert_eq!(default_k(&bv(&"0".repeat(39))), 20);
        assert_eq!(pk(&bv("000010000"), &bv("000010000"), None).unwrap().k, 3);
    }

    #[test]
    fn short_documents_are_degenerate() {
        let s = pk(&bv("0"), &bv("0"), Some(2)).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.value, 0.0);
        assert_eq!(window_diff(&bv("0"), &bv("1"), Some(2)).unwrap().value, 1.0);
        assert!(pk(&bv("0"), &bv("0"), Some(0)).is_err());
    }

    #[test]
    fn topic_accuracy_examples() {
        let r = segs(&[5, 5]);
        assert_eq!(topic_accuracy(&r, &r).unwrap(), 1.0);
        assert_eq!(topic_accuracy(&r, &segs(&[10])).unwrap(), 0.5);
        assert_eq!(topic_accuracy(&r, &segs(&[4, 6])).unwrap(), 0.9);
        assert!(topic_accuracy(&r, &segs(&[4, 5])).is_err());
    }

    #[test]
    fn greedy_alignment_can_be_suboptimal() {
        // ref {1..3},{4..6}; hyp {1..2},{3..6}: both alignments agree here
        let r = segs(&[3, 3]);
        let h = segs(&[2, 4]);
        assert_eq!(
            topic_accuracy_with(&r, &h, Alignment::Greedy).unwrap(),
            topic_accuracy(&r, &h).unwrap()
        );
        // overlap [[3,3],[3,0]]: greedy picks (0,0)=3 first then (1,1)=0 -> 3,
        // optimal picks (0,1)+(1,0) = 6
        let r = segs(&[3, 3]);
        let h = Segmentation::from_lengths("d", 1, &[6]);
        let m = overlap_matrix(&r, &h).unwrap();
        assert_eq!(m, vec![vec![3, 3]]);
        assert_eq!(assignment::greedy_matching(&[vec![3, 3], vec![3, 0]]), 3);
        assert_eq!(assignment::max_weight_matching(&[vec![3, 3], vec![3, 0]]), 6);
    }
}
