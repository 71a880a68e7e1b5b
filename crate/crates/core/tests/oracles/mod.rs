//! Brute-force reference implementations used as test oracles.
//!
//! Each works from per-utterance segment labels and enumerates windows,
//! classes or assignments directly; none shares code with the library.
#![allow(dead_code)]

use dialseg::Segmentation;
use rand::seq::index::sample;
use rand::Rng;

/// Segment index of every utterance, walking the segments in order.
pub fn labels(seg: &Segmentation) -> Vec<usize> {
    let mut out = Vec::new();
    for (s, segment) in seg.segments.iter().enumerate() {
        for _ in &segment.line_ids {
            out.push(s);
        }
    }
    out
}

/// A random valid segmentation of lines `1..=n` with `1..=max_segs` segments.
pub fn random_segmentation(rng: &mut impl Rng, n: usize, max_segs: usize) -> Segmentation {
    let segs = rng.random_range(1..=n.min(max_segs));
    let mut cuts: Vec<usize> = sample(rng, n - 1, segs - 1).into_iter().map(|g| g + 1).collect();
    cuts.sort_unstable();
    let mut lengths = Vec::new();
    let mut prev = 0;
    for c in cuts.into_iter().chain([n]) {
        lengths.push(c - prev);
        prev = c;
    }
    Segmentation::from_lengths("r", 1, &lengths)
}

pub fn oracle_k(reference: &[usize]) -> usize {
    let n = reference.len() as f64;
    let segs = (reference.last().copied().unwrap_or(0) + 1) as f64;
    let k = (n / (2.0 * segs)).round() as usize;
    if k < 2 {
        2
    } else {
        k
    }
}

/// Probe-pair disagreement rate.
pub fn pk(reference: &[usize], hypothesis: &[usize], k: usize) -> f64 {
    let n = reference.len();
    if n <= k {
        return if reference == hypothesis { 0.0 } else { 1.0 };
    }
    let mut bad = 0;
    let mut total = 0;
    for i in 0..n - k {
        let same_r = reference[i] == reference[i + k];
        let same_h = hypothesis[i] == hypothesis[i + k];
        if same_r != same_h {
            bad += 1;
        }
        total += 1;
    }
    bad as f64 / total as f64
}

fn boundaries_between(labels: &[usize], i: usize, j: usize) -> usize {
    let mut c = 0;
    for p in i..j {
        if labels[p] != labels[p + 1] {
            c += 1;
        }
    }
    c
}

/// Windows with differing boundary counts.
pub fn wd(reference: &[usize], hypothesis: &[usize], k: usize) -> f64 {
    let n = reference.len();
    if n <= k {
        return if reference == hypothesis { 0.0 } else { 1.0 };
    }
    let mut bad = 0;
    for i in 0..n - k {
        if boundaries_between(reference, i, i + k) != boundaries_between(hypothesis, i, i + k) {
            bad += 1;
        }
    }
    bad as f64 / (n - k) as f64
}

/// Macro F1 over boundary/non-boundary gaps; a class absent on both sides scores 1.
pub fn f1_macro(reference: &[usize], hypothesis: &[usize]) -> f64 {
    let gaps = reference.len().saturating_sub(1);
    let is_b = |l: &[usize], g: usize| l[g] != l[g + 1];
    let mut total = 0.0;
    for class in [true, false] {
        let mut tp = 0.0;
        let mut pred = 0.0;
        let mut gold = 0.0;
        for g in 0..gaps {
            let r = is_b(reference, g) == class;
            let h = is_b(hypothesis, g) == class;
            if r {
                gold += 1.0;
            }
            if h {
                pred += 1.0;
            }
            if r && h {
                tp += 1.0;
            }
        }
        total += if pred == 0.0 && gold == 0.0 {
            1.0
        } else if tp == 0.0 {
            0.0
        } else {
            let p = tp / pred;
            let r = tp / gold;
            2.0 * p * r / (p + r)
        };
    }
    total / 2.0
}

/// Best one-to-one alignment by exhaustive search over reference subsets.
pub fn topic_accuracy(reference: &[usize], hypothesis: &[usize]) -> f64 {
    let nr = reference.iter().max().map_or(0, |m| m + 1);
    let nh = hypothesis.iter().max().map_or(0, |m| m + 1);
    assert!(nr <= 16, "oracle is exponential in reference segments");
    let mut overlap = vec![vec![0usize; nr]; nh];
    for (r, h) in reference.iter().zip(hypothesis) {
        overlap[*h][*r] += 1;
    }
    // best[mask] after assigning hypotheses 0..i, each to an unused reference or to none
    let mut best = vec![None::<usize>; 1 << nr];
    best[0] = Some(0);
    for row in &overlap {
        let mut next = best.clone();
        for mask in 0..1usize << nr {
            let Some(v) = best[mask] else { continue };
            for (r, &w) in row.iter().enumerate() {
                if mask & (1 << r) == 0 {
                    let m2 = mask | (1 << r);
                    if next[m2].map_or(true, |x| x < v + w) {
                        next[m2] = Some(v + w);
                    }
                }
            }
        }
        best = next;
    }
    let top = best.into_iter().flatten().max().unwrap_or(0);
    top as f64 / reference.len() as f64
}
