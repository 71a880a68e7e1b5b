//! Gap-score smoothing, valley depth and boundary selection shared by the
//! lexical and embedding TextTiling variants.

use serde::{Deserialize, Serialize};

use super::ClassicalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdPolicy {
    /// Boundary at valleys at least mean − stddev/2 of the valley depths deep.
    MeanMinusHalfStddev,
    /// The `k` deepest valleys.
    TopK(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TilingParams {
    pub block_size: usize,
    pub smoothing_width: usize,
    pub threshold: ThresholdPolicy,
}

impl Default for TilingParams {
    fn default() -> Self {
        Self {
            block_size: 2,
            smoothing_width: 3,
            threshold: ThresholdPolicy::MeanMinusHalfStddev,
        }
    }
}

impl TilingParams {
    pub fn check(&self) -> Result<(), ClassicalError> {
        if self.block_size == 0 {
            return Err(ClassicalError::Params("block_size must be >= 1".into()));
        }
        if self.smoothing_width == 0 || self.smoothing_width % 2 == 0 {
            return Err(ClassicalError::Params(format!(
                "smoothing_width must be odd and >= 1, got {}",
                self.smoothing_width
            )));
        }
        Ok(())
    }
}

/// Similarity at each of the `n − 1` gaps between the `w` utterances before
/// and the `w` utterances after it (clipped at the document edges).
pub fn gap_scores(n: usize, w: usize, block_sim: impl Fn(std::ops::Range<usize>, std::ops::Range<usize>) -> f64) -> Vec<f64> {
    (0..n.saturating_sub(1))
        .map(|g| {
            let left = (g + 1).saturating_sub(w)..g + 1;
            let right = g + 1..(g + 1 + w).min(n);
            block_sim(left, right)
        })
        .collect()
}

/// Centred moving average; the window shrinks at the edges.
pub fn smooth(scores: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..scores.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(scores.len());
            scores[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Valleys shallower than this are rounding noise on a flat curve.
const MIN_DEPTH: f64 = 1e-9;

/// Depth at each valley, 0 elsewhere.
///
/// A valley is a run of equal values with a strictly higher neighbour on both
/// sides; its middle position carries the depth
/// `(left peak − v) + (right peak − v)`, peaks found by climbing while the
/// curve does not descend.
pub fn depth_scores(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut depth = vec![0.0; n];
    let mut a = 0;
    while a < n {
        let mut b = a;
        while b + 1 < n && s[b + 1] == s[a] {
            b += 1;
        }
        let v = s[a];
        if a > 0 && b + 1 < n && s[a - 1] > v && s[b + 1] > v {
            let mut l = a - 1;
            while l > 0 && s[l - 1] >= s[l] {
                l -= 1;
            }
            let mut r = b + 1;
            while r + 1 < n && s[r + 1] >= s[r] {
                r += 1;
            }
            let d = (s[l] - v) + (s[r] - v);
            if d > MIN_DEPTH {
                depth[(a + b) / 2] = d;
            }
        }
        a = b + 1;
    }
    depth
}

/// Gap positions selected as boundaries.
pub fn select_boundaries(depth: &[f64], policy: ThresholdPolicy) -> Vec<usize> {
    match policy {
        ThresholdPolicy::MeanMinusHalfStddev => {
            let valleys: Vec<f64> = depth.iter().copied().filter(|&d| d > 0.0).collect();
            if valleys.is_empty() {
                return Vec::new();
            }
            let n = valleys.len() as f64;
            let mean = valleys.iter().sum::<f64>() / n;
            let var = valleys.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
            let cutoff = mean - var.sqrt() / 2.0;
            (0..depth.len()).filter(|&g| depth[g] > 0.0 && depth[g] >= cutoff).collect()
        }
        ThresholdPolicy::TopK(k) => {
            let mut valleys: Vec<usize> = (0..depth.len()).filter(|&g| depth[g] > 0.0).collect();
            // deepest first, earliest on ties
            valleys.sort_by(|&a, &b| depth[b].total_cmp(&depth[a]).then(a.cmp(&b)));
            valleys.truncate(k);
            valleys.sort_unstable();
            valleys
        }
    }
}

/// Boundary gaps from raw gap scores.
pub fn boundaries_from_scores(scores: &[f64], params: &TilingParams) -> Vec<usize> {
    let smoothed = smooth(scores, params.smoothing_width);
    select_boundaries(&depth_scores(&smoothed), params.threshold)
}
