use serde::{Deserialize, Serialize};

use super::normalize::{cosine_sparse, term_vectors, Normalizer};
use super::{ClassicalError, NormalizationProfile, Segmented};
use crate::corpus::Document;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Keep splitting while the density gain is at least mean + c·stddev of all gains.
    AutoGradient { c: f64 },
    /// Exactly `k` segments (capped at the utterance count).
    FixedK(usize),
}

impl Default for Termination {
    fn default() -> Self {
        Termination::AutoGradient { c: 1.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct C99Params {
    pub rank_mask: usize,
    pub termination: Termination,
}

impl Default for C99Params {
    fn default() -> Self {
        Self {
            rank_mask: 11,
            termination: Termination::default(),
        }
    }
}

/// Each cell replaced by the fraction of its mask neighbours with a strictly lower value.
fn rank_matrix(sim: &[Vec<f64>], mask: usize) -> Vec<Vec<f64>> {
    let n = sim.len();
    let r = mask / 2;
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (mut lower, mut examined) = (0usize, 0usize);
            for a in i.saturating_sub(r)..(i + r + 1).min(n) {
                for b in j.saturating_sub(r)..(j + r + 1).min(n) {
                    if (a, b) == (i, j) {
                        continue;
                    }
                    examined += 1;
                    if sim[a][b] < sim[i][j] {
                        lower += 1;
                    }
                }
            }
            if examined > 0 {
                out[i][j] = lower as f64 / examined as f64;
            }
        }
    }
    out
}

/// 2D prefix sums for O(1) square-block totals.
struct BlockSums {
    p: Vec<Vec<f64>>,
}

impl BlockSums {
    fn new(m: &[Vec<f64>]) -> Self {
        let n = m.len();
        let mut p = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..n {
            for j in 0..n {
                p[i + 1][j + 1] = m[i][j] + p[i][j + 1] + p[i + 1][j] - p[i][j];
            }
        }
        Self { p }
    }

    /// Sum over `[a, b) × [a, b)`.
    fn square(&self, a: usize, b: usize) -> f64 {
        self.p[b][b] - self.p[a][b] - self.p[b][a] + self.p[a][a]
    }
}

/// Divisive clustering: the split sequence and inside density after each split.
fn divisive(sums: &BlockSums, n: usize, max_splits: usize) -> (Vec<usize>, Vec<f64>) {
    let mut segments = vec![(0usize, n)];
    let mut inside = sums.square(0, n);
    let mut area = (n * n) as f64;
    let mut splits = Vec::new();
    let mut densities = vec![inside / area];
    for _ in 0..max_splits {
        let mut best: Option<(f64, usize, usize, f64, f64)> = None;
        for (si, &(a, b)) in segments.iter().enumerate() {
            let seg_sum = sums.square(a, b);
            let seg_area = ((b - a) * (b - a)) as f64;
            for m in a + 1..b {
                let new_inside = inside - seg_sum + sums.square(a, m) + sums.square(m, b);
                let new_area = area - seg_area + ((m - a) * (m - a) + (b - m) * (b - m)) as f64;
                let d = new_inside / new_area;
                if best.is_none_or(|(bd, ..)| d > bd) {
                    best = Some((d, si, m, new_inside, new_area));
                }
            }
        }
        let Some((d, si, m, new_inside, new_area)) = best else { break };
        let (a, b) = segments[si];
        segments.splice(si..=si, [(a, m), (m, b)]);
        inside = new_inside;
        area = new_area;
        splits.push(m);
        densities.push(d);
    }
    (splits, densities)
}

/// Number of splits accepted under the gradient rule.
fn auto_cut(densities: &[f64], c: f64) -> usize {
    let gains: Vec<f64> = densities.windows(2).map(|w| w[1] - w[0]).collect();
    if gains.is_empty() {
        return 0;
    }
    let n = gains.len() as f64;
    let mean = gains.iter().sum::<f64>() / n;
    let sd = (gains.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n).sqrt();
    let threshold = mean + c * sd;
    gains.iter().take_while(|&&g| g >= threshold).count()
}

/// C99: rank-transformed cosine similarity matrix, divisive density maximisation.
pub fn c99(doc: &Document, params: &C99Params, norm: &NormalizationProfile) -> Result<Segmented, ClassicalError> {
    if params.rank_mask < 3 || params.rank_mask % 2 == 0 {
        return Err(ClassicalError::Params(format!(
            "rank_mask must be odd and >= 3, got {}",
            params.rank_mask
        )));
    }
    if params.termination == Termination::FixedK(0) {
        return Err(ClassicalError::Params("fixed_k needs k >= 1".into()));
    }
    let normalizer = Normalizer::new(norm)?;
    let n = doc.len();
    if n < 2 {
        return Ok(Segmented::from_gaps(doc, []));
    }
    let vectors = term_vectors(&normalizer, doc.texts());
    let mut sim = vec![vec![0.0; n]; n];
    let mut any_overlap = false;
    for i in 0..n {
        sim[i][i] = if vectors[i].is_empty() { 0.0 } else { 1.0 };
        for j in i + 1..n {
            let s = cosine_sparse(&vectors[i], &vectors[j]);
            any_overlap |= s != 0.0;
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let sums = BlockSums::new(&rank_matrix(&sim, params.rank_mask));
    let (splits, accepted) = match params.termination {
        Termination::FixedK(k) => {
            let (splits, _) = divisive(&sums, n, k.min(n) - 1);
            let count = splits.len();
            (splits, count)
        }
        Termination::AutoGradient { c } => {
            if !any_overlap {
                return Ok(Segmented::single(doc, "all-zero similarity matrix".into()));
            }
            let (splits, densities) = divisive(&sums, n, n - 1);
            let count = auto_cut(&densities, c);
            (splits, count)
        }
    };
    // split at m starts a segment at utterance m (0-based): gap m − 1
    Ok(Segmented::from_gaps(doc, splits[..accepted].iter().map(|m| m - 1)))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{doc, two_passages};
    use super::*;
    use crate::corpus::validate_segmentation;

    #[test]
    fn seam_under_auto_gradient() {
        let d = two_passages();
        let out = c99(&d, &C99Params::default(), &NormalizationProfile::plain()).unwrap();
        assert!(out.segmentation.starts().contains(&11), "{:?}", out.segmentation.starts());
        assert!(validate_segmentation(&d, &out.segmentation).is_ok());
    }

    #[test]
    fn fixed_k_extremes() {
        let d = two_passages();
        let one = C99Params {
            termination: Termination::FixedK(1),
            ..Default::default()
        };
        assert_eq!(c99(&d, &one, &NormalizationProfile::plain()).unwrap().segmentation.len(), 1);
        let all = C99Params {
            termination: Termination::FixedK(d.len()),
            ..Default::default()
        };
        assert_eq!(c99(&d, &all, &NormalizationProfile::plain()).unwrap().segmentation.len(), d.len());
        let two = C99Params {
            termination: Termination::FixedK(2),
            ..Default::default()
        };
        assert_eq!(
            c99(&d, &two, &NormalizationProfile::plain()).unwrap().segmentation.starts(),
            vec![1, 11]
        );
    }

    #[test]
    fn all_zero_matrix_is_single_segment() {
        let texts: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
        let out = c99(&doc(&texts), &C99Params::default(), &NormalizationProfile::plain()).unwrap();
        assert_eq!(out.segmentation.len(), 1);
        assert_eq!(out.warnings, vec!["all-zero similarity matrix".to_string()]);
    }

    #[test]
    fn rank_mask_validation() {
        let d = two_passages();
        for mask in [1, 4] {
            let p = C99Params {
                rank_mask: mask,
                ..Default::default()
            };
            assert!(c99(&d, &p, &NormalizationProfile::plain()).is_err());
        }
    }

    #[test]
    fn rank_counts_strictly_lower_neighbours() {
        let sim = vec![vec![1.0, 0.5, 0.0], vec![0.5, 1.0, 0.5], vec![0.0, 0.5, 1.0]];
        let r = rank_matrix(&sim, 3);
        // corner (0,0): neighbours 0.5, 0.5, 1.0 -> 2 of 3 lower
        assert!((r[0][0] - 2.0 / 3.0).abs() < 1e-15);
        // centre: 8 neighbours, 1.0 > {0.5 x4, 0.0 x2}
        assert!((r[1][1] - 6.0 / 8.0).abs() < 1e-15);
    }
}
