//! Corruption of gold segmentations by merging adjacent segments.
//!
//! [`corrupt`] scans gold segments left to right, draws a span length `L`
//! from a [`SpanDistribution`] and fuses the next `L` segments (clamped at the
//! document end) into one draft block. `L = 1` keeps a segment as-is, so under
//! the default pmf 60% of draws leave structure untouched.
//!
//! The alternative reading of the pmf, as a per-document number of merge
//! operations, is available as [`Reading::MergeCount`].

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{LineId, Segment, Segmentation};

#[derive(Debug, Error)]
pub enum CorruptionError {
    #[error("span pmf {0:?} must be non-negative and sum to 1")]
    Pmf(Vec<f64>),
}

/// Probability of merged-span length `L = 1..=len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpanDistribution {
    pmf: Vec<f64>,
}

impl Default for SpanDistribution {
    fn default() -> Self {
        Self {
            pmf: vec![0.60, 0.20, 0.15, 0.05],
        }
    }
}

impl TryFrom<Vec<f64>> for SpanDistribution {
    type Error = CorruptionError;

    fn try_from(pmf: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(pmf)
    }
}

impl From<SpanDistribution> for Vec<f64> {
    fn from(d: SpanDistribution) -> Self {
        d.pmf
    }
}

impl SpanDistribution {
    pub fn new(pmf: Vec<f64>) -> Result<Self, CorruptionError> {
        let ok = !pmf.is_empty()
            && pmf.iter().all(|p| p.is_finite() && *p >= 0.0)
            && (pmf.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if ok {
            Ok(Self { pmf })
        } else {
            Err(CorruptionError::Pmf(pmf))
        }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn expected_length(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum()
    }

    /// A sampler drawing span lengths `1..=len`.
    pub fn sampler(&self) -> impl Distribution<usize> + '_ {
        WeightedIndex::new(&self.pmf)
            .expect("validated pmf has positive mass")
            .map(|i| i + 1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    /// Each draw is a merged-span length in gold segments.
    #[default]
    SpanLength,
    /// One draw per document: how many gold boundaries to delete.
    MergeCount,
}

/// Contiguous line-id blocks tiling a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DraftBlocks {
    pub blocks: Vec<Vec<LineId>>,
}

impl DraftBlocks {
    /// Blocks from segment runs: `runs[i]` gold segments go into block `i`.
    fn from_runs(gold: &Segmentation, runs: &[usize]) -> Self {
        let mut blocks = Vec::with_capacity(runs.len());
        let mut segs = gold.segments.iter();
        for &r in runs {
            blocks.push(segs.by_ref().take(r).flat_map(|s| s.line_ids.iter().copied()).collect());
        }
        Self { blocks }
    }

    pub fn from_segmentation(seg: &Segmentation) -> Self {
        Self {
            blocks: seg.segments.iter().map(|s| s.line_ids.clone()).collect(),
        }
    }

    pub fn to_segmentation(&self, doc_id: &str) -> Segmentation {
        Segmentation {
            doc_id: doc_id.to_string(),
            segments: self
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| Segment {
                    split_id: i as u32 + 1,
                    line_ids: b.clone(),
                    topic: None,
                })
                .collect(),
        }
    }

    /// First line id of every block.
    pub fn starts(&self) -> Vec<LineId> {
        self.blocks.iter().filter_map(|b| b.first().copied()).collect()
    }

    /// Checks the blocks tile `first..=last` in order with consecutive ids.
    pub fn check_tiling(&self, first: LineId, last: LineId) -> Result<(), String> {
        let mut expect = first;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(format!("block {} is empty", i + 1));
            }
            for &id in b {
                if id != expect {
                    return Err(format!("block {} has line {id}, expected {expect}", i + 1));
                }
                expect += 1;
            }
        }
        if self.blocks.is_empty() || expect != last + 1 {
            return Err(format!("blocks end before line {last}"));
        }
        Ok(())
    }
}

/// Per-document seed: the run seed mixed with a hash of the document id.
pub fn doc_seed(seed: u64, doc_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(doc_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn corrupt(gold: &Segmentation, dist: &SpanDistribution, seed: u64) -> DraftBlocks {
    corrupt_with(gold, dist, Reading::SpanLength, seed)
}

pub fn corrupt_with(gold: &Segmentation, dist: &SpanDistribution, reading: Reading, seed: u64) -> DraftBlocks {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = gold.len();
    let runs = match reading {
        Reading::SpanLength => {
            let sampler = dist.sampler();
            let mut runs = Vec::new();
            let mut remaining = n;
            while remaining > 0 {
                let l = sampler.sample(&mut rng).min(remaining);
                runs.push(l);
                remaining -= l;
            }
            runs
        }
        Reading::MergeCount => {
            // draw m, then delete m distinct gold boundaries uniformly
            let boundaries = n.saturating_sub(1);
            let m = dist.sampler().sample(&mut rng).min(boundaries);
            let mut removed = vec![false; boundaries];
            for i in sample(&mut rng, boundaries, m) {
                removed[i] = true;
            }
            let mut runs = vec![1usize];
            for r in removed {
                if r {
                    *runs.last_mut().expect("non-empty") += 1;
                } else {
                    runs.push(1);
                }
            }
            if n == 0 {
                runs.clear();
            }
            runs
        }
    };
    DraftBlocks::from_runs(gold, &runs)
}

/// Fraction of gold boundaries that are not block borders; 0 without gold boundaries.
pub fn corruption_rate(gold: &Segmentation, blocks: &DraftBlocks) -> f64 {
    let gold_boundaries = gold.len().saturating_sub(1);
    if gold_boundaries == 0 {
        return 0.0;
    }
    let borders = blocks.blocks.len().saturating_sub(1);
    gold_boundaries.saturating_sub(borders) as f64 / gold_boundaries as f64
}
