//! Train/valid/test splitting stratified by (language_clue, genre).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Document};

pub const SPLIT_NAMES: [&str; 3] = ["train", "valid", "test"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios(pub [f64; 3]);

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios([0.7, 0.15, 0.15])
    }
}

impl SplitRatios {
    pub fn new(train: f64, valid: f64, test: f64) -> Result<Self, CorpusError> {
        let r = SplitRatios([train, valid, test]);
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<(), CorpusError> {
        if self.0.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(CorpusError::Ratios(format!("{:?} has a negative entry", self.0)));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::Ratios(format!("{:?} sums to {sum}", self.0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    pub ratios: SplitRatios,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SplitManifest {
    pub fn get(&self, name: &str) -> Option<&[String]> {
        match name {
            "train" => Some(&self.train),
            "valid" => Some(&self.valid),
            "test" => Some(&self.test),
            _ => None,
        }
    }

    /// Which split a document belongs to, if any.
    pub fn split_of(&self, doc_id: &str) -> Option<&'static str> {
        SPLIT_NAMES
            .into_iter()
            .find(|n| self.get(n).is_some_and(|ids| ids.iter().any(|d| d == doc_id)))
    }
}

/// Per-split document counts for a stratum of `n` documents, by largest remainder.
///
/// Each count differs from `n * ratio` by less than one document.
pub fn stratum_counts(n: usize, ratios: &SplitRatios) -> [usize; 3] {
    let targets: Vec<f64> = ratios.0.iter().map(|r| r * n as f64).collect();
    let mut counts = [0usize; 3];
    for (c, t) in counts.iter_mut().zip(&targets) {
        *c = t.floor() as usize;
    }
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    // stable sort keeps split order on equal remainders
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Splits documents into train/valid/test within each (language_clue, genre) stratum.
///
/// Counts per stratum depend only on its size; the seed only decides membership.
/// Strata with fewer documents than splits go entirely to train and are
/// recorded as warnings in the manifest.
pub fn stratified_split(
    docs: &[Document],
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitManifest, CorpusError> {
    ratios.check()?;
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut strata: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
    for d in docs {
        strata
            .entry((d.meta().language_clue.clone(), d.meta().genre.clone()))
            .or_default()
            .push(d.id().to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = SplitManifest {
        train: Vec::new(),
        valid: Vec::new(),
        test: Vec::new(),
        seed,
        ratios,
        warnings: Vec::new(),
    };
    for ((clue, genre), mut ids) in strata {
        ids.sort();
        if ids.len() < SPLIT_NAMES.len() {
            manifest.warnings.push(format!(
                "stratum ({clue}, {genre}) has {} document(s); all assigned to train",
                ids.len()
            ));
            manifest.train.extend(ids);
            continue;
        }
        ids.shuffle(&mut rng);
        let [n_train, n_valid, _] = stratum_counts(ids.len(), &ratios);
        let mut rest = ids.into_iter();
        manifest.train.extend(rest.by_ref().take(n_train));
        manifest.valid.extend(rest.by_ref().take(n_valid));
        manifest.test.extend(rest);
    }
    manifest.train.sort();
    manifest.valid.sort();
    manifest.test.sort();
    Ok(manifest)
}
