//! Lexical TextTiling and C99 over a configurable [`NormalizationProfile`].
//!
//! The Arabic-adapted variants are the same algorithms run under
//! [`NormalizationProfile::arabic`].

mod c99;
pub mod normalize;
pub mod tiling;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{BoundaryVector, Document, Segmentation};

pub use c99::{c99, C99Params, Termination};
pub use normalize::{NormalizationProfile, Normalizer};
pub use tiling::{ThresholdPolicy, TilingParams};

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("cannot read stopword list {path}: {source}")]
    Stopwords {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A segmentation plus any warnings raised while producing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segmented {
    pub segmentation: Segmentation,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Segmented {
    pub(crate) fn from_gaps(doc: &Document, gaps: impl IntoIterator<Item = usize>) -> Self {
        Self {
            segmentation: BoundaryVector::from_gaps(doc.len(), gaps).to_segmentation(doc.id(), doc.first_line()),
            warnings: Vec::new(),
        }
    }

    pub(crate) fn single(doc: &Document, warning: String) -> Self {
        tracing::warn!(doc_id = doc.id(), "{warning}");
        Self {
            segmentation: Segmentation::single(doc),
            warnings: vec![warning],
        }
    }
}

/// Lexical TextTiling: cosine similarity of summed term counts in adjacent
/// blocks, smoothed, with boundaries at sufficiently deep valleys.
pub fn texttiling(doc: &Document, params: &TilingParams, norm: &NormalizationProfile) -> Result<Segmented, ClassicalError> {
    params.check()?;
    let normalizer = Normalizer::new(norm)?;
    let n = doc.len();
    if n < 2 * params.block_size {
        return Ok(Segmented::single(
            doc,
            format!("{n} utterances is shorter than two blocks of {}", params.block_size),
        ));
    }
    let vectors = normalize::term_vectors(&normalizer, doc.texts());
    let scores = tiling::gap_scores(n, params.block_size, |l, r| {
        normalize::cosine_sparse(&normalize::sum_sparse(&vectors[l]), &normalize::sum_sparse(&vectors[r]))
    });
    Ok(Segmented::from_gaps(doc, tiling::boundaries_from_scores(&scores, params)))
}
