//! Seeded synthetic documents with disjoint per-topic vocabularies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DataSource, DocMeta, Document, Segmentation};

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub segments: std::ops::RangeInclusive<usize>,
    pub utterances: std::ops::RangeInclusive<usize>,
    pub vocab_per_topic: usize,
    pub words_per_utterance: std::ops::RangeInclusive<usize>,
    /// Topic-neutral words mixed into every utterance.
    pub shared_words: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            segments: 2..=5,
            utterances: 40..=80,
            vocab_per_topic: 10,
            words_per_utterance: 5..=9,
            shared_words: 2,
        }
    }
}

/// One document and its gold segmentation; every segment is at least 3 utterances.
pub fn synthetic_document(doc_id: &str, spec: &SyntheticSpec, seed: u64) -> (Document, Segmentation) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(spec.utterances.clone());
    let k = rng.random_range(spec.segments.clone()).min(n / 3).max(1);
    // random composition of n into k parts of at least 3
    let mut cuts: Vec<usize> = Vec::new();
    while cuts.len() < k - 1 {
        let c = rng.random_range(3..=n - 3);
        if cuts.iter().chain([&0, &n]).all(|&x| x.abs_diff(c) >= 3) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut lengths = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain([n]) {
        lengths.push(c - prev);
        prev = c;
    }
    let shared = ["so", "well", "then", "okay", "right", "yes"];
    let mut texts = Vec::with_capacity(n);
    for (topic, len) in lengths.iter().enumerate() {
        for _ in 0..*len {
            let m = rng.random_range(spec.words_per_utterance.clone());
            let mut words: Vec<String> = (0..m)
                .map(|_| format!("t{topic}w{}", rng.random_range(0..spec.vocab_per_topic)))
                .collect();
            for _ in 0..spec.shared_words {
                words.push(shared[rng.random_range(0..shared.len())].to_string());
            }
            texts.push(words.join(" "));
        }
    }
    let speakers = ["A", "B"];
    let doc = Document::from_turns(
        DocMeta::new(doc_id, DataSource::Other, "synthetic", "synthetic"),
        texts.iter().enumerate().map(|(i, t)| (speakers[i % 2], t.as_str())),
    )
    .expect("generated document is valid");
    let gold = Segmentation::from_lengths(doc_id, 1, &lengths);
    (doc, gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate_segmentation;

    #[test]
    fn generated_gold_is_valid_and_seeded() {
        for seed in 0..20 {
            let (d, g) = synthetic_document("s", &SyntheticSpec::default(), seed);
            assert!(validate_segmentation(&d, &g).is_ok());
            assert!((40..=80).contains(&d.len()));
            assert!((2..=5).contains(&g.len()));
            assert!(g.lengths().iter().all(|&l| l >= 3));
            assert_eq!(synthetic_document("s", &SyntheticSpec::default(), seed).0, d);
        }
    }
}
