use std::time::Instant;

use dialseg::corruption::{corrupt, corruption_rate, DraftBlocks, SpanDistribution};
use dialseg::Segmentation;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Span lengths drawn by `corrupt` over a gold of one-line segments; the
/// final block is dropped because it may be clamped.
fn spans(draws_at_least: usize, seed: u64) -> Vec<usize> {
    let gold = Segmentation::from_lengths("g", 1, &vec![1; draws_at_least * 2]);
    let blocks = corrupt(&gold, &SpanDistribution::default(), seed);
    let mut lens: Vec<usize> = blocks.blocks.iter().map(Vec::len).collect();
    lens.pop();
    lens
}

#[test]
fn span_lengths_follow_default_pmf() {
    let start = Instant::now();
    let lens = spans(20_000, 7);
    assert!(lens.len() >= 10_000);
    let pmf = SpanDistribution::default();
    let mut observed = [0usize; 4];
    for &l in &lens {
        observed[l - 1] += 1;
    }
    let total = lens.len() as f64;
    let chi2: f64 = observed
        .iter()
        .zip(pmf.pmf())
        .map(|(&o, &p)| (o as f64 - total * p).powi(2) / (total * p))
        .sum();
    let p_value = 1.0 - ChiSquared::new(3.0).unwrap().cdf(chi2);
    assert!(p_value > 0.01, "chi2 = {chi2}, p = {p_value}");
    let mean = lens.iter().sum::<usize>() as f64 / total;
    assert!((mean - 1.65).abs() <= 0.02, "mean span {mean}");
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

proptest! {
    #[test]
    fn drafts_tile_and_only_remove_gold_boundaries(lengths in prop::collection::vec(1usize..6, 1..30), seed in any::<u64>()) {
        let gold = Segmentation::from_lengths("g", 1, &lengths);
        let n = gold.n_lines() as u32;
        let draft = corrupt(&gold, &SpanDistribution::default(), seed);
        prop_assert!(draft.check_tiling(1, n).is_ok());
        let gold_starts = gold.starts();
        prop_assert!(draft.starts().iter().all(|s| gold_starts.contains(s)));
        let rate = corruption_rate(&gold, &draft);
        prop_assert!((0.0..=1.0).contains(&rate));
        prop_assert_eq!(corrupt(&gold, &SpanDistribution::default(), seed), draft.clone());
        let back = DraftBlocks::from_segmentation(&draft.to_segmentation("g"));
        prop_assert_eq!(back, draft);
    }
}
