mod oracles;

use dialseg::metrics::{boundary_f1_macro, pk, topic_accuracy, window_diff};
use dialseg::{BoundaryVector, Segmentation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bv(seg: &Segmentation) -> BoundaryVector {
    seg.to_boundary_vector(seg.n_lines()).unwrap()
}

#[test]
fn optimized_metrics_match_enumeration_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.random_range(1..=30);
        let r = oracles::random_segmentation(&mut rng, n, 10);
        let h = oracles::random_segmentation(&mut rng, n, 10);
        let (rl, hl) = (oracles::labels(&r), oracles::labels(&h));
        let (rv, hv) = (bv(&r), bv(&h));

        let k = oracles::oracle_k(&rl);
        let got = pk(&rv, &hv, None).unwrap();
        assert_eq!(got.k, k);
        assert!((got.value - oracles::pk(&rl, &hl, k)).abs() <= 1e-12);
        let got = window_diff(&rv, &hv, None).unwrap();
        assert!((got.value - oracles::wd(&rl, &hl, k)).abs() <= 1e-12);

        let fixed = rng.random_range(1..=n + 1);
        assert!((pk(&rv, &hv, Some(fixed)).unwrap().value - oracles::pk(&rl, &hl, fixed)).abs() <= 1e-12);
        assert!((window_diff(&rv, &hv, Some(fixed)).unwrap().value - oracles::wd(&rl, &hl, fixed)).abs() <= 1e-12);

        assert!((boundary_f1_macro(&rv, &hv).unwrap() - oracles::f1_macro(&rl, &hl)).abs() <= 1e-12);
        assert!((topic_accuracy(&r, &h).unwrap() - oracles::topic_accuracy(&rl, &hl)).abs() <= 1e-12);
    }
}

#[test]
fn two_halves_against_single_segment() {
    let r = Segmentation::from_lengths("d", 1, &[5, 5]);
    let h = Segmentation::from_lengths("d", 1, &[10]);
    assert_eq!(pk(&bv(&r), &bv(&h), Some(2)).unwrap().value, 0.25);
    assert_eq!(window_diff(&bv(&r), &bv(&h), Some(2)).unwrap().value, 0.25);
}

fn arb_pair() -> impl Strategy<Value = (BoundaryVector, BoundaryVector)> {
    (2usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n - 1),
            prop::collection::vec(any::<bool>(), n - 1),
        )
            .prop_map(move |(a, b)| (BoundaryVector::new(n, a).unwrap(), BoundaryVector::new(n, b).unwrap()))
    })
}

proptest! {
    #[test]
    fn identical_segmentations_score_perfectly((r, _) in arb_pair()) {
        prop_assert_eq!(pk(&r, &r, None).unwrap().value, 0.0);
        prop_assert_eq!(window_diff(&r, &r, None).unwrap().value, 0.0);
        prop_assert_eq!(boundary_f1_macro(&r, &r).unwrap(), 1.0);
        let s = r.to_segmentation("d", 1);
        prop_assert_eq!(topic_accuracy(&s, &s).unwrap(), 1.0);
    }

    #[test]
    fn window_metrics_ignore_direction((r, h) in arb_pair(), k in 1usize..8) {
        let (rr, hr) = (r.reversed(), h.reversed());
        prop_assert_eq!(pk(&r, &h, Some(k)).unwrap().value, pk(&rr, &hr, Some(k)).unwrap().value);
        prop_assert_eq!(window_diff(&r, &h, Some(k)).unwrap().value, window_diff(&rr, &hr, Some(k)).unwrap().value);
    }

    #[test]
    fn scores_stay_in_unit_interval((r, h) in arb_pair()) {
        for v in [
            pk(&r, &h, None).unwrap().value,
            window_diff(&r, &h, None).unwrap().value,
            boundary_f1_macro(&r, &h).unwrap(),
            topic_accuracy(&r.to_segmentation("d", 1), &h.to_segmentation("d", 1)).unwrap(),
        ] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    /// One reference boundary, one hypothesis boundary moving away from it,
    /// both kept at least k gaps from the document edges.
    #[test]
    fn wd_grows_with_boundary_displacement(n in 12usize..40, k in 2usize..4, r_frac in 0.0f64..1.0) {
        let lo = k;
        let hi = n - 1 - k;
        prop_assume!(lo < hi);
        let r_gap = lo + ((hi - lo) as f64 * r_frac) as usize;
        let reference = BoundaryVector::from_gaps(n, [r_gap]);
        let mut prev = 0.0;
        for h_gap in r_gap..hi {
            let hyp = BoundaryVector::from_gaps(n, [h_gap]);
            let v = window_diff(&reference, &hyp, Some(k)).unwrap().value;
            prop_assert!(v >= prev);
            prev = v;
        }
        prev = 0.0;
        for h_gap in (lo..=r_gap).rev() {
            let hyp = BoundaryVector::from_gaps(n, [h_gap]);
            let v = window_diff(&reference, &hyp, Some(k)).unwrap().value;
            prop_assert!(v >= prev);
            prev = v;
        }
    }
}
