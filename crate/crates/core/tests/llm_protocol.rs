mod oracles;

use dialseg::corpus::io::segmentation_json;
use dialseg::corpus::{validate_segmentation, DataSource, DocMeta, Document};
use dialseg::corruption::{corrupt, SpanDistribution};
use dialseg::llm::{parse_and_validate, repair, TemplateId};
use dialseg::metrics::window_diff;
use dialseg::{Segment, Segmentation};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn document(id: &str, n: usize) -> Document {
    Document::from_turns(
        DocMeta::new(id, DataSource::Other, "MSA", "test"),
        (0..n).map(|i| (if i % 2 == 0 { "A" } else { "B" }, format!("utterance {i}"))),
    )
    .unwrap()
}

fn with_doc_id(mut s: Segmentation, id: &str) -> Segmentation {
    s.doc_id = id.to_string();
    s
}

#[test]
fn serialized_segmentations_parse_back_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..500 {
        let n = rng.random_range(1..=50);
        let doc = document("rt", n);
        let mut seg = with_doc_id(oracles::random_segmentation(&mut rng, n, 50), "rt");
        let with_topics = i % 2 == 0;
        if with_topics {
            for s in &mut seg.segments {
                s.topic = Some(format!("topic \"{}\", part {}", s.split_id, i));
            }
        }
        let mode = if with_topics { TemplateId::SyntheticAnnotation } else { TemplateId::Segmentation };
        let raw = segmentation_json(&seg, with_topics);
        assert_eq!(parse_and_validate(&raw, &doc, mode, None).unwrap(), seg);
    }
}

/// Applies one random corruption of the output schema.
fn mutate(rng: &mut impl Rng, segs: &mut Vec<Segment>, n: u32) {
    let pick = rng.random_range(0..segs.len());
    match rng.random_range(0..8) {
        0 => {
            let s = &mut segs[pick];
            if !s.line_ids.is_empty() {
                let at = rng.random_range(0..s.line_ids.len());
                s.line_ids.remove(at);
            }
        }
        1 => {
            let id = rng.random_range(1..=n);
            segs[pick].line_ids.push(id);
        }
        2 => {
            let id = *[0, n + 1, n + 7].choose(rng).unwrap();
            segs[pick].line_ids.push(id);
        }
        3 => segs.shuffle(rng),
        4 => segs[pick].split_id = rng.random_range(0..10),
        5 => {
            if segs.len() > 1 {
                segs.remove(pick);
            }
        }
        6 => segs[pick].line_ids.shuffle(rng),
        _ => segs[pick].line_ids.clear(),
    }
}

#[test]
fn repair_always_yields_valid_and_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut invalid_seen = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=50);
        let doc = document("rp", n);
        let mut segs = oracles::random_segmentation(&mut rng, n, 50).segments;
        for _ in 0..rng.random_range(1..=3) {
            mutate(&mut rng, &mut segs, n as u32);
        }
        let raw = serde_json::to_string(&segs).unwrap();
        let parsed = match parse_and_validate(&raw, &doc, TemplateId::Segmentation, None) {
            Ok(_) => continue,
            Err(rejection) => rejection.segments().map(<[Segment]>::to_vec).unwrap(),
        };
        invalid_seen += 1;
        let once = repair(&parsed, &doc, None);
        assert!(validate_segmentation(&doc, &once.segmentation).is_ok(), "{raw}");
        assert!(!once.actions.is_empty());
        let twice = repair(&once.segmentation.segments, &doc, None);
        assert_eq!(twice.segmentation, once.segmentation);
        assert!(twice.actions.is_empty());
    }
    assert!(invalid_seen >= 300, "only {invalid_seen} mutations were invalid");
}

#[test]
fn gold_answers_restore_corrupted_drafts() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..100 {
        let n = rng.random_range(2..=50);
        let id = format!("rs{i}");
        let doc = document(&id, n);
        let gold = with_doc_id(oracles::random_segmentation(&mut rng, n, 12), &id);
        let draft = corrupt(&gold, &SpanDistribution::default(), i);
        let answer = segmentation_json(&gold, false);
        let restored = parse_and_validate(&answer, &doc, TemplateId::Restoration, Some(&draft)).unwrap();
        let (g, r) = (gold.to_boundary_vector(n).unwrap(), restored.to_boundary_vector(n).unwrap());
        assert_eq!(window_diff(&g, &r, None).unwrap().value, 0.0);
        let starts = restored.starts();
        assert!(draft.starts().iter().all(|s| starts.contains(s)));
    }
}

#[test]
fn accepted_restorations_keep_draft_borders() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut accepted = 0;
    for i in 0..300 {
        let n = rng.random_range(2..=30);
        let doc = document("b", n);
        let gold = with_doc_id(oracles::random_segmentation(&mut rng, n, 8), "b");
        let draft = corrupt(&gold, &SpanDistribution::default(), i);
        let guess = with_doc_id(oracles::random_segmentation(&mut rng, n, 8), "b");
        if let Ok(seg) = parse_and_validate(&segmentation_json(&guess, false), &doc, TemplateId::Restoration, Some(&draft)) {
            accepted += 1;
            let starts = seg.starts();
            assert!(draft.starts().iter().all(|s| starts.contains(s)));
        }
        let fixed = repair(&guess.segments, &doc, Some(&draft)).segmentation;
        assert!(parse_and_validate(&segmentation_json(&fixed, false), &doc, TemplateId::Restoration, Some(&draft)).is_ok());
    }
    assert!(accepted > 0);
}
