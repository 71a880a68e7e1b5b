use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use super::TemplateId;
use crate::corpus::io::segments_from_json;
use crate::corpus::{check_partition, Document, LineId, Segment, Segmentation, Violation};
use crate::corruption::DraftBlocks;

/// Why a model response was not accepted.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rejection {
    /// No usable JSON array of segment objects.
    Malformed { message: String },
    /// Parsed, but the segments break coverage or border rules.
    Invalid {
        segments: Vec<Segment>,
        violations: Vec<Violation>,
    },
}

impl Rejection {
    /// Parsed segments, if any survived parsing.
    pub fn segments(&self) -> Option<&[Segment]> {
        match self {
            Rejection::Malformed { .. } => None,
            Rejection::Invalid { segments, .. } => Some(segments),
        }
    }

    /// One human-readable line per problem.
    pub fn items(&self) -> Vec<String> {
        match self {
            Rejection::Malformed { message } => vec![format!("malformed: {message}")],
            Rejection::Invalid { violations, .. } => violations.iter().map(|v| v.to_string()).collect(),
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.items().join("; "))
    }
}

/// The first JSON array embedded in `raw`, skipping fences and prose around it.
pub fn extract_json_array(raw: &str) -> Option<Value> {
    let mut from = 0;
    while let Some(off) = raw[from..].find('[') {
        let start = from + off;
        let mut stream = serde_json::Deserializer::from_str(&raw[start..]).into_iter::<Value>();
        if let Some(Ok(v @ Value::Array(_))) = stream.next() {
            return Some(v);
        }
        from = start + 1;
    }
    None
}

/// Draft borders (block starts after the first) that are not segment starts.
fn broken_borders(segments: &[Segment], draft: &DraftBlocks) -> Vec<Violation> {
    let starts: HashSet<LineId> = segments.iter().filter_map(Segment::first).collect();
    draft
        .starts()
        .into_iter()
        .skip(1)
        .filter(|s| !starts.contains(s))
        .map(|line_id| Violation::BlockBorderNotPreserved { line_id })
        .collect()
}

pub fn parse_and_validate(
    raw: &str,
    doc: &Document,
    mode: TemplateId,
    draft: Option<&DraftBlocks>,
) -> Result<Segmentation, Rejection> {
    let value = extract_json_array(raw).ok_or_else(|| Rejection::Malformed {
        message: "no JSON array found".into(),
    })?;
    let segments = segments_from_json(&value).map_err(|message| Rejection::Malformed { message })?;
    let mut violations = check_partition(&segments, doc.first_line(), doc.last_line());
    if let (TemplateId::Restoration, Some(d)) = (mode, draft) {
        if violations.is_empty() {
            violations.extend(broken_borders(&segments, d));
        }
    }
    if violations.is_empty() {
        Ok(Segmentation {
            doc_id: doc.id().to_string(),
            segments,
        })
    } else {
        Err(Rejection::Invalid { segments, violations })
    }
}

/// Result of [`repair`]: a valid segmentation and the edits that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Repaired {
    pub segmentation: Segmentation,
    pub actions: Vec<String>,
}

fn id_list(ids: &[LineId]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// Deterministically turns parsed but invalid segments into a valid
/// segmentation of `doc`. Valid input is returned unchanged.
///
/// Out-of-range ids are clipped, segments are ordered by first id, repeated
/// ids keep their first occurrence, and each segment then runs from its first
/// id to the line before the next segment's first id, which closes gaps by
/// extending the preceding segment. With a draft, missing block borders are
/// added as extra segment starts.
pub fn repair(segments: &[Segment], doc: &Document, draft: Option<&DraftBlocks>) -> Repaired {
    let (first, last) = (doc.first_line(), doc.last_line());
    let mut actions = Vec::new();

    let mut clipped = Vec::new();
    let mut segs: Vec<(Vec<LineId>, Option<String>)> = segments
        .iter()
        .map(|s| {
            let (keep, out): (Vec<LineId>, Vec<LineId>) =
                s.line_ids.iter().partition(|&&id| id >= first && id <= last);
            clipped.extend(out);
            (keep, s.topic.clone())
        })
        .collect();
    if !clipped.is_empty() {
        clipped.sort_unstable();
        clipped.dedup();
        actions.push(format!("clipped out-of-range ids {}", id_list(&clipped)));
    }

    let min_id = |ids: &[LineId]| ids.iter().copied().min();
    segs.retain(|(ids, _)| !ids.is_empty());
    let ordered_before = segs.clone();
    segs.sort_by_key(|(ids, _)| min_id(ids));
    if segs != ordered_before {
        actions.push("sorted segments by first line id".into());
    }

    let mut seen = HashSet::new();
    let mut dropped = Vec::new();
    for (ids, _) in &mut segs {
        ids.retain(|&id| {
            let fresh = seen.insert(id);
            if !fresh {
                dropped.push(id);
            }
            fresh
        });
    }
    if !dropped.is_empty() {
        dropped.sort_unstable();
        dropped.dedup();
        actions.push(format!("dropped duplicate ids {}", id_list(&dropped)));
    }
    segs.retain(|(ids, _)| !ids.is_empty());
    segs.sort_by_key(|(ids, _)| min_id(ids));

    // segment starts with their topics; the first segment always opens the document
    let mut starts: Vec<(LineId, Option<String>)> = segs
        .into_iter()
        .map(|(ids, topic)| (min_id(&ids).expect("non-empty"), topic))
        .collect();
    match starts.first_mut() {
        Some(s) if s.0 != first => {
            actions.push(format!("extended first segment back to {first}"));
            s.0 = first;
        }
        None => {
            actions.push("no usable segments; single segment".into());
            starts.push((first, None));
        }
        _ => {}
    }

    if let Some(d) = draft {
        let have: BTreeSet<LineId> = starts.iter().map(|s| s.0).collect();
        let missing: Vec<LineId> = d.starts().into_iter().filter(|s| !have.contains(s)).collect();
        if !missing.is_empty() {
            actions.push(format!("inserted block borders at {}", id_list(&missing)));
            starts.extend(missing.into_iter().map(|s| (s, None)));
            starts.sort_by_key(|s| s.0);
        }
    }

    let ids: Vec<LineId> = starts.iter().map(|s| s.0).collect();
    let mut segmentation = Segmentation::from_starts(doc.id(), first, last, &ids);
    for (seg, (_, topic)) in segmentation.segments.iter_mut().zip(starts) {
        seg.topic = topic;
    }

    // report gap closing and renumbering against the input
    let covered: HashSet<LineId> = segments.iter().flat_map(|s| s.line_ids.iter().copied()).collect();
    let gaps: Vec<LineId> = (first..=last).filter(|id| !covered.contains(id)).collect();
    if !gaps.is_empty() {
        actions.push(format!("closed gaps at {}", id_list(&gaps)));
    }
    let renumbered = segments.len() != segmentation.len()
        || segments.iter().enumerate().any(|(i, s)| s.split_id as usize != i + 1);
    if renumbered {
        actions.push("renumbered split ids".into());
    }
    if actions.is_empty() && segmentation.segments.as_slice() != segments {
        actions.push("rebuilt non-consecutive segments".into());
    }
    Repaired { segmentation, actions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::validate_segmentation;

    fn doc(n: usize) -> Document {
        crate::classical::tests::doc(&vec!["x".to_string(); n])
    }

    fn seg(lists: &[&[LineId]]) -> Vec<Segment> {
        lists
            .iter()
            .enumerate()
            .map(|(i, l)| Segment {
                split_id: i as u32 + 1,
                line_ids: l.to_vec(),
                topic: None,
            })
            .collect()
    }

    fn lines(s: &Segmentation) -> Vec<Vec<LineId>> {
        s.segments.iter().map(|s| s.line_ids.clone()).collect()
    }

    #[test]
    fn accepts_exact_schema() {
        let raw = r#"[{"split_id": 1, "line_ids": "1,2,3"}, {"split_id": 2, "line_ids": "4,5,6,7"}]"#;
        let s = parse_and_validate(raw, &doc(7), TemplateId::Segmentation, None).unwrap();
        assert_eq!(lines(&s), vec![vec![1, 2, 3], vec![4, 5, 6, 7]]);
    }

    #[test]
    fn tolerates_fences_and_prose() {
        let raw = "Sure [see below]:\n```json\n[{\"split_id\": 1, \"topic\": \"a\", \"line_ids\": \"1,2\"}]\n```\nDone.";
        let s = parse_and_validate(raw, &doc(2), TemplateId::SyntheticAnnotation, None).unwrap();
        assert_eq!(s.segments[0].topic.as_deref(), Some("a"));
    }

    #[test]
    fn omitted_line_is_a_gap() {
        let raw = r#"[{"split_id": 1, "line_ids": "1,2,3"}, {"split_id": 2, "line_ids": "5,6,7"}]"#;
        let err = parse_and_validate(raw, &doc(7), TemplateId::Segmentation, None).unwrap_err();
        assert_eq!(err.items(), vec!["gap at 4".to_string()]);
    }

    #[test]
    fn garbage_is_malformed() {
        for raw in ["no json here", "[1, 2", "[1, 2]", "{\"a\": 1}"] {
            let err = parse_and_validate(raw, &doc(3), TemplateId::Segmentation, None).unwrap_err();
            assert!(matches!(err, Rejection::Malformed { .. }), "{raw}");
            assert!(err.items()[0].starts_with("malformed"));
        }
    }

    #[test]
    fn restoration_checks_borders() {
        let draft = DraftBlocks {
            blocks: vec![vec![1, 2, 3], vec![4, 5, 6, 7]],
        };
        let merged = r#"[{"split_id": 1, "line_ids": "1,2"}, {"split_id": 2, "line_ids": "3,4,5,6,7"}]"#;
        let err = parse_and_validate(merged, &doc(7), TemplateId::Restoration, Some(&draft)).unwrap_err();
        assert_eq!(err.items(), vec!["block border not preserved at 4".to_string()]);
        let ok = r#"[{"split_id": 1, "line_ids": "1,2"}, {"split_id": 2, "line_ids": "3"}, {"split_id": 3, "line_ids": "4,5,6,7"}]"#;
        assert!(parse_and_validate(ok, &doc(7), TemplateId::Restoration, Some(&draft)).is_ok());
    }

    #[test]
    fn repair_closes_gaps() {
        let r = repair(&seg(&[&[1, 2], &[4, 5, 6, 7]]), &doc(7), None);
        assert_eq!(lines(&r.segmentation), vec![vec![1, 2, 3], vec![4, 5, 6, 7]]);
        assert!(r.actions.iter().any(|a| a == "closed gaps at 3"));
    }

    #[test]
    fn repair_drops_duplicates() {
        let r = repair(&seg(&[&[1, 2, 3, 4], &[3, 4, 5, 6, 7]]), &doc(7), None);
        assert_eq!(lines(&r.segmentation), vec![vec![1, 2, 3, 4], vec![5, 6, 7]]);
        assert!(r.actions.iter().any(|a| a == "dropped duplicate ids 3,4"));
    }

    #[test]
    fn repair_clips_sorts_and_renumbers() {
        let input = vec![
            Segment {
                split_id: 7,
                line_ids: vec![5, 6, 9],
                topic: Some("b".into()),
            },
            Segment {
                split_id: 7,
                line_ids: vec![0, 2, 3],
                topic: Some("a".into()),
            },
        ];
        let r = repair(&input, &doc(6), None);
        assert_eq!(lines(&r.segmentation), vec![vec![1, 2, 3, 4], vec![5, 6]]);
        assert_eq!(r.segmentation.segments[0].topic.as_deref(), Some("a"));
        assert_eq!(r.segmentation.segments[1].split_id, 2);
        assert!(validate_segmentation(&doc(6), &r.segmentation).is_ok());
        assert!(!r.actions.is_empty());
    }

    #[test]
    fn repair_of_nothing_is_single_segment() {
        let r = repair(&seg(&[&[99]]), &doc(4), None);
        assert_eq!(lines(&r.segmentation), vec![vec![1, 2, 3, 4]]);
    }

    #[test]
    fn repair_restores_draft_borders() {
        let draft = DraftBlocks {
            blocks: vec![vec![1, 2, 3], vec![4, 5]],
        };
        let r = repair(&seg(&[&[1], &[2, 3, 4, 5]]), &doc(5), Some(&draft));
        assert_eq!(lines(&r.segmentation), vec![vec![1], vec![2, 3], vec![4, 5]]);
    }

    #[test]
    fn repair_is_identity_on_valid_input_and_idempotent() {
        let valid = seg(&[&[1, 2], &[3], &[4, 5]]);
        let r = repair(&valid, &doc(5), None);
        assert_eq!(r.segmentation.segments, valid);
        assert!(r.actions.is_empty());
        let messy = repair(&seg(&[&[3, 1], &[2, 5, 9]]), &doc(5), None);
        let again = repair(&messy.segmentation.segments, &doc(5), None);
        assert_eq!(again.segmentation, messy.segmentation);
        assert!(again.actions.is_empty());
    }
}
