use serde::{Deserialize, Serialize};

use super::{render_prompt, LlmError, TemplateId};
use crate::corpus::io::segmentation_json;
use crate::corpus::{validate_segmentation, Document, Segmentation};
use crate::corruption::DraftBlocks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SftTask {
    Segment,
    Restore,
}

impl SftTask {
    pub fn template(self) -> TemplateId {
        match self {
            SftTask::Segment => TemplateId::Segmentation,
            SftTask::Restore => TemplateId::Restoration,
        }
    }
}

/// One supervised fine-tuning example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub task: SftTask,
    pub prompt: String,
    pub completion: String,
    pub doc_id: String,
}

impl SftRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// A clean segmentation example and a restoration example over `corrupted`,
/// both answered with the gold segmentation.
pub fn emit_sft_pairs(doc: &Document, gold: &Segmentation, corrupted: &DraftBlocks) -> Result<[SftRecord; 2], LlmError> {
    let verdict = validate_segmentation(doc, gold);
    if !verdict.is_ok() {
        let items: Vec<String> = verdict.violations.iter().map(|v| v.to_string()).collect();
        return Err(LlmError::Template(format!("gold for {} is invalid: {}", doc.id(), items.join("; "))));
    }
    let answer = segmentation_json(&gold.without_topics(), false);
    let record = |task: SftTask, draft| -> Result<SftRecord, LlmError> {
        Ok(SftRecord {
            task,
            prompt: render_prompt(SftTask::template(task), doc, draft)?,
            completion: answer.clone(),
            doc_id: doc.id().to_string(),
        })
    };
    Ok([
        record(SftTask::Segment, None)?,
        record(SftTask::Restore, Some(corrupted))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::parse_and_validate;

    fn doc7() -> Document {
        crate::classical::tests::doc(&vec!["y".to_string(); 7])
    }

    #[test]
    fn restoration_record_over_merged_blocks() {
        let d = doc7();
        let gold = Segmentation::from_lengths(d.id(), 1, &[2, 2, 3]);
        let draft = DraftBlocks {
            blocks: vec![vec![1, 2, 3, 4], vec![5, 6, 7]],
        };
        let [seg, rest] = emit_sft_pairs(&d, &gold, &draft).unwrap();
        assert_eq!(seg.task, SftTask::Segment);
        assert!(rest.prompt.contains("DRAFT BLOCK 2") && !rest.prompt.contains("DRAFT BLOCK 3"));
        for r in [&seg, &rest] {
            let back = parse_and_validate(&r.completion, &d, r.task.template(), Some(&draft).filter(|_| r.task == SftTask::Restore)).unwrap();
            assert_eq!(back, gold);
        }
        assert!(seg.to_json_line().starts_with("{\"task\":\"segment\",\"prompt\":"));
    }

    #[test]
    fn identity_corruption_answer_equals_blocks() {
        let d = doc7();
        let gold = Segmentation::from_lengths(d.id(), 1, &[3, 4]);
        let draft = DraftBlocks::from_segmentation(&gold);
        let [_, rest] = emit_sft_pairs(&d, &gold, &draft).unwrap();
        let answer = parse_and_validate(&rest.completion, &d, TemplateId::Restoration, Some(&draft)).unwrap();
        assert_eq!(DraftBlocks::from_segmentation(&answer), draft);
    }

    #[test]
    fn invalid_gold_is_rejected() {
        let d = doc7();
        let gold = Segmentation::from_lengths(d.id(), 1, &[3]);
        let draft = DraftBlocks {
            blocks: vec![(1..=7).collect()],
        };
        assert!(emit_sft_pairs(&d, &gold, &draft).is_err());
    }
}
