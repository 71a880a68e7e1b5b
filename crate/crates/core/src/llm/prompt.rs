use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LlmError;
use crate::corpus::io::utterances_jsonl;
use crate::corpus::{Document, Utterance};
use crate::corruption::DraftBlocks;

const SYNTHETIC: &str = include_str!("templates/synthetic_annotation.txt");
const SEGMENTATION: &str = include_str!("templates/segmentation.txt");
const RESTORATION: &str = include_str!("templates/restoration.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    SyntheticAnnotation,
    Segmentation,
    Restoration,
}

impl TemplateId {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::SyntheticAnnotation => "synthetic_annotation",
            TemplateId::Segmentation => "segmentation",
            TemplateId::Restoration => "restoration",
        }
    }

    pub fn body(self) -> &'static str {
        match self {
            TemplateId::SyntheticAnnotation => SYNTHETIC,
            TemplateId::Segmentation => SEGMENTATION,
            TemplateId::Restoration => RESTORATION,
        }
    }

    /// Placeholder spellings in this template's body.
    fn placeholders(self) -> &'static [(&'static str, Slot)] {
        match self {
            TemplateId::SyntheticAnnotation => &[
                ("{data_source}", Slot::DataSource),
                ("{language_clue}", Slot::LanguageClue),
                ("{conversation_str}", Slot::Conversation),
            ],
            TemplateId::Segmentation => &[
                ("{{ data_source }}", Slot::DataSource),
                ("{{ language_clue }}", Slot::LanguageClue),
                ("{{ conversation_str }}", Slot::Conversation),
            ],
            TemplateId::Restoration => &[
                ("{{ data_source }}", Slot::DataSource),
                ("{{ language_clue }}", Slot::LanguageClue),
                ("{{ draft_blocks }}", Slot::DraftBlocks),
            ],
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synthetic_annotation" => Ok(TemplateId::SyntheticAnnotation),
            "segmentation" => Ok(TemplateId::Segmentation),
            "restoration" => Ok(TemplateId::Restoration),
            other => Err(format!("unknown template {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    DataSource,
    LanguageClue,
    Conversation,
    DraftBlocks,
}

fn jsonl(utts: &[Utterance]) -> String {
    utterances_jsonl(utts).trim_end_matches('\n').to_string()
}

/// Draft blocks as `===== DRAFT BLOCK i =====` headers, each followed by its utterances.
fn draft_section(doc: &Document, draft: &DraftBlocks) -> String {
    let utts = doc.utterances();
    let first = doc.first_line();
    draft
        .blocks
        .iter()
        .enumerate()
        .map(|(i, block)| {
            let lo = (block[0] - first) as usize;
            let hi = lo + block.len();
            format!("===== DRAFT BLOCK {} =====\n{}", i + 1, jsonl(&utts[lo..hi]))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Instantiates a template in a single left-to-right pass, so text inside
/// substituted values is never re-expanded.
pub fn render_prompt(template: TemplateId, doc: &Document, draft: Option<&DraftBlocks>) -> Result<String, LlmError> {
    match (template, draft) {
        (TemplateId::Restoration, None) => {
            return Err(LlmError::Template("restoration prompt needs draft blocks".into()))
        }
        (TemplateId::Restoration, Some(d)) => d
            .check_tiling(doc.first_line(), doc.last_line())
            .map_err(|e| LlmError::Template(format!("draft blocks do not tile {}: {e}", doc.id())))?,
        (_, Some(_)) => {
            return Err(LlmError::Template(format!("{template} prompt takes no draft blocks")))
        }
        (_, None) => {}
    }
    let value = |slot: Slot| match slot {
        Slot::DataSource => doc.meta().data_source.display_name().to_string(),
        Slot::LanguageClue => doc.meta().language_clue.clone(),
        Slot::Conversation => jsonl(doc.utterances()),
        Slot::DraftBlocks => draft_section(doc, draft.expect("checked above")),
    };
    let body = template.body();
    let slots = template.placeholders();
    let mut out = String::with_capacity(body.len() + doc.len() * 64);
    let mut rest = body;
    while let Some(pos) = rest.find('{') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        match slots.iter().find(|(token, _)| rest.starts_with(token)) {
            Some((token, slot)) => {
                out.push_str(&value(*slot));
                rest = &rest[token.len()..];
            }
            None => {
                out.push('{');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    Ok(out)
}
