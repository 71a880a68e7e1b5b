//! Prompted segmentation through a chat-completion model.
//!
//! [`llm_segment`] renders a template, asks the model, validates the answer
//! and, when it breaks coverage rules, re-prompts once with the violations
//! listed. A second invalid answer goes through [`repair`]; an answer with no
//! parseable array at all falls back to a single segment and is flagged.

mod client;
mod prompt;
mod sft;
mod validate;

use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use client::{ChatMessage, ChatModel, ChatReply, HttpChatModel, LlmConfig};
pub use prompt::{render_prompt, TemplateId};
pub use sft::{emit_sft_pairs, SftRecord, SftTask};
pub use validate::{extract_json_array, parse_and_validate, repair, Rejection, Repaired};

use crate::corpus::{Document, Segmentation};
use crate::corruption::DraftBlocks;
use crate::http::HttpError;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("{0}")]
    Template(String),
    #[error("invalid llm config: {0}")]
    Config(String),
    #[error(transparent)]
    Http(#[from] HttpError),
    #[error("unexpected chat response: {0}")]
    Response(String),
}

/// How the final segmentation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Accepted,
    Repaired,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CallMeta {
    pub model_id: String,
    pub mode: TemplateId,
    /// Wall-clock time over all calls; informational only.
    pub latency_ms: u64,
    /// Corrective re-prompts sent after an invalid answer.
    pub retries: u32,
    /// Transport retries summed over calls.
    pub transport_retries: u32,
    pub resolution: Resolution,
    /// Problems found in each rejected answer, in call order.
    pub rejections: Vec<Vec<String>>,
    pub repair_actions: Vec<String>,
    /// Hex sha256 of every raw answer, in call order.
    pub response_sha256: Vec<String>,
}

impl CallMeta {
    /// Set when the output did not come straight from the model.
    pub fn flagged(&self) -> bool {
        self.resolution == Resolution::Fallback
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlmOutcome {
    pub segmentation: Segmentation,
    pub meta: CallMeta,
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn corrective_message(rejection: &Rejection) -> String {
    let mut msg = String::from("Your previous answer is invalid:\n");
    for item in rejection.items() {
        msg.push_str("- ");
        msg.push_str(&item);
        msg.push('\n');
    }
    msg.push_str("Fix these problems and output ONLY the corrected JSON array, following the original rules.");
    msg
}

/// Segments `doc` with `model`. Transport failures surface as errors so the
/// caller can mark the document unscored.
pub async fn llm_segment(
    doc: &Document,
    model: &dyn ChatModel,
    mode: TemplateId,
    draft: Option<&DraftBlocks>,
) -> Result<LlmOutcome, LlmError> {
    let prompt = render_prompt(mode, doc, draft)?;
    let started = Instant::now();
    let mut meta = CallMeta {
        model_id: model.model_id().to_string(),
        mode,
        latency_ms: 0,
        retries: 0,
        transport_retries: 0,
        resolution: Resolution::Accepted,
        rejections: Vec::new(),
        repair_actions: Vec::new(),
        response_sha256: Vec::new(),
    };
    let mut messages = vec![ChatMessage::user(prompt)];
    let mut last_parsed: Option<Rejection> = None;
    let mut segmentation = None;

    for attempt in 0..2 {
        let reply = model.complete(&messages).await?;
        meta.transport_retries += reply.retries;
        meta.response_sha256.push(sha256_hex(&reply.content));
        match parse_and_validate(&reply.content, doc, mode, draft) {
            Ok(seg) => {
                segmentation = Some(seg);
                break;
            }
            Err(rejection) => {
                tracing::debug!(doc = doc.id(), attempt, "rejected answer: {rejection}");
                meta.rejections.push(rejection.items());
                if attempt == 0 {
                    meta.retries += 1;
                    messages.push(ChatMessage::assistant(reply.content));
                    messages.push(ChatMessage::user(corrective_message(&rejection)));
                }
                if rejection.segments().is_some() {
                    last_parsed = Some(rejection);
                }
            }
        }
    }

    let segmentation = match segmentation {
        Some(seg) => seg,
        None => match last_parsed.as_ref().and_then(Rejection::segments) {
            Some(segments) => {
                let repaired = repair(segments, doc, draft.filter(|_| mode == TemplateId::Restoration));
                meta.resolution = Resolution::Repaired;
                meta.repair_actions = repaired.actions;
                repaired.segmentation
            }
            None => {
                tracing::warn!(doc = doc.id(), "no parseable answer; falling back to a single segment");
                meta.resolution = Resolution::Fallback;
                meta.repair_actions.push("fallback to single segment".into());
                match draft.filter(|_| mode == TemplateId::Restoration) {
                    Some(d) => d.to_segmentation(doc.id()),
                    None => Segmentation::single(doc),
                }
            }
        },
    };
    meta.latency_ms = started.elapsed().as_millis() as u64;
    Ok(LlmOutcome { segmentation, meta })
}
