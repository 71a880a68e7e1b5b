//! Conversion of raw sources into [`Document`]s with line ids starting at 1.
//!
//! Recognised layouts:
//! * `transcript`: tab-separated `speaker<TAB>text` (or `id<TAB>speaker<TAB>text`);
//! * `dialogue`: `Speaker: text`, optionally preceded by two timestamps as in
//!   telephone-speech transcripts (`12.30 15.02 A: text`);
//! * `prose`: running text split into sentences, one utterance per sentence.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CorpusError, DataSource, DocMeta, Document, LineId, Provenance, Utterance, PROSE_SPEAKER};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{source_name}: unrecognized layout{}; offending lines: {}", .expected.map(|e| format!(" for {e}")).unwrap_or_default(), .sample.join(" | "))]
    Unrecognized {
        source_name: String,
        expected: Option<&'static str>,
        sample: Vec<String>,
    },
    #[error("LDC stub {doc_id} needs the licensed transcript at {}; pass the local LDC directory", .path.display())]
    MissingLdcSource { doc_id: String, path: PathBuf },
    #[error("LDC stub {doc_id}: lines {first}..={last} are outside {} ({len} lines)", .path.display())]
    LdcRange {
        doc_id: String,
        path: PathBuf,
        first: usize,
        last: usize,
        len: usize,
    },
    #[error("unknown layout {0:?}; expected auto, transcript, dialogue or prose")]
    UnknownLayout(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    #[default]
    Auto,
    Transcript,
    Dialogue,
    Prose,
}

impl FromStr for Layout {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Layout::Auto),
            "transcript" => Ok(Layout::Transcript),
            "dialogue" => Ok(Layout::Dialogue),
            "prose" => Ok(Layout::Prose),
            other => Err(IngestError::UnknownLayout(other.to_string())),
        }
    }
}

const TERMINALS: [char; 5] = ['.', '!', '?', '؟', '۔'];
const CLOSERS: [char; 8] = ['"', '\'', '”', '’', '»', ')', ']', '}'];

/// Tokens ending in '.' that do not end a sentence.
const ABBREVIATIONS: [&str; 24] = [
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.", "i.e.",
    "no.", "fig.", "inc.", "ltd.", "co.", "jan.", "feb.", "aug.", "sept.", "oct.", "nov.", "dec.",
];

fn is_abbreviation(token: &str) -> bool {
    let lower = token
        .trim_start_matches(|c: char| CLOSERS.contains(&c) || c == '(' || c == '“')
        .to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // single initials such as "J." and Arabic "د." (doctor)
    let mut chars = lower.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_alphabetic())
}

/// Splits running text into sentences on terminal punctuation, honouring
/// an abbreviation guard list. Blank lines always end a sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for paragraph in text.split("\n\n") {
        let chars: Vec<char> = paragraph.chars().collect();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            if TERMINALS.contains(&chars[i]) {
                let term = chars[i];
                let mut end = i + 1;
                while end < chars.len() && (TERMINALS.contains(&chars[end]) || CLOSERS.contains(&chars[end])) {
                    end += 1;
                }
                let at_break = end == chars.len() || chars[end].is_whitespace();
                let token_start = chars[start..i]
                    .iter()
                    .rposition(|c| c.is_whitespace())
                    .map_or(start, |p| start + p + 1);
                let token: String = chars[token_start..end].iter().collect();
                if at_break && !(term == '.' && end == i + 1 && is_abbreviation(&token)) {
                    push_sentence(&mut out, &chars[start..end]);
                    start = end;
                }
                i = end;
            } else {
                i += 1;
            }
        }
        push_sentence(&mut out, &chars[start..]);
    }
    out
}

fn push_sentence(out: &mut Vec<String>, chars: &[char]) {
    let s: String = chars.iter().collect();
    let s = s.split_whitespace().collect::<Vec<_>>().join(" ");
    if !s.is_empty() {
        out.push(s);
    }
}

struct RawTurn {
    source_line: u64,
    speaker: String,
    text: String,
}

fn parse_transcript_line(line: &str) -> Option<(Option<String>, String, String)> {
    let cols: Vec<&str> = line.split('\t').collect();
    match cols.as_slice() {
        [speaker, text] if !text.trim().is_empty() => {
            Some((None, speaker.trim().to_string(), text.trim().to_string()))
        }
        [id, speaker, text] if !text.trim().is_empty() => Some((
            Some(id.trim().to_string()),
            speaker.trim().to_string(),
            text.trim().to_string(),
        )),
        _ => None,
    }
}

fn is_timestamp(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || c == '.')
}

fn parse_dialogue_line(line: &str) -> Option<(String, String)> {
    let mut rest = line.trim();
    let mut parts = rest.splitn(3, char::is_whitespace);
    if let (Some(a), Some(b), Some(tail)) = (parts.next(), parts.next(), parts.next()) {
        if is_timestamp(a) && is_timestamp(b) {
            rest = tail.trim_start();
        }
    }
    let colon = rest.find(':')?;
    let speaker = rest[..colon].trim();
    let text = rest[colon + 1..].trim();
    let speaker_ok = !speaker.is_empty()
        && speaker.chars().count() <= 40
        && speaker.split_whitespace().count() <= 4;
    (speaker_ok && !text.is_empty()).then(|| (speaker.to_string(), text.to_string()))
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (u64, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn unrecognized(source_name: &str, expected: Option<&'static str>, bad: Vec<&str>) -> IngestError {
    IngestError::Unrecognized {
        source_name: source_name.to_string(),
        expected,
        sample: bad.into_iter().take(3).map(|l| l.chars().take(80).collect()).collect(),
    }
}

fn turns_transcript(text: &str, source_name: &str) -> Result<Vec<RawTurn>, IngestError> {
    let mut turns = Vec::new();
    let mut bad = Vec::new();
    for (n, line) in numbered_lines(text) {
        match parse_transcript_line(line) {
            Some((id, speaker, text)) => turns.push(RawTurn {
                source_line: id.and_then(|i| i.parse().ok()).unwrap_or(n),
                speaker,
                text,
            }),
            None => bad.push(line),
        }
    }
    if !bad.is_empty() || turns.is_empty() {
        return Err(unrecognized(source_name, Some("transcript"), bad));
    }
    Ok(turns)
}

fn turns_dialogue(text: &str, source_name: &str) -> Result<Vec<RawTurn>, IngestError> {
    let mut turns = Vec::new();
    let mut bad = Vec::new();
    for (n, line) in numbered_lines(text) {
        match parse_dialogue_line(line) {
            Some((speaker, text)) => turns.push(RawTurn {
                source_line: n,
                speaker,
                text,
            }),
            None => bad.push(line),
        }
    }
    if !bad.is_empty() || turns.is_empty() {
        return Err(unrecognized(source_name, Some("dialogue"), bad));
    }
    Ok(turns)
}

fn turns_prose(text: &str, source_name: &str) -> Result<Vec<RawTurn>, IngestError> {
    let sentences = split_sentences(text);
    if sentences.is_empty() {
        return Err(unrecognized(source_name, Some("prose"), text.lines().collect()));
    }
    Ok(sentences
        .into_iter()
        .enumerate()
        .map(|(i, text)| RawTurn {
            source_line: i as u64 + 1,
            speaker: PROSE_SPEAKER.to_string(),
            text,
        })
        .collect())
}

/// Picks a layout from the content: all-tab lines → transcript, all
/// `Speaker: text` lines → dialogue, otherwise prose if any terminal
/// punctuation is present.
pub fn detect_layout(text: &str) -> Option<Layout> {
    let lines: Vec<&str> = numbered_lines(text).map(|(_, l)| l).collect();
    if lines.is_empty() {
        return None;
    }
    if lines.iter().all(|l| parse_transcript_line(l).is_some()) {
        return Some(Layout::Transcript);
    }
    if lines.iter().all(|l| parse_dialogue_line(l).is_some()) {
        return Some(Layout::Dialogue);
    }
    text.contains(&TERMINALS[..]).then_some(Layout::Prose)
}

/// Parses `text` in the given layout into a document numbered from 1.
pub fn ingest_text(
    text: &str,
    layout: Layout,
    mut meta: DocMeta,
    source_name: &str,
) -> Result<Document, IngestError> {
    let layout = match layout {
        Layout::Auto => detect_layout(text).ok_or_else(|| {
            unrecognized(source_name, None, numbered_lines(text).map(|(_, l)| l).collect())
        })?,
        other => other,
    };
    let turns = match layout {
        Layout::Transcript => turns_transcript(text, source_name)?,
        Layout::Dialogue => turns_dialogue(text, source_name)?,
        Layout::Prose | Layout::Auto => turns_prose(text, source_name)?,
    };
    meta.provenance = Some(Provenance {
        source: source_name.to_string(),
        original_line_ids: turns.iter().map(|t| t.source_line).collect(),
    });
    let utterances = turns
        .into_iter()
        .enumerate()
        .map(|(i, t)| Utterance {
            line_id: i as LineId + 1,
            text: t.text,
            speaker: t.speaker,
        })
        .collect();
    Ok(Document::new(meta, utterances)?)
}

pub fn ingest_file(path: &Path, layout: Layout, meta: DocMeta) -> Result<Document, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_text(&text, layout, meta, &path.display().to_string())
}

/// Reference to a licensed telephone-speech transcript: the benchmark only
/// ships ids and line ranges, the text comes from the user's own copy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LdcStub {
    pub doc_id: String,
    pub language_clue: String,
    pub genre: String,
    /// Transcript path relative to the LDC directory.
    pub file: String,
    /// 1-based inclusive line range within `file`.
    pub first_line: usize,
    pub last_line: usize,
}

/// Reads each stub's line range from `ldc_dir` and parses it as dialogue.
pub fn hydrate_ldc(stubs: &[LdcStub], ldc_dir: Option<&Path>) -> Result<Vec<Document>, IngestError> {
    stubs
        .iter()
        .map(|stub| {
            let path = match ldc_dir {
                Some(dir) => dir.join(&stub.file),
                None => PathBuf::from(&stub.file),
            };
            if ldc_dir.is_none() || !path.is_file() {
                return Err(IngestError::MissingLdcSource {
                    doc_id: stub.doc_id.clone(),
                    path,
                });
            }
            let text = fs::read_to_string(&path).map_err(|source| CorpusError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let lines: Vec<&str> = text.lines().collect();
            if stub.first_line == 0 || stub.first_line > stub.last_line || stub.last_line > lines.len() {
                return Err(IngestError::LdcRange {
                    doc_id: stub.doc_id.clone(),
                    path,
                    first: stub.first_line,
                    last: stub.last_line,
                    len: lines.len(),
                });
            }
            let source_name = format!("{}:{}-{}", stub.file, stub.first_line, stub.last_line);
            let mut turns = Vec::new();
            let mut bad = Vec::new();
            for (offset, line) in lines[stub.first_line - 1..stub.last_line].iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match parse_dialogue_line(line) {
                    Some((speaker, text)) => {
                        turns.push(((stub.first_line + offset) as u64, speaker, text))
                    }
                    None => bad.push(*line),
                }
            }
            if !bad.is_empty() || turns.is_empty() {
                return Err(unrecognized(&source_name, Some("dialogue"), bad));
            }
            let mut meta = DocMeta::new(&stub.doc_id, DataSource::Ldc, &stub.language_clue, &stub.genre);
            meta.provenance = Some(Provenance {
                source: source_name,
                original_line_ids: turns.iter().map(|t| t.0).collect(),
            });
            let doc = Document::from_turns(meta, turns.into_iter().map(|(_, s, t)| (s, t)))?;
            Ok(doc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> DocMeta {
        DocMeta::new("t", DataSource::Other, "Gulf", "casual")
    }

    #[test]
    fn seven_line_transcript() {
        let text = "A\tSalam, I am calling about my tickets.\nB\tNo problem.\nA\tThe QR code fails.\nB\tI found your order.\nB\tResending now.\nA\tWhere should I park?\nB\tUse West Parking.\n";
        let d = ingest_text(text, Layout::Auto, meta(), "t.tsv").unwrap();
        assert_eq!(d.len(), 7);
        assert_eq!(d.utterances()[1].speaker, "B");
        assert_eq!(d.first_line(), 1);
    }

    #[test]
    fn dialogue_with_timestamps_keeps_source_lines() {
        let text = "\n12.10 14.55 A: مرحبا\n\n15.00 16.20 B: هلا\n";
        let d = ingest_text(text, Layout::Dialogue, meta(), "call.txt").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.utterances()[0].text, "مرحبا");
        assert_eq!(
            d.meta().provenance.as_ref().unwrap().original_line_ids,
            vec![2, 4]
        );
    }

    #[test]
    fn prose_sentences_become_utterances() {
        let text = "The economy grew by 3.5 percent. Dr. Salem disagreed! Was it real?";
        let d = ingest_text(text, Layout::Auto, meta(), "news.txt").unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.utterances().iter().all(|u| u.speaker == PROSE_SPEAKER));
        assert_eq!(d.utterances()[1].text, "Dr. Salem disagreed!");
    }

    #[test]
    fn arabic_terminals() {
        let s = split_sentences("هل أنت بخير؟ نعم، الحمد لله. شكرا");
        assert_eq!(s, vec!["هل أنت بخير؟", "نعم، الحمد لله.", "شكرا"]);
    }

    #[test]
    fn quotes_and_initials() {
        let s = split_sentences("He said \"stop.\" Then J. Smith left. End");
        assert_eq!(s, vec!["He said \"stop.\"", "Then J. Smith left.", "End"]);
    }

    #[test]
    fn unrecognized_layout_reports_sample() {
        let err = ingest_text("no colon here\nnor here", Layout::Dialogue, meta(), "x").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("no colon here"), "{msg}");
        assert!(ingest_text("  \n ", Layout::Auto, meta(), "x").is_err());
    }

    #[test]
    fn ldc_stub_without_directory_names_path() {
        let stub = LdcStub {
            doc_id: "ldc-gl-1".into(),
            language_clue: "Gulf".into(),
            genre: "casual".into(),
            file: "callhome/gulf/4012.txt".into(),
            first_line: 1,
            last_line: 3,
        };
        let err = hydrate_ldc(std::slice::from_ref(&stub), None).unwrap_err();
        assert!(err.to_string().contains("callhome/gulf/4012.txt"));

        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("callhome/gulf")).unwrap();
        std::fs::write(
            dir.path().join("callhome/gulf/4012.txt"),
            "0.0 1.0 A: الو\n1.0 2.0 B: هلا\n2.0 3.0 A: شلونك\n",
        )
        .unwrap();
        let docs = hydrate_ldc(&[stub], Some(dir.path())).unwrap();
        assert_eq!(docs[0].len(), 3);
        assert_eq!(docs[0].meta().data_source, DataSource::Ldc);
    }
}
