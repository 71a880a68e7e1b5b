//! Token normalisation profiles and sparse term vectors.

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ClassicalError;
use crate::corpus::tokenize;

const AR_STOPWORDS: &str = include_str!("stopwords/ar.txt");
const EN_STOPWORDS: &str = include_str!("stopwords/en.txt");

/// Text normalisation applied before building term vectors.
///
/// `stopword_list_id` is `"none"`, a built-in list (`"ar"`, `"en"`), or a
/// path to a one-token-per-line file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationProfile {
    pub lowercase: bool,
    pub strip_diacritics: bool,
    pub normalize_alef_yaa_ta: bool,
    pub stopword_list_id: String,
    pub light_stemming: bool,
}

impl Default for NormalizationProfile {
    fn default() -> Self {
        Self::plain()
    }
}

impl NormalizationProfile {
    /// Lowercasing only.
    pub fn plain() -> Self {
        Self {
            lowercase: true,
            strip_diacritics: false,
            normalize_alef_yaa_ta: false,
            stopword_list_id: "none".into(),
            light_stemming: false,
        }
    }

    /// The Arabic-adapted profile: every option on, Arabic stopwords.
    pub fn arabic() -> Self {
        Self {
            lowercase: true,
            strip_diacritics: true,
            normalize_alef_yaa_ta: true,
            stopword_list_id: "ar".into(),
            light_stemming: true,
        }
    }

    /// No transformation at all; tokens are whitespace-split text.
    pub fn identity() -> Self {
        Self {
            lowercase: false,
            ..Self::plain()
        }
    }
}

fn is_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}' | '\u{0670}' | '\u{0640}')
}

fn fold(c: char) -> char {
    match c {
        'أ' | 'إ' | 'آ' | 'ٱ' => 'ا',
        'ى' => 'ي',
        'ة' => 'ه',
        _ => c,
    }
}

const PREFIXES: [&str; 7] = ["وال", "بال", "كال", "فال", "لل", "ال", "و"];
const SUFFIXES: [&str; 11] = ["ها", "ان", "ات", "ون", "ين", "يه", "ية", "ه", "ة", "ي", "ا"];

/// One round of prefix and suffix stripping, keeping at least two letters.
fn stem_once(token: &str) -> Option<String> {
    let len = token.chars().count();
    for p in PREFIXES {
        let plen = p.chars().count();
        let min_rest = if p == "و" { 3 } else { 2 };
        if let Some(rest) = token.strip_prefix(p) {
            if len - plen >= min_rest {
                return Some(rest.to_string());
            }
        }
    }
    for s in SUFFIXES {
        let slen = s.chars().count();
        if let Some(rest) = token.strip_suffix(s) {
            if len - slen >= 2 {
                return Some(rest.to_string());
            }
        }
    }
    None
}

fn light_stem(token: &str) -> String {
    let mut t = token.to_string();
    while let Some(next) = stem_once(&t) {
        t = next;
    }
    t
}

/// A resolved [`NormalizationProfile`].
#[derive(Debug, Clone)]
pub struct Normalizer {
    profile: NormalizationProfile,
    stopwords: HashSet<String>,
}

impl Normalizer {
    pub fn new(profile: &NormalizationProfile) -> Result<Self, ClassicalError> {
        let raw = match profile.stopword_list_id.as_str() {
            "" | "none" => String::new(),
            "ar" => AR_STOPWORDS.to_string(),
            "en" => EN_STOPWORDS.to_string(),
            path => std::fs::read_to_string(path).map_err(|source| ClassicalError::Stopwords {
                path: PathBuf::from(path),
                source,
            })?,
        };
        let mut n = Self {
            profile: profile.clone(),
            stopwords: HashSet::new(),
        };
        n.stopwords = raw
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| n.normalize_chars(l))
            .collect();
        Ok(n)
    }

    pub fn profile(&self) -> &NormalizationProfile {
        &self.profile
    }

    fn normalize_chars(&self, token: &str) -> Option<String> {
        let mut out = String::with_capacity(token.len());
        for c in token.chars() {
            if self.profile.strip_diacritics && is_diacritic(c) {
                continue;
            }
            let c = if self.profile.normalize_alef_yaa_ta { fold(c) } else { c };
            if self.profile.lowercase {
                out.extend(c.to_lowercase());
            } else {
                out.push(c);
            }
        }
        let trimmed = out.trim_matches(|c: char| !c.is_alphanumeric());
        (!trimmed.is_empty()).then(|| trimmed.to_string())
    }

    /// Normalised form of one token, or `None` if it is dropped.
    pub fn normalize_token(&self, token: &str) -> Option<String> {
        let t = self.normalize_chars(token)?;
        if self.stopwords.contains(&t) {
            return None;
        }
        let t = if self.profile.light_stemming { light_stem(&t) } else { t };
        (!self.stopwords.contains(&t)).then_some(t)
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        tokenize(text).into_iter().filter_map(|t| self.normalize_token(t)).collect()
    }

    /// Normalised tokens joined by single spaces.
    pub fn normalize_text(&self, text: &str) -> String {
        self.tokens(text).join(" ")
    }
}

/// Sparse count vector: `(term id, weight)` sorted by term id.
pub type SparseVec = Vec<(usize, f64)>;

/// Term-count vectors for `texts`; term ids are assigned by first occurrence.
pub fn term_vectors<'a>(normalizer: &Normalizer, texts: impl IntoIterator<Item = &'a str>) -> Vec<SparseVec> {
    let mut vocab: HashMap<String, usize> = HashMap::new();
    texts
        .into_iter()
        .map(|text| {
            let mut counts: HashMap<usize, f64> = HashMap::new();
            for tok in normalizer.tokens(text) {
                let next = vocab.len();
                let id = *vocab.entry(tok).or_insert(next);
                *counts.entry(id).or_default() += 1.0;
            }
            let mut v: SparseVec = counts.into_iter().collect();
            v.sort_by_key(|&(id, _)| id);
            v
        })
        .collect()
}

/// Elementwise sum of sparse vectors.
pub fn sum_sparse<'a>(vectors: impl IntoIterator<Item = &'a SparseVec>) -> SparseVec {
    let mut acc: HashMap<usize, f64> = HashMap::new();
    for v in vectors {
        for &(id, w) in v {
            *acc.entry(id).or_default() += w;
        }
    }
    let mut out: SparseVec = acc.into_iter().collect();
    out.sort_by_key(|&(id, _)| id);
    out
}

/// Cosine similarity; 0 if either vector is empty.
pub fn cosine_sparse(a: &SparseVec, b: &SparseVec) -> f64 {
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    let na: f64 = a.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diacritics_and_folding() {
        let n = Normalizer::new(&NormalizationProfile {
            light_stemming: false,
            stopword_list_id: "none".into(),
            ..NormalizationProfile::arabic()
        })
        .unwrap();
        assert_eq!(n.normalize_text("كَتَبَ"), "كتب");
        assert_eq!(n.normalize_text("أحمد إلى مكتبة مستشفى"), "احمد الي مكتبه مستشفي");
        assert_eq!(n.normalize_text("جمـــيل"), "جميل");
    }

    #[test]
    fn stopwords_and_punctuation() {
        let n = Normalizer::new(&NormalizationProfile {
            stopword_list_id: "en".into(),
            ..NormalizationProfile::plain()
        })
        .unwrap();
        assert_eq!(n.normalize_text("The cat, and THE dog!"), "cat dog");
    }

    #[test]
    fn stemming_reaches_fixpoint() {
        let n = Normalizer::new(&NormalizationProfile::arabic()).unwrap();
        for word in ["والمكتبات", "بالمدرسة", "كتابها", "المعلمون"] {
            let once = n.normalize_text(word);
            assert_eq!(n.normalize_text(&once), once, "{word}");
        }
        assert_eq!(n.normalize_text("والمعلمون"), "معلم");
    }

    #[test]
    fn term_ids_follow_first_occurrence() {
        let n = Normalizer::new(&NormalizationProfile::identity()).unwrap();
        let v = term_vectors(&n, ["b a b", "c a"]);
        assert_eq!(v[0], vec![(0, 2.0), (1, 1.0)]);
        assert_eq!(v[1], vec![(1, 1.0), (2, 1.0)]);
        assert!((cosine_sparse(&v[0], &v[1]) - 1.0 / (5f64.sqrt() * 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(cosine_sparse(&v[0], &Vec::new()), 0.0);
    }

    #[test]
    fn missing_stopword_file() {
        let p = NormalizationProfile {
            stopword_list_id: "/nonexistent/stop.txt".into(),
            ..NormalizationProfile::plain()
        };
        assert!(Normalizer::new(&p).unwrap_err().to_string().contains("/nonexistent/stop.txt"));
    }
}
