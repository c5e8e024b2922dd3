//! Per-story feature views: embeddings, unigram vocabularies and POS bigrams.
//!
//! Embeddings and POS tags come from sidecar files produced by external
//! tooling; vocabularies are built here from the story text.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::StoryRecord;
use crate::{io, Error, Result};

/// Character cap applied before vocabulary construction.
pub const DEFAULT_CHAR_CAP: usize = 5000;

pub type Vocab = BTreeSet<String>;
pub type PosBigrams = BTreeSet<(String, String)>;

#[derive(Debug, Clone, PartialEq)]
pub struct StoryFeatures {
    pub story_id: String,
    pub embedding: Option<Vec<f64>>,
    pub vocab: Vocab,
    pub pos_bigrams: PosBigrams,
}

/// Feature views keyed by story id.
#[derive(Debug, Clone, Default)]
pub struct FeatureMap {
    pub dim: Option<usize>,
    pub stories: HashMap<String, StoryFeatures>,
}

impl FeatureMap {
    pub fn get(&self, story_id: &str) -> Option<&StoryFeatures> {
        self.stories.get(story_id)
    }
}

/// Lowercased runs of letters, digits and apostrophes.
pub fn build_vocab(text: &str) -> Vocab {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

/// Same as [`build_vocab`] after cutting the text to its first `cap` characters.
pub fn build_vocab_capped(text: &str, cap: usize) -> Vocab {
    match text.char_indices().nth(cap) {
        Some((byte, _)) => build_vocab(&text[..byte]),
        None => build_vocab(text),
    }
}

pub fn build_pos_bigrams<S: AsRef<str>>(tags: &[S]) -> PosBigrams {
    tags.windows(2)
        .map(|w| (w[0].as_ref().to_string(), w[1].as_ref().to_string()))
        .collect()
}

#[derive(Debug, Deserialize)]
struct EmbeddingRow {
    story_id: String,
    embedding: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct PosRow {
    story_id: String,
    pos_tags: Vec<String>,
}

/// Read an embeddings sidecar and check it against the corpus.
///
/// Every corpus story must be present, all vectors must share one dimension
/// and contain only finite values. Extra ids in the sidecar are ignored.
pub fn load_embeddings(path: &Path, corpus: &[StoryRecord]) -> Result<BTreeMap<String, Vec<f64>>> {
    let rows: Vec<EmbeddingRow> = io::read_jsonl(path)?;
    let mut by_id: HashMap<String, Vec<f64>> = rows
        .into_iter()
        .map(|r| (r.story_id, r.embedding))
        .collect();
    check_embeddings(corpus, &mut by_id)
}

fn check_embeddings(
    corpus: &[StoryRecord],
    by_id: &mut HashMap<String, Vec<f64>>,
) -> Result<BTreeMap<String, Vec<f64>>> {
    let missing: Vec<String> = corpus
        .iter()
        .filter(|r| !by_id.contains_key(&r.story_id))
        .map(|r| r.story_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFeatures(missing));
    }
    let mut out = BTreeMap::new();
    let mut dim = None;
    for r in corpus {
        let v = by_id.remove(&r.story_id).expect("presence checked");
        let expected = *dim.get_or_insert(v.len());
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                story_id: r.story_id.clone(),
                expected,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(r.story_id.clone()));
        }
        out.insert(r.story_id.clone(), v);
    }
    Ok(out)
}

/// Read a POS sidecar into bigram sets; every corpus story must be present.
pub fn load_pos_bigrams(path: &Path, corpus: &[StoryRecord]) -> Result<BTreeMap<String, PosBigrams>> {
    let rows: Vec<PosRow> = io::read_jsonl(path)?;
    let by_id: HashMap<String, Vec<String>> =
        rows.into_iter().map(|r| (r.story_id, r.pos_tags)).collect();
    let missing: Vec<String> = corpus
        .iter()
        .filter(|r| !by_id.contains_key(&r.story_id))
        .map(|r| r.story_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFeatures(missing));
    }
    Ok(corpus
        .iter()
        .map(|r| (r.story_id.clone(), build_pos_bigrams(&by_id[&r.story_id])))
        .collect())
}

/// Assemble the full feature map for a corpus.
pub fn build_feature_map(
    corpus: &[StoryRecord],
    embeddings: &BTreeMap<String, Vec<f64>>,
    pos: &BTreeMap<String, PosBigrams>,
    char_cap: usize,
) -> FeatureMap {
    use rayon::prelude::*;
    let stories: HashMap<String, StoryFeatures> = corpus
        .par_iter()
        .map(|r| {
            let f = StoryFeatures {
                story_id: r.story_id.clone(),
                embedding: embeddings.get(&r.story_id).cloned(),
                vocab: build_vocab_capped(&r.text, char_cap),
                pos_bigrams: pos.get(&r.story_id).cloned().unwrap_or_default(),
            };
            (r.story_id.clone(), f)
        })
        .collect();
    FeatureMap {
        dim: embeddings.values().next().map(Vec::len),
        stories,
    }
}

/// Serializable per-story summary written by the features stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRow {
    pub story_id: String,
    pub embedding_dim: usize,
    pub vocab: Vec<String>,
    pub pos_bigrams: Vec<(String, String)>,
}

impl From<&StoryFeatures> for FeatureRow {
    fn from(f: &StoryFeatures) -> Self {
        FeatureRow {
            story_id: f.story_id.clone(),
            embedding_dim: f.embedding.as_ref().map_or(0, Vec::len),
            vocab: f.vocab.iter().cloned().collect(),
            pos_bigrams: f.pos_bigrams.iter().cloned().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SourceTag;

    fn set(words: &[&str]) -> Vocab {
        words.iter().map(|s| s.to_string()).collect()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.into(), b.into())
    }

    fn rec(id: &str) -> StoryRecord {
        StoryRecord {
            prompt_id: "p".into(),
            prompt_text: "prompt".into(),
            story_id: id.into(),
            text: "text".into(),
            source: SourceTag::human(),
        }
    }

    #[test]
    fn vocab_case_folds_and_dedups() {
        assert_eq!(build_vocab("The the THE"), set(&["the"]));
    }

    #[test]
    fn vocab_strips_punctuation() {
        assert_eq!(build_vocab("cat, dog."), set(&["cat", "dog"]));
        assert_eq!(build_vocab("Don't stop!"), set(&["don't", "stop"]));
        assert!(build_vocab("").is_empty());
    }

    #[test]
    fn vocab_cap_truncates_on_char_boundary() {
        let text = "é".repeat(10) + " tail";
        assert_eq!(build_vocab_capped(&text, 5), set(&["ééééé"]));
        assert_eq!(build_vocab_capped("alpha beta", 100), set(&["alpha", "beta"]));
    }

    #[test]
    fn pos_bigram_sets() {
        let got = build_pos_bigrams(&["D", "N", "V", "D", "N"]);
        let want: PosBigrams = [pair("D", "N"), pair("N", "V"), pair("V", "D")].into();
        assert_eq!(got, want);
        assert!(build_pos_bigrams(&["N"]).is_empty());
        assert_eq!(build_pos_bigrams(&["A", "A", "A"]), [pair("A", "A")].into());
    }

    #[test]
    fn embeddings_complete_and_consistent() {
        let corpus = vec![rec("a"), rec("b")];
        let mut ok = HashMap::from([("a".to_string(), vec![0.1; 384]), ("b".to_string(), vec![0.2; 384])]);
        assert_eq!(check_embeddings(&corpus, &mut ok).unwrap().len(), 2);
    }

    #[test]
    fn embeddings_missing_id_named() {
        let corpus = vec![rec("a"), rec("b")];
        let mut m = HashMap::from([("a".to_string(), vec![0.1; 384])]);
        match check_embeddings(&corpus, &mut m) {
            Err(Error::MissingFeatures(ids)) => assert_eq!(ids, vec!["b".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn embeddings_dimension_mismatch() {
        let corpus = vec![rec("a"), rec("b")];
        let mut m = HashMap::from([("a".to_string(), vec![0.1; 384]), ("b".to_string(), vec![0.2; 383])]);
        assert!(matches!(
            check_embeddings(&corpus, &mut m),
            Err(Error::DimensionMismatch { expected: 384, found: 383, .. })
        ));
    }

    #[test]
    fn embeddings_non_finite() {
        let corpus = vec![rec("a")];
        let mut m = HashMap::from([("a".to_string(), vec![0.1, f64::NAN])]);
        assert!(matches!(check_embeddings(&corpus, &mut m), Err(Error::NonFinite(_))));
    }

    proptest::proptest! {
        #[test]
        fn vocab_invariant_under_text_duplication(s in "[a-zA-Z ,.']{0,60}") {
            let doubled = format!("{s} {s}");
            proptest::prop_assert_eq!(build_vocab(&doubled), build_vocab(&s));
        }

        #[test]
        fn pos_bigram_count_bounded(tags in proptest::collection::vec("[A-D]", 0..20)) {
            let n = build_pos_bigrams(&tags).len();
            proptest::prop_assert!(n <= tags.len().saturating_sub(1));
        }
    }
}
