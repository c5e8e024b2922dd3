//! Corpus ingest: records, MD5 deduplication, length filtering and
//! prompt selection by story-length spread.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use md5::{Digest, Md5};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::{io, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Human,
    Model,
}

/// Who produced a continuation: a human writer, or a model under one decoding
/// configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceTag {
    pub kind: SourceKind,
    #[serde(default)]
    pub model_name: String,
    #[serde(default)]
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy_value: Option<f64>,
}

impl SourceTag {
    pub fn human() -> Self {
        SourceTag {
            kind: SourceKind::Human,
            model_name: String::new(),
            strategy: String::new(),
            strategy_value: None,
        }
    }

    pub fn model(model_name: &str, strategy: &str, strategy_value: f64) -> Self {
        SourceTag {
            kind: SourceKind::Model,
            model_name: model_name.to_string(),
            strategy: strategy.to_string(),
            strategy_value: Some(strategy_value),
        }
    }

    pub fn is_human(&self) -> bool {
        self.kind == SourceKind::Human
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SourceKind::Human => {
                if !self.model_name.is_empty()
                    || !self.strategy.is_empty()
                    || self.strategy_value.is_some()
                {
                    return Err(Error::invalid("human source must not carry model fields"));
                }
            }
            SourceKind::Model => {
                if self.model_name.is_empty() || self.strategy.is_empty() {
                    return Err(Error::invalid(
                        "model source requires model_name and strategy",
                    ));
                }
                match self.strategy_value {
                    Some(v) if v.is_finite() => {}
                    _ => {
                        return Err(Error::invalid(format!(
                            "model source {}/{} requires a finite strategy_value",
                            self.model_name, self.strategy
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// `temperature_0.7`, `top_k_40`; empty for humans.
    pub fn config_label(&self) -> String {
        match self.strategy_value {
            Some(v) => format!("{}_{}", self.strategy, v),
            None => self.strategy.clone(),
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SourceKind::Human => write!(f, "human"),
            SourceKind::Model => write!(f, "{}/{}", self.model_name, self.config_label()),
        }
    }
}

impl PartialEq for SourceTag {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SourceTag {}

impl PartialOrd for SourceTag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SourceTag {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind
            .cmp(&other.kind)
            .then_with(|| self.model_name.cmp(&other.model_name))
            .then_with(|| self.strategy.cmp(&other.strategy))
            .then_with(|| match (self.strategy_value, other.strategy_value) {
                (Some(a), Some(b)) => a.total_cmp(&b),
                (a, b) => a.is_some().cmp(&b.is_some()),
            })
    }
}

impl std::hash::Hash for SourceTag {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.model_name.hash(state);
        self.strategy.hash(state);
        self.strategy_value.map(f64::to_bits).hash(state);
    }
}

/// One continuation of one prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryRecord {
    pub prompt_id: String,
    pub prompt_text: String,
    pub story_id: String,
    pub text: String,
    pub source: SourceTag,
}

/// Continuations sharing a prompt and a source.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptGroup {
    pub prompt_id: String,
    pub prompt_text: String,
    pub source: SourceTag,
    pub records: Vec<StoryRecord>,
}

/// Check record-level invariants: unique story ids, non-empty text, consistent sources.
pub fn validate_records(records: &[StoryRecord]) -> Result<()> {
    let mut seen = HashSet::with_capacity(records.len());
    for r in records {
        if !seen.insert(r.story_id.as_str()) {
            return Err(Error::DuplicateStoryId(r.story_id.clone()));
        }
        if r.text.trim().is_empty() {
            return Err(Error::invalid(format!("story {:?} has empty text", r.story_id)));
        }
        r.source
            .validate()
            .map_err(|e| Error::invalid(format!("story {:?}: {e}", r.story_id)))?;
    }
    Ok(())
}

pub fn load_records(path: &Path) -> Result<Vec<StoryRecord>> {
    let records: Vec<StoryRecord> = io::read_jsonl(path)?;
    validate_records(&records)?;
    Ok(records)
}

/// MD5 of the NFC-normalized, outer-whitespace-trimmed text.
pub fn text_digest(text: &str) -> [u8; 16] {
    let normalized: String = text.trim().nfc().collect();
    Md5::digest(normalized.as_bytes()).into()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DedupOutcome {
    pub kept: Vec<StoryRecord>,
    pub dropped: usize,
}

/// Drop repeated continuations within each (prompt, source) population.
/// The first occurrence in input order wins and output order is stable.
pub fn dedup(records: Vec<StoryRecord>) -> DedupOutcome {
    let mut seen: HashSet<(String, SourceTag, [u8; 16])> = HashSet::with_capacity(records.len());
    let mut kept = Vec::with_capacity(records.len());
    let mut dropped = 0;
    for r in records {
        let key = (r.prompt_id.clone(), r.source.clone(), text_digest(&r.text));
        if seen.insert(key) {
            kept.push(r);
        } else {
            dropped += 1;
        }
    }
    DedupOutcome { kept, dropped }
}

/// Bucket records into groups, ordered by (prompt_id, source); records keep input order.
pub fn group_records(records: Vec<StoryRecord>) -> Vec<PromptGroup> {
    let mut buckets: BTreeMap<(String, SourceTag), PromptGroup> = BTreeMap::new();
    for r in records {
        buckets
            .entry((r.prompt_id.clone(), r.source.clone()))
            .or_insert_with(|| PromptGroup {
                prompt_id: r.prompt_id.clone(),
                prompt_text: r.prompt_text.clone(),
                source: r.source.clone(),
                records: Vec::new(),
            })
            .records
            .push(r);
    }
    buckets.into_values().collect()
}

/// Counts tokens as maximal non-whitespace runs unless a sidecar count exists.
#[derive(Debug, Clone, Default)]
pub struct TokenCounter {
    overrides: HashMap<String, usize>,
}

#[derive(Debug, Deserialize)]
struct TokenSidecarRow {
    story_id: String,
    tokens: usize,
}

impl TokenCounter {
    pub fn with_overrides(overrides: HashMap<String, usize>) -> Self {
        TokenCounter { overrides }
    }

    pub fn from_sidecar(path: &Path) -> Result<Self> {
        let rows: Vec<TokenSidecarRow> = io::read_jsonl(path)?;
        Ok(Self::with_overrides(
            rows.into_iter().map(|r| (r.story_id, r.tokens)).collect(),
        ))
    }

    pub fn count(&self, record: &StoryRecord) -> usize {
        self.overrides
            .get(&record.story_id)
            .copied()
            .unwrap_or_else(|| token_count(&record.text))
    }
}

pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Inclusive length bounds for prompt characters and story tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthBounds {
    pub min_prompt_chars: usize,
    pub max_prompt_chars: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for LengthBounds {
    fn default() -> Self {
        LengthBounds {
            min_prompt_chars: 20,
            max_prompt_chars: 500,
            min_tokens: 52,
            max_tokens: 987,
        }
    }
}

/// Apply the prompt-character and story-token bounds.
///
/// Groups left with fewer than `group_size` stories are removed; larger groups
/// are cut to their first `group_size` stories.
pub fn filter_lengths(
    groups: Vec<PromptGroup>,
    bounds: &LengthBounds,
    group_size: usize,
    tokens: &TokenCounter,
) -> Vec<PromptGroup> {
    groups
        .into_iter()
        .filter(|g| {
            let chars = g.prompt_text.chars().count();
            chars >= bounds.min_prompt_chars && chars <= bounds.max_prompt_chars
        })
        .filter_map(|mut g| {
            g.records.retain(|r| {
                let n = tokens.count(r);
                n >= bounds.min_tokens && n <= bounds.max_tokens
            });
            if g.records.len() < group_size {
                return None;
            }
            g.records.truncate(group_size);
            Some(g)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub prompt_id: String,
    pub score: f64,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub selected: Vec<PromptGroup>,
    pub manifest: Vec<ManifestRow>,
    pub warning: Option<String>,
}

/// Sample standard deviation (divisor n - 1) of the group's story token counts.
pub fn length_spread(group: &PromptGroup, tokens: &TokenCounter) -> f64 {
    let mut counts: Vec<usize> = group.records.iter().map(|r| tokens.count(r)).collect();
    counts.sort_unstable();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let ss: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Keep the `select_n` groups whose story lengths vary the most.
///
/// Ties are broken by ascending prompt id; the manifest lists every group in
/// rank order with its score.
pub fn score_and_select(
    groups: Vec<PromptGroup>,
    select_n: usize,
    tokens: &TokenCounter,
) -> Result<Selection> {
    if let Some(g) = groups.iter().find(|g| g.records.len() < 2) {
        return Err(Error::invalid(format!(
            "prompt {:?} has {} stories; selection needs at least 2",
            g.prompt_id,
            g.records.len()
        )));
    }
    let mut scored: Vec<(f64, PromptGroup)> = groups
        .into_iter()
        .map(|g| (length_spread(&g, tokens), g))
        .collect();
    scored.sort_by(|(sa, ga), (sb, gb)| {
        sb.total_cmp(sa)
            .then_with(|| ga.prompt_id.cmp(&gb.prompt_id))
            .then_with(|| ga.source.cmp(&gb.source))
    });
    let warning = (scored.len() < select_n).then(|| {
        format!(
            "only {} prompt groups available, fewer than the requested {select_n}",
            scored.len()
        )
    });
    let manifest = scored
        .iter()
        .enumerate()
        .map(|(rank, (score, g))| ManifestRow {
            prompt_id: g.prompt_id.clone(),
            score: *score,
            kept: rank < select_n,
        })
        .collect();
    let selected = scored
        .into_iter()
        .take(select_n)
        .map(|(_, g)| g)
        .collect();
    Ok(Selection {
        selected,
        manifest,
        warning,
    })
}
