//! Mean pairwise diversity of a set of continuations along three views:
//! semantic (cosine distance of embeddings), lexical (Jaccard distance of
//! unigram sets) and syntactic (Jaccard distance of POS-bigram sets).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{PromptGroup, SourceTag};
use crate::features::FeatureMap;
use crate::{Error, Result};

/// Per-prompt diversity of one population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityVector {
    pub prompt_id: String,
    pub source: SourceTag,
    pub d_sem: f64,
    pub d_lex: f64,
    pub d_syn: f64,
    pub n_stories: usize,
}

impl DiversityVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.d_sem, self.d_lex, self.d_syn]
    }
}

/// Cascade summation; error grows with log n rather than n.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn mean_pairwise<T>(items: &[T], mut dist: impl FnMut(&T, &T) -> f64) -> f64 {
    let n = items.len();
    let mut terms = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            terms.push(dist(&items[i], &items[j]));
        }
    }
    pairwise_sum(&terms) / terms.len() as f64
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    1.0 - dot / (na * nb)
}

/// `1 - |a ∩ b| / |a ∪ b|`; two empty sets are at distance 0.
pub fn jaccard_distance<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    1.0 - inter as f64 / union as f64
}

fn require_pairs(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "diversity needs at least 2 items, got {n}"
        )));
    }
    Ok(())
}

fn zero_norm_index(embeddings: &[&[f64]]) -> Option<usize> {
    embeddings.iter().position(|e| e.iter().all(|&x| x == 0.0))
}

/// Mean pairwise cosine distance between embeddings.
pub fn semantic_diversity(embeddings: &[&[f64]]) -> Result<f64> {
    require_pairs(embeddings.len())?;
    let dim = embeddings[0].len();
    for (i, e) in embeddings.iter().enumerate() {
        if e.len() != dim {
            return Err(Error::DimensionMismatch {
                story_id: format!("#{i}"),
                expected: dim,
                found: e.len(),
            });
        }
    }
    if let Some(i) = zero_norm_index(embeddings) {
        return Err(Error::ZeroNorm(format!("#{i}")));
    }
    Ok(mean_pairwise(embeddings, |a, b| cosine_distance(a, b)))
}

/// Mean pairwise Jaccard distance between unigram vocabularies.
pub fn lexical_diversity<T: Ord>(vocabs: &[&BTreeSet<T>]) -> Result<f64> {
    require_pairs(vocabs.len())?;
    Ok(mean_pairwise(vocabs, |a, b| jaccard_distance(a, b)))
}

/// Mean pairwise Jaccard distance between POS-bigram sets.
pub fn syntactic_diversity<T: Ord>(bigram_sets: &[&BTreeSet<T>]) -> Result<f64> {
    lexical_diversity(bigram_sets)
}

/// Diversity vector of one prompt group. Stories are paired in story-id order.
pub fn diversity_vector(group: &PromptGroup, features: &FeatureMap) -> Result<DiversityVector> {
    let mut records: Vec<_> = group.records.iter().collect();
    records.sort_by(|a, b| a.story_id.cmp(&b.story_id));

    let missing: Vec<String> = records
        .iter()
        .filter(|r| {
            features
                .get(&r.story_id)
                .is_none_or(|f| f.embedding.is_none())
        })
        .map(|r| r.story_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingFeatures(missing));
    }
    let feats: Vec<_> = records
        .iter()
        .map(|r| features.get(&r.story_id).expect("checked above"))
        .collect();

    let embeddings: Vec<&[f64]> = feats
        .iter()
        .map(|f| f.embedding.as_deref().expect("checked above"))
        .collect();
    if let Some(i) = zero_norm_index(&embeddings) {
        return Err(Error::ZeroNorm(records[i].story_id.clone()));
    }
    let d_sem = semantic_diversity(&embeddings)?;
    let vocabs: Vec<_> = feats.iter().map(|f| &f.vocab).collect();
    let bigrams: Vec<_> = feats.iter().map(|f| &f.pos_bigrams).collect();

    Ok(DiversityVector {
        prompt_id: group.prompt_id.clone(),
        source: group.source.clone(),
        d_sem,
        d_lex: lexical_diversity(&vocabs)?,
        d_syn: syntactic_diversity(&bigrams)?,
        n_stories: records.len(),
    })
}

/// Flat CSV row mirroring [`DiversityVector`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiversityCsvRow {
    pub prompt_id: String,
    pub source: String,
    pub model_name: String,
    pub strategy: String,
    pub strategy_value: Option<f64>,
    pub d_sem: f64,
    pub d_lex: f64,
    pub d_syn: f64,
    pub n_stories: usize,
}

impl From<&DiversityVector> for DiversityCsvRow {
    fn from(v: &DiversityVector) -> Self {
        DiversityCsvRow {
            prompt_id: v.prompt_id.clone(),
            source: v.source.to_string(),
            model_name: v.source.model_name.clone(),
            strategy: v.source.strategy.clone(),
            strategy_value: v.source.strategy_value,
            d_sem: v.d_sem,
            d_lex: v.d_lex,
            d_syn: v.d_syn,
            n_stories: v.n_stories,
        }
    }
}
