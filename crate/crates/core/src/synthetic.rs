//! Deterministic synthetic corpora for demos, tests and the determinism check.
//!
//! The generated corpus mimics the real input layout: a story JSONL file plus
//! embedding and POS-tag sidecars keyed by story id. Human continuations draw
//! from a broad vocabulary and a high-entropy tag chain; each model strategy is
//! narrower, so the three diversity dimensions separate the populations.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;

use crate::corpus::{SourceTag, StoryRecord};
use crate::{io, Error, Result};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const EMBEDDINGS_FILE: &str = "embeddings.jsonl";
pub const POS_FILE: &str = "pos_tags.jsonl";

const TAGS: [&str; 9] = ["DET", "NOUN", "VERB", "ADJ", "ADP", "PRON", "ADV", "CONJ", "PUNCT"];
const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ren", "tu", "sa", "vel", "or", "ni", "dra", "po", "esh", "lu", "ta", "gri", "mon", "be", "fa",
    "zo", "qui", "har", "end", "sil", "ur",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Prompts that pass every length filter.
    pub prompts: usize,
    /// Continuations per prompt and source.
    pub per_source: usize,
    pub embedding_dim: usize,
    /// Extra prompts whose text is too short to survive filtering.
    pub short_prompts: usize,
    /// Exact-duplicate stories injected to exercise deduplication.
    pub duplicates: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            prompts: 50,
            per_source: 10,
            embedding_dim: 16,
            short_prompts: 2,
            duplicates: 6,
        }
    }
}

/// Per-source generation style.
struct Style {
    source: SourceTag,
    /// Share of tokens drawn from the prompt's topic words.
    topic_share: f64,
    /// Size of the general word pool the rest is drawn from.
    pool: usize,
    embed_spread: f64,
    /// Weight of the uniform component in the tag transition chain.
    tag_entropy: f64,
}

pub fn sources() -> Vec<SourceTag> {
    vec![
        SourceTag::human(),
        SourceTag::model("SynthLM-1B", "temperature", 0.7),
        SourceTag::model("SynthLM-1B", "top_k", 40.0),
    ]
}

fn styles() -> Vec<Style> {
    let [h, t, k]: [SourceTag; 3] = sources().try_into().expect("three sources");
    vec![
        Style { source: h, topic_share: 0.35, pool: 600, embed_spread: 0.9, tag_entropy: 0.8 },
        Style { source: t, topic_share: 0.7, pool: 150, embed_spread: 0.45, tag_entropy: 0.25 },
        Style { source: k, topic_share: 0.55, pool: 300, embed_spread: 0.65, tag_entropy: 0.45 },
    ]
}

fn lexicon(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut words = std::collections::BTreeSet::new();
    while words.len() < n {
        let parts = rng.gen_range(2..=3);
        let w: String = (0..parts)
            .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
            .collect();
        words.insert(w);
    }
    let mut words: Vec<String> = words.into_iter().collect();
    words.shuffle(rng);
    words
}

/// Row-stochastic tag transitions: a shared peaked chain mixed with uniform.
fn tag_chain(base: &[[f64; 9]; 9], entropy: f64) -> [[f64; 9]; 9] {
    let mut out = [[0.0; 9]; 9];
    for (i, row) in base.iter().enumerate() {
        for j in 0..9 {
            out[i][j] = (1.0 - entropy) * row[j] + entropy / 9.0;
        }
    }
    out
}

fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingRow {
    pub story_id: String,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PosRow {
    pub story_id: String,
    pub pos_tags: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticBundle {
    pub records: Vec<StoryRecord>,
    pub embeddings: Vec<EmbeddingRow>,
    pub pos: Vec<PosRow>,
}

pub fn generate(cfg: &SyntheticConfig) -> SyntheticBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let words = lexicon(&mut rng, 800);
    let styles = styles();
    let noise = Normal::new(0.0, 0.3).expect("valid normal");
    let offsets: Vec<Vec<f64>> = styles
        .iter()
        .map(|_| (0..cfg.embedding_dim).map(|_| noise.sample(&mut rng)).collect())
        .collect();
    let base_chain: [[f64; 9]; 9] = std::array::from_fn(|_| {
        let mut row = [0.0; 9];
        for _ in 0..3 {
            row[rng.gen_range(0..9)] += 1.0 / 3.0;
        }
        row
    });

    let mut bundle = SyntheticBundle { records: Vec::new(), embeddings: Vec::new(), pos: Vec::new() };
    let total_prompts = cfg.prompts + cfg.short_prompts;
    for p in 0..total_prompts {
        let prompt_id = format!("p{p:03}");
        let topic: Vec<&String> = words.choose_multiple(&mut rng, 25).collect();
        let prompt_text = if p < cfg.prompts {
            format!("Write a story about {} and the {} of {}.", topic[0], topic[1], topic[2])
        } else {
            "Go on.".to_string()
        };
        let topic_vec: Vec<f64> = (0..cfg.embedding_dim).map(|_| rng.sample(StandardNormal)).collect();
        for (s, style) in styles.iter().enumerate() {
            let spread = style.embed_spread * rng.gen_range(0.6..1.4);
            let share = (style.topic_share + rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0);
            let entropy = (style.tag_entropy + rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0);
            let chain = tag_chain(&base_chain, entropy);
            for k in 0..cfg.per_source {
                let story_id = format!("{prompt_id}-{}-{k:02}", ["h", "t", "k"][s]);
                let n_tokens = rng.gen_range(60..=160);
                let text: Vec<&str> = (0..n_tokens)
                    .map(|_| {
                        if rng.gen_bool(share) {
                            topic[rng.gen_range(0..topic.len())].as_str()
                        } else {
                            words[rng.gen_range(0..style.pool)].as_str()
                        }
                    })
                    .collect();
                let mut tag = rng.gen_range(0..9);
                let tags: Vec<String> = (0..n_tokens)
                    .map(|_| {
                        tag = sample_index(&mut rng, &chain[tag]);
                        TAGS[tag].to_string()
                    })
                    .collect();
                let embedding: Vec<f64> = (0..cfg.embedding_dim)
                    .map(|d| {
                        let z: f64 = rng.sample(StandardNormal);
                        round6(topic_vec[d] + offsets[s][d] + spread * z)
                    })
                    .collect();
                bundle.records.push(StoryRecord {
                    prompt_id: prompt_id.clone(),
                    prompt_text: prompt_text.clone(),
                    story_id: story_id.clone(),
                    text: text.join(" "),
                    source: style.source.clone(),
                });
                bundle.embeddings.push(EmbeddingRow { story_id: story_id.clone(), embedding });
                bundle.pos.push(PosRow { story_id, pos_tags: tags });
            }
        }
    }

    // Re-emit some stories under new ids with padded whitespace; dedup must drop them.
    for d in 0..cfg.duplicates.min(bundle.records.len()) {
        let idx = (d * 37) % bundle.records.len();
        let mut dup = bundle.records[idx].clone();
        dup.story_id = format!("{}-dup", dup.story_id);
        dup.text = format!("  {}\n", dup.text);
        let mut emb = bundle.embeddings[idx].clone();
        emb.story_id = dup.story_id.clone();
        let mut pos = bundle.pos[idx].clone();
        pos.story_id = dup.story_id.clone();
        bundle.records.push(dup);
        bundle.embeddings.push(emb);
        bundle.pos.push(pos);
    }
    bundle
}

impl SyntheticBundle {
    /// Write `corpus.jsonl`, `embeddings.jsonl` and `pos_tags.jsonl` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_file(&dir.join(CORPUS_FILE), &io::jsonl_string(None, &self.records)?)?;
        io::write_file(&dir.join(EMBEDDINGS_FILE), &io::jsonl_string(None, &self.embeddings)?)?;
        io::write_file(&dir.join(POS_FILE), &io::jsonl_string(None, &self.pos)?)?;
        Ok(())
    }
}

/// Per-strategy 3-vectors whose strategy centroids have population variance
/// (trace) exactly `between_var` and whose within-strategy noise is isotropic
/// Gaussian with expected trace `within_var`.
pub fn decomposition_fixture(
    seed: u64,
    strategies: usize,
    per_strategy: usize,
    between_var: f64,
    within_var: f64,
) -> BTreeMap<String, Vec<[f64; 3]>> {
    assert!(strategies >= 2, "need at least two strategies");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<[f64; 3]> = (0..strategies)
        .map(|_| std::array::from_fn(|_| rng.sample(StandardNormal)))
        .collect();
    let mean: [f64; 3] = std::array::from_fn(|d| centroids.iter().map(|c| c[d]).sum::<f64>() / strategies as f64);
    let trace: f64 = centroids
        .iter()
        .map(|c| (0..3).map(|d| (c[d] - mean[d]).powi(2)).sum::<f64>())
        .sum::<f64>()
        / strategies as f64;
    let scale = (between_var / trace).sqrt();
    for c in &mut centroids {
        for d in 0..3 {
            c[d] = (c[d] - mean[d]) * scale;
        }
    }
    let sd = (within_var / 3.0).sqrt();
    centroids
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let pts = (0..per_strategy)
                .map(|_| std::array::from_fn(|d| c[d] + sd * rng.sample::<f64, _>(StandardNormal)))
                .collect();
            (format!("strategy_{i}"), pts)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{dedup, token_count};

    #[test]
    fn generation_is_deterministic() {
        let cfg = SyntheticConfig { prompts: 3, short_prompts: 1, duplicates: 2, ..Default::default() };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.records, b.records);
        assert_eq!(serde_json::to_string(&a.embeddings).unwrap(), serde_json::to_string(&b.embeddings).unwrap());
        let c = generate(&SyntheticConfig { seed: 8, ..cfg });
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn layout_and_lengths() {
        let cfg = SyntheticConfig { prompts: 4, short_prompts: 1, duplicates: 3, ..Default::default() };
        let b = generate(&cfg);
        assert_eq!(b.records.len(), 5 * 3 * 10 + 3);
        assert_eq!(b.embeddings.len(), b.records.len());
        for (r, p) in b.records.iter().zip(&b.pos) {
            assert_eq!(token_count(&r.text), p.pos_tags.len());
            assert!((60..=160).contains(&p.pos_tags.len()));
        }
        let out = dedup(b.records);
        assert_eq!(out.dropped, 3);
    }

    #[test]
    fn fixture_centroid_variance_is_exact() {
        let f = decomposition_fixture(1, 4, 3, 0.3, 0.1);
        assert_eq!(f.len(), 4);
        let pts: Vec<[f64; 3]> = f.values().map(|v| crate::decomposition::strategy_centroid(v).unwrap()).collect();
        assert_eq!(pts.len(), 4);
        let big = decomposition_fixture(1, 4, 1, 0.3, 0.0);
        let c: Vec<[f64; 3]> = big.values().map(|v| v[0]).collect();
        assert!((crate::decomposition::total_variance(&c).unwrap() - 0.3).abs() < 1e-12);
    }
}
