//! Regenerate the bundled synthetic corpus.
//!
//! ```text
//! cargo run --example synthetic_corpus -- [OUT_DIR]
//! ```
//!
//! Writes `corpus.jsonl`, `embeddings.jsonl` and `pos_tags.jsonl`. With no
//! argument the bundle under `crates/core/data/synthetic` is rewritten; the
//! output is identical on every run.

use std::path::PathBuf;

use credal::corpus::dedup;
use credal::synthetic::{generate, SyntheticConfig};

fn main() -> credal::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic"));
    let cfg = SyntheticConfig::default();
    let bundle = generate(&cfg);
    bundle.write(&out)?;
    let unique = dedup(bundle.records.clone()).kept.len();
    println!(
        "{} records ({unique} unique) for {} prompts written to {}",
        bundle.records.len(),
        cfg.prompts + cfg.short_prompts,
        out.display()
    );
    Ok(())
}
