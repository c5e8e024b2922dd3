//! Deduplicate, length-filter and select prompts from the bundled corpus.
//!
//! ```text
//! cargo run --example corpus_selection
//! ```

use std::path::Path;

use credal::corpus::{dedup, filter_lengths, group_records, load_records, score_and_select, LengthBounds, TokenCounter};

fn main() -> credal::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/corpus.jsonl");
    let records = load_records(&path)?;
    let deduped = dedup(records);
    println!("{} unique stories, {} duplicates dropped", deduped.kept.len(), deduped.dropped);

    let tokens = TokenCounter::default();
    let groups = filter_lengths(group_records(deduped.kept), &LengthBounds::default(), 10, &tokens);
    let human: Vec<_> = groups.into_iter().filter(|g| g.source.is_human()).collect();
    let selection = score_and_select(human, 5, &tokens)?;
    for row in selection.manifest.iter().filter(|r| r.kept) {
        println!("{:<6} length spread {:.2}", row.prompt_id, row.score);
    }
    Ok(())
}
