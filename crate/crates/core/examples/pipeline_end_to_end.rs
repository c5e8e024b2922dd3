//! Run every stage on the bundled synthetic corpus.
//!
//! ```text
//! cargo run --example pipeline_end_to_end -- [OUT_DIR]
//! ```

use std::path::{Path, PathBuf};

use credal::pipeline::{files, run_pipeline, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = RunConfig::default();
    cfg.apply_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/credal.conf"))?;
    cfg.out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("credal-example"));
    let written = run_pipeline(&cfg)?;
    println!("{} artifacts in {}", written.len(), cfg.out_dir.display());

    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(cfg.out_dir.join(files::REPORT))?)?;
    println!("θ = {}, human volume {}", report["theta"], report["human_volume"]);
    for c in report["configurations"].as_array().into_iter().flatten() {
        println!("#{} {:<32} composite {}", c["rank"], c["label"].as_str().unwrap_or("?"), c["composite"]);
    }
    Ok(())
}
