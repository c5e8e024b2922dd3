//! Recompute composite scores from their components and compare them with a
//! reference table.

use std::path::Path;

use credal::calibration::{composite_score, CalibrationCsvRow, CompositeWeights};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/reference_components.csv");
    let mut rdr = csv::Reader::from_path(path)?;
    println!("{:<24}{:<17}{:>9}{:>10}{:>9}", "model", "config", "printed", "computed", "diff");
    for row in rdr.deserialize() {
        let r: CalibrationCsvRow = row?;
        let (Some(o), Some(cd), Some(vr)) = (r.overlap, r.centroid_distance, r.volume_ratio) else {
            continue;
        };
        let c = composite_score(o, cd, vr, CompositeWeights::default())?;
        println!(
            "{:<24}{:<17}{:>9.3}{:>10.3}{:>+9.3}",
            r.model,
            format!("{}={}", r.strategy, r.value),
            r.composite,
            c,
            c - r.composite
        );
    }
    Ok(())
}
