//! Hypothesis tests over a reference calibration table of 20 configurations.

use std::path::Path;

use credal::calibration::CalibrationCsvRow;
use credal::stats::{stats_summary, ModelMeta, TTestVariant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/reference_calibration.csv");
    let rows: Vec<CalibrationCsvRow> = csv::Reader::from_path(path)?.deserialize().collect::<Result<_, _>>()?;
    let s = stats_summary(&rows, &ModelMeta::reference(), TTestVariant::Pooled);

    if let Some(c) = &s.size_vs_calibration {
        println!(
            "size vs best composite: ρ = {:.3}, exact p = {:.3}, t-approx p = {:.3}",
            c.test.statistic, c.test.p_value, c.p_asymptotic
        );
    }
    if let Some(k) = &s.base_vs_instruct {
        println!(
            "base {:.3} ± {:.3} vs instruct {:.3} ± {:.3}: t = {:.3}, p = {:.3}",
            k.base.mean, k.base.sd, k.instruct.mean, k.instruct.sd, k.test.statistic, k.test.p_value
        );
    }
    if let Some(a) = &s.strategy_anova {
        println!("strategy ANOVA: F({}, {}) = {:.3}, p = {:.3}", a.test.df[0], a.test.df[1], a.test.statistic, a.test.p_value);
    }
    if let (Some(m), Some(st)) = (&s.best_model, &s.best_strategy) {
        println!("best model {} ({:.3}), best strategy {} ({:.3} ± {:.3})", m.name, m.mean, st.name, st.mean, st.sd);
    }
    for (item, reason) in &s.skipped {
        println!("skipped {item}: {reason}");
    }
    Ok(())
}
