//! The statistical-tests block computed from a calibration table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    mann_whitney_u, one_way_anova, sample_variance, spearman, spearman_with, two_sample_t, PValueMode,
    TTestVariant, TestResult,
};
use crate::calibration::CalibrationCsvRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Base,
    Instruct,
}

/// Per-model facts the calibration table does not carry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    /// Parameter count in billions.
    pub sizes: BTreeMap<String, f64>,
    /// Explicit kinds; models not listed are `Instruct` when their name
    /// contains "instruct" (any case) and `Base` otherwise.
    pub kinds: BTreeMap<String, ModelKind>,
}

impl ModelMeta {
    /// Sizes of the four models evaluated in the original study.
    pub fn reference() -> Self {
        let sizes = [
            ("GPT2-XL", 1.5),
            ("Gemma-2B", 2.0),
            ("Mistral-7B-Instruct", 7.0),
            ("Llama-3.1-8B-Instruct", 8.0),
        ];
        ModelMeta {
            sizes: sizes.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            kinds: BTreeMap::new(),
        }
    }

    pub fn kind_of(&self, model: &str) -> ModelKind {
        self.kinds.get(model).copied().unwrap_or_else(|| {
            if model.to_lowercase().contains("instruct") {
                ModelKind::Instruct
            } else {
                ModelKind::Base
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCorrelation {
    pub models: Vec<String>,
    pub sizes: Vec<f64>,
    pub best_composite: Vec<f64>,
    pub test: TestResult,
    /// t-approximation p-value, reported alongside the exact one.
    pub p_asymptotic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub mean: f64,
    /// Sample standard deviation (0 for a single value).
    pub sd: f64,
    pub n: usize,
}

impl GroupSummary {
    fn of(name: &str, xs: &[f64]) -> Self {
        GroupSummary {
            name: name.to_string(),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            sd: if xs.len() > 1 { sample_variance(xs).sqrt() } else { 0.0 },
            n: xs.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindComparison {
    pub base: GroupSummary,
    pub instruct: GroupSummary,
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyAnova {
    pub groups: Vec<GroupSummary>,
    pub test: TestResult,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub size_vs_calibration: Option<SizeCorrelation>,
    pub base_vs_instruct: Option<KindComparison>,
    pub strategy_anova: Option<StrategyAnova>,
    pub best_model: Option<GroupSummary>,
    pub best_strategy: Option<GroupSummary>,
    pub volume_base_vs_instruct: Option<KindComparison>,
    /// Item name to the reason it could not be computed.
    pub skipped: BTreeMap<String, String>,
}

fn group_by(rows: &[CalibrationCsvRow], key: impl Fn(&CalibrationCsvRow) -> String) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        out.entry(key(r)).or_default().push(r.composite);
    }
    out
}

/// Highest mean; ties go to the name that sorts first.
fn best_group(groups: &BTreeMap<String, Vec<f64>>) -> Option<GroupSummary> {
    groups
        .iter()
        .map(|(k, v)| GroupSummary::of(k, v))
        .fold(None, |best: Option<GroupSummary>, g| match best {
            Some(b) if b.mean >= g.mean => Some(b),
            _ => Some(g),
        })
}

fn split_by_kind(
    rows: &[CalibrationCsvRow],
    meta: &ModelMeta,
    value: impl Fn(&CalibrationCsvRow) -> Option<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let (mut base, mut instruct) = (Vec::new(), Vec::new());
    for r in rows {
        if let Some(v) = value(r) {
            match meta.kind_of(&r.model) {
                ModelKind::Base => base.push(v),
                ModelKind::Instruct => instruct.push(v),
            }
        }
    }
    (base, instruct)
}

/// Compute every item that the table supports; the rest land in `skipped`.
///
/// Strategies are grouped by name only, so two temperature settings form one group.
pub fn stats_summary(rows: &[CalibrationCsvRow], meta: &ModelMeta, t_variant: TTestVariant) -> StatsSummary {
    let mut s = StatsSummary::default();
    let mut skip = |item: &str, why: String| {
        s.skipped.insert(item.to_string(), why);
    };

    let by_model = group_by(rows, |r| r.model.clone());
    let sized: Vec<(&String, f64, f64)> = by_model
        .iter()
        .filter_map(|(m, v)| {
            let size = *meta.sizes.get(m)?;
            Some((m, size, v.iter().copied().fold(f64::NEG_INFINITY, f64::max)))
        })
        .collect();
    let sizes: Vec<f64> = sized.iter().map(|x| x.1).collect();
    let best: Vec<f64> = sized.iter().map(|x| x.2).collect();
    match spearman(&sizes, &best).and_then(|t| Ok((t, spearman_with(&sizes, &best, PValueMode::Asymptotic)?))) {
        Ok((test, asym)) => {
            s.size_vs_calibration = Some(SizeCorrelation {
                models: sized.iter().map(|x| x.0.clone()).collect(),
                sizes,
                best_composite: best,
                test,
                p_asymptotic: asym.p_value,
            })
        }
        Err(e) => skip("size_vs_calibration", format!("{} models with known size: {e}", sized.len())),
    }

    let (base, instruct) = split_by_kind(rows, meta, |r| Some(r.composite));
    match two_sample_t(&base, &instruct, t_variant) {
        Ok(test) => {
            s.base_vs_instruct = Some(KindComparison {
                base: GroupSummary::of("base", &base),
                instruct: GroupSummary::of("instruct", &instruct),
                test,
            })
        }
        Err(e) => skip("base_vs_instruct", e.to_string()),
    }

    let by_strategy = group_by(rows, |r| r.strategy.clone());
    let groups: Vec<Vec<f64>> = by_strategy.values().cloned().collect();
    match one_way_anova(&groups) {
        Ok(test) => {
            s.strategy_anova = Some(StrategyAnova {
                groups: by_strategy.iter().map(|(k, v)| GroupSummary::of(k, v)).collect(),
                test,
            })
        }
        Err(e) => skip("strategy_anova", e.to_string()),
    }

    s.best_model = best_group(&by_model);
    s.best_strategy = best_group(&by_strategy);
    if rows.is_empty() {
        skip("best_model", "empty calibration table".into());
        skip("best_strategy", "empty calibration table".into());
    }

    let (vb, vi) = split_by_kind(rows, meta, |r| r.model_volume);
    if vb.is_empty() || vi.is_empty() {
        skip(
            "volume_base_vs_instruct",
            format!("model volumes available for {} base and {} instruct rows", vb.len(), vi.len()),
        );
    } else {
        match mann_whitney_u(&vb, &vi) {
            Ok(test) => {
                s.volume_base_vs_instruct = Some(KindComparison {
                    base: GroupSummary::of("base", &vb),
                    instruct: GroupSummary::of("instruct", &vi),
                    test,
                })
            }
            Err(e) => skip("volume_base_vs_instruct", e.to_string()),
        }
    }
    s
}
