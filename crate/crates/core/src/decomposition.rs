//! Epistemic/aleatoric split of a model's diversity variation across decoding
//! strategies.
//!
//! Variance of a set of 3-vectors is the trace of its population covariance.
//! The epistemic part is the variance of the strategy centroids; the aleatoric
//! part is the unweighted mean over strategies of each strategy's own variance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::SourceTag;
use crate::diversity::DiversityVector;
use crate::geometry::CredalTransform;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionSpace {
    #[default]
    Standardized,
    Raw,
}

impl std::str::FromStr for DecompositionSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standardized" => Ok(DecompositionSpace::Standardized),
            "raw" => Ok(DecompositionSpace::Raw),
            other => Err(Error::invalid(format!("unknown decomposition space {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub model_name: String,
    /// Strategy label (`temperature_0.7`) to centroid.
    pub strategy_centroids: BTreeMap<String, [f64; 3]>,
    pub between_var: f64,
    pub within_var: f64,
    pub total: f64,
    pub epistemic_ratio: f64,
}

pub fn strategy_centroid(vectors: &[[f64; 3]]) -> Result<[f64; 3]> {
    if vectors.is_empty() {
        return Err(Error::invalid("centroid of an empty strategy"));
    }
    let n = vectors.len() as f64;
    Ok([0, 1, 2].map(|d| vectors.iter().map(|v| v[d]).sum::<f64>() / n))
}

/// Trace of the population covariance.
///
/// Computed on data shifted by the first vector, so identical inputs give exactly 0.
pub fn total_variance(vectors: &[[f64; 3]]) -> Result<f64> {
    let Some(origin) = vectors.first() else {
        return Err(Error::invalid("variance of an empty set"));
    };
    let shifted: Vec<[f64; 3]> = vectors
        .iter()
        .map(|v| [0, 1, 2].map(|d| v[d] - origin[d]))
        .collect();
    let c = strategy_centroid(&shifted)?;
    let n = vectors.len() as f64;
    Ok(shifted
        .iter()
        .map(|v| (0..3).map(|d| (v[d] - c[d]).powi(2)).sum::<f64>())
        .sum::<f64>()
        / n)
}

/// Decompose one model's variation given its vectors grouped by strategy label.
pub fn decompose(model_name: &str, by_strategy: &BTreeMap<String, Vec<[f64; 3]>>) -> Result<DecompositionResult> {
    if by_strategy.len() < 2 {
        return Err(Error::invalid(format!(
            "model {model_name:?} has {} strategies; decomposition needs at least 2",
            by_strategy.len()
        )));
    }
    if let Some((label, v)) = by_strategy.iter().find(|(_, v)| v.len() < 2) {
        return Err(Error::invalid(format!(
            "strategy {label:?} of model {model_name:?} has {} vectors; need at least 2",
            v.len()
        )));
    }
    let mut centroids = BTreeMap::new();
    let mut within = Vec::with_capacity(by_strategy.len());
    for (label, vectors) in by_strategy {
        centroids.insert(label.clone(), strategy_centroid(vectors)?);
        within.push(total_variance(vectors)?);
    }
    let centroid_list: Vec<[f64; 3]> = centroids.values().copied().collect();
    let between_var = total_variance(&centroid_list)?;
    let within_var = within.iter().sum::<f64>() / within.len() as f64;
    let total = between_var + within_var;
    Ok(DecompositionResult {
        model_name: model_name.to_string(),
        strategy_centroids: centroids,
        between_var,
        within_var,
        total,
        epistemic_ratio: if total > 0.0 { between_var / total } else { 0.0 },
    })
}

/// Decompose every model present in `vectors` (human vectors are ignored).
///
/// `transform` is required for [`DecompositionSpace::Standardized`].
pub fn decompose_all(
    vectors: &[DiversityVector],
    space: DecompositionSpace,
    transform: Option<&CredalTransform>,
) -> Result<Vec<DecompositionResult>> {
    let mut grouped: BTreeMap<String, BTreeMap<String, Vec<[f64; 3]>>> = BTreeMap::new();
    let mut sorted: Vec<&DiversityVector> = vectors.iter().filter(|v| !v.source.is_human()).collect();
    sorted.sort_by(|a, b| a.source.cmp(&b.source).then_with(|| a.prompt_id.cmp(&b.prompt_id)));
    for v in sorted {
        let coords = match space {
            DecompositionSpace::Raw => v.as_array(),
            DecompositionSpace::Standardized => transform
                .ok_or_else(|| Error::invalid("standardized decomposition needs a transform"))?
                .standardize(v),
        };
        grouped
            .entry(v.source.model_name.clone())
            .or_default()
            .entry(strategy_label(&v.source))
            .or_default()
            .push(coords);
    }
    grouped
        .iter()
        .map(|(model, by_strategy)| decompose(model, by_strategy))
        .collect()
}

fn strategy_label(source: &SourceTag) -> String {
    source.config_label()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub model: String,
    pub epistemic: f64,
    pub aleatoric: f64,
    pub total: f64,
    pub ratio: f64,
}

/// One row per model, highest epistemic ratio first (ties by model name).
pub fn decomposition_table(results: &[DecompositionResult]) -> Vec<DecompositionRow> {
    let mut rows: Vec<DecompositionRow> = results
        .iter()
        .map(|r| DecompositionRow {
            model: r.model_name.clone(),
            epistemic: r.between_var,
            aleatoric: r.within_var,
            total: r.total,
            ratio: r.epistemic_ratio,
        })
        .collect();
    rows.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then_with(|| a.model.cmp(&b.model)));
    rows
}
