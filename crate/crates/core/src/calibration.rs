//! Calibration of model credal sets against the human credal set.
//!
//! Each model configuration gets an overlap coefficient, a centroid distance,
//! a volume ratio, a Hausdorff distance between vertex sets and a composite
//! score combining the first three. Per-dimension 1-Wasserstein distances
//! between the per-prompt human and model diversity values complement the
//! hull-based measures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::SourceTag;
use crate::diversity::DiversityVector;
use crate::geometry::{self, CredalSet, CredalTransform};
use crate::{Error, Result};

/// Weights of (overlap, centroid proximity, volume agreement) in the composite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeWeights(pub [f64; 3]);

impl Default for CompositeWeights {
    fn default() -> Self {
        CompositeWeights([1.0 / 3.0; 3])
    }
}

impl CompositeWeights {
    pub fn new(w: [f64; 3]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || w.iter().any(|x| *x < 0.0 || !x.is_finite()) {
            return Err(Error::invalid(format!(
                "composite weights must be non-negative and sum to 1, got {w:?}"
            )));
        }
        Ok(CompositeWeights(w))
    }
}

/// `w1·overlap + w2·exp(−centroid_distance) + w3·min(vr, 1/vr)`, with the
/// volume term 0 when the ratio is 0.
pub fn composite_score(
    overlap: f64,
    centroid_distance: f64,
    volume_ratio: f64,
    weights: CompositeWeights,
) -> Result<f64> {
    let CompositeWeights(w) = CompositeWeights::new(weights.0)?;
    if !(0.0..=1.0).contains(&overlap) || !(centroid_distance >= 0.0) || !(volume_ratio >= 0.0) {
        return Err(Error::invalid(format!(
            "composite inputs out of range: overlap {overlap}, centroid {centroid_distance}, volume ratio {volume_ratio}"
        )));
    }
    let volume_term = if volume_ratio > 0.0 {
        volume_ratio.min(1.0 / volume_ratio)
    } else {
        0.0
    };
    let score = w[0] * overlap + w[1] * (-centroid_distance).exp() + w[2] * volume_term;
    Ok(score.clamp(0.0, 1.0))
}

/// Distance between the standardized-space means of the two point clouds.
pub fn centroid_distance(model: &CredalSet, human: &CredalSet) -> Result<f64> {
    if model.transform_digest != human.transform_digest {
        return Err(Error::TransformMismatch);
    }
    Ok(geometry::euclidean(&model.std_centroid, &human.std_centroid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeRatio {
    pub ratio: f64,
    pub model_degenerate: bool,
}

pub fn volume_ratio(model: &CredalSet, human: &CredalSet) -> Result<VolumeRatio> {
    if model.transform_digest != human.transform_digest {
        return Err(Error::TransformMismatch);
    }
    if human.degenerate || human.volume <= 0.0 {
        return Err(Error::Degenerate("human credal set has zero volume".into()));
    }
    Ok(VolumeRatio {
        ratio: if model.degenerate { 0.0 } else { model.volume / human.volume },
        model_degenerate: model.degenerate,
    })
}

/// 1-Wasserstein distance between two empirical distributions on the line.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("wasserstein distance of an empty sample"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    if a.len() == b.len() {
        let total: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(total / a.len() as f64);
    }
    // Integrate |F_a − F_b| between consecutive breakpoints.
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (next - prev);
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}

/// Which coordinates the Wasserstein comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WassersteinSpace {
    #[default]
    Raw,
    Standardized,
}

impl std::str::FromStr for WassersteinSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(WassersteinSpace::Raw),
            "standardized" => Ok(WassersteinSpace::Standardized),
            other => Err(Error::invalid(format!("unknown wasserstein space {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WassersteinRow {
    pub source: SourceTag,
    pub semantic: f64,
    pub lexical: f64,
    pub syntactic: f64,
    pub mean: f64,
}

/// Per-dimension distances between human and each model configuration.
///
/// `transform` is required for [`WassersteinSpace::Standardized`].
pub fn wasserstein_report(
    vectors: &[DiversityVector],
    space: WassersteinSpace,
    transform: Option<&CredalTransform>,
) -> Result<Vec<WassersteinRow>> {
    let coords = |v: &DiversityVector| -> Result<[f64; 3]> {
        match space {
            WassersteinSpace::Raw => Ok(v.as_array()),
            WassersteinSpace::Standardized => transform
                .map(|t| t.standardize(v))
                .ok_or_else(|| Error::invalid("standardized wasserstein needs a transform")),
        }
    };
    let mut by_source: BTreeMap<&SourceTag, Vec<[f64; 3]>> = BTreeMap::new();
    for v in vectors {
        by_source.entry(&v.source).or_default().push(coords(v)?);
    }
    let human = by_source
        .get(&SourceTag::human())
        .ok_or_else(|| Error::invalid("wasserstein report needs human vectors"))?
        .clone();
    let column = |pts: &[[f64; 3]], d: usize| pts.iter().map(|p| p[d]).collect::<Vec<f64>>();
    by_source
        .iter()
        .filter(|(s, _)| !s.is_human())
        .map(|(source, pts)| {
            let dims: Vec<f64> = (0..3)
                .map(|d| wasserstein_1d(&column(&human, d), &column(pts, d)))
                .collect::<Result<_>>()?;
            Ok(WassersteinRow {
                source: (*source).clone(),
                semantic: dims[0],
                lexical: dims[1],
                syntactic: dims[2],
                mean: dims.iter().sum::<f64>() / 3.0,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub model_name: String,
    pub strategy: String,
    pub strategy_value: f64,
    pub composite: f64,
    pub overlap: f64,
    pub centroid_distance: f64,
    pub volume_ratio: f64,
    pub model_degenerate: bool,
    pub hausdorff: f64,
    pub model_volume: f64,
    pub human_volume: f64,
    pub wasserstein: Option<WassersteinRow>,
}

impl CalibrationReport {
    pub fn source(&self) -> SourceTag {
        SourceTag::model(&self.model_name, &self.strategy, self.strategy_value)
    }
}

/// Score one model credal set against the human one.
pub fn calibrate(
    model: &CredalSet,
    human: &CredalSet,
    theta: f64,
    weights: CompositeWeights,
) -> Result<CalibrationReport> {
    if model.source.is_human() {
        return Err(Error::invalid("calibrate expects a model credal set"));
    }
    let mv = model.vertices();
    let hv = human.vertices();
    let overlap = geometry::overlap(&mv, &hv, theta)?;
    let cd = centroid_distance(model, human)?;
    let vr = volume_ratio(model, human)?;
    Ok(CalibrationReport {
        model_name: model.source.model_name.clone(),
        strategy: model.source.strategy.clone(),
        strategy_value: model.source.strategy_value.unwrap_or_default(),
        composite: composite_score(overlap, cd, vr.ratio, weights)?,
        overlap,
        centroid_distance: cd,
        volume_ratio: vr.ratio,
        model_degenerate: vr.model_degenerate,
        hausdorff: geometry::hausdorff(&mv, &hv)?,
        model_volume: model.volume,
        human_volume: human.volume,
        wasserstein: None,
    })
}

/// Descending composite; ties by model name, then strategy, then value.
pub fn rank_configurations(mut reports: Vec<CalibrationReport>) -> Vec<CalibrationReport> {
    reports.sort_by(|a, b| {
        b.composite
            .total_cmp(&a.composite)
            .then_with(|| a.model_name.cmp(&b.model_name))
            .then_with(|| a.strategy.cmp(&b.strategy))
            .then_with(|| a.strategy_value.total_cmp(&b.strategy_value))
    });
    reports
}

/// Flat row for the calibration CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCsvRow {
    pub model: String,
    pub strategy: String,
    pub value: f64,
    pub composite: f64,
    #[serde(default)]
    pub overlap: Option<f64>,
    #[serde(default)]
    pub centroid_distance: Option<f64>,
    #[serde(default)]
    pub volume_ratio: Option<f64>,
    #[serde(default)]
    pub hausdorff: Option<f64>,
    #[serde(default)]
    pub model_volume: Option<f64>,
    #[serde(default)]
    pub w_semantic: Option<f64>,
    #[serde(default)]
    pub w_lexical: Option<f64>,
    #[serde(default)]
    pub w_syntactic: Option<f64>,
    #[serde(default)]
    pub w_mean: Option<f64>,
}

impl From<&CalibrationReport> for CalibrationCsvRow {
    fn from(r: &CalibrationReport) -> Self {
        let w = r.wasserstein.as_ref();
        CalibrationCsvRow {
            model: r.model_name.clone(),
            strategy: r.strategy.clone(),
            value: r.strategy_value,
            composite: r.composite,
            overlap: Some(r.overlap),
            centroid_distance: Some(r.centroid_distance),
            volume_ratio: Some(r.volume_ratio),
            hausdorff: Some(r.hausdorff),
            model_volume: Some(r.model_volume),
            w_semantic: w.map(|w| w.semantic),
            w_lexical: w.map(|w| w.lexical),
            w_syntactic: w.map(|w| w.syntactic),
            w_mean: w.map(|w| w.mean),
        }
    }
}
