use serde::{Deserialize, Serialize};

use super::euclidean;
use crate::{Error, Result};

/// How the overlap threshold is derived from the pooled point spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Half the mean per-dimension standard deviation.
    #[default]
    HalfMeanStd,
    /// Half the mean per-dimension variance.
    HalfMeanVariance,
}

impl std::str::FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half_mean_std" => Ok(ThresholdRule::HalfMeanStd),
            "half_mean_variance" => Ok(ThresholdRule::HalfMeanVariance),
            other => Err(Error::invalid(format!("unknown threshold rule {other:?}"))),
        }
    }
}

fn nearest(p: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter()
        .map(|q| euclidean(p, q))
        .fold(f64::INFINITY, f64::min)
}

fn directed_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().map(|p| nearest(p, b)).fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("hausdorff distance of an empty set"));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// Overlap threshold from the pooled transformed points.
pub fn adaptive_threshold(pool: &[Vec<f64>], rule: ThresholdRule) -> Result<f64> {
    if pool.len() < 2 {
        return Err(Error::invalid("threshold needs at least 2 points"));
    }
    let dims = pool[0].len();
    let n = pool.len() as f64;
    let spreads: Vec<f64> = (0..dims)
        .map(|d| {
            let m = pool.iter().map(|p| p[d]).sum::<f64>() / n;
            let var = pool.iter().map(|p| (p[d] - m).powi(2)).sum::<f64>() / n;
            match rule {
                ThresholdRule::HalfMeanStd => var.sqrt(),
                ThresholdRule::HalfMeanVariance => var,
            }
        })
        .collect();
    let theta = 0.5 * spreads.iter().sum::<f64>() / dims as f64;
    if !(theta > 0.0) {
        return Err(Error::Degenerate(
            "pooled points have zero spread; overlap threshold undefined".into(),
        ));
    }
    Ok(theta)
}

/// Mean of the two directed fractions of vertices lying strictly within
/// `theta` of the other vertex set.
pub fn overlap(model: &[Vec<f64>], human: &[Vec<f64>], theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("overlap threshold must be positive, got {theta}")));
    }
    if model.is_empty() || human.is_empty() {
        return Err(Error::invalid("overlap of an empty vertex set"));
    }
    let frac = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter().filter(|p| nearest(p, to) < theta).count() as f64 / from.len() as f64
    };
    Ok(0.5 * (frac(model, human) + frac(human, model)))
}
