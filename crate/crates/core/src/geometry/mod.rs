//! Geometry of credal sets: a shared standardize-then-PCA transform, convex
//! hulls of the transformed diversity vectors, and the point-set distances
//! used to compare hulls.

mod distance;
mod hull;
mod pca;

pub use distance::{adaptive_threshold, hausdorff, overlap, ThresholdRule};
pub use hull::{quickhull, Hull, HULL_EPS};
pub use pca::{covariance, fit_pca, PcaTransform};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::SourceTag;
use crate::diversity::DiversityVector;
use crate::{Error, Result};

/// Per-dimension z-score parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Standardizer {
    pub fn fit(points: &[[f64; 3]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("standardizer needs at least 2 points"));
        }
        let n = points.len() as f64;
        let mut mean = [0.0; 3];
        let mut std = [0.0; 3];
        for d in 0..3 {
            mean[d] = points.iter().map(|p| p[d]).sum::<f64>() / n;
            let var = points.iter().map(|p| (p[d] - mean[d]).powi(2)).sum::<f64>() / n;
            std[d] = var.sqrt();
            if std[d] <= 1e-12 * mean[d].abs().max(1.0) {
                return Err(Error::Degenerate(format!(
                    "dimension {d} has zero variance in the standardization pool"
                )));
            }
        }
        Ok(Standardizer { mean, std })
    }

    pub fn transform(&self, p: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|d| (p[d] - self.mean[d]) / self.std[d])
    }

    pub fn inverse(&self, z: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|d| z[d] * self.std[d] + self.mean[d])
    }
}

pub fn fit_standardizer(pool: &[DiversityVector]) -> Result<Standardizer> {
    let pts: Vec<[f64; 3]> = pool.iter().map(DiversityVector::as_array).collect();
    Standardizer::fit(&pts)
}

/// Standardizer followed by PCA, truncated to `dims` components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalTransform {
    pub standardizer: Standardizer,
    pub pca: PcaTransform,
    pub dims: usize,
}

impl CredalTransform {
    /// Fit both stages on the pooled vectors of every population.
    pub fn fit(pool: &[DiversityVector], dims: usize) -> Result<Self> {
        if !(dims == 2 || dims == 3) {
            return Err(Error::invalid(format!("pca_dims must be 2 or 3, got {dims}")));
        }
        let standardizer = fit_standardizer(pool)?;
        let z: Vec<[f64; 3]> = pool
            .iter()
            .map(|v| standardizer.transform(v.as_array()))
            .collect();
        let pca = fit_pca(&z)?;
        Ok(CredalTransform {
            standardizer,
            pca,
            dims,
        })
    }

    pub fn standardize(&self, v: &DiversityVector) -> [f64; 3] {
        self.standardizer.transform(v.as_array())
    }

    pub fn apply(&self, v: &DiversityVector) -> Vec<f64> {
        self.pca.project(self.standardize(v), self.dims)
    }

    /// SHA-256 over the canonical JSON form; identifies the shared space.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("transform serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn export(&self) -> TransformExport {
        TransformExport {
            means: self.standardizer.mean,
            stds: self.standardizer.std,
            components: self.pca.components,
            ratios: self.pca.ratios,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformExport {
    pub means: [f64; 3],
    pub stds: [f64; 3],
    pub components: [[f64; 3]; 3],
    pub ratios: [f64; 3],
}

/// Convex hull of one population's per-prompt diversity vectors in the shared space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalSet {
    pub label: String,
    pub source: SourceTag,
    pub prompt_ids: Vec<String>,
    /// Transformed points, one per prompt.
    pub points: Vec<Vec<f64>>,
    pub hull: Hull,
    pub volume: f64,
    /// Mean of all transformed points.
    pub centroid: Vec<f64>,
    /// Mean of the standardized (pre-PCA) points.
    pub std_centroid: [f64; 3],
    pub degenerate: bool,
    pub transform_digest: String,
}

impl CredalSet {
    /// `vectors` must all come from one source; they are ordered by prompt id.
    pub fn build(vectors: &[&DiversityVector], transform: &CredalTransform) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::invalid("credal set needs at least one vector"));
        };
        if vectors.iter().any(|v| v.source != first.source) {
            return Err(Error::invalid("credal set vectors mix sources"));
        }
        let mut sorted: Vec<&DiversityVector> = vectors.to_vec();
        sorted.sort_by(|a, b| a.prompt_id.cmp(&b.prompt_id));
        let points: Vec<Vec<f64>> = sorted.iter().map(|v| transform.apply(v)).collect();
        let std_points: Vec<[f64; 3]> = sorted.iter().map(|v| transform.standardize(v)).collect();
        let hull = quickhull(&points, transform.dims)?;
        Ok(CredalSet {
            label: first.source.to_string(),
            source: first.source.clone(),
            prompt_ids: sorted.iter().map(|v| v.prompt_id.clone()).collect(),
            centroid: mean_point(&points),
            std_centroid: {
                let m = mean_point(&std_points.iter().map(|p| p.to_vec()).collect::<Vec<_>>());
                [m[0], m[1], m[2]]
            },
            volume: hull_volume(&hull),
            degenerate: hull.degenerate,
            hull,
            points,
            transform_digest: transform.digest(),
        })
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        self.hull
            .vertices
            .iter()
            .map(|&i| self.points[i].clone())
            .collect()
    }

    /// Export in the interchange schema, transform parameters included.
    pub fn export(&self, transform: &CredalTransform) -> CredalSetExport {
        CredalSetExport {
            label: self.label.clone(),
            transform: transform.export(),
            vertices: self.vertices(),
            vertex_indices: self.hull.vertices.clone(),
            facets: self.hull.facets.clone(),
            volume: self.volume,
            centroid: self.centroid.clone(),
            degenerate: self.degenerate,
            points: self.points.clone(),
            prompt_ids: self.prompt_ids.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalSetExport {
    pub label: String,
    pub transform: TransformExport,
    pub vertices: Vec<Vec<f64>>,
    /// Positions of the vertices within `points`.
    pub vertex_indices: Vec<usize>,
    /// Facets as indices into `points`.
    pub facets: Vec<Vec<usize>>,
    pub volume: f64,
    pub centroid: Vec<f64>,
    pub degenerate: bool,
    pub points: Vec<Vec<f64>>,
    pub prompt_ids: Vec<String>,
}

/// Zero for degenerate hulls; check [`Hull::degenerate`] to tell the cases apart.
pub fn hull_volume(hull: &Hull) -> f64 {
    if hull.degenerate {
        0.0
    } else {
        hull.volume
    }
}

pub fn mean_point(points: &[Vec<f64>]) -> Vec<f64> {
    let dims = points.first().map_or(0, Vec::len);
    let n = points.len() as f64;
    (0..dims)
        .map(|d| points.iter().map(|p| p[d]).sum::<f64>() / n)
        .collect()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}
