use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Principal axes of a 3D point cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaTransform {
    pub mean: [f64; 3],
    /// Rows are unit principal axes, sorted by descending explained variance.
    /// Each row's largest-magnitude loading is positive.
    pub components: [[f64; 3]; 3],
    /// Population variance along each component.
    pub explained_variance: [f64; 3],
    pub ratios: [f64; 3],
}

impl PcaTransform {
    /// Coordinates of `p` along the first `dims` components.
    pub fn project(&self, p: [f64; 3], dims: usize) -> Vec<f64> {
        let c = [p[0] - self.mean[0], p[1] - self.mean[1], p[2] - self.mean[2]];
        self.components[..dims]
            .iter()
            .map(|row| row[0] * c[0] + row[1] * c[1] + row[2] * c[2])
            .collect()
    }
}

/// Population covariance of a 3D point cloud.
pub fn covariance(points: &[[f64; 3]]) -> ([f64; 3], Matrix3<f64>) {
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in points {
        for d in 0..3 {
            mean[d] += p[d];
        }
    }
    mean = mean.map(|m| m / n);
    let mut cov = Matrix3::zeros();
    for p in points {
        for r in 0..3 {
            for c in 0..3 {
                cov[(r, c)] += (p[r] - mean[r]) * (p[c] - mean[c]);
            }
        }
    }
    (mean, cov / n)
}

pub fn fit_pca(points: &[[f64; 3]]) -> Result<PcaTransform> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "PCA needs at least 3 points, got {}",
            points.len()
        )));
    }
    let (mean, cov) = covariance(points);
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = [[0.0; 3]; 3];
    let mut explained = [0.0; 3];
    for (k, &col) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(col);
        let mut row = [v[0], v[1], v[2]];
        let norm = (row[0] * row[0] + row[1] * row[1] + row[2] * row[2]).sqrt();
        row = row.map(|x| x / norm);
        let lead = (0..3)
            .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()).then(b.cmp(&a)))
            .expect("3 loadings");
        if row[lead] < 0.0 {
            row = row.map(|x| -x);
        }
        components[k] = row;
        explained[k] = eig.eigenvalues[col].max(0.0);
    }
    let total: f64 = explained.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("PCA input has zero total variance".into()));
    }
    Ok(PcaTransform {
        mean,
        components,
        explained_variance: explained,
        ratios: explained.map(|e| e / total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn rank_one_input() {
        let pts: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, 0.0, 0.0]).collect();
        let pca = fit_pca(&pts).unwrap();
        assert!((pca.ratios[0] - 1.0).abs() < 1e-12);
        assert!(pca.ratios[1].abs() < 1e-12 && pca.ratios[2].abs() < 1e-12);
        assert!((pca.components[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_sample_splits_evenly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<[f64; 3]> = (0..10_000)
            .map(|_| [0; 3].map(|_: i32| StandardNormal.sample(&mut rng)))
            .collect();
        let pca = fit_pca(&pts).unwrap();
        for r in pca.ratios {
            assert!((r - 1.0 / 3.0).abs() < 0.02, "{r}");
        }
    }

    #[test]
    fn components_orthonormal_and_sign_fixed() {
        let pts = vec![[1.0, 2.0, 0.5], [2.0, 3.5, 1.0], [0.0, 0.3, 2.0], [3.0, 1.0, 1.0], [1.5, 2.5, 0.1]];
        let pca = fit_pca(&pts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| pca.components[i][k] * pca.components[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-9);
            }
            let row = pca.components[i];
            let lead = (0..3).max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs())).unwrap();
            assert!(row[lead] > 0.0);
        }
        assert!((pca.ratios.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(pca.ratios[0] >= pca.ratios[1] && pca.ratios[1] >= pca.ratios[2]);
    }

    #[test]
    fn eigen_equation_holds() {
        let pts = vec![[1.0, 2.0, 0.5], [2.0, 3.5, 1.0], [0.0, 0.3, 2.0], [3.0, 1.0, 1.0]];
        let (_, cov) = covariance(&pts);
        let pca = fit_pca(&pts).unwrap();
        for k in 0..3 {
            let v = nalgebra::Vector3::from(pca.components[k]);
            let lhs = cov * v;
            let rhs = v * pca.explained_variance[k];
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn too_few_points() {
        assert!(fit_pca(&[[0.0; 3], [1.0; 3]]).is_err());
        assert!(fit_pca(&[[1.0; 3]; 4]).is_err());
    }
}
