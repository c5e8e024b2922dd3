//! Build credal sets for a wide human population and a narrow model one in a
//! shared PCA space, then compare them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use credal::corpus::SourceTag;
use credal::diversity::DiversityVector;
use credal::geometry::{adaptive_threshold, hausdorff, overlap, CredalSet, CredalTransform, ThresholdRule};

fn population(rng: &mut ChaCha8Rng, source: SourceTag, centre: f64, spread: f64) -> Vec<DiversityVector> {
    (0..40)
        .map(|i| DiversityVector {
            prompt_id: format!("p{i:03}"),
            source: source.clone(),
            d_sem: centre + rng.gen_range(-spread..spread),
            d_lex: centre + 0.1 + rng.gen_range(-spread..spread),
            d_syn: centre - 0.1 + rng.gen_range(-spread..spread),
            n_stories: 10,
        })
        .collect()
}

fn main() -> credal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let human = population(&mut rng, SourceTag::human(), 0.6, 0.15);
    let model = population(&mut rng, SourceTag::model("Demo-1B", "top_k", 40.0), 0.5, 0.05);
    let pool: Vec<DiversityVector> = human.iter().chain(&model).cloned().collect();

    let transform = CredalTransform::fit(&pool, 3)?;
    println!("explained variance ratios {:.3?}", transform.pca.ratios);
    let h = CredalSet::build(&human.iter().collect::<Vec<_>>(), &transform)?;
    let m = CredalSet::build(&model.iter().collect::<Vec<_>>(), &transform)?;

    let points: Vec<Vec<f64>> = h.points.iter().chain(&m.points).cloned().collect();
    let theta = adaptive_threshold(&points, ThresholdRule::HalfMeanStd)?;
    println!("human volume {:.4} ({} vertices)", h.volume, h.hull.vertices.len());
    println!("model volume {:.4} ({} vertices)", m.volume, m.hull.vertices.len());
    println!("θ = {theta:.4}, overlap {:.3}", overlap(&m.vertices(), &h.vertices(), theta)?);
    println!("Hausdorff {:.4}", hausdorff(&m.vertices(), &h.vertices())?);
    Ok(())
}
