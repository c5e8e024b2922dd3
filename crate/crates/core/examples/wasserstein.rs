//! One-dimensional Wasserstein distances between samples of different sizes.

use credal::calibration::wasserstein_1d;

fn main() -> credal::Result<()> {
    let human = [0.61, 0.58, 0.70, 0.66, 0.55, 0.63];
    let model = [0.52, 0.50, 0.57, 0.49];
    println!("W(human, model)       = {:.4}", wasserstein_1d(&human, &model)?);
    println!("W(human, human + 0.1) = {:.4}", wasserstein_1d(&human, &human.map(|x| x + 0.1))?);
    println!("W(human, human)       = {:.4}", wasserstein_1d(&human, &human)?);
    Ok(())
}
