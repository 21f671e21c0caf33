use super::matrix::{DimSpan, FeatureMatrix};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Isotropic Gaussian mixture: class `k` is centred at `separation·e_k` with
/// unit noise in all `m` dimensions. Rows cycle through the classes.
pub fn synth_mixture(
    n_classes: usize,
    n_per_class: usize,
    m: usize,
    separation: f64,
    seed: u64,
) -> Result<FeatureMatrix> {
    if n_classes < 2 || n_per_class == 0 || m < n_classes {
        return Err(Error::Parameter(format!(
            "need n_classes >= 2, n_per_class >= 1 and m >= n_classes (got {n_classes}, {n_per_class}, {m})"
        )));
    }
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(Error::Parameter(format!("separation must be finite and nonnegative, got {separation}")));
    }
    let n = n_classes * n_per_class;
    let mut rng = SplitMix64::new(seed);
    let mut values = Vec::with_capacity(n * m);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % n_classes;
        labels.push(class as u32);
        for j in 0..m {
            let centre = if j == class { separation } else { 0.0 };
            values.push((centre + rng.next_normal()) as f32);
        }
    }
    let names = (0..n_classes).map(|c| format!("class_{c}")).collect();
    FeatureMatrix::new(n, m, values, vec![DimSpan::new("synthetic", 0..m)])?.with_labels(
        labels,
        n_classes as u32,
        names,
    )
}
