use serde::{Deserialize, Serialize};

use super::matrix::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rng::{mix, SplitMix64};

/// Exactly `n_per_class` rows from every class, drawn without replacement.
///
/// Selected rows keep their original relative order.
pub fn stratified_subsample(fm: &FeatureMatrix, n_per_class: usize, seed: u64) -> Result<FeatureMatrix> {
    let members = fm.class_members()?;
    let names = fm.class_label_strings();
    let mut chosen = Vec::with_capacity(n_per_class * members.len());
    for (c, mut rows) in members.into_iter().enumerate() {
        if rows.len() < n_per_class {
            return Err(Error::InsufficientSamples(format!(
                "class '{}' has {} samples, {n_per_class} requested",
                names[c],
                rows.len()
            )));
        }
        let mut rng = SplitMix64::new(mix(seed, c as u64));
        rng.shuffle(&mut rows);
        chosen.extend_from_slice(&rows[..n_per_class]);
    }
    chosen.sort_unstable();
    Ok(fm.select_rows(&chosen))
}

/// Train/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train: f64, val: f64, test: f64, seed: u64, stratified: bool) -> Result<Self> {
        let spec = SplitSpec { train_fraction: train, val_fraction: val, test_fraction: test, seed, stratified };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fr = [self.train_fraction, self.val_fraction, self.test_fraction];
        if fr.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::Parameter(format!("split fractions {fr:?} must lie in [0, 1]")));
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("split fractions {fr:?} must sum to 1")));
        }
        Ok(())
    }
}

/// The three parts produced by [`split_features`].
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: FeatureMatrix,
    pub val: FeatureMatrix,
    pub test: FeatureMatrix,
}

/// Shuffle-and-cut split. When stratified, each class is cut separately so
/// every part keeps the class proportions (up to rounding).
pub fn split_features(fm: &FeatureMatrix, spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let groups: Vec<Vec<usize>> = if spec.stratified {
        fm.class_members()?
    } else {
        vec![(0..fm.n_samples()).collect()]
    };
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (g, mut rows) in groups.into_iter().enumerate() {
        let mut rng = SplitMix64::new(mix(spec.seed, g as u64));
        rng.shuffle(&mut rows);
        let n = rows.len();
        let n_train = ((n as f64 * spec.train_fraction).round() as usize).min(n);
        let n_val = ((n as f64 * spec.val_fraction).round() as usize).min(n - n_train);
        train.extend_from_slice(&rows[..n_train]);
        val.extend_from_slice(&rows[n_train..n_train + n_val]);
        test.extend_from_slice(&rows[n_train + n_val..]);
    }
    for part in [&mut train, &mut val, &mut test] {
        part.sort_unstable();
    }
    Ok(Splits { train: fm.select_rows(&train), val: fm.select_rows(&val), test: fm.select_rows(&test) })
}

/// Stratified fold index for every row: each class is shuffled and dealt
/// round-robin into `folds` folds.
pub fn stratified_folds(fm: &FeatureMatrix, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Parameter(format!("need at least 2 folds, got {folds}")));
    }
    let names = fm.class_label_strings();
    let mut assignment = vec![0; fm.n_samples()];
    for (c, mut rows) in fm.class_members()?.into_iter().enumerate() {
        if rows.len() < folds {
            return Err(Error::Split(format!(
                "class '{}' has {} samples, fewer than {folds} folds",
                names[c],
                rows.len()
            )));
        }
        let mut rng = SplitMix64::new(mix(seed, c as u64));
        rng.shuffle(&mut rows);
        for (k, r) in rows.into_iter().enumerate() {
            assignment[r] = k % folds;
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::matrix::DimSpan;

    fn labeled(counts: &[usize]) -> FeatureMatrix {
        let labels: Vec<u32> = counts.iter().enumerate().flat_map(|(c, &n)| vec![c as u32; n]).collect();
        let n = labels.len();
        let values = (0..n).map(|i| i as f32).collect();
        FeatureMatrix::new(n, 1, values, vec![DimSpan::new("x", 0..1)])
            .unwrap()
            .with_labels(labels, counts.len() as u32, vec![])
            .unwrap()
    }

    fn histogram(fm: &FeatureMatrix) -> Vec<usize> {
        fm.class_members().unwrap().iter().map(Vec::len).collect()
    }

    #[test]
    fn subsample_exact_histogram_and_order() {
        let fm = labeled(&[80, 120, 50]);
        let sub = stratified_subsample(&fm, 50, 3).unwrap();
        assert_eq!(histogram(&sub), vec![50, 50, 50]);
        let v = sub.values();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn subsample_deterministic() {
        let fm = labeled(&[80, 120]);
        assert_eq!(stratified_subsample(&fm, 50, 9).unwrap(), stratified_subsample(&fm, 50, 9).unwrap());
        assert_ne!(stratified_subsample(&fm, 50, 9).unwrap(), stratified_subsample(&fm, 50, 10).unwrap());
    }

    #[test]
    fn subsample_small_class_is_error() {
        let fm = labeled(&[80, 30]);
        assert!(matches!(stratified_subsample(&fm, 50, 1), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn subsample_requires_labels() {
        let fm = FeatureMatrix::new(2, 1, vec![0.0, 1.0], vec![DimSpan::new("x", 0..1)]).unwrap();
        assert!(matches!(stratified_subsample(&fm, 1, 1), Err(Error::Input(_))));
    }

    #[test]
    fn split_partitions_rows() {
        let fm = labeled(&[40, 60]);
        let spec = SplitSpec::new(0.5, 0.25, 0.25, 4, true).unwrap();
        let s = split_features(&fm, &spec).unwrap();
        assert_eq!(histogram(&s.train), vec![20, 30]);
        assert_eq!(histogram(&s.val), vec![10, 15]);
        assert_eq!(histogram(&s.test), vec![10, 15]);
        let mut all: Vec<f32> = [s.train.values(), s.val.values(), s.test.values()].concat();
        all.sort_by(f32::total_cmp);
        assert_eq!(all, fm.values());
    }

    #[test]
    fn split_spec_validation() {
        assert!(SplitSpec::new(0.5, 0.5, 0.5, 0, true).is_err());
        assert!(SplitSpec::new(1.2, -0.2, 0.0, 0, true).is_err());
        assert!(SplitSpec::new(1.0, 0.0, 0.0, 0, false).is_ok());
    }

    #[test]
    fn folds_are_balanced() {
        let fm = labeled(&[10, 7]);
        let folds = stratified_folds(&fm, 5, 2).unwrap();
        let labels = &fm.labels().unwrap().indices;
        for c in 0..2u32 {
            let mut per_fold = [0; 5];
            for (f, l) in folds.iter().zip(labels) {
                if *l == c {
                    per_fold[*f] += 1;
                }
            }
            let (lo, hi) = (per_fold.iter().min().unwrap(), per_fold.iter().max().unwrap());
            assert!(hi - lo <= 1);
        }
        assert!(matches!(stratified_folds(&labeled(&[10, 4]), 5, 2), Err(Error::Split(_))));
        assert!(stratified_folds(&fm, 1, 2).is_err());
    }
}
