use rayon::prelude::*;
use serde::Serialize;

use crate::dataio::{stratified_folds, FeatureMatrix};
use crate::ensemble::{train_ensemble, EnsembleConfig};
use crate::error::{Error, Result};
use crate::rng::mix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub d_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub folds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { d_values: vec![20, 100, 1_000, 10_000, 20_000], n_values: vec![10, 20, 50], folds: 5 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d_values.is_empty() || self.n_values.is_empty() {
            return Err(Error::Parameter("grid needs at least one D and one N".into()));
        }
        if self.d_values.contains(&0) || self.n_values.contains(&0) {
            return Err(Error::Parameter("grid values must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::Parameter(format!("need at least 2 folds, got {}", self.folds)));
        }
        Ok(())
    }

    /// `(D, N)` pairs, D-major in the given order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.d_values.iter().flat_map(|&d| self.n_values.iter().map(move |&n| (d, n))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub d_out: usize,
    pub n_members: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    pub best_index: usize,
    pub best_config: EnsembleConfig,
}

impl GridResult {
    pub fn best(&self) -> &GridCell {
        &self.cells[self.best_index]
    }
}

/// Index of the best cell: highest mean accuracy, ties to smaller D, then smaller N.
pub(crate) fn select_best(cells: &[GridCell]) -> usize {
    let mut best = 0;
    for (i, c) in cells.iter().enumerate().skip(1) {
        let b = &cells[best];
        let better = c.mean_accuracy > b.mean_accuracy
            || (c.mean_accuracy == b.mean_accuracy && (c.d_out, c.n_members) < (b.d_out, b.n_members));
        if better {
            best = i;
        }
    }
    best
}

/// Stratified k-fold cross-validation over every `(D, N)` cell.
///
/// Folds are shared by all cells; each cell trains with a seed derived from
/// `(seed, D, N)`, so results do not depend on grid composition or scheduling.
pub fn grid_search(train: &FeatureMatrix, grid: &GridSpec, base: &EnsembleConfig, seed: u64) -> Result<GridResult> {
    grid.validate()?;
    base.validate()?;
    let folds = stratified_folds(train, grid.folds, seed)?;
    let parts: Vec<(FeatureMatrix, FeatureMatrix)> = (0..grid.folds)
        .map(|f| {
            let (fit, held): (Vec<usize>, Vec<usize>) = (0..train.n_samples()).partition(|&r| folds[r] != f);
            (train.select_rows(&fit), train.select_rows(&held))
        })
        .collect();

    let cells = grid
        .cells()
        .into_par_iter()
        .map(|(d_out, n_members)| {
            let config = EnsembleConfig { d_out, n_members, ..*base };
            let cell_seed = mix(mix(seed, d_out as u64), n_members as u64);
            let fold_accuracies = parts
                .iter()
                .map(|(fit, held)| train_ensemble(fit, None, &config, cell_seed)?.accuracy(held))
                .collect::<Result<Vec<_>>>()?;
            let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
            Ok(GridCell { d_out, n_members, fold_accuracies, mean_accuracy })
        })
        .collect::<Result<Vec<_>>>()?;

    let best_index = select_best(&cells);
    let best_config = EnsembleConfig { d_out: cells[best_index].d_out, n_members: cells[best_index].n_members, ..*base };
    Ok(GridResult { cells, best_index, best_config })
}
