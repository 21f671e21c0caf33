use std::time::Instant;

use serde::Serialize;

use super::KeyValues;
use crate::dataio::FeatureMatrix;
use crate::ensemble::EnsembleModel;
use crate::error::{Error, Result};
use crate::tree::argmax;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// `None` for classes absent from the test set.
    pub per_class_accuracy: Vec<Option<f64>>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub train_time: f64,
    pub test_time: f64,
}

impl EvalReport {
    /// Equality ignoring the timing fields.
    pub fn same_outcome(&self, other: &EvalReport) -> bool {
        self.accuracy == other.accuracy
            && self.per_class_accuracy == other.per_class_accuracy
            && self.confusion == other.confusion
    }

    pub fn total_time(&self) -> f64 {
        self.train_time + self.test_time
    }
}

impl KeyValues for EvalReport {
    fn key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![("accuracy".to_string(), format!("{:.6}", self.accuracy))];
        for (c, acc) in self.per_class_accuracy.iter().enumerate() {
            let v = acc.map_or("n/a".to_string(), |a| format!("{a:.6}"));
            kv.push((format!("class_{c}_accuracy"), v));
        }
        for (c, row) in self.confusion.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            kv.push((format!("confusion_{c}"), cells.join(" ")));
        }
        kv.push(("train_time".into(), format!("{:.6}", self.train_time)));
        kv.push(("test_time".into(), format!("{:.6}", self.test_time)));
        kv.push(("total_time".into(), format!("{:.6}", self.total_time())));
        kv
    }
}

/// Score `model` on a labeled test matrix with the same features and classes.
pub fn evaluate(model: &EnsembleModel, test: &FeatureMatrix) -> Result<EvalReport> {
    let labels = test.require_labels()?;
    if test.n_dims() != model.m_in() {
        return Err(Error::Dimension(format!("test has {} features, model expects {}", test.n_dims(), model.m_in())));
    }
    if test.class_label_strings() != model.class_labels() {
        return Err(Error::Consistency("test classes differ from the model's classes".into()));
    }
    let start = Instant::now();
    let probs = model.predict_proba_all(test)?;
    let test_time = start.elapsed().as_secs_f64();

    let k = model.n_classes();
    let mut confusion = vec![vec![0u64; k]; k];
    for (p, &l) in probs.iter().zip(&labels.indices) {
        confusion[l as usize][argmax(p)] += 1;
    }
    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..k).map(|c| confusion[c][c]).sum();
    let per_class_accuracy = confusion
        .iter()
        .enumerate()
        .map(|(c, row)| {
            let n: u64 = row.iter().sum();
            (n > 0).then(|| row[c] as f64 / n as f64)
        })
        .collect();
    Ok(EvalReport {
        accuracy: if total == 0 { 0.0 } else { trace as f64 / total as f64 },
        per_class_accuracy,
        confusion,
        train_time: 0.0,
        test_time,
    })
}
