use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contiguous run of feature dimensions contributed by one backbone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimSpan {
    pub backbone: String,
    pub start: u64,
    pub end: u64,
}

impl DimSpan {
    pub fn new(backbone: impl Into<String>, range: Range<usize>) -> Self {
        DimSpan { backbone: backbone.into(), start: range.start as u64, end: range.end as u64 }
    }

    pub fn range(&self) -> Range<usize> {
        self.start as usize..self.end as usize
    }
}

/// Class labels attached to a feature matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub indices: Vec<u32>,
    pub n_classes: u32,
    /// Either empty or exactly `n_classes` names.
    pub names: Vec<String>,
}

/// `n × M` pooled-feature matrix stored row-major as 32-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_samples: usize,
    n_dims: usize,
    values: Vec<f32>,
    labels: Option<Labels>,
    provenance: Vec<DimSpan>,
}

impl FeatureMatrix {
    /// Unlabeled matrix. `provenance` must partition `0..n_dims`.
    pub fn new(n_samples: usize, n_dims: usize, values: Vec<f32>, provenance: Vec<DimSpan>) -> Result<Self> {
        if n_dims == 0 {
            return Err(Error::Input("feature matrix needs at least one dimension".into()));
        }
        if values.len() != n_samples * n_dims {
            return Err(Error::Dimension(format!(
                "{} values for {n_samples} samples of {n_dims} dimensions",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("value at flat index {i} is not finite")));
        }
        check_partition(&provenance, n_dims)?;
        Ok(FeatureMatrix { n_samples, n_dims, values, labels: None, provenance })
    }

    /// Attach labels; `names` may be empty.
    pub fn with_labels(mut self, indices: Vec<u32>, n_classes: u32, names: Vec<String>) -> Result<Self> {
        if indices.len() != self.n_samples {
            return Err(Error::Dimension(format!("{} labels for {} samples", indices.len(), self.n_samples)));
        }
        if n_classes == 0 {
            return Err(Error::Input("labeled data needs at least one class".into()));
        }
        if let Some(bad) = indices.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Input(format!("label {bad} out of range for {n_classes} classes")));
        }
        if !names.is_empty() && names.len() != n_classes as usize {
            return Err(Error::Input(format!("{} class names for {n_classes} classes", names.len())));
        }
        self.labels = Some(Labels { indices, n_classes, names });
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.n_dims..(i + 1) * self.n_dims]
    }

    pub fn row_f64(&self, i: usize) -> Vec<f64> {
        self.row(i).iter().map(|&v| f64::from(v)).collect()
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    /// Label indices, or an input error when the matrix is unlabeled.
    pub fn require_labels(&self) -> Result<&Labels> {
        self.labels.as_ref().ok_or_else(|| Error::Input("feature matrix is unlabeled".into()))
    }

    pub fn n_classes(&self) -> usize {
        self.labels.as_ref().map_or(0, |l| l.n_classes as usize)
    }

    /// Class names, falling back to the decimal class index.
    pub fn class_label_strings(&self) -> Vec<String> {
        match &self.labels {
            Some(l) if !l.names.is_empty() => l.names.clone(),
            Some(l) => (0..l.n_classes).map(|c| c.to_string()).collect(),
            None => Vec::new(),
        }
    }

    pub fn provenance(&self) -> &[DimSpan] {
        &self.provenance
    }

    /// Row indices of every class, in row order.
    pub fn class_members(&self) -> Result<Vec<Vec<usize>>> {
        let labels = self.require_labels()?;
        let mut members = vec![Vec::new(); labels.n_classes as usize];
        for (i, &l) in labels.indices.iter().enumerate() {
            members[l as usize].push(i);
        }
        Ok(members)
    }

    /// New matrix holding the given rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.n_dims);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        let labels = self.labels.as_ref().map(|l| Labels {
            indices: rows.iter().map(|&r| l.indices[r]).collect(),
            n_classes: l.n_classes,
            names: l.names.clone(),
        });
        FeatureMatrix { n_samples: rows.len(), n_dims: self.n_dims, values, labels, provenance: self.provenance.clone() }
    }

    /// Columns `range` as a new matrix with a single provenance span.
    pub fn select_dims(&self, range: Range<usize>, name: &str) -> Result<FeatureMatrix> {
        if range.start >= range.end || range.end > self.n_dims {
            return Err(Error::Dimension(format!("column range {range:?} outside 0..{}", self.n_dims)));
        }
        let width = range.len();
        let mut values = Vec::with_capacity(self.n_samples * width);
        for i in 0..self.n_samples {
            values.extend_from_slice(&self.row(i)[range.clone()]);
        }
        Ok(FeatureMatrix {
            n_samples: self.n_samples,
            n_dims: width,
            values,
            labels: self.labels.clone(),
            provenance: vec![DimSpan::new(name, 0..width)],
        })
    }
}

fn check_partition(spans: &[DimSpan], n_dims: usize) -> Result<()> {
    let mut cursor = 0u64;
    for s in spans {
        if s.start != cursor || s.end <= s.start {
            return Err(Error::Input(format!(
                "provenance span '{}' [{}, {}) does not continue the partition at {cursor}",
                s.backbone, s.start, s.end
            )));
        }
        cursor = s.end;
    }
    if cursor != n_dims as u64 {
        return Err(Error::Input(format!("provenance spans cover {cursor} of {n_dims} dimensions")));
    }
    Ok(())
}

/// Concatenate per-backbone matrices column-wise, in argument order.
pub fn concat_features(parts: &[FeatureMatrix]) -> Result<FeatureMatrix> {
    let first = parts.first().ok_or_else(|| Error::Input("nothing to concatenate".into()))?;
    let n = first.n_samples;
    let mut labels: Option<&Labels> = None;
    for (k, part) in parts.iter().enumerate() {
        if part.n_samples != n {
            return Err(Error::Consistency(format!(
                "part {k} has {} samples, part 0 has {n}",
                part.n_samples
            )));
        }
        if let Some(l) = &part.labels {
            match labels {
                Some(prev) if prev != l => {
                    return Err(Error::Consistency(format!("labels of part {k} differ from earlier parts")));
                }
                _ => labels = Some(l),
            }
        }
    }

    let m: usize = parts.iter().map(|p| p.n_dims).sum();
    let mut values = Vec::with_capacity(n * m);
    for i in 0..n {
        for part in parts {
            values.extend_from_slice(part.row(i));
        }
    }
    let mut provenance = Vec::new();
    let mut offset = 0u64;
    for part in parts {
        for s in &part.provenance {
            provenance.push(DimSpan { backbone: s.backbone.clone(), start: s.start + offset, end: s.end + offset });
        }
        offset += part.n_dims as u64;
    }
    Ok(FeatureMatrix { n_samples: n, n_dims: m, values, labels: labels.cloned(), provenance })
}
