//! Random-subspace ensembles: one Fastfood block and one CART tree per
//! member, fused by a weighted average of class-probability vectors.
//!
//! Member blocks are never stored. Each member keeps its seed and the block
//! (plus phases, for the cosine map) is regenerated when a model is built or
//! loaded.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::FeatureMatrix;
use crate::error::{Error, Result};
use crate::fastfood::{apply_nonlinearity_in_place, FastfoodBlock, NonlinearityMode, ScaleMode};
use crate::rng::mix;
use crate::tree::{argmax, fit_tree, DecisionTree, TreeParams};
use crate::fastfood::DenseMatrix;

pub const MODEL_FORMAT: &str = "dfem";
pub const MODEL_VERSION: u32 = 1;

/// Substream index reserved for cosine phases; stack substreams count up from 0.
const PHASE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    #[default]
    Identity,
    RbfCos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    ValidationAccuracy,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_members: usize,
    pub d_out: usize,
    pub sigma: f64,
    pub nonlinearity: NonlinearityKind,
    pub scale_mode: ScaleMode,
    pub tree: TreeParams,
    pub weighting: Weighting,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_members: 10,
            d_out: 100,
            sigma: 1.0,
            nonlinearity: NonlinearityKind::Identity,
            scale_mode: ScaleMode::Chi,
            tree: TreeParams::default(),
            weighting: Weighting::ValidationAccuracy,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_members == 0 || self.d_out == 0 {
            return Err(Error::Parameter("ensemble needs N >= 1 members and D >= 1".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Parameter(format!("bandwidth must be positive and finite, got {}", self.sigma)));
        }
        self.tree.validate()
    }
}

/// Seed of member `index` under `master_seed`.
pub fn member_seed(master_seed: u64, index: usize) -> u64 {
    mix(master_seed, index as u64)
}

/// Projection plus nonlinearity for one member.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    block: FastfoodBlock,
    nonlinearity: NonlinearityMode,
}

impl Subspace {
    pub fn generate(seed: u64, m_in: usize, config: &EnsembleConfig) -> Result<Self> {
        let block = FastfoodBlock::sample(seed, m_in, config.d_out, config.sigma, config.scale_mode)?;
        let nonlinearity = match config.nonlinearity {
            NonlinearityKind::Identity => NonlinearityMode::Identity,
            NonlinearityKind::RbfCos => NonlinearityMode::rbf_cos(mix(seed, PHASE_STREAM), config.d_out),
        };
        Ok(Subspace { block, nonlinearity })
    }

    pub fn block(&self) -> &FastfoodBlock {
        &self.block
    }

    pub fn nonlinearity(&self) -> &NonlinearityMode {
        &self.nonlinearity
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.block.project(x)?;
        apply_nonlinearity_in_place(&mut z, &self.nonlinearity)?;
        Ok(z)
    }

    /// Transform every row of `fm` into an `n × D` matrix.
    pub fn transform_all(&self, fm: &FeatureMatrix) -> Result<DenseMatrix> {
        let d = self.block.d_out();
        let mut data = Vec::with_capacity(fm.n_samples() * d);
        let mut scratch = vec![0.0; 2 * self.block.d_pad()];
        let mut x = vec![0.0; fm.n_dims()];
        let mut z = Vec::with_capacity(d);
        for i in 0..fm.n_samples() {
            for (dst, &src) in x.iter_mut().zip(fm.row(i)) {
                *dst = f64::from(src);
            }
            self.block.project_into(&x, &mut scratch, &mut z)?;
            apply_nonlinearity_in_place(&mut z, &self.nonlinearity)?;
            data.extend_from_slice(&z);
        }
        DenseMatrix::from_vec(fm.n_samples(), d, data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub seed: u64,
    pub weight: f64,
    pub tree: DecisionTree,
}

/// Trained ensemble. Immutable and shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    config: EnsembleConfig,
    master_seed: u64,
    m_in: usize,
    class_labels: Vec<String>,
    members: Vec<Member>,
    subspaces: Vec<Subspace>,
}

/// Normalize validation accuracies into consensus weights; all-zero
/// accuracies give uniform weights.
pub fn member_weights(val_accuracies: &[f64]) -> Result<Vec<f64>> {
    if val_accuracies.is_empty() {
        return Err(Error::Parameter("no member accuracies".into()));
    }
    if let Some(a) = val_accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::Parameter(format!("accuracy {a} outside [0, 1]")));
    }
    let total: f64 = val_accuracies.iter().sum();
    let n = val_accuracies.len() as f64;
    Ok(if total == 0.0 {
        vec![1.0 / n; val_accuracies.len()]
    } else {
        val_accuracies.iter().map(|a| a / total).collect()
    })
}

fn labeled_indices(fm: &FeatureMatrix) -> Result<&[u32]> {
    Ok(&fm.require_labels()?.indices)
}

/// Fraction of rows whose argmax prediction matches the label.
fn accuracy_of(predictions: impl Iterator<Item = usize>, labels: &[u32]) -> f64 {
    let correct = predictions.zip(labels).filter(|(p, &l)| *p == l as usize).count();
    correct as f64 / labels.len() as f64
}

/// Train `config.n_members` members on `train`; weights come from `val`
/// accuracies when present and the weighting asks for it.
pub fn train_ensemble(
    train: &FeatureMatrix,
    val: Option<&FeatureMatrix>,
    config: &EnsembleConfig,
    master_seed: u64,
) -> Result<EnsembleModel> {
    config.validate()?;
    let y = labeled_indices(train)?;
    if train.n_samples() == 0 {
        return Err(Error::Input("training set is empty".into()));
    }
    let class_labels = train.class_label_strings();
    let n_classes = class_labels.len();
    let val = match val {
        Some(v) => {
            if v.n_dims() != train.n_dims() {
                return Err(Error::Dimension(format!(
                    "validation has {} dimensions, training has {}",
                    v.n_dims(),
                    train.n_dims()
                )));
            }
            labeled_indices(v)?;
            if v.class_label_strings() != class_labels {
                return Err(Error::Consistency("validation classes differ from training classes".into()));
            }
            (v.n_samples() > 0).then_some(v)
        }
        None => None,
    };
    let use_val = val.is_some() && config.weighting == Weighting::ValidationAccuracy;

    let trained: Vec<(Subspace, DecisionTree, f64)> = (0..config.n_members)
        .into_par_iter()
        .map(|i| {
            let seed = member_seed(master_seed, i);
            let subspace = Subspace::generate(seed, train.n_dims(), config)?;
            let projected = subspace.transform_all(train)?;
            let tree = fit_tree(&projected, y, n_classes, &config.tree)?;
            let acc = match val {
                Some(v) if use_val => {
                    let pv = subspace.transform_all(v)?;
                    let preds = (0..pv.rows()).map(|r| tree.predict_proba(pv.row(r)).map(|p| argmax(&p)));
                    let preds = preds.collect::<Result<Vec<_>>>()?;
                    accuracy_of(preds.into_iter(), labeled_indices(v)?)
                }
                _ => 0.0,
            };
            Ok((subspace, tree, acc))
        })
        .collect::<Result<_>>()?;

    let weights = if use_val {
        member_weights(&trained.iter().map(|t| t.2).collect::<Vec<_>>())?
    } else {
        vec![1.0 / config.n_members as f64; config.n_members]
    };
    let mut members = Vec::with_capacity(config.n_members);
    let mut subspaces = Vec::with_capacity(config.n_members);
    for (i, ((subspace, tree, _), weight)) in trained.into_iter().zip(weights).enumerate() {
        members.push(Member { seed: member_seed(master_seed, i), weight, tree });
        subspaces.push(subspace);
    }
    Ok(EnsembleModel { config: *config, master_seed, m_in: train.n_dims(), class_labels, members, subspaces })
}

impl EnsembleModel {
    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn m_in(&self) -> usize {
        self.m_in
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m_in {
            return Err(Error::Dimension(format!("expected {} features, got {}", self.m_in, x.len())));
        }
        Ok(())
    }

    /// Class distribution of member `index` alone.
    pub fn member_predict_proba(&self, index: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let z = self.subspaces[index].transform(x)?;
        self.members[index].tree.predict_proba(&z)
    }

    /// Weighted average of the members' class distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.n_classes()];
        for (i, member) in self.members.iter().enumerate() {
            let p = self.member_predict_proba(i, x)?;
            for (o, v) in out.iter_mut().zip(p) {
                *o += member.weight * v;
            }
        }
        Ok(out)
    }

    /// Predicted class index (ties go to the lowest index).
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(x)?))
    }

    /// Consensus distributions for every row of `fm`.
    pub fn predict_proba_all(&self, fm: &FeatureMatrix) -> Result<Vec<Vec<f64>>> {
        if fm.n_dims() != self.m_in {
            return Err(Error::Dimension(format!("expected {} features, got {}", self.m_in, fm.n_dims())));
        }
        let per_member: Vec<DenseMatrix> = self
            .members
            .par_iter()
            .zip(&self.subspaces)
            .map(|(member, subspace)| {
                let z = subspace.transform_all(fm)?;
                let mut probs = Vec::with_capacity(fm.n_samples() * self.n_classes());
                for r in 0..z.rows() {
                    probs.extend(member.tree.predict_proba(z.row(r))?);
                }
                DenseMatrix::from_vec(fm.n_samples(), self.n_classes(), probs)
            })
            .collect::<Result<_>>()?;
        Ok((0..fm.n_samples())
            .map(|r| {
                let mut out = vec![0.0; self.n_classes()];
                for (member, probs) in self.members.iter().zip(&per_member) {
                    for (o, v) in out.iter_mut().zip(probs.row(r)) {
                        *o += member.weight * v;
                    }
                }
                out
            })
            .collect())
    }

    /// Accuracy of member `index` alone on a labeled matrix.
    pub fn member_accuracy(&self, index: usize, fm: &FeatureMatrix) -> Result<f64> {
        let y = labeled_indices(fm)?;
        let z = self.subspaces[index].transform_all(fm)?;
        let preds = (0..z.rows())
            .map(|r| self.members[index].tree.predict_proba(z.row(r)).map(|p| argmax(&p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(accuracy_of(preds.into_iter(), y))
    }

    /// Ensemble accuracy on a labeled matrix.
    pub fn accuracy(&self, fm: &FeatureMatrix) -> Result<f64> {
        let y = labeled_indices(fm)?;
        let probs = self.predict_proba_all(fm)?;
        Ok(accuracy_of(probs.iter().map(|p| argmax(p)), y))
    }

    /// Rebuild a model from stored parts, regenerating every member block.
    pub fn from_parts(
        config: EnsembleConfig,
        master_seed: u64,
        m_in: usize,
        class_labels: Vec<String>,
        members: Vec<Member>,
    ) -> Result<Self> {
        config.validate()?;
        if members.len() != config.n_members {
            return Err(Error::Consistency(format!(
                "{} members stored for N = {}",
                members.len(),
                config.n_members
            )));
        }
        if m_in == 0 || class_labels.is_empty() {
            return Err(Error::Input("model needs m_in >= 1 and at least one class".into()));
        }
        let total: f64 = members.iter().map(|m| m.weight).sum();
        if members.iter().any(|m| !(0.0..=1.0).contains(&m.weight)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Consistency(format!("member weights must lie in [0, 1] and sum to 1 (sum {total})")));
        }
        for (i, m) in members.iter().enumerate() {
            if m.tree.n_features() != config.d_out || m.tree.n_classes() != class_labels.len() {
                return Err(Error::Consistency(format!("member {i} tree does not match D or the class count")));
            }
        }
        let subspaces = members
            .iter()
            .map(|m| Subspace::generate(m.seed, m_in, &config))
            .collect::<Result<_>>()?;
        Ok(EnsembleModel { config, master_seed, m_in, class_labels, members, subspaces })
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            config: self.config,
            master_seed: self.master_seed,
            m_in: self.m_in,
            class_labels: self.class_labels.clone(),
            members: self.members.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Format(format!("not a model file (format '{}')", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", file.version)));
        }
        EnsembleModel::from_parts(file.config, file.master_seed, file.m_in, file.class_labels, file.members)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// On-disk model document.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: EnsembleConfig,
    master_seed: u64,
    m_in: usize,
    class_labels: Vec<String>,
    members: Vec<Member>,
}

/// Free-function form of [`EnsembleModel::predict_proba`].
pub fn ensemble_predict_proba(model: &EnsembleModel, x: &[f64]) -> Result<Vec<f64>> {
    model.predict_proba(x)
}
