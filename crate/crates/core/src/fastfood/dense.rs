use super::block::FastfoodBlock;
use super::wht::{fwht_in_place, hadamard_entry};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Largest padded dimension [`dense_materialize`] accepts by default.
pub const DEFAULT_ORACLE_CAP: usize = 4096;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} values cannot fill a {rows}x{cols} matrix", data.len())));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Plain matrix–vector product; `rows·cols` multiplies.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!("expected vector of length {}, got {}", self.cols, x.len())));
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Explicit `d_out × m_in` matrix equal to the block's projection.
pub fn dense_materialize(block: &FastfoodBlock) -> Result<DenseMatrix> {
    dense_materialize_capped(block, DEFAULT_ORACLE_CAP)
}

/// [`dense_materialize`] with an explicit cap on the padded dimension.
///
/// Rows are assembled in transposed form, `eⱼᵀ·S·H·G·Π·H·B`: the left
/// Hadamard row comes from its closed-form entries, the permutation is applied
/// as a scatter, and only the right Hadamard factor uses the fast transform.
pub fn dense_materialize_capped(block: &FastfoodBlock, cap: usize) -> Result<DenseMatrix> {
    let d = block.d_pad();
    if d > cap {
        return Err(Error::OracleSize(format!("padded dimension {d} exceeds the oracle cap {cap}")));
    }
    let m = block.m_in();
    let norm = block.normalization();
    let mut data = Vec::with_capacity(block.d_out() * m);
    let mut w = vec![0.0; d];
    'stacks: for stack in block.stacks() {
        for j in 0..d {
            if data.len() == block.d_out() * m {
                break 'stacks;
            }
            for l in 0..d {
                w[stack.perm()[l]] = hadamard_entry(j, l) * stack.g_gauss()[l];
            }
            fwht_in_place(&mut w)?;
            let row_scale = norm * stack.s_scale()[j];
            data.extend((0..m).map(|k| w[k] * stack.b_signs()[k] * row_scale));
        }
    }
    DenseMatrix::from_vec(block.d_out(), m, data)
}

/// Dense random-kitchen-sinks matrix with i.i.d. `N(0, 1/σ²)` entries.
pub fn dense_rks(seed: u64, m_in: usize, d_out: usize, sigma: f64) -> Result<DenseMatrix> {
    if m_in == 0 || d_out == 0 {
        return Err(Error::Parameter(format!("dimensions must be positive (m_in={m_in}, d_out={d_out})")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Parameter(format!("bandwidth must be positive and finite, got {sigma}")));
    }
    let mut rng = SplitMix64::new(seed);
    let inv_sigma = 1.0 / sigma;
    let data = (0..m_in * d_out).map(|_| rng.next_normal() * inv_sigma).collect();
    DenseMatrix::from_vec(d_out, m_in, data)
}
