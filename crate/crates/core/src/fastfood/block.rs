use serde::{Deserialize, Serialize};

use super::wht::{fwht_add_count, fwht_in_place};
use crate::error::{Error, Result};
use crate::rng::{mix, SplitMix64};

/// How the row-rescaling diagonal `S` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleMode {
    /// `s_i = chi_d / ‖g‖`, so row norms follow those of a dense Gaussian matrix.
    #[default]
    Chi,
    /// `s_i = 1` (ablation).
    Unit,
}

/// One `d × d` set of Fastfood factors `B`, `Π`, `G`, `S`.
///
/// The Hadamard factor is implicit and applied with the fast transform.
#[derive(Debug, Clone, PartialEq)]
pub struct FastfoodStack {
    b_signs: Vec<f64>,
    perm: Vec<usize>,
    g_gauss: Vec<f64>,
    s_scale: Vec<f64>,
}

impl FastfoodStack {
    /// Build a stack from explicit factors, checking every invariant.
    pub fn from_parts(b_signs: Vec<f64>, perm: Vec<usize>, g_gauss: Vec<f64>, s_scale: Vec<f64>) -> Result<Self> {
        let d = b_signs.len();
        if d == 0 || !d.is_power_of_two() {
            return Err(Error::Dimension(format!("stack dimension {d} is not a power of two")));
        }
        if perm.len() != d || g_gauss.len() != d || s_scale.len() != d {
            return Err(Error::Dimension("stack factors have unequal lengths".into()));
        }
        if b_signs.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::Parameter("binary scaling entries must be exactly +1 or -1".into()));
        }
        let mut seen = vec![false; d];
        for &p in &perm {
            if p >= d || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Parameter("permutation is not a bijection".into()));
            }
        }
        if g_gauss.iter().any(|g| !g.is_finite()) {
            return Err(Error::Parameter("gaussian diagonal must be finite".into()));
        }
        if s_scale.iter().any(|&s| !s.is_finite() || s < 0.0) {
            return Err(Error::Parameter("scaling diagonal must be finite and nonnegative".into()));
        }
        Ok(FastfoodStack { b_signs, perm, g_gauss, s_scale })
    }

    /// Draw a stack of dimension `d` from a dedicated substream.
    pub fn sample(seed: u64, d: usize, mode: ScaleMode) -> Self {
        debug_assert!(d.is_power_of_two());
        let mut rng = SplitMix64::new(seed);
        let b_signs: Vec<f64> = (0..d).map(|_| rng.next_sign()).collect();
        let perm = rng.permutation(d);
        let g_gauss: Vec<f64> = (0..d).map(|_| rng.next_normal()).collect();
        let s_scale = match mode {
            ScaleMode::Chi => {
                let g_norm = g_gauss.iter().map(|g| g * g).sum::<f64>().sqrt();
                (0..d).map(|_| rng.next_chi(d) / g_norm).collect()
            }
            ScaleMode::Unit => vec![1.0; d],
        };
        FastfoodStack { b_signs, perm, g_gauss, s_scale }
    }

    pub fn dim(&self) -> usize {
        self.b_signs.len()
    }

    pub fn b_signs(&self) -> &[f64] {
        &self.b_signs
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn g_gauss(&self) -> &[f64] {
        &self.g_gauss
    }

    pub fn s_scale(&self) -> &[f64] {
        &self.s_scale
    }
}

/// Stacked Fastfood factors realizing one `m_in → d_out` projection.
///
/// Each stack computes `(1/(σ√d))·S·H·G·Π·H·B·x̂`, where `x̂` is the input
/// zero-padded to `d_pad`. Stack outputs are concatenated and truncated to
/// `d_out` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FastfoodBlock {
    m_in: usize,
    d_pad: usize,
    d_out: usize,
    sigma: f64,
    seed: u64,
    stacks: Vec<FastfoodStack>,
}

fn check_params(m_in: usize, d_out: usize, sigma: f64) -> Result<()> {
    if m_in == 0 || d_out == 0 {
        return Err(Error::Parameter(format!("dimensions must be positive (m_in={m_in}, d_out={d_out})")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Parameter(format!("bandwidth must be positive and finite, got {sigma}")));
    }
    Ok(())
}

/// Draw a block with the default (`chi`) row scaling.
pub fn sample_block(seed: u64, m_in: usize, d_out: usize, sigma: f64) -> Result<FastfoodBlock> {
    FastfoodBlock::sample(seed, m_in, d_out, sigma, ScaleMode::Chi)
}

impl FastfoodBlock {
    pub fn sample(seed: u64, m_in: usize, d_out: usize, sigma: f64, mode: ScaleMode) -> Result<Self> {
        check_params(m_in, d_out, sigma)?;
        let d_pad = m_in.next_power_of_two();
        let n_stacks = d_out.div_ceil(d_pad);
        let stacks = (0..n_stacks)
            .map(|k| FastfoodStack::sample(mix(seed, k as u64), d_pad, mode))
            .collect();
        Ok(FastfoodBlock { m_in, d_pad, d_out, sigma, seed, stacks })
    }

    /// Assemble a block from explicit stacks.
    pub fn from_stacks(m_in: usize, d_out: usize, sigma: f64, seed: u64, stacks: Vec<FastfoodStack>) -> Result<Self> {
        check_params(m_in, d_out, sigma)?;
        let d_pad = m_in.next_power_of_two();
        if stacks.iter().any(|s| s.dim() != d_pad) {
            return Err(Error::Dimension(format!("every stack must have dimension {d_pad}")));
        }
        if stacks.len() != d_out.div_ceil(d_pad) {
            return Err(Error::Dimension(format!(
                "{} stacks of dimension {d_pad} cannot cover exactly {d_out} outputs",
                stacks.len()
            )));
        }
        Ok(FastfoodBlock { m_in, d_pad, d_out, sigma, seed, stacks })
    }

    pub fn m_in(&self) -> usize {
        self.m_in
    }

    pub fn d_pad(&self) -> usize {
        self.d_pad
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stacks(&self) -> &[FastfoodStack] {
        &self.stacks
    }

    /// The scalar `1/(σ√d)` applied to every output row.
    pub fn normalization(&self) -> f64 {
        1.0 / (self.sigma * (self.d_pad as f64).sqrt())
    }

    /// Project `x` (length `m_in`) to `d_out` dimensions.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.d_out);
        let mut scratch = vec![0.0; 2 * self.d_pad];
        self.project_into(x, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Allocation-free projection. `scratch` must hold `2·d_pad` values;
    /// `out` is cleared and refilled.
    pub fn project_into(&self, x: &[f64], scratch: &mut [f64], out: &mut Vec<f64>) -> Result<()> {
        if x.len() != self.m_in {
            return Err(Error::Dimension(format!("expected input of length {}, got {}", self.m_in, x.len())));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("input entry {i} is not finite")));
        }
        if scratch.len() < 2 * self.d_pad {
            return Err(Error::Dimension(format!("scratch buffer must hold {} values", 2 * self.d_pad)));
        }
        let d = self.d_pad;
        let (signed, mixed) = scratch[..2 * d].split_at_mut(d);
        let norm = self.normalization();
        out.clear();

        for stack in &self.stacks {
            for (i, slot) in signed.iter_mut().enumerate() {
                *slot = match x.get(i) {
                    Some(&v) if stack.b_signs[i] < 0.0 => -v,
                    Some(&v) => v,
                    None => 0.0,
                };
            }
            fwht_in_place(signed)?;
            for ((slot, &p), &g) in mixed.iter_mut().zip(&stack.perm).zip(&stack.g_gauss) {
                *slot = g * signed[p];
            }
            fwht_in_place(mixed)?;
            let rows = (self.d_out - out.len()).min(d);
            out.extend(mixed[..rows].iter().zip(&stack.s_scale).map(|(&v, &s)| v * s * norm));
        }
        Ok(())
    }

    /// Multiplies performed by one projection (sign flips by `B` are not
    /// multiplies): `d_pad` per stack for `G`, two per kept output row for `S`
    /// and the normalization.
    pub fn multiply_count(&self) -> u64 {
        (self.stacks.len() * self.d_pad + 2 * self.d_out) as u64
    }

    /// Additions performed by one projection (two transforms per stack).
    pub fn add_count(&self) -> u64 {
        self.stacks.len() as u64 * 2 * fwht_add_count(self.d_pad)
    }

    /// Stored scalars: four length-`d_pad` factors per stack plus the header
    /// (`m_in`, `d_pad`, `d_out`, `sigma`, `seed`).
    pub fn stored_scalars(&self) -> u64 {
        (4 * self.d_pad * self.stacks.len() + 5) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pads_to_next_power_of_two() {
        let b = sample_block(7, 100, 20, 1.0).unwrap();
        assert_eq!(b.d_pad(), 128);
        assert_eq!(b.stacks().len(), 1);
    }

    #[test]
    fn six_backbone_width_at_largest_grid_point() {
        let b = sample_block(7, 7168, 20_000, 1.0).unwrap();
        assert_eq!(b.d_pad(), 8192);
        assert_eq!(b.stacks().len(), 3);
        let n = b.stacks().len();
        assert!(n * b.d_pad() >= b.d_out() && b.d_out() > (n - 1) * b.d_pad());
    }

    #[test]
    fn regenerates_bit_identically() {
        let a = sample_block(99, 300, 700, 2.5).unwrap();
        let b = sample_block(99, 300, 700, 2.5).unwrap();
        assert_eq!(a, b);
        let c = sample_block(100, 300, 700, 2.5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stacks_use_distinct_substreams() {
        let b = sample_block(1, 64, 256, 1.0).unwrap();
        assert_ne!(b.stacks()[0], b.stacks()[1]);
    }

    #[test]
    fn sampled_stacks_satisfy_invariants() {
        for mode in [ScaleMode::Chi, ScaleMode::Unit] {
            let b = FastfoodBlock::sample(3, 50, 130, 1.0, mode).unwrap();
            for s in b.stacks() {
                FastfoodStack::from_parts(s.b_signs.clone(), s.perm.clone(), s.g_gauss.clone(), s.s_scale.clone())
                    .unwrap();
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(sample_block(0, 0, 5, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(sample_block(0, 5, 0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(sample_block(0, 5, 5, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(sample_block(0, 5, 5, -1.0), Err(Error::Parameter(_))));
        assert!(matches!(sample_block(0, 5, 5, f64::NAN), Err(Error::Parameter(_))));
    }

    #[test]
    fn from_parts_validation() {
        let ok = || (vec![1.0, -1.0], vec![1, 0], vec![0.3, -0.2], vec![1.0, 2.0]);
        let (b, p, g, s) = ok();
        assert!(FastfoodStack::from_parts(b, p, g, s).is_ok());
        let (_, p, g, s) = ok();
        assert!(FastfoodStack::from_parts(vec![1.0, 0.5], p, g, s).is_err());
        let (b, _, g, s) = ok();
        assert!(FastfoodStack::from_parts(b, vec![0, 0], g, s).is_err());
        let (b, p, g, _) = ok();
        assert!(FastfoodStack::from_parts(b, p, g, vec![1.0, -0.1]).is_err());
        assert!(FastfoodStack::from_parts(vec![1.0; 3], vec![0, 1, 2], vec![0.0; 3], vec![1.0; 3]).is_err());
    }

    #[test]
    fn zero_input_projects_to_zero() {
        let b = sample_block(5, 37, 90, 1.0).unwrap();
        let z = b.project(&[0.0; 37]).unwrap();
        assert_eq!(z.len(), 90);
        assert!(z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn projection_is_homogeneous() {
        let b = sample_block(5, 37, 90, 1.3).unwrap();
        let mut rng = SplitMix64::new(8);
        let x: Vec<f64> = (0..37).map(|_| rng.next_normal()).collect();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let z = b.project(&x).unwrap();
        let z2 = b.project(&x2).unwrap();
        for (a, c) in z.iter().zip(&z2) {
            assert!((2.0 * a - c).abs() <= 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn projection_errors() {
        let b = sample_block(5, 4, 4, 1.0).unwrap();
        assert!(matches!(b.project(&[1.0, 2.0]), Err(Error::Dimension(_))));
        assert!(matches!(b.project(&[1.0, f64::INFINITY, 0.0, 0.0]), Err(Error::Input(_))));
    }

    #[test]
    fn storage_and_operation_counts() {
        let b = sample_block(1, 7168, 7168, 1.0).unwrap();
        assert_eq!(b.stored_scalars(), 4 * 8192 + 5);
        let dense = 7168u64 * 7168;
        assert!(dense / b.stored_scalars() > 7168 / 8);
        assert_eq!(b.multiply_count(), 8192 + 2 * 7168);
        assert_eq!(b.add_count(), 2 * 8192 * 13);
    }
}
