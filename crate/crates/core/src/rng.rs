//! Pinned pseudo-random streams.
//!
//! Model files store seeds rather than matrices, so every draw here must be
//! bit-reproducible across platforms and crate upgrades. Nothing in this
//! module depends on an external RNG crate.

use std::f64::consts::TAU;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent substream seed from a parent seed and an index.
pub fn mix(seed: u64, index: u64) -> u64 {
    finalize(finalize(seed ^ 0x6a09_e667_f3bc_c908).wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// SplitMix64 generator with Box–Muller normals.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed, spare_normal: None }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        finalize(self.state)
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in [0, n) as floor(u * n).
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let j = (self.next_f64() * n as f64) as usize;
        j.min(n - 1)
    }

    /// +1.0 or -1.0 with equal probability.
    #[inline]
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Standard normal draw via the Box–Muller transform.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], so the log is finite
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Gamma(shape, 1) draw (Marsaglia–Tsang, with the shape < 1 boost).
    pub fn next_gamma(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape < 1.0 {
            let u = 1.0 - self.next_f64();
            return self.next_gamma(shape + 1.0) * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.next_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = 1.0 - self.next_f64();
            if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
                return d * v;
            }
        }
    }

    /// Chi draw with `dof` degrees of freedom: the norm of a `dof`-dimensional
    /// standard Gaussian vector, sampled through chi^2 = 2 * Gamma(dof / 2).
    pub fn next_chi(&mut self, dof: usize) -> f64 {
        (2.0 * self.next_gamma(dof as f64 / 2.0)).sqrt()
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_index(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        self.shuffle(&mut perm);
        perm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn reference_splitmix_values() {
        // Published SplitMix64 outputs for seed 0.
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(r.next_u64(), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn mix_separates_indices() {
        let seeds: Vec<u64> = (0..64).map(|i| mix(7, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_ne!(mix(7, 0), mix(8, 0));
    }

    #[test]
    fn uniform_range() {
        let mut r = SplitMix64::new(3);
        for _ in 0..10_000 {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn normal_moments() {
        let mut r = SplitMix64::new(11);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| r.next_normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn chi_matches_gaussian_norm_moments() {
        // E[chi_d^2] = d; compare against squared norms of explicit Gaussian rows.
        let mut r = SplitMix64::new(5);
        for &dof in &[1usize, 2, 7, 64] {
            let trials = 20_000;
            let chi_sq: f64 = (0..trials).map(|_| r.next_chi(dof).powi(2)).sum::<f64>() / trials as f64;
            let direct: f64 = (0..trials)
                .map(|_| (0..dof).map(|_| r.next_normal().powi(2)).sum::<f64>())
                .sum::<f64>()
                / trials as f64;
            let tol = 0.05 * dof as f64 + 0.05;
            assert!((chi_sq - dof as f64).abs() < tol, "dof {dof}: chi^2 mean {chi_sq}");
            assert!((chi_sq - direct).abs() < 2.0 * tol, "dof {dof}: {chi_sq} vs {direct}");
        }
    }

    #[test]
    fn permutation_is_bijection() {
        let mut r = SplitMix64::new(9);
        let mut p = r.permutation(257);
        p.sort_unstable();
        assert_eq!(p, (0..257).collect::<Vec<_>>());
    }
}
