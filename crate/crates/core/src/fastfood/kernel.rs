use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Elementwise map applied after projection.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum NonlinearityMode {
    #[default]
    Identity,
    /// `√(2/D)·cos(z + phase)` random Fourier features; phases lie in `[0, 2π)`.
    RbfCos { phases: Vec<f64> },
}

impl NonlinearityMode {
    /// Random-Fourier mode with `d` phases drawn uniformly from `[0, 2π)`.
    pub fn rbf_cos(seed: u64, d: usize) -> Self {
        NonlinearityMode::RbfCos { phases: sample_phases(seed, d) }
    }

    /// Check the phase invariants.
    pub fn validate(&self) -> Result<()> {
        if let NonlinearityMode::RbfCos { phases } = self {
            if phases.iter().any(|p| !(0.0..TAU).contains(p)) {
                return Err(Error::Parameter("phases must lie in [0, 2π)".into()));
            }
        }
        Ok(())
    }
}

pub fn sample_phases(seed: u64, d: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    (0..d)
        .map(|_| {
            let p = rng.next_f64() * TAU;
            if p < TAU {
                p
            } else {
                0.0
            }
        })
        .collect()
}

pub fn apply_nonlinearity(z: &[f64], nl: &NonlinearityMode) -> Result<Vec<f64>> {
    let mut out = z.to_vec();
    apply_nonlinearity_in_place(&mut out, nl)?;
    Ok(out)
}

pub fn apply_nonlinearity_in_place(z: &mut [f64], nl: &NonlinearityMode) -> Result<()> {
    match nl {
        NonlinearityMode::Identity => Ok(()),
        NonlinearityMode::RbfCos { phases } => {
            if phases.len() != z.len() {
                return Err(Error::Parameter(format!(
                    "{} phases for a {}-dimensional projection",
                    phases.len(),
                    z.len()
                )));
            }
            let amp = (2.0 / z.len() as f64).sqrt();
            for (v, p) in z.iter_mut().zip(phases) {
                *v = amp * (*v + p).cos();
            }
            Ok(())
        }
    }
}

/// Gaussian kernel `exp(−‖x−y‖² / (2σ²))`.
pub fn exact_rbf(x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("kernel arguments have lengths {} and {}", x.len(), y.len())));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Parameter(format!("bandwidth must be positive and finite, got {sigma}")));
    }
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((-sq / (2.0 * sigma * sigma)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes_through() {
        let z = vec![1.5, -2.0, 0.0];
        assert_eq!(apply_nonlinearity(&z, &NonlinearityMode::Identity).unwrap(), z);
    }

    #[test]
    fn cosine_closed_form() {
        let nl = NonlinearityMode::RbfCos { phases: vec![0.0, 0.0] };
        let out = apply_nonlinearity(&[0.0, 0.0], &nl).unwrap();
        assert!(out.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn cosine_range() {
        let d = 64;
        let nl = NonlinearityMode::rbf_cos(4, d);
        let mut rng = SplitMix64::new(2);
        let z: Vec<f64> = (0..d).map(|_| 10.0 * rng.next_normal()).collect();
        let bound = (2.0 / d as f64).sqrt();
        for v in apply_nonlinearity(&z, &nl).unwrap() {
            assert!(v.abs() <= bound + 1e-15);
        }
    }

    #[test]
    fn phase_mismatch() {
        let nl = NonlinearityMode::rbf_cos(4, 3);
        assert!(matches!(apply_nonlinearity(&[0.0; 4], &nl), Err(Error::Parameter(_))));
    }

    #[test]
    fn phases_in_range() {
        let nl = NonlinearityMode::rbf_cos(8, 10_000);
        nl.validate().unwrap();
        assert!(NonlinearityMode::RbfCos { phases: vec![TAU] }.validate().is_err());
    }

    #[test]
    fn rbf_closed_forms() {
        assert_eq!(exact_rbf(&[1.0, 2.0], &[1.0, 2.0], 0.5).unwrap(), 1.0);
        let k = exact_rbf(&[0.0, 0.0], &[3.0, 4.0], 5.0).unwrap();
        assert!((k - (-0.5f64).exp()).abs() < 1e-15);
        assert!((k - 0.60653).abs() < 1e-5);
        assert!(matches!(exact_rbf(&[0.0], &[0.0, 1.0], 1.0), Err(Error::Dimension(_))));
    }
}
