use crate::error::{Error, Result};

/// Unnormalized fast Walsh–Hadamard transform, in place.
///
/// Computes `H·v` where `H` is the ±1 Sylvester–Hadamard matrix, so applying
/// it twice scales the input by `len`. Uses only additions and subtractions.
pub fn fwht_in_place(v: &mut [f64]) -> Result<()> {
    let n = v.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Dimension(format!("Walsh-Hadamard length {n} is not a power of two")));
    }
    let mut half = 1;
    while half < n {
        for chunk in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half <<= 1;
    }
    Ok(())
}

/// Out-of-place variant of [`fwht_in_place`].
pub fn fwht(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_in_place(&mut out)?;
    Ok(out)
}

/// Entry `(row, col)` of the Sylvester–Hadamard matrix.
#[inline]
pub fn hadamard_entry(row: usize, col: usize) -> f64 {
    if (row & col).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Number of add/subtract operations one transform of length `n` performs.
pub fn fwht_add_count(n: usize) -> u64 {
    (n as u64) * u64::from(n.trailing_zeros())
}
