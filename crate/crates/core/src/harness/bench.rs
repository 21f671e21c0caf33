use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use super::KeyValues;
use crate::error::{Error, Result};
use crate::fastfood::{dense_rks, sample_block};
use crate::rng::{mix, SplitMix64};

/// Largest dense benchmark matrix (in entries) built without an override:
/// 2^26 `f64` values, 512 MiB.
pub const DENSE_BENCH_ELEMENT_CAP: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub m_in: usize,
    pub d_out: usize,
    pub d_pad: usize,
    pub repetitions: usize,
    /// Median seconds per projection.
    pub fastfood_time: f64,
    pub dense_time: f64,
    pub fastfood_scalars: u64,
    pub dense_scalars: u64,
    pub fastfood_mults: u64,
    pub dense_mults: u64,
    pub fastfood_adds: u64,
    pub dense_adds: u64,
}

impl BenchReport {
    pub fn speedup(&self) -> f64 {
        self.dense_time / self.fastfood_time
    }

    pub fn mult_ratio(&self) -> f64 {
        self.dense_mults as f64 / self.fastfood_mults as f64
    }

    pub fn memory_ratio(&self) -> f64 {
        self.dense_scalars as f64 / self.fastfood_scalars as f64
    }
}

impl KeyValues for BenchReport {
    fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("m_in".into(), self.m_in.to_string()),
            ("d_out".into(), self.d_out.to_string()),
            ("d_pad".into(), self.d_pad.to_string()),
            ("repetitions".into(), self.repetitions.to_string()),
            ("fastfood_time".into(), format!("{:.9}", self.fastfood_time)),
            ("dense_time".into(), format!("{:.9}", self.dense_time)),
            ("speedup".into(), format!("{:.3}", self.speedup())),
            ("fastfood_scalars".into(), self.fastfood_scalars.to_string()),
            ("dense_scalars".into(), self.dense_scalars.to_string()),
            ("memory_ratio".into(), format!("{:.3}", self.memory_ratio())),
            ("fastfood_mults".into(), self.fastfood_mults.to_string()),
            ("dense_mults".into(), self.dense_mults.to_string()),
            ("mult_ratio".into(), format!("{:.3}", self.mult_ratio())),
            ("fastfood_adds".into(), self.fastfood_adds.to_string()),
            ("dense_adds".into(), self.dense_adds.to_string()),
        ]
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Time one Fastfood projection against one dense matrix–vector product on
/// the same input, single-threaded. Operation and storage counts are
/// analytic and match the code paths exactly.
pub fn bench_projection(
    m_in: usize,
    d_out: usize,
    repetitions: usize,
    seed: u64,
    dense_cap_override: bool,
) -> Result<BenchReport> {
    if repetitions < 3 {
        return Err(Error::Parameter(format!("need at least 3 repetitions, got {repetitions}")));
    }
    let entries = m_in.checked_mul(d_out).ok_or_else(|| Error::OracleSize("dense matrix size overflows".into()))?;
    if entries > DENSE_BENCH_ELEMENT_CAP && !dense_cap_override {
        return Err(Error::OracleSize(format!(
            "dense {d_out}x{m_in} matrix has {entries} entries, cap is {DENSE_BENCH_ELEMENT_CAP}"
        )));
    }
    let block = sample_block(seed, m_in, d_out, 1.0)?;
    let dense = dense_rks(mix(seed, 1), m_in, d_out, 1.0)?;
    let mut rng = SplitMix64::new(mix(seed, 2));
    let x: Vec<f64> = (0..m_in).map(|_| rng.next_normal()).collect();

    let mut scratch = vec![0.0; 2 * block.d_pad()];
    let mut out = Vec::with_capacity(d_out);
    let mut ff_times = Vec::with_capacity(repetitions);
    let mut dense_times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let t = Instant::now();
        block.project_into(black_box(&x), &mut scratch, &mut out)?;
        black_box(&out);
        ff_times.push(t.elapsed().as_secs_f64());

        let t = Instant::now();
        black_box(dense.matvec(black_box(&x))?);
        dense_times.push(t.elapsed().as_secs_f64());
    }

    let dense_mults = (m_in * d_out) as u64;
    Ok(BenchReport {
        m_in,
        d_out,
        d_pad: block.d_pad(),
        repetitions,
        fastfood_time: median(ff_times).max(f64::MIN_POSITIVE),
        dense_time: median(dense_times).max(f64::MIN_POSITIVE),
        fastfood_scalars: block.stored_scalars(),
        dense_scalars: dense_mults,
        fastfood_mults: block.multiply_count(),
        dense_mults,
        fastfood_adds: block.add_count(),
        dense_adds: (d_out * (m_in - 1)) as u64,
    })
}
