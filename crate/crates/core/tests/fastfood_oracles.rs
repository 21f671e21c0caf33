use fastfood_ensemble::fastfood::*;
use fastfood_ensemble::rng::{mix, SplitMix64};
use proptest::prelude::*;

fn gaussian(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.next_normal()).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Explicit Sylvester construction H_{2n} = [[H, H], [H, -H]].
fn sylvester(n: usize) -> Vec<Vec<f64>> {
    let mut h = vec![vec![1.0]];
    while h.len() < n {
        let k = h.len();
        let mut next = vec![vec![0.0; 2 * k]; 2 * k];
        for i in 0..k {
            for j in 0..k {
                next[i][j] = h[i][j];
                next[i][j + k] = h[i][j];
                next[i + k][j] = h[i][j];
                next[i + k][j + k] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

#[test]
fn fwht_matches_sylvester_matrix() {
    let mut rng = SplitMix64::new(1);
    for n in [2, 4, 8, 16, 32] {
        let h = sylvester(n);
        let v = gaussian(&mut rng, n);
        let fast = fwht(&v).unwrap();
        for i in 0..n {
            let slow: f64 = (0..n).map(|j| h[i][j] * v[j]).sum();
            assert!((fast[i] - slow).abs() <= 1e-12, "n={n} i={i}");
        }
    }
}

#[test]
fn projection_matches_dense_oracle() {
    let mut rng = SplitMix64::new(2024);
    for case in 0..100 {
        let m_in = 1 + rng.next_index(1000);
        let d_out = 1 + rng.next_index(1500);
        let sigma = 0.25 + 4.0 * rng.next_f64();
        let block = sample_block(mix(99, case), m_in, d_out, sigma).unwrap();
        assert!(block.d_pad() <= 1024);
        let dense = dense_materialize(&block).unwrap();
        let x = gaussian(&mut rng, m_in);
        let fast = block.project(&x).unwrap();
        let slow = dense.matvec(&x).unwrap();
        let err: Vec<f64> = fast.iter().zip(&slow).map(|(a, b)| a - b).collect();
        assert!(norm(&err) <= 1e-6 * norm(&slow), "case {case}: m_in={m_in} d_out={d_out}");
    }
}

#[test]
fn unit_scale_mode_matches_oracle() {
    let block = FastfoodBlock::sample(4, 200, 300, 1.0, ScaleMode::Unit).unwrap();
    assert!(block.stacks().iter().all(|s| s.s_scale().iter().all(|&v| v == 1.0)));
    let dense = dense_materialize(&block).unwrap();
    let mut rng = SplitMix64::new(5);
    let x = gaussian(&mut rng, 200);
    let err: Vec<f64> = block.project(&x).unwrap().iter().zip(dense.matvec(&x).unwrap()).map(|(a, b)| a - b).collect();
    assert!(norm(&err) < 1e-9 * norm(&x));
}

#[test]
fn row_norms_follow_dense_gaussian_rows() {
    // Dense RKS rows have squared norm ~ d/σ² on average; Fastfood rows
    // with chi scaling should agree in mean and spread.
    let d = 256;
    let sigma = 2.0;
    let mut sq_norms = Vec::new();
    for seed in 0..8 {
        let block = sample_block(seed, d, d, sigma).unwrap();
        let m = dense_materialize(&block).unwrap();
        sq_norms.extend((0..d).map(|i| m.row(i).iter().map(|v| v * v).sum::<f64>()));
    }
    let dense = dense_rks(3, d, 8 * d, sigma).unwrap();
    let dense_sq: Vec<f64> = (0..8 * d).map(|i| dense.row(i).iter().map(|v| v * v).sum()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
    };
    let target = d as f64 / (sigma * sigma);
    assert!((mean(&sq_norms) - target).abs() < 0.03 * target, "{}", mean(&sq_norms));
    assert!((mean(&dense_sq) - target).abs() < 0.03 * target);
    // chi²_d / σ⁴ variance is 2d/σ⁴
    let var_target = 2.0 * d as f64 / sigma.powi(4);
    assert!((var(&sq_norms) / var_target - 1.0).abs() < 0.2, "{}", var(&sq_norms));
    assert!((var(&dense_sq) / var_target - 1.0).abs() < 0.2);
}

#[test]
fn cross_block_rows_nearly_orthogonal() {
    let d = 256;
    let a = dense_materialize(&sample_block(mix(11, 0), d, d, 1.0).unwrap()).unwrap();
    let b = dense_materialize(&sample_block(mix(11, 1), d, d, 1.0).unwrap()).unwrap();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            let (ra, rb) = (a.row(i), b.row(j));
            let dot: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
            total += (dot / (norm(ra) * norm(rb))).abs();
        }
    }
    let mean_abs_cos = total / (d * d) as f64;
    assert!(mean_abs_cos <= 3.0 / (d as f64).sqrt(), "{mean_abs_cos}");
}

fn rff(block: &FastfoodBlock, phases: &NonlinearityMode, x: &[f64]) -> Vec<f64> {
    apply_nonlinearity(&block.project(x).unwrap(), phases).unwrap()
}

#[test]
fn averaged_kernel_estimate_converges() {
    let d = 1024;
    let m = 16;
    let mut rng = SplitMix64::new(31);
    let x: Vec<f64> = (0..m).map(|_| 0.25 * rng.next_normal()).collect();
    let y: Vec<f64> = (0..m).map(|_| 0.25 * rng.next_normal()).collect();
    let exact = exact_rbf(&x, &y, 1.0).unwrap();
    let mut avg = 0.0;
    for seed in 0..100u64 {
        let block = sample_block(mix(seed, 7), m, d, 1.0).unwrap();
        let nl = NonlinearityMode::rbf_cos(mix(seed, 8), d);
        let (fx, fy) = (rff(&block, &nl, &x), rff(&block, &nl, &y));
        avg += fx.iter().zip(&fy).map(|(a, b)| a * b).sum::<f64>() / 100.0;
    }
    assert!((avg - exact).abs() <= 3.0 / (d as f64).sqrt(), "{avg} vs {exact}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fwht_involution(log in 0u32..=12, seed in any::<u64>()) {
        let n = 1usize << log;
        let mut rng = SplitMix64::new(seed);
        let v = gaussian(&mut rng, n);
        let twice = fwht(&fwht(&v).unwrap()).unwrap();
        let err: Vec<f64> = twice.iter().zip(&v).map(|(t, x)| t - n as f64 * x).collect();
        prop_assert!(norm(&err) <= 1e-10 * n as f64 * norm(&v));
    }

    #[test]
    fn projection_is_linear(seed in any::<u64>(), m_in in 1usize..300, d_out in 1usize..400, a in -3.0f64..3.0) {
        let block = sample_block(seed, m_in, d_out, 1.0).unwrap();
        let mut rng = SplitMix64::new(seed ^ 1);
        let x = gaussian(&mut rng, m_in);
        let y = gaussian(&mut rng, m_in);
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let (px, py, pc) = (block.project(&x).unwrap(), block.project(&y).unwrap(), block.project(&combo).unwrap());
        let err: Vec<f64> = (0..d_out).map(|i| pc[i] - (a * px[i] + py[i])).collect();
        prop_assert!(norm(&err) <= 1e-9 * (norm(&pc) + norm(&py) + 1.0));
        prop_assert_eq!(pc.len(), d_out);
    }

    #[test]
    fn block_shape_invariants(seed in any::<u64>(), m_in in 1usize..5000, d_out in 1usize..20000) {
        let block = sample_block(seed, m_in, d_out, 1.0).unwrap();
        let n = block.stacks().len();
        prop_assert!(block.d_pad().is_power_of_two());
        prop_assert!(block.d_pad() >= m_in && block.d_pad() / 2 < m_in);
        prop_assert!(n * block.d_pad() >= d_out && d_out > (n - 1) * block.d_pad());
        prop_assert!(block.stored_scalars() <= 4 * (block.d_pad() * n) as u64 + 5);
    }
}
