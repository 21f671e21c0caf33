use fastfood_ensemble::dataio::*;
use fastfood_ensemble::ensemble::{train_ensemble, EnsembleConfig};
use fastfood_ensemble::fastfood::DenseMatrix;
use fastfood_ensemble::tree::{fit_tree, TreeParams};
use fastfood_ensemble::Error;
use proptest::prelude::*;

#[test]
fn binary_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.dfel");
    let fm = synth_mixture(3, 7, 20, 2.0, 4).unwrap();
    write_features(&fm, &path).unwrap();
    let back = read_features(&path).unwrap();
    assert_eq!(back, fm);
}

#[test]
fn csv_and_binary_agree() {
    let dir = tempfile::tempdir().unwrap();
    let fm = synth_mixture(3, 9, 12, 2.5, 6).unwrap();
    write_csv(&fm, dir.path().join("f.csv")).unwrap();
    let from_csv = read_csv(dir.path().join("f.csv")).unwrap();
    assert_eq!(from_csv.n_samples(), fm.n_samples());
    assert_eq!(from_csv.n_dims(), fm.n_dims());
    for (a, b) in from_csv.values().iter().zip(fm.values()) {
        assert!((a - b).abs() <= f32::EPSILON * b.abs().max(1.0));
    }
    assert_eq!(from_csv.labels().unwrap().indices, fm.labels().unwrap().indices);
}

#[test]
fn wrong_magic_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.dfel");
    std::fs::write(&path, b"NOPE\x01\x00\x00\x00").unwrap();
    assert!(matches!(read_features(&path), Err(Error::Format(_))));
    assert!(matches!(read_features(dir.path().join("missing.dfel")), Err(Error::Io(_))));
}

#[test]
fn separated_mixture_is_easy_for_raw_tree() {
    let train = synth_mixture(4, 100, 64, 10.0, 1).unwrap();
    let val = synth_mixture(4, 100, 64, 10.0, 2).unwrap();
    let to_dense = |fm: &FeatureMatrix| {
        DenseMatrix::from_vec(fm.n_samples(), fm.n_dims(), fm.values().iter().map(|&v| f64::from(v)).collect())
            .unwrap()
    };
    let tree = fit_tree(&to_dense(&train), &train.labels().unwrap().indices, 4, &TreeParams::default()).unwrap();
    let xv = to_dense(&val);
    let y = &val.labels().unwrap().indices;
    let correct = (0..val.n_samples())
        .filter(|&i| fastfood_ensemble::tree::argmax(&tree.predict_proba(xv.row(i)).unwrap()) == y[i] as usize)
        .count();
    assert!(correct as f64 / val.n_samples() as f64 > 0.95);
}

#[test]
fn zero_separation_is_chance_level() {
    let fm = synth_mixture(4, 150, 32, 0.0, 3).unwrap();
    let s = split_features(&fm, &SplitSpec::new(0.5, 0.0, 0.5, 1, true).unwrap()).unwrap();
    let config = EnsembleConfig { n_members: 5, d_out: 16, ..EnsembleConfig::default() };
    let acc = train_ensemble(&s.train, None, &config, 1).unwrap().accuracy(&s.test).unwrap();
    assert!((acc - 0.25).abs() < 0.12, "{acc}");
}

fn arb_matrix() -> impl Strategy<Value = FeatureMatrix> {
    (1usize..6, 1usize..5, 0usize..12, any::<bool>()).prop_flat_map(|(spans, width, n, labeled)| {
        let m = spans * width;
        (
            proptest::collection::vec(-1e6f32..1e6, n * m),
            proptest::collection::vec(0u32..3, n),
            Just((spans, width, n, labeled)),
        )
            .prop_map(move |(values, labels, (spans, width, n, labeled))| {
                let prov = (0..spans).map(|s| DimSpan::new(format!("bb{s}"), s * width..(s + 1) * width)).collect();
                let fm = FeatureMatrix::new(n, spans * width, values, prov).unwrap();
                if labeled {
                    fm.with_labels(labels, 3, vec!["a".into(), "β".into(), "c c".into()]).unwrap()
                } else {
                    fm
                }
            })
    })
}

proptest! {
    #[test]
    fn binary_encoding_round_trips(fm in arb_matrix()) {
        let back = decode_features(&encode_features(&fm).unwrap()).unwrap();
        prop_assert_eq!(back, fm);
    }

    #[test]
    fn concat_then_slice_recovers_parts(widths in proptest::collection::vec(1usize..6, 1..5), n in 0usize..6, seed in any::<u64>()) {
        let mut rng = fastfood_ensemble::rng::SplitMix64::new(seed);
        let parts: Vec<FeatureMatrix> = widths
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                let values = (0..n * w).map(|_| rng.next_normal() as f32).collect();
                FeatureMatrix::new(n, w, values, vec![DimSpan::new(format!("part{k}"), 0..w)]).unwrap()
            })
            .collect();
        let c = concat_features(&parts).unwrap();
        prop_assert_eq!(c.n_dims(), widths.iter().sum::<usize>());
        for (span, part) in c.provenance().iter().zip(&parts) {
            let back = c.select_dims(span.range(), &span.backbone).unwrap();
            prop_assert_eq!(back.values(), part.values());
        }
    }
}
