//! Property tests for the variation and metric primitives, each checked
//! against an independent brute-force oracle.

use proptest::prelude::*;

use predvar::metrics::{brier_score, roc_auc};
use predvar::variation::{bucketize, dist_pv, pearson, value_pv, MeanPrediction, PvRow, PvTable};

/// Naive two-pass sample standard deviation, independent of value_pv.
fn oracle_std(values: &[f64]) -> f64 {
    if values.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt()
}

/// Naive summed KL divergence from the member-wise mean.
fn oracle_kl_sum(dists: &[Vec<f64>]) -> f64 {
    let n = dists.len() as f64;
    let classes = dists[0].len();
    let mean: Vec<f64> = (0..classes)
        .map(|c| dists.iter().map(|d| d[c]).sum::<f64>() / n)
        .collect();
    let mut total = 0.0;
    for d in dists {
        for (p, q) in d.iter().zip(&mean) {
            if *p > 0.0 {
                total += p * (p / q).ln();
            }
        }
    }
    total
}

/// All-pairs AUC with ties counted half.
fn oracle_auc(scores: &[f64], positives: &[bool]) -> Option<f64> {
    let pos: Vec<f64> = scores
        .iter()
        .zip(positives)
        .filter(|(_, p)| **p)
        .map(|(s, _)| *s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(positives)
        .filter(|(_, p)| !**p)
        .map(|(s, _)| *s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for p in &pos {
        for n in &neg {
            total += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    Some(total / (pos.len() * neg.len()) as f64)
}

fn normalized_dist(classes: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01f64..10.0, classes).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / total).collect()
    })
}

proptest! {
    #[test]
    fn value_pv_matches_oracle(values in proptest::collection::vec(-100.0f64..100.0, 2..40)) {
        let pv = value_pv(&values).unwrap();
        let oracle = oracle_std(&values);
        prop_assert!((pv - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        prop_assert!(pv >= 0.0);
    }

    #[test]
    fn value_pv_is_permutation_invariant(values in proptest::collection::vec(-10.0f64..10.0, 2..20)) {
        let pv = value_pv(&values).unwrap();
        let mut reversed = values.clone();
        reversed.reverse();
        let pv_rev = value_pv(&reversed).unwrap();
        prop_assert!((pv - pv_rev).abs() <= 1e-12);
    }

    #[test]
    fn dist_pv_matches_oracle(dists in proptest::collection::vec(normalized_dist(4), 2..12)) {
        let pv = dist_pv(&dists).unwrap();
        let oracle = oracle_kl_sum(&dists);
        prop_assert!((pv - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        prop_assert!(pv >= 0.0);
    }

    #[test]
    fn dist_pv_zero_iff_identical(dist in normalized_dist(3), n in 2usize..6) {
        let copies = vec![dist; n];
        prop_assert_eq!(dist_pv(&copies).unwrap(), 0.0);
    }

    #[test]
    fn dist_pv_permutation_invariant(dists in proptest::collection::vec(normalized_dist(3), 2..8)) {
        let pv = dist_pv(&dists).unwrap();
        let mut reversed = dists.clone();
        reversed.reverse();
        prop_assert!((pv - dist_pv(&reversed).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn pearson_is_bounded(
        a in proptest::collection::vec(-50.0f64..50.0, 3..30),
        noise in proptest::collection::vec(-50.0f64..50.0, 3..30),
    ) {
        let n = a.len().min(noise.len());
        let a = &a[..n];
        let b = &noise[..n];
        if let Ok(r) = pearson(a, b) {
            prop_assert!(r.abs() <= 1.0 + 1e-12, "pearson {r} out of bounds");
        }
    }

    #[test]
    fn bucket_occupancy_is_balanced(seed in 0u64..1000, k in 2usize..8) {
        // distinct values in random order
        let mut stream = predvar::rng::Stream::new(seed, "bucket-prop");
        let n = 40 + stream.next_below(160) as usize;
        let values: Vec<f64> = stream.permutation(n).into_iter().map(|v| v as f64).collect();
        let scheme = bucketize(&values, k).unwrap();
        prop_assert_eq!(scheme.k, k);
        let mut counts = vec![0usize; k];
        for v in &values {
            counts[scheme.assign(*v) - 1] += 1;
        }
        let lo = n / k;
        let hi = lo + 1;
        for (b, c) in counts.iter().enumerate() {
            prop_assert!(
                *c == lo || *c == hi || *c + 1 == lo,
                "bucket {} holds {} of {} values (k={})", b + 1, c, n, k
            );
        }
    }

    #[test]
    fn delta_ratio_of_self_is_zero(pvs in proptest::collection::vec(0.01f64..5.0, 1..50)) {
        let table = PvTable {
            rows: pvs
                .iter()
                .enumerate()
                .map(|(i, &pv)| PvRow {
                    row_id: i as u64,
                    pv,
                    mean_prediction: MeanPrediction::Value(1.0),
                    pv_coefficient: None,
                })
                .collect(),
        };
        prop_assert_eq!(predvar::variation::delta_ratio(&table, &table).unwrap(), 0.0);
    }

    #[test]
    fn auc_matches_pairwise_oracle(
        scores in proptest::collection::vec(0.0f64..1.0, 2..200),
        flips in proptest::collection::vec(any::<bool>(), 2..200),
    ) {
        let n = scores.len().min(flips.len());
        let scores = &scores[..n];
        let positives = &flips[..n];
        let fast = roc_auc(scores, positives);
        let slow = oracle_auc(scores, positives);
        match (fast, slow) {
            (None, None) => {}
            (Some(f), Some(s)) => prop_assert!((f - s).abs() <= 1e-10, "{f} vs {s}"),
            other => prop_assert!(false, "disagree on definedness: {other:?}"),
        }
    }

    #[test]
    fn brier_is_bounded(dists in proptest::collection::vec(normalized_dist(4), 1..30)) {
        let classes: Vec<usize> = dists.iter().enumerate().map(|(i, _)| i % 4).collect();
        let b = brier_score(&dists, &classes).unwrap();
        prop_assert!((0.0..=2.0).contains(&b), "brier {b}");
    }
}
