//! Wilcoxon and Holm checked against brute-force references.

use falqon::stats::{holm_adjust, wilcoxon_signed_rank, PValueMethod, RunRecord};
use proptest::prelude::*;

/// Two-sided p-value by enumerating all 2^n sign assignments of the ranked
/// absolute differences.
fn enumerated_p(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|&x| x != 0.0).collect();
    let n = d.len();
    let mut ranks = vec![0.0; n];
    for i in 0..n {
        let less = d.iter().filter(|x| x.abs() < d[i].abs()).count();
        let equal = d.iter().filter(|x| x.abs() == d[i].abs()).count();
        ranks[i] = less as f64 + (equal as f64 + 1.0) / 2.0;
    }
    let observed_plus: f64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
    let total: f64 = ranks.iter().sum();
    let observed = observed_plus.min(total - observed_plus);
    let mut at_most = 0u64;
    for mask in 0..1u64 << n {
        let plus: f64 = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if plus <= observed + 1e-9 {
            at_most += 1;
        }
    }
    (2.0 * at_most as f64 / (1u64 << n) as f64).min(1.0)
}

#[test]
fn worked_example_of_eight_pairs() {
    let a = [125.0, 115.0, 130.0, 140.0, 140.0, 115.0, 140.0, 125.0];
    let b = [110.0, 122.0, 125.0, 120.0, 140.0, 124.0, 123.0, 137.0];
    let r = wilcoxon_signed_rank(&a, &b).unwrap();
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    assert_eq!(r.n_zero, 1);
    assert_eq!(r.method, PValueMethod::Exact);
    assert!((r.p_value - enumerated_p(&diffs)).abs() < 1e-12);
    let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], &[0.0; 8]).unwrap();
    assert_eq!(r.p_value, 2.0 / 256.0);
}

#[test]
fn normal_branch_is_close_to_enumeration_at_twenty() {
    let diffs: Vec<f64> = (1..=20)
        .map(|i| if i % 3 == 0 { -(i as f64) } else { i as f64 })
        .collect();
    let r = wilcoxon_signed_rank(&diffs, &[0.0; 20]).unwrap();
    assert_eq!(r.method, PValueMethod::Normal);
    assert!((r.p_value - enumerated_p(&diffs)).abs() < 0.01);
}

fn holm_reference(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    (0..m)
        .map(|i| {
            // rank of p[i] among sorted values, ties broken by index
            let rank = |j: usize| {
                (0..m)
                    .filter(|&k| p[k] < p[j] || (p[k] == p[j] && k < j))
                    .count()
            };
            let r = rank(i);
            (0..m)
                .filter(|&j| rank(j) <= r)
                .map(|j| ((m - rank(j)) as f64 * p[j]).min(1.0))
                .fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn holm_hand_vectors() {
    let cases: [(&[f64], &[f64]); 3] = [
        (&[0.01, 0.04, 0.03], &[0.03, 0.06, 0.06]),
        (&[0.001, 0.01, 0.02, 0.5], &[0.004, 0.03, 0.04, 0.5]),
        (&[0.2, 0.01, 0.2], &[0.4, 0.03, 0.4]),
    ];
    for (input, expected) in cases {
        let got = holm_adjust(input).unwrap();
        for (x, y) in got.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15, "{got:?} vs {expected:?}");
        }
    }
}

fn small_diffs() -> impl Strategy<Value = Vec<f64>> {
    // small integers give plenty of ties and zeros
    prop::collection::vec(-6i32..=6, 1..=12).prop_map(|v| v.into_iter().map(f64::from).collect())
}

proptest! {
    #[test]
    fn wilcoxon_matches_enumeration(diffs in small_diffs()) {
        let zeros = vec![0.0; diffs.len()];
        match wilcoxon_signed_rank(&diffs, &zeros) {
            Ok(r) => {
                prop_assert!((r.p_value - enumerated_p(&diffs)).abs() < 1e-12);
                prop_assert!(r.statistic <= r.w_plus.max(r.w_minus));
            }
            Err(_) => prop_assert!(diffs.iter().all(|&d| d == 0.0)),
        }
    }

    #[test]
    fn wilcoxon_invariant_under_positive_affine_maps(
        a in prop::collection::vec(-50i32..50, 6..40),
        b_shift in prop::collection::vec(-5i32..5, 40),
        scale_pow in -3i32..4,
        offset in -100i32..100,
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = a.iter().zip(&b_shift).map(|(x, s)| x + f64::from(*s)).collect();
        prop_assume!(a.iter().zip(&b).any(|(x, y)| x != y));
        let scale = 2f64.powi(scale_pow);
        let map = |v: &[f64]| v.iter().map(|x| scale * x + f64::from(offset)).collect::<Vec<_>>();
        let r0 = wilcoxon_signed_rank(&a, &b).unwrap();
        let r1 = wilcoxon_signed_rank(&map(&a), &map(&b)).unwrap();
        prop_assert_eq!(r0.p_value, r1.p_value);
        prop_assert_eq!(r0.statistic, r1.statistic);
    }

    #[test]
    fn wilcoxon_invariant_under_odd_monotone_maps_of_differences(diffs in small_diffs()) {
        prop_assume!(diffs.iter().any(|&d| d != 0.0));
        let zeros = vec![0.0; diffs.len()];
        let mapped: Vec<f64> = diffs.iter().map(|d| d.powi(3) + 2.0 * d).collect();
        let r0 = wilcoxon_signed_rank(&diffs, &zeros).unwrap();
        let r1 = wilcoxon_signed_rank(&mapped, &zeros).unwrap();
        prop_assert_eq!(r0.p_value, r1.p_value);
    }

    #[test]
    fn wilcoxon_p_is_a_probability(diffs in prop::collection::vec(-1.0f64..1.0, 1..60)) {
        prop_assume!(diffs.iter().any(|&d| d != 0.0));
        let r = wilcoxon_signed_rank(&diffs, &vec![0.0; diffs.len()]).unwrap();
        prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        let swapped = wilcoxon_signed_rank(&vec![0.0; diffs.len()], &diffs).unwrap();
        prop_assert_eq!(r.p_value, swapped.p_value);
    }

    #[test]
    fn holm_bounds_and_monotonicity(p in prop::collection::vec(0.0f64..=1.0, 0..30)) {
        let adj = holm_adjust(&p).unwrap();
        prop_assert_eq!(adj.len(), p.len());
        let m = p.len() as f64;
        for (raw, a) in p.iter().zip(&adj) {
            prop_assert!(*a >= *raw && *a <= 1.0);
            prop_assert!(*a <= (m * raw).min(1.0) + 1e-15);
        }
        let mut idx: Vec<usize> = (0..p.len()).collect();
        idx.sort_by(|&i, &j| p[i].total_cmp(&p[j]).then(i.cmp(&j)));
        for w in idx.windows(2) {
            prop_assert!(adj[w[0]] <= adj[w[1]]);
        }
        let reference = holm_reference(&p);
        for (x, y) in adj.iter().zip(&reference) {
            prop_assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn record_identities_hold(p in 0.0f64..=1.0, n in 1u64..100_000, depth in 1usize..=10) {
        let r = RunRecord::new("m", 0, depth, p, n, 0, vec![]).unwrap();
        prop_assert!(r.check_identities().is_ok());
        prop_assert_eq!(r.e1, p / n as f64);
        prop_assert_eq!(r.e2, r.e1 / depth as f64);
        // the multiplicative forms agree to one rounding step
        prop_assert!((r.e1 * n as f64 - p).abs() <= p * f64::EPSILON);
        prop_assert!((r.e2 * depth as f64 - r.e1).abs() <= r.e1 * f64::EPSILON);
    }
}
