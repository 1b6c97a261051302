//! Statistical checks of Wilson's algorithm with killing.

use std::time::Instant;

use lsf_core::determinantal::kn_tree_inclusion_prob;
use lsf_core::graph::complete_edge_index;
use lsf_core::oracle::exact_distribution;
use lsf_core::rational::int;
use lsf_core::sampler::{batch_fold, sample_lsf_kn, ForestSampler, KnSampler, RngSeed};
use lsf_core::stats::{chi_square_quantile, compare, sample_forest_histogram};

#[test]
fn chi_square_on_k4_holds_in_most_seeded_runs() {
    let law = exact_distribution(&lsf_core::Graph::complete(4).unwrap(), &int(1))
        .unwrap()
        .law_by_key();
    assert_eq!(law.len(), 38);
    let proto = ForestSampler::Complete(KnSampler::new(4, 1.0).unwrap());
    let runs = 20;
    let quantile = chi_square_quantile(0.999, 37);
    let mut below = 0;
    for seed in 0..runs {
        let hist = sample_forest_histogram(&proto, 1_000_000, 9000 + seed);
        let report = compare(&hist, &law).unwrap();
        assert_eq!(report.chi_square.dof, 37);
        if report.chi_square.statistic < quantile {
            below += 1;
        }
    }
    assert!(
        below * 100 >= 95 * runs,
        "{below}/{runs} runs below the 99.9% quantile"
    );
}

/// In a 3-vertex component (a path) the root is the middle vertex one time in three.
#[test]
fn roots_are_uniform_within_components() {
    let proto = ForestSampler::Complete(KnSampler::new(4, 1.0).unwrap());
    let (center, total) = batch_fold(
        &proto,
        400_000,
        77,
        || (0u64, 0u64),
        |acc, s| {
            let n = s.vertex_count();
            let roots: Vec<usize> = (0..n).map(|v| s.root_of(v)).collect();
            for r in s.roots() {
                let members: Vec<usize> = (0..n).filter(|&v| roots[v] == r).collect();
                if members.len() != 3 {
                    continue;
                }
                let degree = |v: usize| {
                    members
                        .iter()
                        .filter(|&&u| s.parents()[u] == Some(v) || s.parents()[v] == Some(u))
                        .count()
                };
                acc.1 += 1;
                if degree(r) == 2 {
                    acc.0 += 1;
                }
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    let p = 1.0 / 3.0;
    let freq = center as f64 / total as f64;
    let sigma = (p * (1.0 - p) / total as f64).sqrt();
    assert!(total > 50_000);
    assert!(
        (freq - p).abs() <= 3.0 * sigma,
        "{freq} over {total} components"
    );
}

#[test]
fn edge_inclusion_frequencies_match_two_over_n_plus_lambda() {
    for (n, lambda, count) in [
        (4usize, 1.0, 200_000u64),
        (50, 1.0, 100_000),
        (1000, 10.0, 100_000),
    ] {
        let proto = ForestSampler::Complete(KnSampler::new(n, lambda).unwrap());
        let watched = [
            complete_edge_index(n, 0, 1),
            complete_edge_index(n, n - 2, n - 1),
            complete_edge_index(n, 1, n - 1),
        ];
        let (hits, all_edges) = batch_fold(
            &proto,
            count,
            n as u64,
            || ([0u64; 3], 0u64),
            |acc, s| {
                let edges = s.edge_indices();
                acc.1 += edges.len() as u64;
                for (k, e) in watched.iter().enumerate() {
                    if edges.binary_search(e).is_ok() {
                        acc.0[k] += 1;
                    }
                }
            },
            |mut a, b| {
                for k in 0..3 {
                    a.0[k] += b.0[k];
                }
                (a.0, a.1 + b.1)
            },
        );
        let p = kn_tree_inclusion_prob(2, n, lambda).unwrap();
        let sigma = (p * (1.0 - p) / count as f64).sqrt();
        for (k, &h) in hits.iter().enumerate() {
            let freq = h as f64 / count as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma,
                "n={n}, edge {}: {freq} vs {p}",
                watched[k]
            );
        }
        // Averaged over all C(n,2) edges.
        let pooled = all_edges as f64 / (count as f64 * (n * (n - 1) / 2) as f64);
        assert!(
            (pooled - p).abs() <= 0.01 * p,
            "n={n}: pooled {pooled} vs {p}"
        );
    }
}

#[test]
fn large_complete_graph_samples_quickly() {
    let n = 100_000;
    let start = Instant::now();
    let reps = 5;
    for i in 0..reps {
        let s = sample_lsf_kn(n, n as f64, RngSeed::new(5, i)).unwrap();
        assert_eq!(s.vertex_count(), n);
    }
    let per_sample = start.elapsed() / reps as u32;
    assert!(per_sample.as_secs_f64() < 1.0, "{per_sample:?} per sample");
}
