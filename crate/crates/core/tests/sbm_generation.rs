use proptest::prelude::*;
use sbm_bootstrap::rng::derive_seed;
use sbm_bootstrap::sbm::{generate_sbm, select_seeds, SbmParams};

fn two_blocks(n: usize, p: f64, q: f64) -> SbmParams {
    SbmParams::identical(2, n, p, q, 2, 0)
}

#[test]
fn cross_edge_count_matches_binomial_mean() {
    let params = two_blocks(1000, 0.01, 0.002);
    let (pairs, q) = (1_000_000.0f64, 0.002f64);
    let (mean, sd) = (pairs * q, (pairs * q * (1.0 - q)).sqrt());
    for seed in 0..5 {
        let g = generate_sbm(&params, seed).unwrap();
        let cross = g.block_edge_count(0, 1) as f64;
        assert!((cross - mean).abs() < 4.0 * sd, "seed {seed}: {cross} vs {mean}");
    }
}

#[test]
fn intra_edge_count_and_degrees() {
    let params = two_blocks(1000, 0.01, 0.002);
    let g = generate_sbm(&params, 77).unwrap();
    let pairs = 1000.0 * 999.0 / 2.0;
    for i in 0..2 {
        let count = g.block_edge_count(i, i) as f64;
        let sd = (pairs * 0.01 * 0.99f64).sqrt();
        assert!((count - pairs * 0.01).abs() < 4.0 * sd, "block {i}: {count}");
    }
    let mean_degree = 2.0 * g.edge_count() as f64 / g.n() as f64;
    let expected = params.expected_degree(0);
    assert!((mean_degree - expected).abs() < 0.05 * expected, "{mean_degree} vs {expected}");
}

#[test]
fn seed_inclusion_is_uniform() {
    let params = SbmParams {
        sizes: vec![10, 10],
        edge_probs: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        r: 2,
        seeds: vec![2, 0],
    };
    let g = generate_sbm(&params, 1).unwrap();
    let draws = 10_000;
    let mut hits = [0usize; 20];
    for d in 0..draws {
        let seeds = select_seeds(&g, &[2, 0], derive_seed(3, &[d])).unwrap();
        assert_eq!(seeds.len(), 2);
        for s in seeds {
            hits[s as usize] += 1;
        }
    }
    for (v, &h) in hits.iter().enumerate() {
        let f = h as f64 / draws as f64;
        if v < 10 {
            assert!((f - 0.2).abs() < 0.02, "node {v}: {f}");
        } else {
            assert_eq!(h, 0);
        }
    }
}

#[test]
fn full_and_empty_selection() {
    let params = two_blocks(30, 0.1, 0.05);
    let g = generate_sbm(&params, 2).unwrap();
    let all = select_seeds(&g, &[30, 30], 4).unwrap();
    assert_eq!(all, (0..60).collect::<Vec<u32>>());
    assert!(select_seeds(&g, &[0, 0], 4).unwrap().is_empty());
}

fn small_params() -> impl Strategy<Value = SbmParams> {
    (1usize..=3)
        .prop_flat_map(|k| {
            (
                prop::collection::vec(1usize..60, k),
                prop::collection::vec(0.0f64..1.0, k * k),
                2u32..=3,
            )
        })
        .prop_map(|(sizes, raw, r)| {
            let k = sizes.len();
            let edge_probs = (0..k)
                .map(|i| (0..k).map(|j| raw[i.min(j) * k + i.max(j)]).collect())
                .collect();
            SbmParams {
                seeds: vec![0; k],
                sizes,
                edge_probs,
                r,
            }
        })
}

proptest! {
    #[test]
    fn generated_graphs_satisfy_invariants(params in small_params(), seed in any::<u64>()) {
        let g = generate_sbm(&params, seed).unwrap();
        prop_assert!(g.check_invariants().is_ok());
        prop_assert_eq!(g.sizes(), params.sizes.clone());
        let again = generate_sbm(&params, seed).unwrap();
        prop_assert_eq!(g.edges().collect::<Vec<_>>(), again.edges().collect::<Vec<_>>());
    }
}
