use proptest::prelude::*;
use rand::Rng;
use sbm_bootstrap::experiment::{run, ExperimentConfig, Mode, RunSettings};
use sbm_bootstrap::fluid::exact_b;
use sbm_bootstrap::percolation::{
    empirical_b, naive_bootstrap, run_bootstrap, run_to_completion, strategy_invariance_check,
    StrategyKind,
};
use sbm_bootstrap::rng::{derive_seed, rng_from_seed};
use sbm_bootstrap::sbm::{generate_sbm, select_seeds, SbmGraph, SbmParams};

fn instance(k: usize, size: usize, p: f64, q: f64, r: u32) -> SbmParams {
    SbmParams::identical(k, size, p, q, r, 0)
}

fn uniform(graph: &SbmGraph, seeds: &[u32], seed: u64) -> sbm_bootstrap::percolation::RunResult {
    let mut strategy = StrategyKind::UniformUsable.build();
    run_bootstrap(graph, seeds, strategy.as_mut(), &mut rng_from_seed(seed), false).unwrap()
}

#[test]
fn adversarial_schedule_agrees_with_uniform() {
    for case in 0..30u64 {
        let params = instance(3, 50, 0.12, 0.04, 2);
        let graph = generate_sbm(&params, case).unwrap();
        let seeds = select_seeds(&graph, &[4, 1, 0], derive_seed(case, &[1])).unwrap();
        // always ask for the last community first, which is usually empty
        let schedule = vec![2; graph.n()];
        let ok = strategy_invariance_check(
            &graph,
            &seeds,
            &[StrategyKind::UniformUsable, StrategyKind::FixedSchedule(schedule)],
            5,
            case,
        )
        .unwrap();
        assert!(ok, "case {case}");
    }
}

#[test]
fn terminal_marks_count_used_neighbours() {
    let params = instance(2, 120, 0.06, 0.02, 2);
    let graph = generate_sbm(&params, 11).unwrap();
    let seeds = select_seeds(&graph, &[5, 0], 12).unwrap();
    let mut strategy = StrategyKind::RoundRobin.build();
    let (res, state) = run_to_completion(&graph, &seeds, strategy.as_mut(), &mut rng_from_seed(13), false).unwrap();
    let mut total = 0;
    for v in 0..graph.n() as u32 {
        let used = graph.neighbors(v).iter().filter(|&&w| state.is_used(w)).count();
        assert_eq!(state.marks(v) as usize, used, "node {v}");
        total += state.marks(v) as usize;
    }
    let used_degree: usize = (0..graph.n() as u32).filter(|&v| state.is_used(v)).map(|v| graph.degree(v)).sum();
    assert_eq!(total, used_degree);
    assert_eq!(state.used_counts().iter().sum::<usize>(), res.final_size);
    assert_eq!(state.total_usable(), 0);
}

#[test]
fn empirical_tail_matches_closed_forms() {
    let mut rng = rng_from_seed(21);
    let est = empirical_b(&[10], &[0.5], 2, 200_000, &mut rng);
    let exact = 1.0 - 11.0 / 1024.0;
    assert!((est.mean - exact).abs() < 3.0 * est.std_err.max(1e-4), "{est:?}");
    let est = empirical_b(&[5, 5], &[0.3, 0.1], 2, 200_000, &mut rng);
    let exact = exact_b(&[5, 5], &[0.3, 0.1], 2);
    assert!((est.mean - exact).abs() < 3.0 * est.std_err, "{est:?} vs {exact}");
}

#[test]
fn single_community_final_size_tracks_x_star() {
    // g = 5 here, so the seed count rounds to 2 and the realized level is
    // alpha = 2/5; x_* = 2 - 2 sqrt(1 - alpha) is evaluated there
    let cfg = ExperimentConfig::from_toml(
        "[sweep_alpha]\nalpha = [0.5]\ndirection = [1.0]\ntrials = 200\n\
         [sweep_alpha.graph]\nsizes = [100000]\nedge_probs = [[0.001]]\nr = 2\n",
    )
    .unwrap();
    let out = run(Mode::SweepAlpha, &cfg, &RunSettings { seed: 5, workers: 2 }).unwrap();
    let summary: serde_json::Value = serde_json::from_str(out.get("summary.json").unwrap()).unwrap();
    let cell = &summary["cells"][0];
    let alpha = cell["alpha_eff"][0].as_f64().unwrap();
    let x_star = 2.0 - 2.0 * (1.0 - alpha).sqrt();
    let mean = cell["final_over_g"]["mean"].as_f64().unwrap();
    assert!((mean - x_star).abs() < 0.1 * x_star, "mean {mean} vs {x_star} at alpha {alpha}");
    assert!((cell["theory"]["x_star"].as_f64().unwrap() - x_star).abs() < 1e-8);
}

#[test]
fn percolation_frequency_rises_with_seeds() {
    let cfg = ExperimentConfig::from_toml(
        "[sweep_alpha]\nalpha = [0.2, 0.6, 1.0, 1.6, 2.4]\ndirection = [1.0, 1.0]\ntrials = 40\n\
         [sweep_alpha.graph]\nsizes = [20000, 20000]\nedge_probs = [[0.001118, 0.0003354], [0.0003354, 0.001118]]\nr = 2\n",
    )
    .unwrap();
    let out = run(Mode::SweepAlpha, &cfg, &RunSettings { seed: 6, workers: 2 }).unwrap();
    let summary: serde_json::Value = serde_json::from_str(out.get("summary.json").unwrap()).unwrap();
    let freqs: Vec<f64> = summary["cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["percolation_frequency"].as_f64().unwrap())
        .collect();
    for w in freqs.windows(2) {
        // 40 trials: allow a couple of standard errors of slack
        assert!(w[1] >= w[0] - 0.15, "{freqs:?}");
    }
    assert!(freqs[0] < 0.2 && freqs[4] > 0.8, "{freqs:?}");
}

fn random_params() -> impl Strategy<Value = (SbmParams, u64)> {
    (1usize..=3, 2u32..=3, any::<u64>()).prop_map(|(k, r, seed)| {
        let mut rng = rng_from_seed(seed);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=60)).collect();
        let mut probs = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let p = rng.random_range(0.0..0.3);
                probs[i][j] = p;
                probs[j][i] = p;
            }
        }
        let seeds = sizes.iter().map(|&s| rng.random_range(0..=s.min(6))).collect();
        (
            SbmParams {
                sizes,
                edge_probs: probs,
                r,
                seeds,
            },
            seed,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_matches_naive((params, seed) in random_params()) {
        let graph = generate_sbm(&params, seed).unwrap();
        let seeds = select_seeds(&graph, &params.seeds, seed ^ 1).unwrap();
        let res = uniform(&graph, &seeds, seed ^ 2);
        prop_assert_eq!(&res.per_community_final, &naive_bootstrap(&graph, &seeds).per_community_final);
        prop_assert_eq!(res.termination_time, res.final_size);
    }

    #[test]
    fn more_seeds_never_shrink_the_final_set((params, seed) in random_params(), extra in 0usize..10) {
        let graph = generate_sbm(&params, seed).unwrap();
        let seeds = select_seeds(&graph, &params.seeds, seed ^ 1).unwrap();
        let mut rng = rng_from_seed(seed ^ 3);
        let mut more = seeds.clone();
        for _ in 0..extra {
            more.push(rng.random_range(0..graph.n() as u32));
        }
        more.sort_unstable();
        more.dedup();
        let small = uniform(&graph, &seeds, seed);
        let large = uniform(&graph, &more, seed);
        for (a, b) in small.per_community_final.iter().zip(&large.per_community_final) {
            prop_assert!(a <= b);
        }
    }
}
