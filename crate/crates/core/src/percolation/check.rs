use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::engine::run_bootstrap;
use super::strategy::StrategyKind;
use crate::rng::{derive_seed, rng_from_seed};
use crate::sbm::{NodeId, SbmGraph};
use crate::Result;

/// Run every strategy `trials` times on the same graph and seeds and report
/// whether all runs agree on `A*` and on the per-community final counts.
pub fn strategy_invariance_check(
    graph: &SbmGraph,
    seeds: &[NodeId],
    strategies: &[StrategyKind],
    trials: usize,
    seed: u64,
) -> Result<bool> {
    let mut reference: Option<Vec<usize>> = None;
    for (s, kind) in strategies.iter().enumerate() {
        for trial in 0..trials {
            let mut rng = rng_from_seed(derive_seed(seed, &[s as u64, trial as u64]));
            let mut strategy = kind.build();
            let res = run_bootstrap(graph, seeds, strategy.as_mut(), &mut rng, false)?;
            match &reference {
                None => reference = Some(res.per_community_final),
                Some(expected) if *expected != res.per_community_final => return Ok(false),
                Some(_) => {}
            }
        }
    }
    Ok(true)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

/// Monte Carlo estimate of `P(Σ_j Bin(u_j, q_j) >= r)`.
pub fn empirical_b<R: Rng + ?Sized>(
    u: &[u64],
    q_row: &[f64],
    r: u32,
    trials: usize,
    rng: &mut R,
) -> Estimate {
    let dists: Vec<Option<Binomial>> = u
        .iter()
        .zip(q_row)
        .map(|(&n, &p)| (n > 0 && p > 0.0).then(|| Binomial::new(n, p).expect("valid binomial")))
        .collect();
    let mut hits = 0usize;
    for _ in 0..trials {
        let mut total = 0u64;
        for d in dists.iter().flatten() {
            total += d.sample(rng);
            if total >= r as u64 {
                break;
            }
        }
        if total >= r as u64 {
            hits += 1;
        }
    }
    let mean = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
    let std_err = if trials == 0 {
        0.0
    } else {
        (mean * (1.0 - mean) / trials as f64).sqrt()
    };
    Estimate {
        mean,
        std_err,
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn zero_exposure_never_activates() {
        let mut rng = rng_from_seed(0);
        let e = empirical_b(&[0, 0], &[0.5, 0.5], 2, 1000, &mut rng);
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn single_binomial_tail() {
        let mut rng = rng_from_seed(4);
        let e = empirical_b(&[10], &[0.5], 2, 200_000, &mut rng);
        let exact = 1.0 - 11.0 / 1024.0;
        assert!((e.mean - exact).abs() <= 3.0 * e.std_err.max(1e-4));
    }
}
