use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::OracleCheckConfig;
use super::{csv_row, thread_pool, Outputs, RunSettings};
use crate::classifier::{classify, ClassifyOptions};
use crate::fluid::{exact_b, FluidModel};
use crate::linalg::Matrix;
use crate::percolation::{naive_bootstrap, run_bootstrap, StrategyKind};
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::sbm::{generate_sbm, select_seeds, SbmParams};
use crate::Result;

#[derive(Debug, Clone, Serialize)]
struct CheckResult {
    check: &'static str,
    cases: usize,
    failures: usize,
    max_error: f64,
}

fn random_params(rng: &mut SimRng, max_n: usize) -> SbmParams {
    let k = rng.random_range(1..=3usize);
    let r = rng.random_range(2..=3u32);
    let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=max_n / k)).collect();
    let mut probs = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let p = rng.random_range(0.0..0.3);
            probs[i][j] = p;
            probs[j][i] = p;
        }
    }
    let seeds = sizes.iter().map(|&s| rng.random_range(0..=s.min(8))).collect();
    SbmParams {
        sizes,
        edge_probs: probs,
        r,
        seeds,
    }
}

fn strategy_check(cfg: &OracleCheckConfig, seed: u64) -> Result<CheckResult> {
    let outcomes: Vec<bool> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let s = derive_seed(seed, &[1, i as u64]);
            let mut rng = rng_from_seed(s);
            let params = random_params(&mut rng, cfg.max_n);
            let graph = generate_sbm(&params, derive_seed(s, &[1]))?;
            let seeds = select_seeds(&graph, &params.seeds, derive_seed(s, &[2]))?;
            let reference = naive_bootstrap(&graph, &seeds).per_community_final;
            let schedule: Vec<usize> = (0..graph.n()).map(|_| rng.random_range(0..params.k())).collect();
            let kinds = [
                StrategyKind::UniformUsable,
                StrategyKind::RoundRobin,
                StrategyKind::FixedSchedule(schedule),
            ];
            for kind in &kinds {
                for draw in 0..5u64 {
                    let mut run_rng = rng_from_seed(derive_seed(s, &[3, draw]));
                    let mut strat = kind.build();
                    let res = run_bootstrap(&graph, &seeds, strat.as_mut(), &mut run_rng, false)?;
                    if res.per_community_final != reference || res.termination_time != res.final_size {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })
        .collect::<Result<_>>()?;
    Ok(CheckResult {
        check: "strategy-invariance",
        cases: outcomes.len(),
        failures: outcomes.iter().filter(|&&ok| !ok).count(),
        max_error: 0.0,
    })
}

/// `P(Σ Bernoulli >= r)` by summing over all outcome patterns.
fn enumerate_tail(probs: &[f64], r: u32) -> f64 {
    let m = probs.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() < r {
            continue;
        }
        let mut p = 1.0;
        for (bit, &q) in probs.iter().enumerate() {
            p *= if mask >> bit & 1 == 1 { q } else { 1.0 - q };
        }
        total += p;
    }
    total
}

fn binomial_check(cfg: &OracleCheckConfig, seed: u64) -> CheckResult {
    let errors: Vec<f64> = (0..cfg.b_cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, &[2, i as u64]));
            let k = rng.random_range(1..=4usize);
            let mut budget = 12usize;
            let u: Vec<u64> = (0..k)
                .map(|_| {
                    let v = rng.random_range(0..=budget.min(6));
                    budget -= v;
                    v as u64
                })
                .collect();
            let q: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
            let r = rng.random_range(1..=5u32);
            let flat: Vec<f64> = u
                .iter()
                .zip(&q)
                .flat_map(|(&n, &p)| std::iter::repeat_n(p, n as usize))
                .collect();
            (exact_b(&u, &q, r) - enumerate_tail(&flat, r)).abs()
        })
        .collect();
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    CheckResult {
        check: "exact-b-enumeration",
        cases: errors.len(),
        failures: errors.iter().filter(|&&e| e > 1e-12).count(),
        max_error,
    }
}

fn jacobian_check(cfg: &OracleCheckConfig, seed: u64) -> Result<CheckResult> {
    let mut errors = Vec::new();
    for (ci, &k) in [1usize, 2, 4].iter().enumerate() {
        for r in [2u32, 3] {
            for i in 0..cfg.fd_points {
                let mut rng = rng_from_seed(derive_seed(seed, &[3, ci as u64, r as u64, i as u64]));
                let chi = Matrix::from_fn(k, |a, b| if a == b { 1.0 } else { 0.0 });
                let mut chi = chi;
                for a in 0..k {
                    for b in a + 1..k {
                        chi[(a, b)] = rng.random_range(0.05..1.0);
                        chi[(b, a)] = rng.random_range(0.05..1.0);
                    }
                }
                let alpha = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
                let model = FluidModel::new(r, alpha, chi)?;
                // random point of D: scale a positive direction inside the boundary
                let dir: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
                let s_max = model.exposure(&dir).into_iter().fold(0.0, f64::max);
                let t = rng.random_range(0.0..1.0) * model.boundary_level() / s_max;
                let x: Vec<f64> = dir.iter().map(|d| d * t).collect();
                let jac = model.jacobian(&x);
                let h = 1e-6;
                let mut worst: f64 = 0.0;
                for col in 0..k {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[col] += h;
                    xm[col] -= h;
                    let (rp, rm) = (model.rho(&xp), model.rho(&xm));
                    for row in 0..k {
                        worst = worst.max(((rp[row] - rm[row]) / (2.0 * h) - jac[(row, col)]).abs());
                    }
                }
                errors.push(worst);
            }
        }
    }
    Ok(CheckResult {
        check: "jacobian-finite-difference",
        cases: errors.len(),
        failures: errors.iter().filter(|&&e| e >= 1e-6).count(),
        max_error: errors.iter().copied().fold(0.0, f64::max),
    })
}

/// Root in `[0,1]` of `r x - x^r = (r-1) alpha`, by bisection.
fn phi(alpha: f64, r: u32) -> f64 {
    let f = |x: f64| r as f64 * x - x.powi(r as i32) - (r as f64 - 1.0) * alpha;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn single_community_check() -> Result<CheckResult> {
    let mut errors = Vec::new();
    for r in [2u32, 3, 4] {
        for a in 1..=9 {
            let alpha = a as f64 / 10.0;
            let model = FluidModel::identical(1, 0.0, r, vec![alpha])?;
            let c = classify(&model, &ClassifyOptions::default())?;
            let expected = r as f64 / (r as f64 - 1.0) * phi(alpha, r);
            errors.push((c.x_exit[0] - expected).abs());
        }
    }
    Ok(CheckResult {
        check: "single-community-endpoint",
        cases: errors.len(),
        failures: errors.iter().filter(|&&e| e > 1e-8).count(),
        max_error: errors.iter().copied().fold(0.0, f64::max),
    })
}

pub fn cmd_oracle_check(cfg: &OracleCheckConfig, settings: &RunSettings) -> Result<Outputs> {
    let pool = thread_pool(settings.workers)?;
    let results = pool.install(|| -> Result<Vec<CheckResult>> {
        Ok(vec![
            strategy_check(cfg, settings.seed)?,
            binomial_check(cfg, settings.seed),
            jacobian_check(cfg, settings.seed)?,
            single_community_check()?,
        ])
    })?;
    let mut csv = csv_row(["check", "cases", "failures", "max_error"]);
    for r in &results {
        csv.push_str(&csv_row([
            r.check.to_string(),
            r.cases.to_string(),
            r.failures.to_string(),
            r.max_error.to_string(),
        ]));
    }
    let mut out = Outputs::default();
    out.insert("results.csv", csv);
    out.insert_json(
        "summary.json",
        &json!({
            "command": "oracle-check",
            "seed": settings.seed,
            "all_passed": results.iter().all(|r| r.failures == 0),
            "checks": results,
        }),
    )?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_solves_its_equation() {
        let x = phi(0.5, 2);
        assert!((2.0 * x - x * x - 0.5).abs() < 1e-14);
    }

    #[test]
    fn enumeration_matches_closed_form() {
        // P(Bin(3, 0.5) >= 2) = 1/2
        assert!((enumerate_tail(&[0.5; 3], 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn small_run_passes() {
        let cfg = OracleCheckConfig {
            instances: 5,
            max_n: 60,
            b_cases: 20,
            fd_points: 3,
        };
        let out = cmd_oracle_check(&cfg, &RunSettings { seed: 1, workers: 1 }).unwrap();
        assert!(out.get("summary.json").unwrap().contains("\"all_passed\": true"));
    }
}
