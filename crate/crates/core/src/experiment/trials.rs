use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{GraphSpec, SimulateConfig, SweepAlphaConfig};
use super::stats::{crossing, frequency, Summary};
use super::{csv_row, dat_row, thread_pool, Outputs, RunSettings};
use crate::classifier::{classify, ClassifyOptions};
use crate::critical::ray_crossing;
use crate::fluid::{critical_seed_scale, FluidModel};
use crate::percolation::{run_bootstrap, StrategyKind};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sbm::{generate_sbm_with, select_seeds, GenerateOptions, SbmGraph, SbmParams};
use crate::Result;

const GRAPH_TAG: u64 = 1;
const SEED_TAG: u64 = 2;
const RUN_TAG: u64 = 3;
const SHARED_GRAPH: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub cell: usize,
    pub trial: usize,
    pub final_size: usize,
    pub per_community: Vec<usize>,
}

fn options_for(max_expected_edges: Option<f64>) -> GenerateOptions {
    let mut opts = GenerateOptions::default();
    if let Some(cap) = max_expected_edges {
        opts.max_expected_edges = cap;
    }
    opts
}

/// Run `trials` independent trials for every cell on a pool of `workers`
/// threads. Trial `(c, t)` uses the stream `derive_seed(seed, [c, t])`.
pub fn run_trials(
    cells: &[SbmParams],
    trials: usize,
    strategy: &StrategyKind,
    reuse_graph: bool,
    max_expected_edges: Option<f64>,
    settings: &RunSettings,
) -> Result<Vec<TrialRecord>> {
    for p in cells {
        p.check()?;
    }
    let opts = options_for(max_expected_edges);
    let pool = thread_pool(settings.workers)?;
    pool.install(|| {
        let shared: Vec<Option<SbmGraph>> = if reuse_graph {
            cells
                .par_iter()
                .enumerate()
                .map(|(c, p)| {
                    generate_sbm_with(p, derive_seed(settings.seed, &[c as u64, SHARED_GRAPH]), &opts)
                        .map(Some)
                })
                .collect::<Result<_>>()?
        } else {
            vec![None; cells.len()]
        };
        (0..cells.len() * trials)
            .into_par_iter()
            .map(|idx| {
                let (cell, trial) = (idx / trials, idx % trials);
                let params = &cells[cell];
                let trial_seed = derive_seed(settings.seed, &[cell as u64, trial as u64]);
                let owned;
                let graph = match &shared[cell] {
                    Some(g) => g,
                    None => {
                        owned = generate_sbm_with(params, derive_seed(trial_seed, &[GRAPH_TAG]), &opts)?;
                        &owned
                    }
                };
                let seeds = select_seeds(graph, &params.seeds, derive_seed(trial_seed, &[SEED_TAG]))?;
                let mut rng = rng_from_seed(derive_seed(trial_seed, &[RUN_TAG]));
                let mut strat = strategy.build();
                let res = run_bootstrap(graph, &seeds, strat.as_mut(), &mut rng, false)?;
                Ok(TrialRecord {
                    cell,
                    trial,
                    final_size: res.final_size,
                    per_community: res.per_community_final,
                })
            })
            .collect()
    })
}

pub(crate) fn scales(graph: &GraphSpec) -> Vec<f64> {
    (0..graph.k())
        .map(|i| critical_seed_scale(graph.sizes[i], graph.edge_probs[i][i], graph.r))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct Theory {
    verdict: Option<String>,
    x_star: Option<f64>,
    lambda_pf: Option<f64>,
    error: Option<String>,
}

fn theory(params: &SbmParams) -> Theory {
    let result = FluidModel::from_params(params).and_then(|m| classify(&m, &ClassifyOptions::default()));
    match result {
        Ok(c) => Theory {
            verdict: Some(c.verdict.to_string()),
            x_star: c.x_star,
            lambda_pf: Some(c.lambda_pf),
            error: None,
        },
        Err(e) => Theory {
            verdict: None,
            x_star: None,
            lambda_pf: None,
            error: Some(e.to_string()),
        },
    }
}

struct CellTable {
    csv: String,
    cells: Vec<serde_json::Value>,
    frequencies: Vec<f64>,
    mean_over_g: Vec<f64>,
}

fn tabulate(
    graph: &GraphSpec,
    cells: &[SbmParams],
    records: &[TrialRecord],
    trials: usize,
    leading: &[(&str, Vec<f64>)],
) -> CellTable {
    let k = graph.k();
    let g = scales(graph);
    let n: usize = graph.sizes.iter().sum();
    let mut header: Vec<String> = vec!["cell".into(), "trial".into()];
    header.extend(leading.iter().map(|(name, _)| name.to_string()));
    header.extend((1..=k).map(|i| format!("a_{i}")));
    header.push("final_size".into());
    header.extend((1..=k).map(|i| format!("A_{i}")));
    header.extend(["final_over_g".into(), "final_over_n".into(), "percolated".into()]);
    let mut csv = csv_row(&header);

    let mut out_cells = Vec::new();
    let mut frequencies = Vec::new();
    let mut mean_over_g = Vec::new();
    for (c, params) in cells.iter().enumerate() {
        let rows = &records[c * trials..(c + 1) * trials];
        let over_g: Vec<f64> = rows.iter().map(|r| r.final_size as f64 / g[0]).collect();
        let over_n: Vec<f64> = rows.iter().map(|r| r.final_size as f64 / n as f64).collect();
        let perc: Vec<bool> = rows.iter().map(|r| 2 * r.final_size > n).collect();
        for (i, r) in rows.iter().enumerate() {
            let mut fields: Vec<String> = vec![c.to_string(), r.trial.to_string()];
            fields.extend(leading.iter().map(|(_, v)| v[c].to_string()));
            fields.extend(params.seeds.iter().map(ToString::to_string));
            fields.push(r.final_size.to_string());
            fields.extend(r.per_community.iter().map(ToString::to_string));
            fields.push(over_g[i].to_string());
            fields.push(over_n[i].to_string());
            fields.push(u8::from(perc[i]).to_string());
            csv.push_str(&csv_row(&fields));
        }
        let (freq, freq_se) = frequency(&perc);
        let non_perc: Vec<f64> = over_g
            .iter()
            .zip(&perc)
            .filter(|(_, &p)| !p)
            .map(|(v, _)| *v)
            .collect();
        let alpha_eff: Vec<f64> = params.seeds.iter().zip(&g).map(|(&a, gi)| a as f64 / gi).collect();
        let mut cell = json!({
            "cell": c,
            "seeds": params.seeds,
            "alpha_eff": alpha_eff,
            "trials": rows.len(),
            "final_over_g": Summary::of(&over_g),
            "final_over_n": Summary::of(&over_n),
            "percolation_frequency": freq,
            "percolation_std_err": freq_se,
            "nonpercolating_final_over_g": Summary::of(&non_perc),
            "theory": theory(params),
        });
        for (name, v) in leading {
            cell[*name] = json!(v[c]);
        }
        frequencies.push(freq);
        mean_over_g.push(Summary::of(&over_g).mean);
        out_cells.push(cell);
    }
    CellTable {
        csv,
        cells: out_cells,
        frequencies,
        mean_over_g,
    }
}

/// Fixed seed vectors per cell.
pub fn cmd_simulate(cfg: &SimulateConfig, settings: &RunSettings) -> Result<Outputs> {
    let cells: Vec<SbmParams> = cfg.seeds.iter().map(|s| cfg.graph.with_seeds(s.clone())).collect();
    let records = run_trials(
        &cells,
        cfg.trials,
        &cfg.strategy,
        cfg.reuse_graph,
        cfg.graph.max_expected_edges,
        settings,
    )?;
    let table = tabulate(&cfg.graph, &cells, &records, cfg.trials, &[]);
    let mut out = Outputs::default();
    out.insert("results.csv", table.csv);
    let mut dat = String::from("# cell mean_final_over_g percolation_frequency\n");
    for (c, (m, f)) in table.mean_over_g.iter().zip(&table.frequencies).enumerate() {
        dat.push_str(&dat_row(&[c as f64, *m, *f]));
    }
    out.insert("final_size.dat", dat);
    out.insert_json(
        "summary.json",
        &json!({
            "command": "simulate",
            "seed": settings.seed,
            "trials": cfg.trials,
            "strategy": cfg.strategy,
            "reuse_graph": cfg.reuse_graph,
            "g": scales(&cfg.graph),
            "n": cfg.graph.sizes.iter().sum::<usize>(),
            "cells": table.cells,
        }),
    )?;
    Ok(out)
}

/// Seeds `round(alpha direction_i g_i)` along a grid of `alpha`.
pub fn sweep_cells(cfg: &SweepAlphaConfig) -> Vec<SbmParams> {
    let g = scales(&cfg.graph);
    cfg.alpha
        .iter()
        .map(|&a| {
            let seeds = (0..cfg.graph.k())
                .map(|i| ((a * cfg.direction[i] * g[i]).round().max(0.0) as usize).min(cfg.graph.sizes[i]))
                .collect();
            cfg.graph.with_seeds(seeds)
        })
        .collect()
}

pub fn cmd_sweep_alpha(cfg: &SweepAlphaConfig, settings: &RunSettings) -> Result<Outputs> {
    if cfg.direction.len() != cfg.graph.k() {
        return Err(crate::Error::Config("direction length differs from k".into()));
    }
    let cells = sweep_cells(cfg);
    let records = run_trials(
        &cells,
        cfg.trials,
        &cfg.strategy,
        cfg.reuse_graph,
        cfg.graph.max_expected_edges,
        settings,
    )?;
    let table = tabulate(&cfg.graph, &cells, &records, cfg.trials, &[("alpha", cfg.alpha.clone())]);
    let mut out = Outputs::default();
    out.insert("results.csv", table.csv);
    let mut dat = String::from("# alpha percolation_frequency\n");
    for (a, f) in cfg.alpha.iter().zip(&table.frequencies) {
        dat.push_str(&dat_row(&[*a, *f]));
    }
    out.insert("percolation.dat", dat);

    let predicted = FluidModel::from_params(&cells.first().cloned().unwrap_or_else(|| cfg.graph.with_seeds(vec![0; cfg.graph.k()])))
        .and_then(|m| ray_crossing(&cfg.direction, m.chi(), cfg.graph.r, &ClassifyOptions::default()));
    let (alpha_c, alpha_c_error) = match predicted {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    out.insert_json(
        "summary.json",
        &json!({
            "command": "sweep-alpha",
            "seed": settings.seed,
            "trials": cfg.trials,
            "strategy": cfg.strategy,
            "direction": cfg.direction,
            "g": scales(&cfg.graph),
            "n": cfg.graph.sizes.iter().sum::<usize>(),
            "crossing_50": crossing(&cfg.alpha, &table.frequencies, 0.5),
            "predicted_alpha_c": alpha_c,
            "predicted_alpha_c_error": alpha_c_error,
            "cells": table.cells,
        }),
    )?;
    Ok(out)
}
