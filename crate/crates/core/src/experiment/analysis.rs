use rayon::prelude::*;
use serde_json::json;

use super::config::{AllocationsConfig, ClassifyConfig, CriticalCurveConfig};
use super::{csv_row, dat_row, thread_pool, Outputs, RunSettings};
use crate::classifier::classify;
use crate::critical::{critical_curve, extreme_allocations, write_critical_csv};
use crate::{Error, Result};

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn cmd_classify(cfg: &ClassifyConfig, settings: &RunSettings) -> Result<Outputs> {
    let base = cfg.model.build(None)?;
    let k = base.k();
    let options = cfg.options.unwrap_or_default();
    let pool = thread_pool(settings.workers)?;
    let results: Vec<_> = pool.install(|| {
        cfg.alphas
            .par_iter()
            .map(|alpha| base.with_alpha(alpha.clone()).and_then(|m| classify(&m, &options)))
            .collect()
    });

    let mut header = vec!["index".to_string()];
    header.extend((1..=k).map(|i| format!("alpha_{i}")));
    header.extend(["verdict", "lambda_pf", "margin", "x_star"].map(String::from));
    header.extend((1..=k).map(|i| format!("x_exit_{i}")));
    let mut csv = csv_row(&header);
    let mut records = Vec::new();
    for (idx, (alpha, res)) in cfg.alphas.iter().zip(&results).enumerate() {
        let mut fields = vec![idx.to_string()];
        fields.extend(alpha.iter().map(ToString::to_string));
        match res {
            Ok(c) => {
                fields.push(c.verdict.to_string());
                fields.push(c.lambda_pf.to_string());
                fields.push(c.margin.to_string());
                fields.push(opt_f64(c.x_star));
                fields.extend(c.x_exit.iter().map(ToString::to_string));
                records.push(json!({ "index": idx, "alpha": alpha, "classification": c }));
            }
            Err(e) => {
                let verdict = match e {
                    Error::Inconclusive { .. } => "inconclusive",
                    _ => "error",
                };
                fields.push(verdict.to_string());
                fields.extend(std::iter::repeat_n(String::new(), 3 + k));
                records.push(json!({ "index": idx, "alpha": alpha, "error": e.to_string() }));
            }
        }
        csv.push_str(&csv_row(&fields));
    }
    let mut out = Outputs::default();
    out.insert("results.csv", csv);
    out.insert_json(
        "summary.json",
        &json!({
            "command": "classify",
            "k": k,
            "r": base.r(),
            "chi": base.chi(),
            "options": options,
            "results": records,
        }),
    )?;
    Ok(out)
}

pub fn cmd_critical_curve(cfg: &CriticalCurveConfig, settings: &RunSettings) -> Result<Outputs> {
    let model = cfg.model.build(None)?;
    let k = model.k();
    let grid = cfg.theta.unwrap_or_default();
    let pool = thread_pool(settings.workers)?;
    let points = pool.install(|| critical_curve(model.chi(), model.r(), &grid))?;

    let mut csv = Vec::new();
    write_critical_csv(&points, k, &mut csv)?;
    let mut dat = format!(
        "# {}\n",
        (1..=k).map(|i| format!("alpha_{i}")).collect::<Vec<_>>().join(" ")
    );
    for p in &points {
        dat.push_str(&dat_row(&p.alpha));
    }
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let max_lambda = points.iter().map(|p| p.lambda_pf.abs()).fold(0.0, f64::max);
    let mut out = Outputs::default();
    out.insert(
        "results.csv",
        String::from_utf8(csv).map_err(|e| Error::Config(e.to_string()))?,
    );
    out.insert("curve.dat", dat);
    out.insert_json(
        "summary.json",
        &json!({
            "command": "critical-curve",
            "k": k,
            "r": model.r(),
            "chi": model.chi(),
            "theta_grid": grid,
            "points": points.len(),
            "max_residual": max_residual,
            "max_abs_lambda_pf": max_lambda,
            "first_alpha": points.first().map(|p| p.alpha.clone()),
            "last_alpha": points.last().map(|p| p.alpha.clone()),
        }),
    )?;
    Ok(out)
}

pub fn cmd_allocations(cfg: &AllocationsConfig, settings: &RunSettings) -> Result<Outputs> {
    if cfg.k_min < 2 || cfg.k_max < cfg.k_min {
        return Err(Error::Config("allocations needs 2 <= k-min <= k-max".into()));
    }
    let jobs: Vec<(u32, usize)> = cfg
        .r
        .iter()
        .flat_map(|&r| (cfg.k_min..=cfg.k_max).map(move |k| (r, k)))
        .collect();
    let options = Default::default();
    let pool = thread_pool(settings.workers)?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(r, k)| extreme_allocations(k, cfg.psi, r, &options))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut out = Outputs::default();
    let mut csv = csv_row(["r", "k", "equal_split", "all_in_one", "alpha_all_in_one"]);
    for a in &rows {
        csv.push_str(&csv_row([
            a.r.to_string(),
            a.k.to_string(),
            a.equal_split.to_string(),
            a.all_in_one.to_string(),
            a.alpha_all_in_one.to_string(),
        ]));
    }
    out.insert("results.csv", csv);
    let mut per_r = Vec::new();
    for &r in &cfg.r {
        let mut dat = String::from("# k equal_split all_in_one\n");
        let sel: Vec<_> = rows.iter().filter(|a| a.r == r).collect();
        for a in &sel {
            dat.push_str(&dat_row(&[a.k as f64, a.equal_split, a.all_in_one]));
        }
        out.insert(&format!("allocations_r{r}.dat"), dat);
        let last = sel.last().unwrap();
        per_r.push(json!({
            "r": r,
            "k_max": last.k,
            "equal_split_at_k_max": last.equal_split,
            "all_in_one_at_k_max": last.all_in_one,
            "relative_gap_at_k_max": (last.equal_split - last.all_in_one) / last.equal_split,
            "all_in_one_never_above": sel.iter().all(|a| a.all_in_one <= a.equal_split),
        }));
    }
    out.insert_json(
        "summary.json",
        &json!({
            "command": "allocations",
            "psi": cfg.psi,
            "k_min": cfg.k_min,
            "k_max": cfg.k_max,
            "by_r": per_r,
        }),
    )?;
    Ok(out)
}
