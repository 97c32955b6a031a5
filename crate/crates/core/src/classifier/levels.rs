use serde::{Deserialize, Serialize};

use crate::fluid::FluidModel;
use crate::linalg::{support_distances, Matrix};
use crate::{Error, Result};

/// Distances on the community graph (edge `i ~ j` iff `chi_ij > 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityGraphMeta {
    pub root: usize,
    pub distances: Vec<usize>,
    pub dbar: usize,
    /// `levels[h]` lists the communities at distance `h` from the root.
    pub levels: Vec<Vec<usize>>,
}

/// Levels measured from community 0.
pub fn community_levels(chi: &Matrix) -> Result<CommunityGraphMeta> {
    community_levels_from(chi, 0)
}

pub fn community_levels_from(chi: &Matrix, root: usize) -> Result<CommunityGraphMeta> {
    let dist = support_distances(chi, root);
    let unreachable: Vec<usize> = dist
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_none())
        .map(|(i, _)| i)
        .collect();
    if !unreachable.is_empty() {
        return Err(Error::Reducible { root, unreachable });
    }
    let distances: Vec<usize> = dist.into_iter().map(Option::unwrap).collect();
    let dbar = distances.iter().copied().max().unwrap_or(0);
    let mut levels = vec![Vec::new(); dbar + 1];
    for (i, &d) in distances.iter().enumerate() {
        levels[d].push(i);
    }
    Ok(CommunityGraphMeta {
        root,
        distances,
        dbar,
        levels,
    })
}

/// Starting point of the Cauchy problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialPoint {
    pub x0: Vec<f64>,
    pub beta: Vec<f64>,
    /// Factor applied to `beta_0` to make `rho(x0) > 0` and `x0 ∈ D`;
    /// 1 when no adjustment was needed.
    pub shrink: f64,
}

fn beta_sequence(beta0: f64, dbar: usize, c: f64, chi_min: f64, r: u32) -> Vec<f64> {
    let mut beta = Vec::with_capacity(dbar + 1);
    beta.push(beta0);
    for h in 1..=dbar {
        let prev = beta[h - 1];
        beta.push(0.5 * c * (chi_min * prev).powi(r as i32));
    }
    beta
}

/// `x0 = Σ_h beta_h 1_{K_h}` with `beta_0 = alpha_root / 2` and
/// `beta_h = (c/2)(chi_min beta_{h-1})^r`.
///
/// If `x0` is not strictly inside `D~` or `rho(x0)` is not positive, `beta_0`
/// is halved and the sequence rebuilt. Scaling the whole sequence instead
/// would break the recursion that keeps the deeper levels positive.
pub fn initial_point(model: &FluidModel, meta: &CommunityGraphMeta) -> Result<InitialPoint> {
    let alpha_root = model.alpha()[meta.root];
    if alpha_root <= 0.0 {
        return Err(Error::InvalidParams(
            "initial point needs alpha > 0 at the root community".into(),
        ));
    }
    let c = model.power_coefficient();
    let chi_min = model.chi_min();
    let build = |beta: &[f64]| -> Vec<f64> { meta.distances.iter().map(|&d| beta[d]).collect() };

    let mut shrink = 1.0;
    let mut fallback = None;
    for _ in 0..64 {
        let beta = beta_sequence(0.5 * alpha_root * shrink, meta.dbar, c, chi_min, model.r());
        let x0 = build(&beta);
        if model.in_domain(&x0) {
            let rho = model.rho(&x0);
            if rho.iter().all(|&v| v > 0.0) {
                return Ok(InitialPoint { x0, beta, shrink });
            }
            if fallback.is_none() && rho.iter().all(|&v| v >= 0.0) {
                fallback = Some(InitialPoint {
                    x0,
                    beta,
                    shrink,
                });
            }
        }
        shrink *= 0.5;
    }
    // Deep levels can underflow to zero; rho >= 0 still starts the flow.
    fallback.ok_or_else(|| Error::InvalidParams("no admissible initial point".into()))
}
