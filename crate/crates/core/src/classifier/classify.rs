use std::fmt;

use serde::{Deserialize, Serialize};

use super::eigen::pf_eigen;
use super::integrate::{integrate_cauchy, ClassifyOptions, Termination, Trajectory};
use super::levels::{community_levels_from, initial_point};
use crate::fluid::{AsymptoticLimits, FluidModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Sub,
    Sup,
    NearCritical,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sub => "sub",
            Verdict::Sup => "sup",
            Verdict::NearCritical => "near-critical",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub termination: Option<Termination>,
    pub exit_time: Option<f64>,
    pub final_y: f64,
    pub steps: usize,
    pub rejected: usize,
    pub polish_iterations: usize,
    pub min_rho: f64,
    pub shrink: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Community playing the role of community 1 (largest alpha).
    pub root: usize,
    /// `x(y_E)`: the exit point, or the polished zero after a stall.
    pub x_exit: Vec<f64>,
    pub x_star: Option<f64>,
    pub lambda_pf: f64,
    pub phi_pf: Vec<f64>,
    /// `min_i rho_i(x_exit)` after an exit, `lambda_pf` after a stall.
    pub margin: f64,
    pub residual: f64,
    /// `min_i rho_i(z + θ phi_pf)` for a small `θ` after a stall.
    pub ray_min_rho: Option<f64>,
    pub trajectory: TrajectorySummary,
}

/// `x_* = Σ_i x_i (nu_{root,i} mu_{root,i}^r)^{1/(r-1)}`.
pub fn x_star(x_exit: &[f64], limits: &AsymptoticLimits, root: usize, r: u32) -> f64 {
    x_exit
        .iter()
        .enumerate()
        .map(|(i, x)| x * limits.scale_ratio(root, i, r))
        .sum()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn classify(model: &FluidModel, options: &ClassifyOptions) -> Result<Classification> {
    classify_with_trajectory(model, options).map(|(c, _)| c)
}

/// Classify and also return the integrated trajectory (absent for
/// `alpha ≡ 0`, which is subcritical without integration).
pub fn classify_with_trajectory(
    model: &FluidModel,
    options: &ClassifyOptions,
) -> Result<(Classification, Option<Trajectory>)> {
    let k = model.k();
    let root = argmax(model.alpha());
    let meta = community_levels_from(model.chi(), root)?;

    if model.alpha().iter().all(|&a| a == 0.0) {
        let zero = vec![0.0; k];
        let (lambda_pf, phi_pf) = pf_eigen(&model.jacobian(&zero))?;
        let classification = Classification {
            verdict: Verdict::Sub,
            root,
            x_star: model.limits().map(|_| 0.0),
            x_exit: zero,
            lambda_pf,
            phi_pf,
            margin: lambda_pf,
            residual: 0.0,
            ray_min_rho: None,
            trajectory: TrajectorySummary {
                termination: None,
                exit_time: None,
                final_y: 0.0,
                steps: 0,
                rejected: 0,
                polish_iterations: 0,
                min_rho: 0.0,
                shrink: 1.0,
            },
        };
        return Ok((classification, None));
    }

    let start = initial_point(model, &meta)?;
    let traj = integrate_cauchy(model, &start.x0, options)?;
    let endpoint = traj.endpoint.clone();
    let rho_end = model.rho(&endpoint);
    let (lambda_pf, phi_pf) = pf_eigen(&model.jacobian(&endpoint))?;
    let summary = TrajectorySummary {
        termination: Some(traj.termination),
        exit_time: traj.exit_time,
        final_y: traj.final_y,
        steps: traj.steps,
        rejected: traj.rejected,
        polish_iterations: traj.polish_iterations,
        min_rho: traj.min_rho,
        shrink: start.shrink,
    };
    let residual = sup_norm(&rho_end);

    let (verdict, margin, ray_min_rho) = match traj.termination {
        Termination::Exit => {
            let m = min_of(&rho_end);
            let v = if m > options.tol_zero {
                Verdict::Sup
            } else {
                Verdict::NearCritical
            };
            (v, m, None)
        }
        Termination::Stall => {
            if residual >= options.tol_zero || !model.in_domain(&endpoint) {
                return Err(Error::Inconclusive {
                    steps: traj.steps,
                    y: traj.final_y,
                });
            }
            let v = if lambda_pf < -options.tol_crit {
                Verdict::Sub
            } else if lambda_pf.abs() <= options.tol_crit {
                Verdict::NearCritical
            } else {
                return Err(Error::Inconclusive {
                    steps: traj.steps,
                    y: traj.final_y,
                });
            };
            let theta = 1e-4 * (1.0 + sup_norm(&endpoint));
            let probe: Vec<f64> = endpoint
                .iter()
                .zip(&phi_pf)
                .map(|(z, p)| z + theta * p)
                .collect();
            (v, lambda_pf, Some(min_of(&model.rho(&probe))))
        }
    };

    let x_star = match (verdict, model.limits()) {
        (Verdict::Sub, Some(limits)) => Some(x_star(&endpoint, limits, root, model.r())),
        _ => None,
    };

    let classification = Classification {
        verdict,
        root,
        x_exit: endpoint,
        x_star,
        lambda_pf,
        phi_pf,
        margin,
        residual,
        ray_min_rho,
        trajectory: summary,
    };
    Ok((classification, Some(traj)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn run(model: &FluidModel) -> Classification {
        classify(model, &ClassifyOptions::default()).unwrap()
    }

    #[test]
    fn single_community_regimes() {
        let sub = run(&FluidModel::identical(1, 0.0, 2, vec![0.5]).unwrap());
        assert_eq!(sub.verdict, Verdict::Sub);
        assert!((sub.x_star.unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-10);
        assert!(sub.ray_min_rho.unwrap() < 0.0);
        let sup = run(&FluidModel::identical(1, 0.0, 2, vec![1.5]).unwrap());
        assert_eq!(sup.verdict, Verdict::Sup);
        assert!(sup.x_star.is_none());
        assert!((sup.margin - 0.5).abs() < 1e-8);
    }

    #[test]
    fn zero_alpha_is_sub() {
        let c = run(&FluidModel::identical(3, 0.2, 2, vec![0.0; 3]).unwrap());
        assert_eq!(c.verdict, Verdict::Sub);
        assert_eq!(c.x_star, Some(0.0));
        assert!((c.lambda_pf + 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_boundary_point() {
        let c = run(&FluidModel::identical(2, 1.0 / 3.0, 2, vec![0.5625, 0.5625]).unwrap());
        assert_eq!(c.verdict, Verdict::NearCritical);
    }

    #[test]
    fn symmetric_sub_point() {
        let c = run(&FluidModel::identical(2, 1.0 / 3.0, 2, vec![0.4, 0.4]).unwrap());
        assert_eq!(c.verdict, Verdict::Sub);
        assert!((c.x_exit[0] - c.x_exit[1]).abs() < 1e-10);
        assert!((c.x_star.unwrap() - 2.0 * c.x_exit[0]).abs() < 1e-12);
        assert!(c.phi_pf.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn plain_chi_has_no_x_star() {
        let chi = Matrix::from_rows(&[vec![1.0, 0.2], vec![0.4, 1.0]]).unwrap();
        let c = run(&FluidModel::new(2, vec![0.1, 0.2], chi).unwrap());
        assert_eq!(c.verdict, Verdict::Sub);
        assert_eq!(c.root, 1);
        assert!(c.x_star.is_none());
    }

    #[test]
    fn reducible_model_is_an_error() {
        let m = FluidModel::new(2, vec![0.5, 0.5], Matrix::identity(2)).unwrap();
        assert!(matches!(
            classify(&m, &ClassifyOptions::default()),
            Err(Error::Reducible { .. })
        ));
    }
}
