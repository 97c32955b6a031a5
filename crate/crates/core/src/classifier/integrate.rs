use serde::{Deserialize, Serialize};

use crate::fluid::FluidModel;
use crate::{Error, Result};

/// Tolerances shared by the integrator and the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyOptions {
    pub rtol: f64,
    pub atol: f64,
    pub tol_event: f64,
    pub tol_zero: f64,
    pub tol_crit: f64,
    pub max_steps: usize,
    /// Keep every accepted step in the trajectory (otherwise only the ends).
    pub keep_points: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            tol_event: 1e-10,
            tol_zero: 1e-9,
            tol_crit: 1e-6,
            max_steps: 1_000_000,
            keep_points: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Some `s_i(x)` reached `r/(r-1)`.
    Exit,
    /// `‖rho‖∞` dropped below the stall tolerance; the endpoint has been
    /// polished to a zero of rho.
    Stall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(y, x(y))`, starting at `y = 0`.
    pub points: Vec<(f64, Vec<f64>)>,
    pub termination: Termination,
    /// `y_E`; `None` stands for `+∞` (stall).
    pub exit_time: Option<f64>,
    /// `y` at which the stall was detected, or `y_E`.
    pub final_y: f64,
    pub endpoint: Vec<f64>,
    pub min_rho: f64,
    pub steps: usize,
    pub rejected: usize,
    pub polish_iterations: usize,
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Step {
    x: Vec<f64>,
    err: Vec<f64>,
    /// `rho` at the new point (first stage of the next step).
    f: Vec<f64>,
}

fn dp_step(model: &FluidModel, x: &[f64], f0: &[f64], h: f64) -> Step {
    let k = x.len();
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(7);
    stages.push(f0.to_vec());
    let mut y = vec![0.0; k];
    for row in A.iter() {
        for (i, yi) in y.iter_mut().enumerate() {
            let inc: f64 = stages.iter().zip(row).map(|(s, a)| a * s[i]).sum();
            *yi = x[i] + h * inc;
        }
        stages.push(model.rho(&y));
    }
    // the last row of A is the fifth-order solution, so `y` is the new point
    let err = (0..k)
        .map(|i| h * stages.iter().zip(&E).map(|(s, e)| e * s[i]).sum::<f64>())
        .collect();
    let f = stages.pop().unwrap();
    Step { x: y, err, f }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn boundary_gap(model: &FluidModel, x: &[f64]) -> f64 {
    let level = model.boundary_level();
    model
        .exposure(x)
        .iter()
        .fold(f64::NEG_INFINITY, |m, s| m.max(s - level))
}

/// Damped Newton on `rho(z) = 0` starting from `x`; returns the best point
/// found and the number of accepted iterations.
pub fn polish_zero(model: &FluidModel, x: &[f64]) -> (Vec<f64>, usize) {
    let mut best = x.to_vec();
    let mut best_norm = sup_norm(&model.rho(&best));
    let mut iters = 0;
    for _ in 0..100 {
        if best_norm < 1e-15 {
            break;
        }
        let rhs: Vec<f64> = model.rho(&best).iter().map(|v| -v).collect();
        let Ok(step) = model.jacobian(&best).solve(&rhs) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = best.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            if model.in_domain(&cand) {
                let norm = sup_norm(&model.rho(&cand));
                if norm < best_norm {
                    best = cand;
                    best_norm = norm;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        iters += 1;
        if t * sup_norm(&step) < 1e-16 * (1.0 + sup_norm(&best)) {
            break;
        }
    }
    (best, iters)
}

/// Integrate `x' = rho(x)` from `x(0) = x0` until the trajectory reaches the
/// boundary `D~` or stalls near a zero of rho.
pub fn integrate_cauchy(
    model: &FluidModel,
    x0: &[f64],
    options: &ClassifyOptions,
) -> Result<Trajectory> {
    let mut x = x0.to_vec();
    let mut f = model.rho(&x);
    let mut y = 0.0;
    let mut points = vec![(0.0, x.clone())];
    let mut min_rho = min_of(&f);
    let (mut steps, mut rejected) = (0, 0);

    let finish = |points: &mut Vec<(f64, Vec<f64>)>, y: f64, x: &[f64]| {
        if points.last().map(|p| p.0) != Some(y) {
            points.push((y, x.to_vec()));
        }
    };

    if sup_norm(&f) < options.tol_zero {
        let (z, iters) = polish_zero(model, &x);
        return Ok(Trajectory {
            points,
            termination: Termination::Stall,
            exit_time: None,
            final_y: 0.0,
            endpoint: z,
            min_rho,
            steps,
            rejected,
            polish_iterations: iters,
        });
    }

    let scale = sup_norm(&x).max(1e-3);
    let mut h = (1e-2 * scale / sup_norm(&f)).clamp(1e-8, 1.0);

    while steps < options.max_steps {
        let step = dp_step(model, &x, &f, h);
        let err = step
            .err
            .iter()
            .zip(&x)
            .zip(&step.x)
            .map(|((e, a), b)| e.abs() / (options.atol + options.rtol * a.abs().max(b.abs())))
            .fold(0.0, f64::max);
        if !err.is_finite() || err > 1.0 {
            rejected += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).max(0.1)
            } else {
                0.1
            };
            h *= factor;
            if h < 1e-300 {
                return Err(Error::Inconclusive { steps, y });
            }
            continue;
        }
        steps += 1;

        if boundary_gap(model, &step.x) >= 0.0 {
            // Bisect the step fraction at which max_i s_i crosses the level.
            let (mut lo, mut hi) = (0.0, 1.0);
            let mut x_hit = step.x.clone();
            while (hi - lo) * h > options.tol_event {
                let mid = 0.5 * (lo + hi);
                let trial = dp_step(model, &x, &f, mid * h);
                let gap = boundary_gap(model, &trial.x);
                if gap.abs() <= options.tol_event {
                    hi = mid;
                    x_hit = trial.x;
                    break;
                }
                if gap >= 0.0 {
                    hi = mid;
                    x_hit = trial.x;
                } else {
                    lo = mid;
                }
            }
            let y_exit = y + hi * h;
            min_rho = min_rho.min(min_of(&model.rho(&x_hit)));
            finish(&mut points, y_exit, &x_hit);
            return Ok(Trajectory {
                points,
                termination: Termination::Exit,
                exit_time: Some(y_exit),
                final_y: y_exit,
                endpoint: x_hit,
                min_rho,
                steps,
                rejected,
                polish_iterations: 0,
            });
        }

        x = step.x;
        f = step.f;
        y += h;
        min_rho = min_rho.min(min_of(&f));
        if options.keep_points {
            points.push((y, x.clone()));
        }

        if sup_norm(&f) < options.tol_zero {
            let (z, iters) = polish_zero(model, &x);
            finish(&mut points, y, &x);
            return Ok(Trajectory {
                points,
                termination: Termination::Stall,
                exit_time: None,
                final_y: y,
                endpoint: z,
                min_rho,
                steps,
                rejected,
                polish_iterations: iters,
            });
        }

        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Err(Error::Inconclusive { steps, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(alpha: f64, r: u32) -> FluidModel {
        FluidModel::identical(1, 0.0, r, vec![alpha]).unwrap()
    }

    #[test]
    fn stalls_at_smallest_root() {
        let m = single(0.5, 2);
        let t = integrate_cauchy(&m, &[0.25], &ClassifyOptions::default()).unwrap();
        assert_eq!(t.termination, Termination::Stall);
        assert!(t.exit_time.is_none());
        assert!((t.endpoint[0] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn exits_when_supercritical() {
        let m = single(1.5, 2);
        let t = integrate_cauchy(&m, &[0.75], &ClassifyOptions::default()).unwrap();
        assert_eq!(t.termination, Termination::Exit);
        assert!((t.endpoint[0] - 2.0).abs() < 1e-9);
        assert!((m.rho(&t.endpoint)[0] - 0.5).abs() < 1e-8);
        assert!(t.exit_time.unwrap() > 0.0);
    }

    #[test]
    fn trajectory_is_monotone() {
        let m = FluidModel::identical(3, 0.3, 3, vec![0.3, 0.1, 0.0]).unwrap();
        let opts = ClassifyOptions {
            keep_points: true,
            ..Default::default()
        };
        let t = integrate_cauchy(&m, &[0.15, 1e-4, 1e-5], &opts).unwrap();
        assert!(t.points.len() > 2);
        for w in t.points.windows(2) {
            assert!(w[1].0 > w[0].0);
            for i in 0..3 {
                assert!(w[1].1[i] >= w[0].1[i] - 1e-12);
            }
            assert!(m.in_domain(&w[1].1));
        }
    }

    #[test]
    fn budget_exhaustion_is_inconclusive() {
        let m = single(0.5, 2);
        let opts = ClassifyOptions {
            max_steps: 2,
            ..Default::default()
        };
        assert!(matches!(
            integrate_cauchy(&m, &[0.25], &opts),
            Err(Error::Inconclusive { .. })
        ));
    }
}
