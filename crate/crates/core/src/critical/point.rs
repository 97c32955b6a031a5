use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::pf_eigen;
use crate::linalg::Matrix;
use crate::{Error, Result};

/// A point of the critical surface parametrized by `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub theta: Vec<f64>,
    /// `m = theta chi^{-1} diag(theta^{-1})`.
    pub m: Vec<f64>,
    pub x_theta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// The critical zero `z = chi^{-1} x_theta`.
    pub z: Vec<f64>,
    pub lambda_pf: f64,
    pub phi_pf: Vec<f64>,
    /// `‖rho(z, alpha)‖∞`.
    pub residual: f64,
    /// `‖theta J(z)‖∞`; theta is a left null vector of the Jacobian.
    pub left_residual: f64,
    pub condition: f64,
}

impl CriticalPoint {
    /// `alpha ∈ [0,1]^k`, `z >= 0` and `z` strictly inside `D~`; only such
    /// points are reached by the fluid trajectory from small seeds.
    pub fn is_admissible(&self) -> bool {
        self.alpha.iter().all(|a| (0.0..=1.0).contains(a))
            && self.z.iter().all(|&z| z >= 0.0)
            && self.m.iter().all(|&m| m < 1.0)
    }
}

fn power_coefficient(r: u32) -> f64 {
    let rf = r as f64;
    (1.0 - 1.0 / rf).powi(r as i32 - 1) / rf
}

pub(crate) fn jacobian_at(chi: &Matrix, z: &[f64], r: u32) -> Matrix {
    let lead = (1.0 - 1.0 / r as f64).powi(r as i32 - 1);
    let s = chi.mul_vec(z);
    Matrix::from_fn(chi.dim(), |i, j| {
        let d = lead * s[i].powi(r as i32 - 1) * chi[(i, j)];
        if i == j {
            d - 1.0
        } else {
            d
        }
    })
}

/// Critical seed vector for the direction `theta` (with `theta_1 = 1`).
///
/// `(x_theta)_i = (r/(r-1)) m_i^{1/(r-1)}` and
/// `alpha_i = z_i - r^{-1}(1-r^{-1})^{r-1} (x_theta)_i^r`.
pub fn critical_point(theta: &[f64], chi: &Matrix, r: u32) -> Result<CriticalPoint> {
    let inv = chi.inverse()?;
    critical_point_with(theta, chi, &inv.matrix, inv.condition, r)
}

fn critical_point_with(
    theta: &[f64],
    chi: &Matrix,
    chi_inv: &Matrix,
    condition: f64,
    r: u32,
) -> Result<CriticalPoint> {
    let k = chi.dim();
    if theta.len() != k || theta.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParams("theta must be positive with length k".into()));
    }
    if r < 2 {
        return Err(Error::InvalidParams(format!("r = {r} must be at least 2")));
    }
    let rf = r as f64;
    let row = chi_inv.vec_mul(theta);
    let m: Vec<f64> = row.iter().zip(theta).map(|(v, t)| v / t).collect();
    if let Some((component, &value)) = m.iter().enumerate().find(|(_, &v)| v <= 0.0) {
        return Err(Error::NegativeRadicand { component, value });
    }
    let x_theta: Vec<f64> = m
        .iter()
        .map(|mi| rf / (rf - 1.0) * mi.powf(1.0 / (rf - 1.0)))
        .collect();
    let z = chi_inv.mul_vec(&x_theta);
    let c = power_coefficient(r);
    let alpha: Vec<f64> = z
        .iter()
        .zip(&x_theta)
        .map(|(zi, xi)| zi - c * xi.powi(r as i32))
        .collect();

    let s = chi.mul_vec(&z);
    let residual = (0..k)
        .map(|i| (alpha[i] - z[i] + c * s[i].powi(r as i32)).abs())
        .fold(0.0, f64::max);
    let jac = jacobian_at(chi, &z, r);
    let left_residual = jac.vec_mul(theta).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (lambda_pf, phi_pf) = pf_eigen(&jac)?;
    Ok(CriticalPoint {
        theta: theta.to_vec(),
        m,
        x_theta,
        alpha,
        z,
        lambda_pf,
        phi_pf,
        residual,
        left_residual,
        condition,
    })
}

/// Log-spaced grid for the free components of theta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self {
            min: 1e-3,
            max: 1e3,
            count: 400,
        }
    }
}

impl ThetaGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.ln(), self.max.ln());
        (0..self.count)
            .map(|i| (a + (b - a) * i as f64 / (self.count - 1) as f64).exp())
            .collect()
    }
}

/// Sweep `theta = (1, theta_2, ..., theta_k)` over the product grid and keep
/// points with `alpha ∈ [0,1]^k`. For `k = 2` the result is sorted by
/// `alpha_1`; for larger `k` it is a point cloud in grid order. Directions
/// where some `m_i <= 0` have no critical point and are skipped.
pub fn critical_curve(chi: &Matrix, r: u32, grid: &ThetaGrid) -> Result<Vec<CriticalPoint>> {
    let k = chi.dim();
    let inv = chi.inverse()?;
    let values = grid.values();
    let free = k.saturating_sub(1);
    let total = values.len().pow(free as u32);
    let mut points: Vec<CriticalPoint> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut theta = vec![1.0; k];
            for t in theta.iter_mut().skip(1) {
                *t = values[idx % values.len()];
                idx /= values.len();
            }
            match critical_point_with(&theta, chi, &inv.matrix, inv.condition, r) {
                Ok(p) => Ok(Some(p)),
                Err(Error::NegativeRadicand { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .filter(|p| p.alpha.iter().all(|a| (0.0..=1.0).contains(a)))
        .collect();
    if k == 2 {
        points.sort_by(|a, b| a.alpha[0].total_cmp(&b.alpha[0]));
    }
    Ok(points)
}

/// CSV with columns `theta` (or `theta_2..theta_k` when `k > 2`),
/// `alpha_1..alpha_k`, `z_1..z_k`, `lambda_pf`.
pub fn write_critical_csv<W: Write>(points: &[CriticalPoint], k: usize, mut out: W) -> Result<()> {
    let mut header: Vec<String> = if k == 2 {
        vec!["theta".into()]
    } else {
        (2..=k).map(|i| format!("theta_{i}")).collect()
    };
    header.extend((1..=k).map(|i| format!("alpha_{i}")));
    header.extend((1..=k).map(|i| format!("z_{i}")));
    header.push("lambda_pf".into());
    writeln!(out, "{}", header.join(","))?;
    for p in points {
        let fields: Vec<String> = p.theta[1..]
            .iter()
            .chain(&p.alpha)
            .chain(&p.z)
            .chain(std::iter::once(&p.lambda_pf))
            .map(|v| format!("{v:.12e}"))
            .collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identical_chi(k: usize, psi: f64) -> Matrix {
        Matrix::from_fn(k, |i, j| if i == j { 1.0 } else { psi })
    }

    #[test]
    fn single_community_is_one() {
        for r in 2..6 {
            let p = critical_point(&[1.0], &Matrix::identity(1), r).unwrap();
            assert!((p.alpha[0] - 1.0).abs() < 1e-14);
            assert!((p.x_theta[0] - r as f64 / (r as f64 - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_direction_closed_form() {
        for &psi in &[0.1, 0.5] {
            for r in 2..5 {
                let p = critical_point(&[1.0, 1.0], &identical_chi(2, psi), r).unwrap();
                let expected = (1.0 + psi).powf(-(r as f64) / (r as f64 - 1.0));
                assert!((p.alpha[0] - expected).abs() < 1e-12);
                assert!((p.alpha[1] - expected).abs() < 1e-12);
                assert!(p.residual < 1e-12);
                assert!(p.lambda_pf.abs() < 1e-9);
                assert!(p.left_residual < 1e-12);
            }
        }
    }

    #[test]
    fn negative_radicand_is_an_error() {
        // with psi = 0.5, theta_2 = 10 makes m_1 = (1 - 0.5*10)/0.75 < 0
        let err = critical_point(&[1.0, 10.0], &identical_chi(2, 0.5), 2).unwrap_err();
        assert!(matches!(err, Error::NegativeRadicand { component: 0, .. }));
    }

    #[test]
    fn singular_chi_is_an_error() {
        assert!(matches!(
            critical_point(&[1.0, 1.0], &Matrix::filled(2, 1.0), 2),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn curve_is_sorted_and_decreasing() {
        let pts = critical_curve(&identical_chi(2, 1.0 / 3.0), 2, &ThetaGrid::default()).unwrap();
        assert!(pts.len() > 10);
        for w in pts.windows(2) {
            assert!(w[0].alpha[0] <= w[1].alpha[0]);
            assert!(w[0].alpha[1] >= w[1].alpha[1] - 1e-12);
        }
        let mut buf = Vec::new();
        write_critical_csv(&pts, 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,alpha_1,alpha_2,z_1,z_2,lambda_pf\n"));
        assert_eq!(text.lines().count(), pts.len() + 1);
    }

    #[test]
    fn point_cloud_for_three_communities() {
        let grid = ThetaGrid {
            min: 0.5,
            max: 2.0,
            count: 5,
        };
        let pts = critical_curve(&identical_chi(3, 0.2), 3, &grid).unwrap();
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| p.residual < 1e-10));
    }
}
