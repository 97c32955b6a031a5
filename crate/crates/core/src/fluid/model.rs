use serde::{Deserialize, Serialize};

use crate::linalg::{is_irreducible, Matrix};
use crate::sbm::SbmParams;
use crate::{Error, Result};

/// `(1 - 1/r)((r-1)! / (n p^r))^{1/(r-1)}`, the seed count at which a single
/// community with `n` nodes and edge probability `p` turns critical.
pub fn critical_seed_scale(n: usize, p: f64, r: u32) -> f64 {
    let rf = r as f64;
    let ln_fact: f64 = (2..r).map(|i| (i as f64).ln()).sum();
    let ln_inner = ln_fact - (n as f64).ln() - rf * p.ln();
    (1.0 - 1.0 / rf) * (ln_inner / (rf - 1.0)).exp()
}

/// Limits of size, probability and cross-probability ratios between
/// communities: `nu_ij = lim n_i/n_j`, `gamma_ij = lim q_ij/p_i`,
/// `mu_ij = lim p_i/p_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLimits {
    pub nu: Matrix,
    pub gamma: Matrix,
    pub mu: Matrix,
}

impl AsymptoticLimits {
    pub fn new(nu: Matrix, gamma: Matrix, mu: Matrix) -> Result<Self> {
        let limits = Self { nu, gamma, mu };
        limits.validate()?;
        Ok(limits)
    }

    /// Equal sizes and intra probabilities, `gamma_ij = psi` off the diagonal.
    pub fn identical(k: usize, psi: f64) -> Self {
        Self {
            nu: Matrix::filled(k, 1.0),
            gamma: Matrix::from_fn(k, |i, j| if i == j { 1.0 } else { psi }),
            mu: Matrix::filled(k, 1.0),
        }
    }

    /// The ratios of one finite instance, used as stand-ins for the limits.
    pub fn from_params(params: &SbmParams) -> Self {
        let k = params.k();
        Self {
            nu: Matrix::from_fn(k, |i, j| params.sizes[i] as f64 / params.sizes[j] as f64),
            gamma: Matrix::from_fn(k, |i, j| params.q(i, j) / params.p(i)),
            mu: Matrix::from_fn(k, |i, j| params.p(i) / params.p(j)),
        }
    }

    pub fn k(&self) -> usize {
        self.nu.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if self.gamma.dim() != k || self.mu.dim() != k {
            return Err(Error::InvalidParams("limit matrices differ in size".into()));
        }
        for i in 0..k {
            for j in 0..k {
                let (nu, mu, g) = (self.nu[(i, j)], self.mu[(i, j)], self.gamma[(i, j)]);
                if !(nu > 0.0 && mu > 0.0) || !nu.is_finite() || !mu.is_finite() {
                    return Err(Error::InvalidParams(format!(
                        "nu and mu must be positive at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
                if (nu * self.nu[(j, i)] - 1.0).abs() > 1e-9
                    || (mu * self.mu[(j, i)] - 1.0).abs() > 1e-9
                {
                    return Err(Error::InvalidParams(format!(
                        "nu/mu not reciprocal at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
                if !(0.0..=1.0).contains(&g) {
                    return Err(Error::InvalidParams(format!(
                        "gamma({},{}) = {g} outside [0,1]",
                        i + 1,
                        j + 1
                    )));
                }
            }
            if (self.gamma[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "gamma({0},{0}) must be 1",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// `g_j / g_i = (nu_ij mu_ij^r)^{1/(r-1)}`.
    pub fn scale_ratio(&self, i: usize, j: usize, r: u32) -> f64 {
        let rf = r as f64;
        (self.nu[(i, j)] * self.mu[(i, j)].powf(rf)).powf(1.0 / (rf - 1.0))
    }
}

/// `chi_ij = gamma_ij (nu_ij mu_ij^r)^{1/(r-1)}`.
pub fn chi_from_limits(limits: &AsymptoticLimits, r: u32) -> Matrix {
    Matrix::from_fn(limits.k(), |i, j| {
        let g = limits.gamma[(i, j)];
        if g == 0.0 {
            0.0
        } else {
            g * limits.scale_ratio(i, j, r)
        }
    })
}

/// Asymptotic parameters driving the fluid-limit computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidModel {
    r: u32,
    alpha: Vec<f64>,
    chi: Matrix,
    limits: Option<AsymptoticLimits>,
    irreducible: bool,
}

impl FluidModel {
    pub fn new(r: u32, alpha: Vec<f64>, chi: Matrix) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParams(format!("r = {r} must be at least 2")));
        }
        let k = chi.dim();
        if k == 0 || alpha.len() != k {
            return Err(Error::InvalidParams(format!(
                "alpha has {} entries for a {k}x{k} chi",
                alpha.len()
            )));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidParams("alpha must be finite and >= 0".into()));
        }
        for i in 0..k {
            for j in 0..k {
                let c = chi[(i, j)];
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::InvalidParams(format!(
                        "chi({},{}) = {c} must be finite and >= 0",
                        i + 1,
                        j + 1
                    )));
                }
                if (c > 0.0) != (chi[(j, i)] > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "chi support not symmetric at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
            }
            if (chi[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!("chi({0},{0}) must be 1", i + 1)));
            }
        }
        let irreducible = is_irreducible(&chi);
        Ok(Self {
            r,
            alpha,
            chi,
            limits: None,
            irreducible,
        })
    }

    pub fn from_limits(limits: AsymptoticLimits, alpha: Vec<f64>, r: u32) -> Result<Self> {
        limits.validate()?;
        let chi = chi_from_limits(&limits, r);
        let mut model = Self::new(r, alpha, chi)?;
        model.limits = Some(limits);
        Ok(model)
    }

    /// `k` identical communities with cross ratio `psi`.
    pub fn identical(k: usize, psi: f64, r: u32, alpha: Vec<f64>) -> Result<Self> {
        Self::from_limits(AsymptoticLimits::identical(k, psi), alpha, r)
    }

    /// Plug-in model of a finite instance: `alpha_i = a_i / g_i` and the
    /// ratios of the instance in place of their limits.
    pub fn from_params(params: &SbmParams) -> Result<Self> {
        params.check()?;
        let alpha = (0..params.k())
            .map(|i| params.seeds[i] as f64 / critical_seed_scale(params.sizes[i], params.p(i), params.r))
            .collect();
        Self::from_limits(AsymptoticLimits::from_params(params), alpha, params.r)
    }

    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != self.k() || alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidParams("alpha must be finite, >= 0, length k".into()));
        }
        Ok(Self {
            alpha,
            ..self.clone()
        })
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn chi(&self) -> &Matrix {
        &self.chi
    }

    pub fn limits(&self) -> Option<&AsymptoticLimits> {
        self.limits.as_ref()
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// `r^{-1}(1 - r^{-1})^{r-1}`.
    pub fn power_coefficient(&self) -> f64 {
        let rf = self.r as f64;
        (1.0 - 1.0 / rf).powi(self.r as i32 - 1) / rf
    }

    /// `r / (r - 1)`, the level of the boundary functionals on `D~`.
    pub fn boundary_level(&self) -> f64 {
        let rf = self.r as f64;
        rf / (rf - 1.0)
    }

    /// Smallest strictly positive entry of chi.
    pub fn chi_min(&self) -> f64 {
        self.chi
            .rows()
            .into_iter()
            .flatten()
            .filter(|&c| c > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_scale_values() {
        assert!((critical_seed_scale(10_000, 0.01, 2) - 0.5).abs() < 1e-12);
        assert!((critical_seed_scale(1_000_000, 1e-3, 2) - 0.5).abs() < 1e-12);
        let g3 = critical_seed_scale(1_000_000, 1e-3, 3);
        assert!((g3 - 2.0 / 3.0 * 2000f64.sqrt()).abs() < 1e-9);
        // g ∝ 1/(n p^2) for r = 2
        let a = critical_seed_scale(1000, 0.02, 2);
        let b = critical_seed_scale(4000, 0.01, 2);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn chi_formula() {
        let limits = AsymptoticLimits::identical(3, 0.25);
        let chi = chi_from_limits(&limits, 2);
        assert_eq!(chi[(0, 0)], 1.0);
        assert!((chi[(1, 2)] - 0.25).abs() < 1e-15);

        let nu = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        let mu = Matrix::filled(2, 1.0);
        let gamma = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let limits = AsymptoticLimits::new(nu, gamma, mu).unwrap();
        let chi = chi_from_limits(&limits, 2);
        assert!((chi[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((chi[(1, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_gamma_gives_zero_chi() {
        let mut limits = AsymptoticLimits::identical(2, 0.3);
        limits.gamma[(0, 1)] = 0.0;
        limits.gamma[(1, 0)] = 0.0;
        let chi = chi_from_limits(&limits, 3);
        assert_eq!(chi[(0, 1)], 0.0);
        assert_eq!(chi[(1, 0)], 0.0);
        let model = FluidModel::from_limits(limits, vec![0.5, 0.5], 3).unwrap();
        assert!(!model.is_irreducible());
    }

    #[test]
    fn finite_chi_matches_definition() {
        let params = SbmParams {
            sizes: vec![1000, 3000],
            edge_probs: vec![vec![0.01, 0.002], vec![0.002, 0.02]],
            r: 3,
            seeds: vec![5, 5],
        };
        let model = FluidModel::from_params(&params).unwrap();
        let g0 = critical_seed_scale(1000, 0.01, 3);
        let g1 = critical_seed_scale(3000, 0.02, 3);
        let direct = 0.002 * g1 / (0.01 * g0);
        assert!((model.chi()[(0, 1)] - direct).abs() < 1e-12 * direct);
        assert!((model.alpha()[0] - 5.0 / g0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(FluidModel::new(1, vec![1.0], Matrix::identity(1)).is_err());
        assert!(FluidModel::new(2, vec![-1.0], Matrix::identity(1)).is_err());
        let asym = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(FluidModel::new(2, vec![1.0, 0.0], asym).is_err());
        let nu = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(AsymptoticLimits::new(nu, Matrix::identity(2), Matrix::filled(2, 1.0)).is_err());
    }
}
