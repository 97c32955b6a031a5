use super::binomial::exact_b;
use super::model::FluidModel;
use crate::linalg::Matrix;
use crate::sbm::SbmParams;

impl FluidModel {
    /// `s_i(x) = Σ_j chi_ij x_j`.
    pub fn exposure(&self, x: &[f64]) -> Vec<f64> {
        self.chi().mul_vec(x)
    }

    /// `rho_i(x) = alpha_i - x_i + c (Σ_j chi_ij x_j)^r`.
    pub fn rho(&self, x: &[f64]) -> Vec<f64> {
        let c = self.power_coefficient();
        let r = self.r() as i32;
        self.exposure(x)
            .iter()
            .zip(self.alpha())
            .zip(x)
            .map(|((s, a), xi)| a - xi + c * s.powi(r))
            .collect()
    }

    /// `∂rho_i/∂x_j = -δ_ij + (1 - 1/r)^{r-1} s_i^{r-1} chi_ij`.
    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        let rf = self.r() as f64;
        let lead = (1.0 - 1.0 / rf).powi(self.r() as i32 - 1);
        let s = self.exposure(x);
        let chi = self.chi();
        Matrix::from_fn(self.k(), |i, j| {
            let d = lead * s[i].powi(self.r() as i32 - 1) * chi[(i, j)];
            if i == j {
                d - 1.0
            } else {
                d
            }
        })
    }

    /// Whether `x >= 0` lies strictly inside `D~`, where every `s_i < r/(r-1)`.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        let level = self.boundary_level();
        x.iter().all(|&v| v >= 0.0) && self.exposure(x).iter().all(|&s| s < level)
    }
}

pub fn rho(x: &[f64], model: &FluidModel) -> Vec<f64> {
    model.rho(x)
}

pub fn jacobian_rho(x: &[f64], model: &FluidModel) -> Matrix {
    model.jacobian(x)
}

/// `R_i(u) = a_i + (n_i - a_i) b(u, q_i) - u_i`, the expected number of
/// usable nodes of community `i` after `u_j` nodes of each community `j`
/// have been explored.
pub fn expected_remainder(params: &SbmParams, u: &[u64]) -> Vec<f64> {
    (0..params.k())
        .map(|i| {
            let a = params.seeds[i] as f64;
            let n = params.sizes[i] as f64;
            let b = exact_b(u, &params.edge_probs[i], params.r);
            a + (n - a) * b - u[i] as f64
        })
        .collect()
}
