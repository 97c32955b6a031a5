use serde::{Deserialize, Serialize};

use crate::classifier::{classify, pf_eigen, ClassifyOptions, Termination, Verdict};
use crate::fluid::FluidModel;
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Relative distance of the ray crossing from 1 below which a point is
/// reported as near-critical.
pub const RAY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMembership {
    pub verdict: Verdict,
    /// Scale `c*` at which `c * alpha` crosses the critical surface;
    /// `None` for `alpha ≡ 0` or when the direct classifier was used.
    pub c_star: Option<f64>,
}

/// Locate `c*` such that `c * direction` is subcritical below and
/// supercritical above.
///
/// Each probe is sided by the trajectory: an exit through `D~` counts as
/// above the surface, a stall as below. Near-critical verdicts are sided the
/// same way, so the tolerance band of the classifier does not stop the
/// bisection early. Probes close to `c*` crawl through the bottleneck of the
/// flow, so bisection stops at a relative width of `1e-7` and the crossing
/// is then solved as a fold of rho from the stall zero of the lower bracket.
/// If that fails to land inside the bracket, bisection continues to `1e-12`.
pub fn ray_crossing(
    direction: &[f64],
    chi: &Matrix,
    r: u32,
    options: &ClassifyOptions,
) -> Result<f64> {
    let top = direction.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::NotBracketed("zero direction never crosses".into()));
    }
    let base = FluidModel::new(r, direction.to_vec(), chi.clone())?;
    // side of the surface and, below it, the stall zero
    let probe = |c: f64| -> Result<(bool, Option<Vec<f64>>)> {
        let alpha = direction.iter().map(|a| a * c).collect();
        let cl = classify(&base.with_alpha(alpha)?, options)?;
        let above = match cl.verdict {
            Verdict::Sup => true,
            Verdict::Sub => false,
            Verdict::NearCritical => cl.trajectory.termination == Some(Termination::Exit),
        };
        let zero = (!above && cl.trajectory.termination == Some(Termination::Stall)).then_some(cl.x_exit);
        Ok((above, zero))
    };

    // a component of size at least 1 is supercritical except in degenerate cases
    let mut hi = 1.0 / top;
    let mut tries = 0;
    while !probe(hi)?.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NotBracketed("no supercritical scale found".into()));
        }
    }
    let mut lo = 0.5 * hi;
    tries = 0;
    let mut lo_zero = loop {
        let (above, zero) = probe(lo)?;
        if !above {
            break zero;
        }
        hi = lo;
        lo *= 0.5;
        tries += 1;
        if tries > 60 {
            return Err(Error::NotBracketed("no subcritical scale found".into()));
        }
    };
    let mut refined = false;
    while hi - lo > 1e-12 * hi {
        if !refined && hi - lo <= 1e-7 * hi {
            refined = true;
            if let Some(c) = lo_zero.as_deref().and_then(|z| fold_scale(&base, direction, z, lo)) {
                let slack = 1e-9 * (hi - lo);
                if c >= lo - slack && c <= hi + slack {
                    return Ok(c);
                }
            }
        }
        let mid = 0.5 * (lo + hi);
        let (above, zero) = probe(mid)?;
        if above {
            hi = mid;
        } else {
            lo = mid;
            lo_zero = zero.or(lo_zero);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Newton's method on `rho(z; c direction) = 0`, `lambda_PF(J(z)) = 0` in
/// the unknowns `(z, c)`. The eigenvalue gradient is `dλ/dz_j =
/// ψᵀ (∂J/∂z_j) φ / ψᵀφ` with `ψ`, `φ` the left and right PF vectors.
fn fold_scale(base: &FluidModel, direction: &[f64], z0: &[f64], c0: f64) -> Option<f64> {
    let k = base.k();
    let r = base.r() as i32;
    let lead = (1.0 - 1.0 / r as f64).powi(r - 1);
    let chi = base.chi();
    let (mut z, mut c) = (z0.to_vec(), c0);
    for _ in 0..50 {
        let model = base.with_alpha(direction.iter().map(|a| a * c).collect()).ok()?;
        let rho = model.rho(&z);
        let jac = model.jacobian(&z);
        let (lambda, phi) = pf_eigen(&jac).ok()?;
        let (_, psi) = pf_eigen(&jac.transpose()).ok()?;
        let s = model.exposure(&z);
        let chi_phi = chi.mul_vec(&phi);
        let norm: f64 = psi.iter().zip(&phi).map(|(a, b)| a * b).sum();
        let mut m = Matrix::zeros(k + 1);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = jac[(i, j)];
            }
            m[(i, k)] = direction[i];
        }
        for j in 0..k {
            m[(k, j)] = (0..k)
                .map(|i| psi[i] * lead * (r - 1) as f64 * s[i].powi(r - 2) * chi[(i, j)] * chi_phi[i])
                .sum::<f64>()
                / norm;
        }
        let mut rhs: Vec<f64> = rho.iter().map(|v| -v).collect();
        rhs.push(-lambda);
        let step = m.solve(&rhs).ok()?;
        for (zi, d) in z.iter_mut().zip(&step) {
            *zi += d;
        }
        c += step[k];
        if !c.is_finite() || z.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return None;
        }
        let dz = step[..k].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if step[k].abs() <= 1e-15 * c.abs() && dz <= 1e-13 {
            return Some(c);
        }
    }
    None
}

/// Regime of `alpha` from the position of the ray crossing relative to 1.
/// Falls back to the direct classifier when chi is singular.
pub fn region_membership(
    alpha: &[f64],
    chi: &Matrix,
    r: u32,
    options: &ClassifyOptions,
) -> Result<RegionMembership> {
    if alpha.iter().all(|&a| a == 0.0) {
        return Ok(RegionMembership {
            verdict: Verdict::Sub,
            c_star: None,
        });
    }
    if chi.inverse().is_err() {
        let model = FluidModel::new(r, alpha.to_vec(), chi.clone())?;
        return Ok(RegionMembership {
            verdict: classify(&model, options)?.verdict,
            c_star: None,
        });
    }
    let c = ray_crossing(alpha, chi, r, options)?;
    let verdict = if c > 1.0 + RAY_TOL {
        Verdict::Sub
    } else if c < 1.0 - RAY_TOL {
        Verdict::Sup
    } else {
        Verdict::NearCritical
    };
    Ok(RegionMembership {
        verdict,
        c_star: Some(c),
    })
}

/// Total critical seed counts for `k` identical communities, normalized by
/// the critical count of the single graph obtained by merging them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub k: usize,
    pub psi: f64,
    pub r: u32,
    /// `(k / (1 + (k-1) psi))^{r/(r-1)}`.
    pub equal_split: f64,
    /// `alpha_c k^{1/(r-1)}` with `alpha_c` the critical level of `(alpha, 0, ..., 0)`.
    pub all_in_one: f64,
    pub alpha_all_in_one: f64,
}

pub fn equal_split_ratio(k: usize, psi: f64, r: u32) -> f64 {
    let rf = r as f64;
    (k as f64 / (1.0 + (k as f64 - 1.0) * psi)).powf(rf / (rf - 1.0))
}

pub fn extreme_allocations(
    k: usize,
    psi: f64,
    r: u32,
    options: &ClassifyOptions,
) -> Result<Allocation> {
    if k < 2 || !(psi > 0.0 && psi < 1.0) {
        return Err(Error::InvalidParams("need k >= 2 and psi in (0,1)".into()));
    }
    let chi = Matrix::from_fn(k, |i, j| if i == j { 1.0 } else { psi });
    let mut direction = vec![0.0; k];
    direction[0] = 1.0;
    let alpha_c = ray_crossing(&direction, &chi, r, options)?;
    let rf = r as f64;
    Ok(Allocation {
        k,
        psi,
        r,
        equal_split: equal_split_ratio(k, psi, r),
        all_in_one: alpha_c * (k as f64).powf(1.0 / (rf - 1.0)),
        alpha_all_in_one: alpha_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(psi: f64) -> Matrix {
        Matrix::from_rows(&[vec![1.0, psi], vec![psi, 1.0]]).unwrap()
    }

    #[test]
    fn symmetric_ray_hits_closed_form() {
        let opts = ClassifyOptions::default();
        let c = ray_crossing(&[1.0, 1.0], &chi(1.0 / 3.0), 2, &opts).unwrap();
        assert!((c - 0.5625).abs() < 1e-8);
    }

    #[test]
    fn membership_verdicts() {
        let opts = ClassifyOptions::default();
        let m = region_membership(&[0.9, 0.9], &chi(1.0 / 3.0), 2, &opts).unwrap();
        assert_eq!(m.verdict, Verdict::Sup);
        let m = region_membership(&[0.3, 0.2], &chi(1.0 / 3.0), 2, &opts).unwrap();
        assert_eq!(m.verdict, Verdict::Sub);
        let m = region_membership(&[0.0, 0.0], &chi(1.0 / 3.0), 2, &opts).unwrap();
        assert_eq!(m.verdict, Verdict::Sub);
    }

    #[test]
    fn single_community_crossing_is_one() {
        let c = ray_crossing(&[0.5], &Matrix::identity(1), 3, &ClassifyOptions::default()).unwrap();
        assert!((c - 2.0).abs() < 1e-8);
    }

    #[test]
    fn allocations_small_k() {
        let opts = ClassifyOptions::default();
        let a = extreme_allocations(2, 0.1, 2, &opts).unwrap();
        assert!((a.equal_split - (2.0f64 / 1.1).powi(2)).abs() < 1e-12);
        assert!(a.all_in_one < a.equal_split);
        assert!(a.alpha_all_in_one < 1.0);
    }
}
