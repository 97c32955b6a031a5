use crate::linalg::Matrix;
use crate::{Error, Result};

const MAX_ITER: usize = 1_000_000;

/// Perron-Frobenius eigenpair of a matrix with nonnegative off-diagonal
/// entries, by power iteration on `P = J + l I`.
///
/// Returns `(lambda_pf, phi_pf)` with `phi_pf` normalized to unit 1-norm.
pub fn pf_eigen(j: &Matrix) -> Result<(f64, Vec<f64>)> {
    let k = j.dim();
    if k == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    for a in 0..k {
        for b in 0..k {
            if a != b && j[(a, b)] < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "negative off-diagonal entry at ({},{})",
                    a + 1,
                    b + 1
                )));
            }
        }
    }
    let shift = (0..k).map(|i| j[(i, i)].abs()).fold(0.0, f64::max) + 1.0;
    let p = Matrix::from_fn(k, |a, b| if a == b { j[(a, a)] + shift } else { j[(a, b)] });

    let mut v = vec![1.0 / k as f64; k];
    let mut lambda = f64::NAN;
    for _ in 0..MAX_ITER {
        let w = p.mul_vec(&v);
        let norm: f64 = w.iter().sum();
        if !(norm > 0.0) {
            return Err(Error::InvalidParams("shifted matrix annihilates the iterate".into()));
        }
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        let converged = (norm - lambda).abs() <= 1e-12 * norm && delta <= 1e-12;
        lambda = norm;
        v = next;
        if converged {
            return Ok((lambda - shift, v));
        }
    }
    Err(Error::NoConvergence(MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_identity() {
        let (l, phi) = pf_eigen(&Matrix::from_fn(3, |i, j| if i == j { -1.0 } else { 0.0 })).unwrap();
        assert!((l + 1.0).abs() < 1e-12);
        assert!(phi.iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn symmetric_two_by_two() {
        let j = Matrix::from_rows(&[vec![-1.0, 0.5], vec![0.5, -1.0]]).unwrap();
        let (l, phi) = pf_eigen(&j).unwrap();
        assert!((l + 0.5).abs() < 1e-12);
        assert!((phi[0] - 0.5).abs() < 1e-12 && (phi[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_eigenvector() {
        // eigenvalues of [[0,2],[1,0]] are ±√2, PF vector (√2, 1)
        let j = Matrix::from_rows(&[vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        let (l, phi) = pf_eigen(&j).unwrap();
        assert!((l - 2f64.sqrt()).abs() < 1e-10);
        assert!((phi[0] / phi[1] - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rejects_negative_off_diagonal() {
        let j = Matrix::from_rows(&[vec![-1.0, -0.5], vec![0.5, -1.0]]).unwrap();
        assert!(pf_eigen(&j).is_err());
    }
}
