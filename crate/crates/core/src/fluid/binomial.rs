//! Tail probabilities of sums of independent binomials.

use serde::{Deserialize, Serialize};

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn ln_factorial(r: usize) -> f64 {
    (2..=r).map(|i| (i as f64).ln()).sum()
}

/// `(Σ_j u_j q_j)^r / r!`, the small-exposure approximation of the tail.
pub fn leading_term(u: &[u64], q_row: &[f64], r: u32) -> f64 {
    let mean: f64 = u.iter().zip(q_row).map(|(&n, &p)| n as f64 * p).sum();
    if mean == 0.0 {
        return 0.0;
    }
    (r as f64 * mean.ln() - ln_factorial(r as usize)).exp()
}

/// `P(Σ_j Bin(u_j, q_j) >= r)`.
///
/// The sum is tracked only up to `r - 1`; everything that reaches `r` moves
/// into an absorbing bucket whose mass is accumulated directly, so tiny tails
/// are not lost to cancellation against 1. Cost is `O(r Σ u_j)`.
pub fn exact_b(u: &[u64], q_row: &[f64], r: u32) -> f64 {
    debug_assert_eq!(u.len(), q_row.len());
    let r = r as usize;
    if r == 0 {
        return 1.0;
    }
    let lead = leading_term(u, q_row, r as u32);
    if lead == 0.0 {
        return 0.0;
    }
    if lead < 1e-300 {
        return ln_exact_b(u, q_row, r as u32).exp();
    }
    let mut dist = vec![0.0f64; r];
    dist[0] = 1.0;
    let mut absorbed = CompensatedSum::default();
    for (&n, &p) in u.iter().zip(q_row) {
        if n == 0 || p == 0.0 {
            continue;
        }
        let stay = 1.0 - p;
        for _ in 0..n {
            absorbed.add(dist[r - 1] * p);
            for s in (1..r).rev() {
                dist[s] = dist[s] * stay + dist[s - 1] * p;
            }
            dist[0] *= stay;
            if dist[r - 1] < 1e-300 && dist.iter().all(|&d| d < 1e-300) {
                return absorbed.value().min(1.0);
            }
        }
    }
    absorbed.value().clamp(0.0, 1.0)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Natural log of [`exact_b`], computed entirely in log space.
pub fn ln_exact_b(u: &[u64], q_row: &[f64], r: u32) -> f64 {
    let r = r as usize;
    if r == 0 {
        return 0.0;
    }
    let mut dist = vec![f64::NEG_INFINITY; r];
    dist[0] = 0.0;
    let mut absorbed = f64::NEG_INFINITY;
    for (&n, &p) in u.iter().zip(q_row) {
        if n == 0 || p == 0.0 {
            continue;
        }
        let (lp, lstay) = (p.ln(), (-p).ln_1p());
        for _ in 0..n {
            absorbed = log_add(absorbed, dist[r - 1] + lp);
            for s in (1..r).rev() {
                dist[s] = log_add(dist[s] + lstay, dist[s - 1] + lp);
            }
            dist[0] += lstay;
        }
    }
    absorbed.min(0.0)
}

/// Leading-order approximation of the activation probability at
/// `u_j = ⌊x_j g_j⌋`, with the size of its relative correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticB {
    pub leading: f64,
    /// `Σ_{j: x_j > 0} (u_j q_j + 1/u_j)`; infinite when some positive
    /// `x_j` rounds down to zero exposures.
    pub correction: f64,
}

pub fn asymptotic_b(x: &[f64], g: &[f64], q_row: &[f64], r: u32) -> AsymptoticB {
    let u: Vec<u64> = x
        .iter()
        .zip(g)
        .map(|(xi, gi)| (xi * gi).max(0.0).floor() as u64)
        .collect();
    let leading = leading_term(&u, q_row, r);
    let correction = x
        .iter()
        .zip(&u)
        .zip(q_row)
        .filter(|((xi, _), _)| **xi > 0.0)
        .map(|((_, &n), &q)| {
            if n == 0 {
                f64::INFINITY
            } else {
                n as f64 * q + 1.0 / n as f64
            }
        })
        .sum();
    AsymptoticB {
        leading,
        correction,
    }
}
