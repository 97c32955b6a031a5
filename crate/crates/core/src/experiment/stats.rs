use serde::{Deserialize, Serialize};

/// Sample summary: mean, standard error and the 10/50/90% quantiles
/// (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_err: f64,
    pub q10: f64,
    pub q50: f64,
    pub q90: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                std_err: f64::NAN,
                q10: f64::NAN,
                q50: f64::NAN,
                q90: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std_err = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            count,
            mean,
            std_err,
            q10: quantile(&sorted, 0.1),
            q50: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
        }
    }
}

/// Quantile of already sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Fraction of `true` values and its binomial standard error.
pub fn frequency(flags: &[bool]) -> (f64, f64) {
    if flags.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = flags.len() as f64;
    let p = flags.iter().filter(|&&b| b).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// First `x` where `y` reaches `level`, interpolating linearly between grid
/// points; `None` if it never does.
pub fn crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    if ys.first().is_some_and(|&y| y >= level) {
        return xs.first().copied();
    }
    for i in 1..xs.len().min(ys.len()) {
        if ys[i] >= level {
            let t = (level - ys[i - 1]) / (ys[i] - ys[i - 1]);
            return Some(xs[i - 1] + t * (xs[i] - xs[i - 1]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_values() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.q50, 3.0);
        assert!((s.q10 - 1.4).abs() < 1e-12);
        assert!((s.std_err - (2.5f64 / 5.0).sqrt()).abs() < 1e-12);
        assert!(Summary::of(&[]).mean.is_nan());
    }

    #[test]
    fn frequency_and_crossing() {
        assert_eq!(frequency(&[true, false, false, true]).0, 0.5);
        let x = [0.0, 1.0, 2.0];
        assert_eq!(crossing(&x, &[0.0, 0.2, 0.6], 0.5), Some(1.75));
        assert_eq!(crossing(&x, &[0.0, 0.2, 0.4], 0.5), None);
    }
}
