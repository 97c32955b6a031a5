use serde::{Deserialize, Serialize};

use crate::linalg::{is_irreducible, Matrix};
use crate::{Error, Result};

/// One finite SBM instance together with the bootstrap threshold and the
/// per-community seed counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    /// Community sizes `n_i`.
    pub sizes: Vec<usize>,
    /// Symmetric matrix of edge probabilities `q_ij`; `q_ii` is the
    /// intra-community probability `p_i`.
    pub edge_probs: Vec<Vec<f64>>,
    /// Activation threshold.
    pub r: u32,
    /// Seed counts `a_i`.
    pub seeds: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Violation,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
    /// Zero-based community indices the issue refers to.
    pub indices: Vec<usize>,
}

impl Issue {
    fn violation(message: impl Into<String>, indices: Vec<usize>) -> Self {
        Self {
            severity: Severity::Violation,
            message: message.into(),
            indices,
        }
    }

    fn warning(message: impl Into<String>, indices: Vec<usize>) -> Self {
        Self {
            severity: Severity::Warning,
            message: message.into(),
            indices,
        }
    }
}

impl SbmParams {
    /// `k` communities of equal size with intra probability `p` and cross
    /// probability `q`, `seeds_each` seeds in every community.
    pub fn identical(k: usize, size: usize, p: f64, q: f64, r: u32, seeds_each: usize) -> Self {
        let edge_probs = (0..k)
            .map(|i| (0..k).map(|j| if i == j { p } else { q }).collect())
            .collect();
        Self {
            sizes: vec![size; k],
            edge_probs,
            r,
            seeds: vec![seeds_each; k],
        }
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn p(&self, i: usize) -> f64 {
        self.edge_probs[i][i]
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.edge_probs[i][j]
    }

    /// Expected degree of a node of community `i`.
    pub fn expected_degree(&self, i: usize) -> f64 {
        (0..self.k())
            .map(|j| {
                if j == i {
                    (self.sizes[i] as f64 - 1.0) * self.p(i)
                } else {
                    self.sizes[j] as f64 * self.q(i, j)
                }
            })
            .sum()
    }

    /// Expected number of edges of the whole graph.
    pub fn expected_edges(&self) -> f64 {
        let k = self.k();
        let mut total = 0.0;
        for i in 0..k {
            let ni = self.sizes[i] as f64;
            total += ni * (ni - 1.0) / 2.0 * self.p(i);
            for j in i + 1..k {
                total += ni * self.sizes[j] as f64 * self.q(i, j);
            }
        }
        total
    }

    /// Violations as an error, warnings ignored.
    pub fn check(&self) -> Result<()> {
        let violations: Vec<String> = validate_params(self)
            .into_iter()
            .filter(|i| i.severity == Severity::Violation)
            .map(|i| i.message)
            .collect();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(violations.join("; ")))
        }
    }
}

/// Report every problem with `params`. Shape, range, symmetry and seed
/// bounds are violations; weak assortativity and irreducibility of the
/// community graph are warnings.
pub fn validate_params(params: &SbmParams) -> Vec<Issue> {
    let mut issues = Vec::new();
    let k = params.k();
    if k == 0 {
        issues.push(Issue::violation("no communities", vec![]));
        return issues;
    }
    if params.r < 2 {
        issues.push(Issue::violation(
            format!("threshold r = {} must be at least 2", params.r),
            vec![],
        ));
    }
    for (i, &n) in params.sizes.iter().enumerate() {
        if n == 0 {
            issues.push(Issue::violation(
                format!("community {} is empty", i + 1),
                vec![i],
            ));
        }
    }
    if params.edge_probs.len() != k || params.edge_probs.iter().any(|r| r.len() != k) {
        issues.push(Issue::violation(
            format!("edge_probs must be {k}x{k}"),
            vec![],
        ));
        return issues;
    }
    if params.seeds.len() != k {
        issues.push(Issue::violation(
            format!("expected {k} seed counts, got {}", params.seeds.len()),
            vec![],
        ));
    } else {
        for i in 0..k {
            if params.seeds[i] > params.sizes[i] {
                issues.push(Issue::violation(
                    format!(
                        "seed count exceeds community size at {} ({} > {})",
                        i + 1,
                        params.seeds[i],
                        params.sizes[i]
                    ),
                    vec![i],
                ));
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            let q = params.q(i, j);
            if !(0.0..1.0).contains(&q) {
                issues.push(Issue::violation(
                    format!("probability q({},{}) = {q} outside [0,1)", i + 1, j + 1),
                    vec![i, j],
                ));
            }
            if j > i && params.q(i, j) != params.q(j, i) {
                issues.push(Issue::violation(
                    format!("edge_probs not symmetric at ({},{})", i + 1, j + 1),
                    vec![i, j],
                ));
            }
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            if params.q(i, j) > params.p(i).min(params.p(j)) {
                issues.push(Issue::warning(
                    format!("assortativity violated at ({},{})", i + 1, j + 1),
                    vec![i, j],
                ));
            }
        }
    }
    let support = Matrix::from_fn(k, |i, j| params.q(i, j));
    if !is_irreducible(&support) {
        issues.push(Issue::warning(
            "community graph is disconnected (chi reducible)",
            vec![],
        ));
    }
    issues
}
