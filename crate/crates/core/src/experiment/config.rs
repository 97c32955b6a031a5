//! TOML configuration schema.
//!
//! One file may carry sections for several subcommands; each subcommand reads
//! only its own section. Every physical parameter is explicit.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::ClassifyOptions;
use crate::critical::ThetaGrid;
use crate::fluid::{AsymptoticLimits, FluidModel};
use crate::linalg::Matrix;
use crate::percolation::StrategyKind;
use crate::sbm::SbmParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    SweepAlpha,
    Classify,
    CriticalCurve,
    FluidCheck,
    Allocations,
    OracleCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::SweepAlpha => "sweep-alpha",
            Mode::Classify => "classify",
            Mode::CriticalCurve => "critical-curve",
            Mode::FluidCheck => "fluid-check",
            Mode::Allocations => "allocations",
            Mode::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must match the subcommand being run.
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub simulate: Option<SimulateConfig>,
    pub sweep_alpha: Option<SweepAlphaConfig>,
    pub classify: Option<ClassifyConfig>,
    pub critical_curve: Option<CriticalCurveConfig>,
    pub fluid_check: Option<FluidCheckConfig>,
    pub allocations: Option<AllocationsConfig>,
    pub oracle_check: Option<OracleCheckConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Finite graph parameters without seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub sizes: Vec<usize>,
    pub edge_probs: Vec<Vec<f64>>,
    pub r: u32,
    /// Overrides the default cap on the expected number of edges.
    pub max_expected_edges: Option<f64>,
}

impl GraphSpec {
    pub fn with_seeds(&self, seeds: Vec<usize>) -> SbmParams {
        SbmParams {
            sizes: self.sizes.clone(),
            edge_probs: self.edge_probs.clone(),
            r: self.r,
            seeds,
        }
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub graph: GraphSpec,
    /// One grid cell per seed vector.
    pub seeds: Vec<Vec<usize>>,
    pub trials: usize,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyKind,
    /// Reuse one graph per cell instead of regenerating it for every trial.
    #[serde(default)]
    pub reuse_graph: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAlphaConfig {
    pub graph: GraphSpec,
    /// Seeds of cell `alpha` are `round(alpha * direction_i * g_i)`.
    pub direction: Vec<f64>,
    pub alpha: Vec<f64>,
    pub trials: usize,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyKind,
    #[serde(default)]
    pub reuse_graph: bool,
}

fn default_strategy() -> StrategyKind {
    StrategyKind::UniformUsable
}

/// Asymptotic model description; exactly one of `chi`, `limits`,
/// `identical` and `graph` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub r: u32,
    pub chi: Option<Vec<Vec<f64>>>,
    pub limits: Option<LimitsSpec>,
    pub identical: Option<IdenticalSpec>,
    /// Finite instance whose ratios stand in for the limits.
    pub graph: Option<GraphSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    pub nu: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdenticalSpec {
    pub k: usize,
    pub psi: f64,
}

impl ModelSpec {
    pub fn k(&self) -> Result<usize> {
        Ok(self.build(None)?.k())
    }

    /// Build the model; `alpha` defaults to zeros.
    pub fn build(&self, alpha: Option<Vec<f64>>) -> Result<FluidModel> {
        let given = [
            self.chi.is_some(),
            self.limits.is_some(),
            self.identical.is_some(),
            self.graph.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            return Err(Error::Config(
                "model needs exactly one of chi, limits, identical, graph".into(),
            ));
        }
        let limits = if let Some(chi) = &self.chi {
            let chi = Matrix::from_rows(chi)?;
            let alpha = alpha.unwrap_or_else(|| vec![0.0; chi.dim()]);
            return FluidModel::new(self.r, alpha, chi);
        } else if let Some(l) = &self.limits {
            AsymptoticLimits::new(
                Matrix::from_rows(&l.nu)?,
                Matrix::from_rows(&l.gamma)?,
                Matrix::from_rows(&l.mu)?,
            )?
        } else if let Some(id) = &self.identical {
            AsymptoticLimits::identical(id.k, id.psi)
        } else {
            let g = self.graph.as_ref().unwrap();
            let params = g.with_seeds(vec![0; g.k()]);
            params.check()?;
            AsymptoticLimits::from_params(&params)
        };
        let alpha = alpha.unwrap_or_else(|| vec![0.0; limits.k()]);
        FluidModel::from_limits(limits, alpha, self.r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub model: ModelSpec,
    pub alphas: Vec<Vec<f64>>,
    pub options: Option<ClassifyOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalCurveConfig {
    pub model: ModelSpec,
    pub theta: Option<ThetaGrid>,
}

/// A sequence of instances with `n_i = round(fraction_i n)`,
/// `p_i = p_scale_i n^{-beta}`, `q_ij = gamma_ij p_i` and
/// `a_i = floor(alpha_i g_i)`, so every ratio is constant along the sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidCheckConfig {
    pub r: u32,
    pub n: Vec<usize>,
    pub fractions: Vec<f64>,
    pub beta: f64,
    pub p_scale: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    /// Points `x` at which `R(⌊x g⌋)/g` is compared with `rho(x)`.
    pub points: Vec<Vec<f64>>,
    pub tracking: Option<TrackingConfig>,
}

/// Monte Carlo runs under the fixed schedule derived from the fluid
/// trajectory, at a single size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingConfig {
    pub n: usize,
    pub trials: usize,
    /// Number of trajectory points compared (evenly spaced in step index).
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationsConfig {
    pub psi: f64,
    pub r: Vec<u32>,
    pub k_min: usize,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCheckConfig {
    pub instances: usize,
    pub max_n: usize,
    pub b_cases: usize,
    pub fd_points: usize,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            instances: 100,
            max_n: 200,
            b_cases: 500,
            fd_points: 100,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_simulate_section() {
        let cfg = ExperimentConfig::from_toml(
            r#"
seed = 7
workers = 2

[simulate]
seeds = [[3, 0], [6, 0]]
trials = 4
strategy = "round-robin"

[simulate.graph]
sizes = [100, 100]
edge_probs = [[0.05, 0.01], [0.01, 0.05]]
r = 2
"#,
        )
        .unwrap();
        let sim = cfg.simulate.unwrap();
        assert_eq!(sim.strategy, StrategyKind::RoundRobin);
        assert_eq!(sim.seeds.len(), 2);
        assert!(!sim.reuse_graph);
    }

    #[test]
    fn unknown_fields_are_reported_with_location() {
        let err = ExperimentConfig::from_toml("seed = 1\n[simulate]\ntrails = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("trails"), "{msg}");
    }

    #[test]
    fn model_spec_needs_exactly_one_source() {
        let spec = ModelSpec {
            r: 2,
            chi: None,
            limits: None,
            identical: None,
            graph: None,
        };
        assert!(spec.build(None).is_err());
        let spec = ModelSpec {
            identical: Some(IdenticalSpec { k: 2, psi: 0.5 }),
            ..spec
        };
        assert_eq!(spec.build(None).unwrap().chi()[(0, 1)], 0.5);
    }
}
