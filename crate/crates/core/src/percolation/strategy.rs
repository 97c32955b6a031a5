use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::state::BootstrapState;

/// Rule choosing the community whose usable node is explored next.
///
/// Implementations must only return communities with at least one usable
/// node; the engine calls `select` only while some community has one.
pub trait Strategy {
    fn select(&mut self, state: &BootstrapState, rng: &mut dyn RngCore) -> usize;

    fn name(&self) -> &'static str;
}

/// Community picked with probability proportional to its usable count, i.e.
/// a uniformly random usable node overall.
#[derive(Debug, Clone, Default)]
pub struct UniformUsable;

impl Strategy for UniformUsable {
    fn select(&mut self, state: &BootstrapState, rng: &mut dyn RngCore) -> usize {
        let total = state.total_usable();
        debug_assert!(total > 0);
        let mut pick = rng.random_range(0..total);
        for i in 0..state.k() {
            let c = state.usable_count(i);
            if pick < c {
                return i;
            }
            pick -= c;
        }
        unreachable!("usable counts changed during selection")
    }

    fn name(&self) -> &'static str {
        "uniform-usable"
    }
}

/// Cycle through communities, skipping those without usable nodes.
#[derive(Debug, Clone, Default)]
pub struct RoundRobin {
    next: usize,
}

impl Strategy for RoundRobin {
    fn select(&mut self, state: &BootstrapState, _rng: &mut dyn RngCore) -> usize {
        let k = state.k();
        for step in 0..k {
            let i = (self.next + step) % k;
            if state.has_usable(i) {
                self.next = (i + 1) % k;
                return i;
            }
        }
        unreachable!("select called with no usable community")
    }

    fn name(&self) -> &'static str {
        "round-robin"
    }
}

/// Follow a precomputed community-per-step schedule. The first time the
/// scheduled community has no usable node (or the schedule runs out) the
/// strategy switches permanently to [`UniformUsable`].
#[derive(Debug, Clone)]
pub struct FixedSchedule {
    schedule: Vec<usize>,
    fallback_at: Option<usize>,
    fallback: UniformUsable,
}

impl FixedSchedule {
    /// `schedule[t - 1]` is the community explored at step `t`.
    pub fn new(schedule: Vec<usize>) -> Self {
        Self {
            schedule,
            fallback_at: None,
            fallback: UniformUsable,
        }
    }

    /// Build the schedule from cumulative per-community targets sampled
    /// along a non-decreasing curve. Between consecutive targets the
    /// increments are emitted lowest community index first, one unit at a
    /// time, so `Σ_i w_i(t) = t` at every step.
    pub fn from_cumulative(targets: &[Vec<usize>]) -> Self {
        let mut schedule = Vec::new();
        let Some(first) = targets.first() else {
            return Self::new(schedule);
        };
        let k = first.len();
        let mut current = vec![0usize; k];
        for target in targets {
            let mut pending: Vec<usize> = (0..k)
                .map(|i| target[i].saturating_sub(current[i]))
                .collect();
            while pending.iter().any(|&d| d > 0) {
                for i in 0..k {
                    if pending[i] > 0 {
                        schedule.push(i);
                        pending[i] -= 1;
                        current[i] += 1;
                    }
                }
            }
        }
        Self::new(schedule)
    }

    /// Targets `⌊ζ_i·g_i⌋` at each point of a sampled curve `ζ`.
    pub fn from_curve(points: &[Vec<f64>], scale: &[f64]) -> Self {
        let targets: Vec<Vec<usize>> = points
            .iter()
            .map(|x| {
                x.iter()
                    .zip(scale)
                    .map(|(xi, g)| (xi * g).max(0.0).floor() as usize)
                    .collect()
            })
            .collect();
        Self::from_cumulative(&targets)
    }

    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    /// Step at which the schedule became infeasible, if it did.
    pub fn fallback_at(&self) -> Option<usize> {
        self.fallback_at
    }
}

impl Strategy for FixedSchedule {
    fn select(&mut self, state: &BootstrapState, rng: &mut dyn RngCore) -> usize {
        if self.fallback_at.is_none() {
            let t = state.t() + 1;
            match self.schedule.get(t - 1) {
                Some(&j) if j < state.k() && state.has_usable(j) => return j,
                _ => self.fallback_at = Some(t),
            }
        }
        self.fallback.select(state, rng)
    }

    fn name(&self) -> &'static str {
        "fixed-schedule"
    }
}

/// Serializable description of a built-in strategy; each run builds a fresh
/// instance from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    UniformUsable,
    RoundRobin,
    FixedSchedule(Vec<usize>),
}

impl StrategyKind {
    pub fn build(&self) -> Box<dyn Strategy> {
        match self {
            StrategyKind::UniformUsable => Box::new(UniformUsable),
            StrategyKind::RoundRobin => Box::new(RoundRobin::default()),
            StrategyKind::FixedSchedule(s) => Box::new(FixedSchedule::new(s.clone())),
        }
    }
}
