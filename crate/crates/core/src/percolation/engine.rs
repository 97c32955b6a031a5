use std::io::Write;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::state::BootstrapState;
use super::strategy::Strategy;
use crate::sbm::{NodeId, SbmGraph};
use crate::{Error, Result};

/// One exploration step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub community_used: usize,
    pub newly_active: Vec<usize>,
    pub used: Vec<usize>,
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// `A*`, the final number of active nodes.
    pub final_size: usize,
    /// `T`, the number of exploration steps; always equal to `final_size`.
    pub termination_time: usize,
    pub per_community_final: Vec<usize>,
    pub trace: Option<Vec<TraceRow>>,
}

/// Run the exploration chain to termination.
///
/// At each step the strategy picks a community with a usable node, a usable
/// node of that community is drawn uniformly, each of its neighbours gains a
/// mark, and inactive nodes reaching `r` marks become active. The run stops
/// at the first step where every active node has been used. With no seeds
/// the run is empty and `T = A* = 0`.
pub fn run_bootstrap(
    graph: &SbmGraph,
    seeds: &[NodeId],
    strategy: &mut dyn Strategy,
    rng: &mut dyn RngCore,
    record_trace: bool,
) -> Result<RunResult> {
    run_to_completion(graph, seeds, strategy, rng, record_trace).map(|(res, _)| res)
}

/// Same as [`run_bootstrap`] but also returns the terminal state.
pub fn run_to_completion(
    graph: &SbmGraph,
    seeds: &[NodeId],
    strategy: &mut dyn Strategy,
    rng: &mut dyn RngCore,
    record_trace: bool,
) -> Result<(RunResult, BootstrapState)> {
    let r = graph.threshold();
    let k = graph.k();
    let mut state = BootstrapState::new(graph, seeds);
    let mut trace = record_trace.then(Vec::new);

    while state.total_usable() > 0 {
        let j = strategy.select(&state, rng);
        if j >= k || !state.has_usable(j) {
            return Err(Error::InfeasibleSelection(j));
        }
        let slot = rng.random_range(0..state.usable_count(j));
        let before = trace.as_ref().map(|_| state.active_counts().to_vec());
        let v = state.take_usable(j, slot);
        for &u in graph.neighbors(v) {
            let c = graph.community_of(u);
            state.add_mark(u, c, r);
        }
        if let (Some(rows), Some(before)) = (trace.as_mut(), before) {
            let active = state.active_counts().to_vec();
            rows.push(TraceRow {
                t: state.t(),
                community_used: j,
                newly_active: active.iter().zip(&before).map(|(a, b)| a - b).collect(),
                used: state.used_counts().to_vec(),
                active,
            });
        }
    }

    let final_size: usize = state.active_counts().iter().sum();
    debug_assert_eq!(final_size, state.t());
    let result = RunResult {
        final_size,
        termination_time: state.t(),
        per_community_final: state.active_counts().to_vec(),
        trace,
    };
    Ok((result, state))
}

/// Write a trace as CSV: `t,community_used,U_1..U_k,A_1..A_k`.
/// Communities are numbered from 1 in the header and in `community_used`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], k: usize, mut out: W) -> Result<()> {
    let mut header = vec!["t".to_string(), "community_used".to_string()];
    header.extend((1..=k).map(|i| format!("U_{i}")));
    header.extend((1..=k).map(|i| format!("A_{i}")));
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let mut fields = vec![row.t.to_string(), (row.community_used + 1).to_string()];
        fields.extend(row.used.iter().map(ToString::to_string));
        fields.extend(row.active.iter().map(ToString::to_string));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
