//! The exploration ("binomial chain") construction of bootstrap percolation
//! on a realized graph, its strategies, and a generation-based oracle.

mod check;
mod engine;
mod naive;
mod state;
mod strategy;

pub use check::{empirical_b, strategy_invariance_check, Estimate};
pub use engine::{run_bootstrap, run_to_completion, write_trace_csv, RunResult, TraceRow};
pub use naive::naive_bootstrap;
pub use state::BootstrapState;
pub use strategy::{FixedSchedule, RoundRobin, Strategy, StrategyKind, UniformUsable};
