//! Finite SBM instances: parameters, sampling, seed selection and the
//! edge-list file format.

mod graph;
pub mod io;
mod params;

pub use graph::{
    generate_sbm, generate_sbm_with, select_seeds, GenerateOptions, NodeId, SbmGraph,
};
pub use params::{validate_params, Issue, SbmParams, Severity};
