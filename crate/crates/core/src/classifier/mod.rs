//! Sub/super-critical classification of a fluid model from the trajectory of
//! `x' = rho(x)` and the Perron-Frobenius eigenvalue at its endpoint.

mod classify;
mod eigen;
mod integrate;
mod levels;

pub use classify::{
    classify, classify_with_trajectory, x_star, Classification, TrajectorySummary, Verdict,
};
pub use eigen::pf_eigen;
pub use integrate::{integrate_cauchy, polish_zero, ClassifyOptions, Termination, Trajectory};
pub use levels::{community_levels, community_levels_from, initial_point, CommunityGraphMeta, InitialPoint};
