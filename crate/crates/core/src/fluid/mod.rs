//! Deterministic fluid limit of the exploration chain: activation
//! probabilities, the interaction matrix chi and the drift rho.

mod binomial;
mod drift;
mod model;

pub use binomial::{asymptotic_b, exact_b, leading_term, ln_exact_b, AsymptoticB};
pub use drift::{expected_remainder, jacobian_rho, rho};
pub use model::{chi_from_limits, critical_seed_scale, AsymptoticLimits, FluidModel};
