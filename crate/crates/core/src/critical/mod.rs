//! The critical surface in seed space: explicit points for invertible chi,
//! ray bisection through the classifier, and the extreme seed allocations
//! for identical communities.

mod point;
mod ray;

pub use point::{critical_curve, critical_point, write_critical_csv, CriticalPoint, ThetaGrid};
pub use ray::{
    equal_split_ratio, extreme_allocations, ray_crossing, region_membership, Allocation,
    RegionMembership, RAY_TOL,
};
