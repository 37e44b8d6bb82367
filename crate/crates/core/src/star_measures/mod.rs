//! Measures on the star set and the extended real line.
//!
//! A star vector is a point of the simplex with one large coordinate and all
//! others equal; it is stored as (value, colour). Measures invariant under
//! colour permutation are therefore carried as plain measures on the value
//! in `[1/k, 1]`.

mod dominance;
mod empirical;
mod ops;
mod reduction;
mod star;
mod transform;

pub use dominance::{dominated, dominated_with_margin, ks_distance};
pub use empirical::EmpiricalMeasure;
pub use ops::{cut_above, cut_below, oplus, otimes, EXACT_CONVOLUTION_LIMIT};
pub use reduction::QuantileReduction;
pub use star::{lambda_project, StarMeasure, StarVector};
pub use transform::Transform;
