//! Distributional recursion on star measures.
//!
//! The reduced step works in transformed coordinates: a child whose belief
//! has value `x` at colour `m` adds `forward(x)` to the score `Z_m`, and the
//! new root value is `max_m e^{-Z_m} / sum_m e^{-Z_m}`. The full step
//! multiplies literal simplex vectors and serves as its oracle.

mod arrivals;
mod full;
mod iterate;
mod reduced;
mod source;

pub(crate) use arrivals::binomial;
pub use arrivals::{sample_arrivals, ArrivalCounts};
pub use full::{gamma_full_step, gamma_s_full_step, sample_tilted_child, MAX_FULL_K};
pub use iterate::{iterate, reconstruction_gap, GenerationStats, Trajectory, QUANTILE_GRID};
pub use reduced::{finish_scores, reduced_step_sample, reduced_step_sample_with, step_image, ReducedSample};
pub use source::{tilt_split, EmpiricalSource, PhiSource};
