//! The candidate fixed point on the transformed line, the comparison
//! variables built from it, and the numerical checks of its dominance claim.

mod engine;
mod family;
mod params;
mod report;
mod samplers;
mod stable;
mod tail;

pub use engine::{atomic_engine, candidate_engine, ScoreEngine};
pub use family::{build_candidate, build_candidate_checked, candidate_tail_shape, tail_mismatch_weight, CandidateSummary, NuFamily, NuPart};
pub use params::CandidateParams;
pub use report::{assemble_report, compare, verify_dominance, verify_dominance_point_mass, Comparison, DominanceReport, PROFILE_POINTS};
pub use samplers::{check_bulk_bound, BulkBoundCheck, CompoundSamplers};
pub use stable::{levy_cdf, stable_law_test, t_k_asymptotic, t_k_threshold, SmallValueSum, StableLawReport};
pub use tail::TailTable;
