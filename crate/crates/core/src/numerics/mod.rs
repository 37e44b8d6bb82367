//! Numerical building blocks shared by the model modules.

pub mod quadrature;
pub mod roots;
pub mod stats;
pub mod tabulated;

pub use quadrature::{integrate, integrate_simpson, Quadrature};
pub use roots::{bisect, golden_min};
pub use stats::{chi_square_uniform, ks_against_cdf, ks_critical};
pub use tabulated::{Grid, TabulatedCdf};
