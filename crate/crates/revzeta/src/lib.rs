//! Zeta-regularized spectral quantities for the Laplacian on a surface of
//! revolution with Dirichlet boundaries: functional determinant, Casimir
//! energy (value and residue at s = -1/2), and the first-order change of the
//! energy under a compactly supported bump on the profile function.
//!
//! The pipeline follows the contour representation of the spectral zeta
//! function: radial solutions X_k(b; i lambda) are computed by adaptive
//! Runge-Kutta integration, WKB asymptotics (plain in lambda for k = 0,
//! uniform in u = lambda/k otherwise) supply the subtractions that extend
//! convergence to s = 0 and s = -1/2, and the subtracted asymptotics are
//! added back as printed A-terms. The constant-profile (cylinder) closed
//! forms double as independent oracles for every stage.

pub mod cylinder;
pub mod error;
pub mod numerics;
pub mod profile;
pub mod radial;
pub mod speczeta;
pub mod symexpr;
pub mod wkb;

pub use error::{Error, Result};
pub use numerics::{adaptive_quad, improper_quad, series_with_tail, QuadratureSpec, SeriesResult};
pub use profile::{
    make_gaussian_bump, make_mixed_gaussian_bump, perturbed_profile, validate_profile, BumpSpec,
    ProfileSpec,
};
