//! Numerical geometric tomography for centered star and convex bodies.
//!
//! Bodies are described by their radial functions. On top of that the crate
//! computes volumes and central section volumes, the spherical Radon
//! transform and three independent inversions of it on S², Schwarz
//! symmetrals, and a harness for Busemann–Petty type comparisons.
//!
//! Module map:
//! - [`sphere_quad`]: quadrature on spheres and great subspheres, real harmonics.
//! - [`star_body`]: body descriptors, radial functions, membership, convexity probing.
//! - [`radon`]: volumes, sections, the Radon transform and its inversions.
//! - [`symmetral`]: Schwarz symmetrization about an axis.
//! - [`bp_lab`]: section-dominance comparisons and the experiment suites.
//! - [`cli`]: the `geotom` command line.

pub mod bp_lab;
pub mod cli;
pub mod error;
pub mod radon;
pub mod settings;
pub mod sphere_quad;
pub mod star_body;
pub mod symmetral;

pub use error::{GeoError, Result};
pub use settings::Settings;
pub use sphere_quad::Direction;
pub use star_body::{BodyDescriptor, RadialFunction, StarBody};
