use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sphere_quad::SphereGrid;

/// Discretization knobs shared by the numerical routines.
///
/// Every report embeds the settings it was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settings {
    /// Gauss–Legendre latitude count of the S² grid; longitudes are twice that.
    pub sphere_lat: usize,
    /// Trapezoid nodes on great circles of S².
    pub great_circle: usize,
    /// Monte Carlo samples for spheres and subspheres when `n > 3`.
    pub mc_samples: usize,
    /// Seed of every pseudo-random stream derived from these settings.
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { sphere_lat: 64, great_circle: 256, mc_samples: 200_000, seed: 0 }
    }
}

impl Settings {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sphere_grid(&self) -> Result<SphereGrid> {
        SphereGrid::new(self.sphere_lat, 2 * self.sphere_lat)
    }
}
