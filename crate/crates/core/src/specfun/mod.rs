//! Special functions and quadrature kernels.
//!
//! Everything here is implemented from recurrences, series and fixed rules so
//! the solvers have no dependency on an external math library.

mod bessel;
mod legendre;
mod quadrature;
mod spherical;

pub use bessel::{bessel_j, bessel_j_sequence};
pub use legendre::{gauss_legendre, legendre_p, legendre_sequence};
pub use quadrature::{integrate_adaptive, periodic_average, Integral};
pub use spherical::{
    spherical_bessel_j, spherical_bessel_j_deriv, spherical_bessel_j_ratio, spherical_bessel_j_reduced,
    spherical_bessel_y, spherical_hankel1, spherical_hankel1_deriv, spherical_hankel1_scaled, ScaledHankel,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and node counts shared by every quadrature in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any subinterval in the adaptive integrator.
    pub max_depth: u32,
    /// Node count of the periodic trapezoid rule used for time averages.
    pub t_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_depth: 40, t_nodes: 64 }
    }
}

impl QuadratureConfig {
    pub fn strict() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_depth: 50, t_nodes: 128 }
    }

    pub fn fast() -> Self {
        Self { abs_tol: 1e-7, rel_tol: 1e-7, max_depth: 30, t_nodes: 32 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if self.t_nodes < 16 || !self.t_nodes.is_multiple_of(2) {
            return Err(Error::invalid(format!("t_nodes must be even and at least 16, got {}", self.t_nodes)));
        }
        if self.max_depth == 0 {
            return Err(Error::invalid("max_depth must be positive"));
        }
        Ok(())
    }
}
