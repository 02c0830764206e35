//! Scattering off time-periodic potentials.
//!
//! The crate computes Floquet scattering amplitudes and total cross sections
//! two ways:
//!
//! * [`eikonal`]: the eikonal approximation generalised to periodic driving.
//!   The slowly varying factor is a phase accumulated along straight-line
//!   trajectories with a retarded time argument, and amplitudes follow from
//!   impact-parameter integrals of that phase.
//! * [`exact`]: a mode-matching solver for the shaking spherical square well.
//!   Inside the well the uniform drive is removed by a gauge phase, which
//!   turns the problem into Bessel-coupled sidebands matched to free outgoing
//!   waves at the well edge, one partial wave at a time.
//!
//! [`xsec`] turns either kind of amplitude into cross sections, and
//! [`oracle`] holds independent reference routines used for validation.

pub mod eikonal;
pub mod error;
pub mod exact;
pub mod kinematics;
pub mod oracle;
pub mod potentials;
pub mod specfun;
pub mod validation;
pub mod xsec;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use eikonal::{AmplitudeMethod, AmplitudeTable, EikonalConfig};
pub use exact::{ChannelSolution, ExactSolution, FloquetBasisConfig};
pub use kinematics::{Channel, Kinematics, UnitSystem};
pub use potentials::{FnPotential, GaussianWell, PeriodicPotential, ShakingSquareWell, ValidityReport};
pub use specfun::QuadratureConfig;
pub use xsec::{CrossSectionResult, FluxMode, Method};
