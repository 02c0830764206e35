//! Units, incident-beam kinematics and Floquet channel bookkeeping.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Action, mass and length scales. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
    pub r0_scale: f64,
}

impl Default for UnitSystem {
    /// `ħ = 2m = r0 = 1`.
    fn default() -> Self {
        Self::hbar_2m()
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64, r0_scale: f64) -> Result<Self> {
        if !(hbar > 0.0 && mass > 0.0 && r0_scale > 0.0) {
            return Err(Error::invalid(format!(
                "unit scales must be positive (hbar={hbar}, mass={mass}, r0={r0_scale})"
            )));
        }
        Ok(Self { hbar, mass, r0_scale })
    }

    /// `ħ = 2m = r0 = 1`.
    pub fn hbar_2m() -> Self {
        Self { hbar: 1.0, mass: 0.5, r0_scale: 1.0 }
    }

    /// `ħ = m = r0 = 1`.
    pub fn hbar_m() -> Self {
        Self { hbar: 1.0, mass: 1.0, r0_scale: 1.0 }
    }

    /// `ħ²/(2m)`, the coefficient converting `k²` to energy.
    pub fn kinetic_coefficient(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub k: f64,
    pub energy: f64,
    pub velocity: f64,
    pub omega: f64,
    pub period: f64,
    /// Lowest sideband index whose kinetic energy is non-negative.
    pub n_star: i64,
    pub units: UnitSystem,
}

impl Kinematics {
    pub fn new(k: f64, omega: f64, units: UnitSystem) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("incident wavenumber must be positive, got {k}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid(format!("drive frequency must be positive, got {omega}")));
        }
        let energy = units.kinetic_coefficient() * k * k;
        let quantum = units.hbar * omega;
        let mut n_star = (-energy / quantum).ceil() as i64;
        while energy + (n_star - 1) as f64 * quantum >= 0.0 {
            n_star -= 1;
        }
        while energy + n_star as f64 * quantum < 0.0 {
            n_star += 1;
        }
        Ok(Self { k, energy, velocity: units.hbar * k / units.mass, omega, period: TAU / omega, n_star, units })
    }

    pub fn channel(&self, n: i64) -> Channel {
        let energy = self.energy + n as f64 * self.units.hbar * self.omega;
        let open = energy >= 0.0;
        let wavenumber = (2.0 * self.units.mass * energy.abs()).sqrt() / self.units.hbar;
        Channel { n, energy, wavenumber, open }
    }

    /// Open channels from `n_star` up to `n_max` inclusive.
    pub fn open_channels(&self, n_max: i64) -> impl Iterator<Item = Channel> + '_ {
        (self.n_star..=n_max).map(|n| self.channel(n))
    }
}

/// One Floquet sideband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub n: i64,
    pub energy: f64,
    /// `k_n` for open channels, the decay constant `κ_n` for closed ones.
    pub wavenumber: f64,
    pub open: bool,
}

impl Channel {
    /// `k_n` for open channels, `i κ_n` for closed ones.
    pub fn complex_wavenumber(&self) -> Complex64 {
        if self.open {
            Complex64::new(self.wavenumber, 0.0)
        } else {
            Complex64::new(0.0, self.wavenumber)
        }
    }
}
