//! Time-periodic potentials with compact support.
//!
//! Potentials are evaluated in beam coordinates: transverse radius `b`,
//! longitudinal coordinate `z` along the incident direction, and time `t`.
//! Non-axisymmetric potentials additionally implement
//! [`PeriodicPotential::value_xyz`].

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::Kinematics;
use crate::specfun::periodic_average;

pub trait PeriodicPotential: Send + Sync {
    /// `U(b, z, t)`; `b >= 0`. For non-axisymmetric potentials this is the
    /// value at transverse azimuth zero.
    fn value(&self, b: f64, z: f64, t: f64) -> f64;

    fn value_xyz(&self, x: f64, y: f64, z: f64, t: f64) -> f64 {
        self.value(x.hypot(y), z, t)
    }

    fn period(&self) -> f64;

    fn omega(&self) -> f64 {
        TAU / self.period()
    }

    /// `U` vanishes for `sqrt(b² + z²) > support_radius`.
    fn support_radius(&self) -> f64;

    fn is_axisymmetric(&self) -> bool {
        true
    }

    /// `l_U`, defaults to the support radius.
    fn characteristic_length(&self) -> f64 {
        self.support_radius()
    }

    /// `U_*`, defaults to the largest `|U|` on a coarse space-time grid.
    fn characteristic_strength(&self) -> f64 {
        let r = self.support_radius();
        let period = self.period();
        let mut best = 0.0f64;
        for ib in 0..=8 {
            let b = r * ib as f64 / 8.0;
            for iz in 0..=16 {
                let z = -r + 2.0 * r * iz as f64 / 16.0;
                for it in 0..16 {
                    let t = period * it as f64 / 16.0;
                    best = best.max(self.value(b, z, t).abs());
                }
            }
        }
        best
    }

    /// Closed form of `∫_{z_from}^{z_to} U(x, y, z', tau + z'/velocity) dz'`
    /// along a straight line at fixed transverse position, when one exists.
    fn chord_integral(&self, _x: f64, _y: f64, _z_from: f64, _z_to: f64, _tau: f64, _velocity: f64) -> Option<f64> {
        None
    }

    /// Longitudinal positions where `U` jumps along the line at transverse radius `b`.
    fn z_breakpoints(&self, _b: f64) -> Vec<f64> {
        Vec::new()
    }

    /// `U_s(b, z) = (1/T) ∫_0^T U(b, z, t) e^{isωt} dt`, so that
    /// `U = Σ_s U_s e^{-isωt}`.
    fn fourier_component(&self, s: i64, b: f64, z: f64) -> Complex64 {
        let omega = self.omega();
        let nodes = 64.max(4 * s.unsigned_abs() as usize + 16);
        let nodes = nodes + nodes % 2;
        periodic_average(
            |t| self.value(b, z, t) * Complex64::from_polar(1.0, s as f64 * omega * t),
            self.period(),
            nodes,
        )
    }
}

/// Checked evaluation: rejects negative `b` and returns zero outside the support.
pub fn evaluate<P: PeriodicPotential + ?Sized>(pot: &P, b: f64, z: f64, t: f64) -> Result<f64> {
    if b < 0.0 || b.is_nan() {
        return Err(Error::invalid(format!("transverse radius must be >= 0, got {b}")));
    }
    if b.hypot(z) > pot.support_radius() {
        return Ok(0.0);
    }
    Ok(pot.value(b, z, t))
}

/// Spherical well `U0 cos(ωt) + U1` for `r <= r0`, zero outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShakingSquareWell {
    pub u0: f64,
    pub u1: f64,
    pub omega: f64,
    pub r0: f64,
}

impl ShakingSquareWell {
    pub fn new(u0: f64, u1: f64, omega: f64, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::invalid(format!("well radius must be positive, got {r0}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid(format!("drive frequency must be positive, got {omega}")));
        }
        if !(u0.is_finite() && u1.is_finite()) {
            return Err(Error::invalid("well depths must be finite"));
        }
        Ok(Self { u0, u1, omega, r0 })
    }

    /// Half chord `sqrt(r0² - b²)` of the well at impact parameter `b`, zero outside.
    pub fn half_chord(&self, b: f64) -> f64 {
        if b >= self.r0 {
            0.0
        } else {
            (self.r0 * self.r0 - b * b).sqrt()
        }
    }

    pub fn is_static(&self) -> bool {
        self.u0 == 0.0
    }

    /// Closed-form `U_s(r)`.
    pub fn fourier_component_radial(&self, s: i64, r: f64) -> Complex64 {
        if r > self.r0 {
            return Complex64::new(0.0, 0.0);
        }
        match s {
            0 => self.u1.into(),
            1 | -1 => (0.5 * self.u0).into(),
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

impl PeriodicPotential for ShakingSquareWell {
    fn value(&self, b: f64, z: f64, t: f64) -> f64 {
        if b.hypot(z) <= self.r0 {
            self.u0 * (self.omega * t).cos() + self.u1
        } else {
            0.0
        }
    }

    fn period(&self) -> f64 {
        TAU / self.omega
    }

    fn omega(&self) -> f64 {
        self.omega
    }

    fn support_radius(&self) -> f64 {
        self.r0
    }

    fn characteristic_strength(&self) -> f64 {
        self.u0.abs() + self.u1.abs()
    }

    fn chord_integral(&self, x: f64, y: f64, z_from: f64, z_to: f64, tau: f64, velocity: f64) -> Option<f64> {
        let half = self.half_chord(x.hypot(y));
        let lo = z_from.max(-half);
        let hi = z_to.min(half);
        if !(lo < hi) {
            return Some(0.0);
        }
        let w = self.omega;
        let drive = self.u0 * velocity / w * ((w * (tau + hi / velocity)).sin() - (w * (tau + lo / velocity)).sin());
        Some(self.u1 * (hi - lo) + drive)
    }

    fn z_breakpoints(&self, b: f64) -> Vec<f64> {
        let half = self.half_chord(b);
        if half > 0.0 {
            vec![-half, half]
        } else {
            Vec::new()
        }
    }

    fn fourier_component(&self, s: i64, b: f64, z: f64) -> Complex64 {
        self.fourier_component_radial(s, b.hypot(z))
    }
}

/// Smooth test potential `(U1 + U0 cos ωt) exp(-r²/w²)`, truncated at `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWell {
    pub u0: f64,
    pub u1: f64,
    pub omega: f64,
    pub width: f64,
    pub cutoff: f64,
}

impl GaussianWell {
    pub fn new(u0: f64, u1: f64, omega: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && omega > 0.0) {
            return Err(Error::invalid("Gaussian width and drive frequency must be positive"));
        }
        Ok(Self { u0, u1, omega, width, cutoff: 8.0 * width })
    }
}

impl PeriodicPotential for GaussianWell {
    fn value(&self, b: f64, z: f64, t: f64) -> f64 {
        let r2 = b * b + z * z;
        if r2 > self.cutoff * self.cutoff {
            return 0.0;
        }
        (self.u1 + self.u0 * (self.omega * t).cos()) * (-r2 / (self.width * self.width)).exp()
    }

    fn period(&self) -> f64 {
        TAU / self.omega
    }

    fn omega(&self) -> f64 {
        self.omega
    }

    fn support_radius(&self) -> f64 {
        self.cutoff
    }

    fn characteristic_length(&self) -> f64 {
        self.width
    }

    fn characteristic_strength(&self) -> f64 {
        self.u0.abs() + self.u1.abs()
    }
}

/// Adapter turning a closure `U(x, y, z, t)` into a potential.
///
/// Nothing about the closure is known in closed form, so every consumer falls
/// back to quadrature.
pub struct FnPotential<F> {
    f: F,
    period: f64,
    support_radius: f64,
    axisymmetric: bool,
    length: Option<f64>,
    strength: Option<f64>,
    breakpoints: Option<f64>,
}

impl<F> FnPotential<F>
where
    F: Fn(f64, f64, f64, f64) -> f64 + Send + Sync,
{
    pub fn new(f: F, period: f64, support_radius: f64, axisymmetric: bool) -> Result<Self> {
        if !(period > 0.0 && support_radius > 0.0) {
            return Err(Error::invalid("period and support radius must be positive"));
        }
        Ok(Self { f, period, support_radius, axisymmetric, length: None, strength: None, breakpoints: None })
    }

    pub fn with_scales(mut self, length: f64, strength: f64) -> Self {
        self.length = Some(length);
        self.strength = Some(strength);
        self
    }

    /// Declare a jump on the sphere of radius `r` (e.g. a well edge).
    pub fn with_spherical_edge(mut self, r: f64) -> Self {
        self.breakpoints = Some(r);
        self
    }
}

impl<F> PeriodicPotential for FnPotential<F>
where
    F: Fn(f64, f64, f64, f64) -> f64 + Send + Sync,
{
    fn value(&self, b: f64, z: f64, t: f64) -> f64 {
        (self.f)(b, 0.0, z, t)
    }

    fn value_xyz(&self, x: f64, y: f64, z: f64, t: f64) -> f64 {
        (self.f)(x, y, z, t)
    }

    fn period(&self) -> f64 {
        self.period
    }

    fn support_radius(&self) -> f64 {
        self.support_radius
    }

    fn is_axisymmetric(&self) -> bool {
        self.axisymmetric
    }

    fn characteristic_length(&self) -> f64 {
        self.length.unwrap_or(self.support_radius)
    }

    fn characteristic_strength(&self) -> f64 {
        match self.strength {
            Some(s) => s,
            None => {
                let r = self.support_radius;
                let mut best = 0.0f64;
                for ib in 0..=8 {
                    for iz in 0..=16 {
                        for it in 0..16 {
                            let (b, z) = (r * ib as f64 / 8.0, -r + r * iz as f64 / 8.0);
                            let t = self.period * it as f64 / 16.0;
                            best = best.max(self.value(b, z, t).abs());
                        }
                    }
                }
                best
            }
        }
    }

    fn z_breakpoints(&self, b: f64) -> Vec<f64> {
        match self.breakpoints {
            Some(r) if b < r => {
                let h = (r * r - b * b).sqrt();
                vec![-h, h]
            }
            _ => Vec::new(),
        }
    }
}

/// Fourier components `U_s(r)` for `|s| <= s_range` sampled along the beam axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierComponents {
    pub s_range: usize,
    pub radii: Vec<f64>,
    /// `components[i][s + s_range]` is `U_s(radii[i])`.
    pub components: Vec<Vec<Complex64>>,
    omega: f64,
}

impl FourierComponents {
    pub fn sample<P: PeriodicPotential + ?Sized>(pot: &P, s_range: usize, radii: &[f64]) -> Self {
        let s_max = s_range as i64;
        let components =
            radii.iter().map(|&r| (-s_max..=s_max).map(|s| pot.fourier_component(s, 0.0, r)).collect()).collect();
        Self { s_range, radii: radii.to_vec(), components, omega: pot.omega() }
    }

    pub fn get(&self, s: i64, radius_index: usize) -> Option<Complex64> {
        let idx = s + self.s_range as i64;
        if idx < 0 {
            return None;
        }
        self.components.get(radius_index)?.get(idx as usize).copied()
    }

    /// `Σ_s U_s(r) e^{-isωt}` at `radii[radius_index]`.
    pub fn reconstruct(&self, radius_index: usize, t: f64) -> f64 {
        let s_max = self.s_range as i64;
        let sum: Complex64 = (-s_max..=s_max)
            .zip(&self.components[radius_index])
            .map(|(s, u)| u * Complex64::from_polar(1.0, -(s as f64) * self.omega * t))
            .sum();
        sum.re
    }
}

/// Dimensionless ratios `k l_U / 2π` and `E / U_*` that control the eikonal regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub length_ratio: f64,
    /// `+∞` when `U_* = 0`.
    pub energy_ratio: f64,
    pub threshold: f64,
    pub recommended: bool,
}

pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 5.0;

pub fn ea_validity<P: PeriodicPotential + ?Sized>(pot: &P, kin: &Kinematics, threshold: f64) -> ValidityReport {
    let length_ratio = kin.k * pot.characteristic_length() / TAU;
    let strength = pot.characteristic_strength();
    let energy_ratio = if strength == 0.0 { f64::INFINITY } else { kin.energy / strength };
    ValidityReport {
        length_ratio,
        energy_ratio,
        threshold,
        recommended: length_ratio > threshold && energy_ratio > threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::UnitSystem;
    use proptest::prelude::*;

    fn well() -> ShakingSquareWell {
        ShakingSquareWell::new(7.0, 3.0, 2.5, 1.0).unwrap()
    }

    #[test]
    fn well_values() {
        let w = well();
        assert_eq!(evaluate(&w, 0.3, 0.4, 0.0).unwrap(), 10.0);
        for t in [0.0, 0.3, 1.7] {
            assert_eq!(evaluate(&w, 2.0, 0.0, t).unwrap(), 0.0);
        }
        assert!(evaluate(&w, -0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn well_rejects_bad_parameters() {
        assert!(ShakingSquareWell::new(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ShakingSquareWell::new(1.0, 1.0, -1.0, 1.0).is_err());
        assert!(ShakingSquareWell::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_fourier_components() {
        let w = well();
        assert_eq!(w.fourier_component_radial(0, 0.5), Complex64::from(3.0));
        assert_eq!(w.fourier_component_radial(1, 0.5), Complex64::from(3.5));
        assert_eq!(w.fourier_component_radial(-1, 0.5), Complex64::from(3.5));
        assert_eq!(w.fourier_component_radial(2, 0.5), Complex64::from(0.0));
        assert_eq!(w.fourier_component_radial(0, 1.5), Complex64::from(0.0));
    }

    #[test]
    fn numeric_fourier_matches_closed_form() {
        let w = well();
        let opaque = FnPotential::new(move |x, y, z, t| w.value(x.hypot(y), z, t), w.period(), 1.0, true).unwrap();
        for s in -3..=3 {
            let a = opaque.fourier_component(s, 0.0, 0.5);
            let b = w.fourier_component_radial(s, 0.5);
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn reconstruction_and_reality() {
        let g = GaussianWell::new(2.0, 1.0, 3.0, 0.7).unwrap();
        let radii: Vec<f64> = (0..10).map(|i| 0.2 * i as f64).collect();
        let comps = FourierComponents::sample(&g, 3, &radii);
        let ustar = g.characteristic_strength();
        for (i, _) in radii.iter().enumerate() {
            for s in 0..=3i64 {
                let a = comps.get(s, i).unwrap();
                let b = comps.get(-s, i).unwrap();
                assert!((a - b.conj()).norm() < 1e-14 * ustar);
            }
            for j in 0..11 {
                let t = g.period() * j as f64 / 11.0;
                let want = g.value(0.0, radii[i], t);
                assert!((comps.reconstruct(i, t) - want).abs() < 1e-10 * ustar);
            }
        }
    }

    #[test]
    fn chord_integral_matches_quadrature() {
        use crate::specfun::{integrate_adaptive, QuadratureConfig};
        let w = well();
        let cfg = QuadratureConfig::default();
        let (v, tau) = (9.0, 0.37);
        for &(b, z0, z1) in &[(0.2, -2.0, 0.3), (0.0, -1.0, 1.0), (0.6, 0.1, 5.0), (0.99, -3.0, 3.0)] {
            let half = w.half_chord(b);
            let closed = w.chord_integral(b, 0.0, z0, z1, tau, v).unwrap();
            let num = integrate_adaptive(|z| Complex64::from(w.value(b, z, tau + z / v)), z0, z1, &[-half, half], &cfg)
                .unwrap();
            assert!((closed - num.value.re).abs() < 1e-10);
        }
        assert_eq!(w.chord_integral(1.5, 0.0, -3.0, 3.0, 0.0, v), Some(0.0));
    }

    #[test]
    fn validity_ratios() {
        let w = ShakingSquareWell::new(100.0, 0.0, 10.0, 1.0).unwrap();
        let kin = Kinematics::new(37.0, 10.0, UnitSystem::default()).unwrap();
        let rep = ea_validity(&w, &kin, DEFAULT_VALIDITY_THRESHOLD);
        assert!((rep.length_ratio - 37.0 / TAU).abs() < 1e-12);
        assert!((rep.length_ratio - 5.89).abs() < 5e-3);
        assert!((rep.energy_ratio - 13.69).abs() < 1e-12);
        assert!(rep.recommended);

        let free = ShakingSquareWell::new(0.0, 0.0, 10.0, 1.0).unwrap();
        let rep = ea_validity(&free, &kin, DEFAULT_VALIDITY_THRESHOLD);
        assert!(rep.energy_ratio.is_infinite() && rep.recommended);

        let slow = Kinematics::new(1.0, 10.0, UnitSystem::default()).unwrap();
        assert!(!ea_validity(&w, &slow, DEFAULT_VALIDITY_THRESHOLD).recommended);
    }

    #[test]
    fn sampled_strength_bounds_values() {
        let g = GaussianWell::new(2.0, -1.0, 3.0, 0.7).unwrap();
        let opaque = FnPotential::new(move |x, y, z, t| g.value(x.hypot(y), z, t), g.period(), g.cutoff, true).unwrap();
        let sampled = opaque.characteristic_strength();
        assert!(sampled >= 3.0 * (1.0 - 1e-12));
    }

    proptest! {
        #[test]
        fn well_is_exactly_periodic(b in 0.0f64..2.0, z in -2.0f64..2.0, t in -50.0f64..50.0) {
            let w = ShakingSquareWell::new(100.0, 10.0, 1.0, 1.0).unwrap();
            // cos is evaluated at ω(t+T); compare against rounding of the argument itself
            let a = w.value(b, z, t);
            let c = w.value(b, z, t + w.period());
            prop_assert!((a - c).abs() <= 1e-12 * 110.0);
        }

        #[test]
        fn gaussian_periodic(b in 0.0f64..2.0, z in -2.0f64..2.0, t in -50.0f64..50.0) {
            let g = GaussianWell::new(5.0, 1.0, 2.0, 0.5).unwrap();
            prop_assert!((g.value(b, z, t) - g.value(b, z, t + g.period())).abs() <= 1e-12 * 6.0);
        }
    }
}
