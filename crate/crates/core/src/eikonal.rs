//! Generalised eikonal approximation for periodic potentials.
//!
//! The slowly varying factor is `φ = exp(iχ)` with
//! `χ(b, z, t) = -(1/ħv) ∫_{-∞}^{z} U(b, z', t + (z' - z)/v) dz'`,
//! i.e. the phase accumulated along a straight line while the potential
//! evolves in retarded time. Amplitudes are period averages of impact
//! parameter integrals built from `χ`.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::Kinematics;
use crate::potentials::{PeriodicPotential, ShakingSquareWell};
use crate::specfun::{bessel_j, integrate_adaptive, periodic_average, QuadratureConfig};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EikonalConfig {
    pub quad: QuadratureConfig,
    /// Largest `|q_⊥| / k` accepted by the small-angle forms.
    pub small_angle_limit: f64,
    /// Skip the small-angle guard.
    pub allow_large_angle: bool,
    /// Observation plane `z` entering the retarded time of the total phase.
    pub z_ref: f64,
}

impl Default for EikonalConfig {
    fn default() -> Self {
        Self { quad: QuadratureConfig::default(), small_angle_limit: 0.2, allow_large_angle: false, z_ref: 0.0 }
    }
}

impl EikonalConfig {
    pub fn with_quadrature(quad: QuadratureConfig) -> Self {
        Self { quad, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeMethod {
    General,
    SmallAngle,
    Axisym,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub n: i64,
    pub theta: f64,
    /// `None` for axisymmetric entries.
    pub azimuth: Option<f64>,
    pub value: Complex64,
}

/// Amplitudes `f(k', n ← k)` on a grid of channels and polar angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTable {
    pub kin: Kinematics,
    pub method: AmplitudeMethod,
    pub entries: Vec<AmplitudeEntry>,
}

impl AmplitudeTable {
    /// Evaluate `method` for every `(n, θ)` pair in parallel. Entries are
    /// ordered by channel, then angle.
    pub fn compute<P: PeriodicPotential + ?Sized>(
        pot: &P,
        kin: &Kinematics,
        method: AmplitudeMethod,
        channels: &[i64],
        thetas: &[f64],
        cfg: &EikonalConfig,
    ) -> Result<Self> {
        let grid: Vec<(i64, f64)> = channels.iter().flat_map(|&n| thetas.iter().map(move |&th| (n, th))).collect();
        let entries = grid
            .par_iter()
            .map(|&(n, theta)| {
                let value = match method {
                    AmplitudeMethod::General => {
                        let ch = kin.channel(n);
                        let kn = ch.wavenumber;
                        amplitude_general(pot, kin, [kn * theta.sin(), 0.0, kn * theta.cos()], n, cfg)
                    }
                    AmplitudeMethod::SmallAngle => {
                        if n != 0 {
                            return Err(Error::invalid("small-angle form only covers n = 0"));
                        }
                        amplitude_small_angle(pot, kin, [kin.k * theta.sin(), 0.0], cfg)
                    }
                    AmplitudeMethod::Axisym => amplitude_axisym(pot, kin, n, theta, cfg),
                    AmplitudeMethod::ClosedForm => {
                        Err(Error::invalid("closed-form amplitudes exist only for the shaking well at θ = 0"))
                    }
                }?;
                Ok(AmplitudeEntry {
                    n,
                    theta,
                    azimuth: (method == AmplitudeMethod::General || method == AmplitudeMethod::SmallAngle)
                        .then_some(0.0),
                    value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kin: *kin, method, entries })
    }
}

/// `∫_{z_from}^{z_to} U(x, y, z', tau + z'/v) dz'`, truncated to the support.
#[allow(clippy::too_many_arguments)]
fn line_integral<P: PeriodicPotential + ?Sized>(
    pot: &P,
    x: f64,
    y: f64,
    z_from: f64,
    z_to: f64,
    tau: f64,
    velocity: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    if let Some(v) = pot.chord_integral(x, y, z_from, z_to, tau, velocity) {
        return Ok(v);
    }
    let r = pot.support_radius();
    let b = x.hypot(y);
    if b >= r {
        return Ok(0.0);
    }
    let half = (r * r - b * b).sqrt();
    let lo = z_from.max(-half);
    let hi = z_to.min(half);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let breaks = pot.z_breakpoints(b);
    let res =
        integrate_adaptive(|z| Complex64::new(pot.value_xyz(x, y, z, tau + z / velocity), 0.0), lo, hi, &breaks, quad)?;
    Ok(res.value.re)
}

fn phase_at<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    x: f64,
    y: f64,
    z: f64,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let v = kin.velocity;
    let integral = line_integral(pot, x, y, f64::NEG_INFINITY, z, t - z / v, v, quad)?;
    Ok(-integral / (kin.units.hbar * v))
}

fn check_b(b: f64) -> Result<()> {
    if b < 0.0 || b.is_nan() {
        Err(Error::invalid(format!("impact parameter must be >= 0, got {b}")))
    } else {
        Ok(())
    }
}

/// Eikonal phase `χ(b, z, t)`, real and in radians.
pub fn eikonal_phase<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    b: f64,
    z: f64,
    t: f64,
    cfg: &EikonalConfig,
) -> Result<f64> {
    check_b(b)?;
    phase_at(pot, kin, b, 0.0, z, t, &cfg.quad)
}

/// Slowly varying factor `φ_EA = exp(iχ)`.
pub fn eikonal_factor<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    b: f64,
    z: f64,
    t: f64,
    cfg: &EikonalConfig,
) -> Result<Complex64> {
    Ok(Complex64::from_polar(1.0, eikonal_phase(pot, kin, b, z, t, cfg)?))
}

/// Phase accumulated across the whole potential, with the retarded time
/// referenced to the plane `z_ref`.
pub fn total_phase<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    x: f64,
    y: f64,
    t: f64,
    z_ref: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let v = kin.velocity;
    let r = pot.support_radius();
    let integral = line_integral(pot, x, y, -r, r, t - z_ref / v, v, quad)?;
    Ok(-integral / (kin.units.hbar * v))
}

/// Closed-form total phase of the shaking well:
/// `-(1/ħv) [2 U1 L + (2 U0 v/ω) cos(ω(t - z/v)) sin(ωL/v)]`.
pub fn well_total_phase(well: &ShakingSquareWell, kin: &Kinematics, b: f64, t: f64, z: f64) -> f64 {
    let v = kin.velocity;
    let w = well.omega;
    let half = well.half_chord(b);
    let bracket = 2.0 * well.u1 * half + 2.0 * well.u0 * v / w * (w * (t - z / v)).cos() * (w * half / v).sin();
    -bracket / (kin.units.hbar * v)
}

/// Finite-difference residual `|i ∂_t φ + i v ∂_z φ - (U/ħ) φ|` of the
/// transport equation. The time step is `h / v` so both differences span the
/// same displacement along the trajectory.
pub fn transport_residual<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    b: f64,
    z: f64,
    t: f64,
    h: f64,
    cfg: &EikonalConfig,
) -> Result<f64> {
    check_b(b)?;
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let v = kin.velocity;
    let ht = h / v;
    let phi = |z: f64, t: f64| eikonal_factor(pot, kin, b, z, t, cfg);
    let dt = (phi(z, t + ht)? - phi(z, t - ht)?) / (2.0 * ht);
    let dz = (phi(z + h, t)? - phi(z - h, t)?) / (2.0 * h);
    let u = pot.value(b, z, t);
    let here = phi(z, t)?;
    Ok((I * dt + I * v * dz - here * (u / kin.units.hbar)).norm())
}

/// Node count for time averages of `exp(iχ)`: at least the configured
/// count, raised so the rule resolves the phase modulation.
fn time_nodes<P: PeriodicPotential + ?Sized>(pot: &P, kin: &Kinematics, quad: &QuadratureConfig) -> usize {
    let modulation = pot.characteristic_strength() * 2.0 * pot.support_radius() / (kin.units.hbar * kin.velocity);
    let needed = (2.0 * (modulation + 4.0 * modulation.cbrt() + 16.0)).ceil() as usize;
    let n = quad.t_nodes.max(needed);
    n + n % 2
}

/// Collects the first error raised inside a quadrature callback.
struct Failure(RefCell<Option<Error>>);

impl Failure {
    fn new() -> Self {
        Self(RefCell::new(None))
    }

    fn catch(&self, r: Result<Complex64>) -> Complex64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    }

    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Floquet amplitude `f(k', n ← k)` from the full eikonal wave function:
/// `-(m/2πħ²) (1/T) ∫dt ∫d³r e^{-i(k'-k)·r} e^{inωt} U φ_EA`.
pub fn amplitude_general<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    k_out: [f64; 3],
    n: i64,
    cfg: &EikonalConfig,
) -> Result<Complex64> {
    cfg.quad.validate()?;
    let ch = kin.channel(n);
    if n < kin.n_star || !ch.open {
        return Err(Error::invalid(format!("channel n = {n} is closed")));
    }
    let k_norm = (k_out[0] * k_out[0] + k_out[1] * k_out[1] + k_out[2] * k_out[2]).sqrt();
    if (k_norm - ch.wavenumber).abs() > 1e-8 * ch.wavenumber.max(1.0) {
        return Err(Error::invalid(format!("|k'| = {k_norm} does not match k_n = {} for n = {n}", ch.wavenumber)));
    }
    let (qx, qy, qz) = (k_out[0], k_out[1], k_out[2] - kin.k);
    let q_perp = qx.hypot(qy);
    let r = pot.support_radius();
    let v = kin.velocity;
    let hbar = kin.units.hbar;
    let omega = kin.omega;
    let nt = time_nodes(pot, kin, &cfg.quad);
    let quad = cfg.quad;
    let failure = Failure::new();

    // ⟨e^{inωt} ∫dz e^{-i q_z z} U φ⟩_t at transverse point (x, y)
    let column = |x: f64, y: f64| -> Result<Complex64> {
        let b = x.hypot(y);
        if b >= r {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let half = (r * r - b * b).sqrt();
        let breaks = pot.z_breakpoints(b);
        let inner = Failure::new();
        let avg = periodic_average(
            |t| {
                let zint = integrate_adaptive(
                    |z| {
                        let u = pot.value_xyz(x, y, z, t);
                        if u == 0.0 {
                            return Complex64::new(0.0, 0.0);
                        }
                        let chi = inner.catch(
                            line_integral(pot, x, y, f64::NEG_INFINITY, z, t - z / v, v, &quad)
                                .map(|s| Complex64::new(-s / (hbar * v), 0.0)),
                        );
                        u * Complex64::from_polar(1.0, chi.re - qz * z)
                    },
                    -half,
                    half,
                    &breaks,
                    &quad,
                );
                let zint = inner.catch(zint.map(|i| i.value));
                zint * Complex64::from_polar(1.0, n as f64 * omega * t)
            },
            TAU / omega,
            nt,
        );
        inner.check()?;
        Ok(avg)
    };

    let transverse = if pot.is_axisymmetric() {
        let res = integrate_adaptive(
            |b| {
                let c = failure.catch(column(b, 0.0));
                c * (2.0 * PI * b * bessel_j(0, q_perp * b))
            },
            0.0,
            r,
            &[],
            &quad,
        );
        failure.catch(res.map(|i| i.value))
    } else {
        let nphi = azimuth_nodes(q_perp, r);
        let q_angle = qy.atan2(qx);
        let res = integrate_adaptive(
            |b| {
                let ring = periodic_average(
                    |phi| {
                        let (x, y) = (b * phi.cos(), b * phi.sin());
                        let c = failure.catch(column(x, y));
                        c * Complex64::from_polar(1.0, -q_perp * b * (phi - q_angle).cos())
                    },
                    TAU,
                    nphi,
                );
                ring * (TAU * b)
            },
            0.0,
            r,
            &[],
            &quad,
        );
        failure.catch(res.map(|i| i.value))
    };
    failure.check()?;
    let pref = -kin.units.mass / (2.0 * PI * hbar * hbar);
    Ok(transverse * pref)
}

fn azimuth_nodes(q_perp: f64, r: f64) -> usize {
    let n = (2.0 * (q_perp * r).ceil()) as usize + 32;
    n + n % 2
}

fn check_small_angle(q_perp: f64, kin: &Kinematics, cfg: &EikonalConfig) -> Result<()> {
    if !cfg.allow_large_angle && q_perp > cfg.small_angle_limit * kin.k {
        return Err(Error::invalid(format!(
            "momentum transfer |q_perp| = {q_perp:.4} exceeds the small-angle limit {:.4} (= {} k); \
             the eikonal reduction assumes |k' - k| << k",
            cfg.small_angle_limit * kin.k,
            cfg.small_angle_limit
        )));
    }
    Ok(())
}

/// Elastic amplitude in the small-angle reduction,
/// `(k/2πi) (1/T) ∫dt ∫d²b e^{-i q_⊥·b} [exp(iχ_tot) - 1]`.
pub fn amplitude_small_angle<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    q_perp: [f64; 2],
    cfg: &EikonalConfig,
) -> Result<Complex64> {
    cfg.quad.validate()?;
    let q = q_perp[0].hypot(q_perp[1]);
    check_small_angle(q, kin, cfg)?;
    let q_angle = q_perp[1].atan2(q_perp[0]);
    let r = pot.support_radius();
    let nt = time_nodes(pot, kin, &cfg.quad);
    let nphi = azimuth_nodes(q, r);
    let quad = cfg.quad;
    let failure = Failure::new();
    let averaged_bracket = |x: f64, y: f64| -> Complex64 {
        let inner = Failure::new();
        let avg = periodic_average(
            |t| {
                let chi = inner.catch(total_phase(pot, kin, x, y, t, cfg.z_ref, &quad).map(|c| Complex64::new(c, 0.0)));
                Complex64::from_polar(1.0, chi.re) - 1.0
            },
            kin.period,
            nt,
        );
        failure.catch(inner.check().map(|_| avg))
    };
    let res = integrate_adaptive(
        |b| {
            let ring = if pot.is_axisymmetric() {
                let g = averaged_bracket(b, 0.0);
                g * periodic_average(|phi| Complex64::from_polar(1.0, -q * b * (phi - q_angle).cos()), TAU, nphi)
            } else {
                periodic_average(
                    |phi| {
                        averaged_bracket(b * phi.cos(), b * phi.sin())
                            * Complex64::from_polar(1.0, -q * b * (phi - q_angle).cos())
                    },
                    TAU,
                    nphi,
                )
            };
            ring * (TAU * b)
        },
        0.0,
        r,
        &[],
        &quad,
    );
    let integral = failure.catch(res.map(|i| i.value));
    failure.check()?;
    Ok(integral * kin.k / (TAU * I))
}

/// Elastic amplitude for axisymmetric potentials,
/// `(k/i) (1/T) ∫dt ∫_0^∞ b db J_0(kbθ) [exp(iχ_tot) - 1]`.
pub fn amplitude_axisym<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    n: i64,
    theta: f64,
    cfg: &EikonalConfig,
) -> Result<Complex64> {
    cfg.quad.validate()?;
    if n != 0 {
        return Err(Error::invalid(format!("axisymmetric reduction is elastic only, got n = {n}")));
    }
    if !pot.is_axisymmetric() {
        return Err(Error::invalid("potential is not axisymmetric"));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid(format!("polar angle must lie in [0, π], got {theta}")));
    }
    check_small_angle(kin.k * theta, kin, cfg)?;
    let r = pot.support_radius();
    let nt = time_nodes(pot, kin, &cfg.quad);
    let quad = cfg.quad;
    let failure = Failure::new();
    let res = integrate_adaptive(
        |b| {
            let inner = Failure::new();
            let avg = periodic_average(
                |t| {
                    let chi =
                        inner.catch(total_phase(pot, kin, b, 0.0, t, cfg.z_ref, &quad).map(|c| Complex64::new(c, 0.0)));
                    Complex64::from_polar(1.0, chi.re) - 1.0
                },
                kin.period,
                nt,
            );
            let avg = failure.catch(inner.check().map(|_| avg));
            avg * (b * bessel_j(0, kin.k * b * theta))
        },
        0.0,
        r,
        &[],
        &quad,
    );
    let integral = failure.catch(res.map(|i| i.value));
    failure.check()?;
    Ok(integral * kin.k / I)
}

/// Forward elastic amplitude of the shaking well with the time average done
/// analytically:
/// `(k/i) ∫_0^{r0} b [e^{-2i U1 L/ħv} J_0((2U0/ħω) sin(ωL/v)) - 1] db`, `L = sqrt(r0² - b²)`.
pub fn forward_closed_form(well: &ShakingSquareWell, kin: &Kinematics, cfg: &EikonalConfig) -> Result<Complex64> {
    cfg.quad.validate()?;
    let hbar = kin.units.hbar;
    let v = kin.velocity;
    let r0 = well.r0;
    let drive = 2.0 * well.u0 / (hbar * well.omega);
    // b = r0 sin u removes the square-root endpoint behaviour at b = r0
    let res = integrate_adaptive(
        |u| {
            let (s, c) = u.sin_cos();
            let half = r0 * c;
            let static_part = Complex64::from_polar(1.0, -2.0 * well.u1 * half / (hbar * v));
            let bracket = static_part * bessel_j(0, drive * (well.omega * half / v).sin()) - 1.0;
            bracket * (r0 * r0 * s * c)
        },
        0.0,
        0.5 * PI,
        &[],
        &cfg.quad,
    )?;
    Ok(res.value * kin.k / I)
}
