//! Independent reference routines for the static and weak-coupling limits.
//!
//! Nothing here shares code with the exact solver: phase shifts are computed
//! in real arithmetic from log-derivatives, with their own Bessel ratios and
//! Legendre recurrence.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kinematics::{Kinematics, UnitSystem};
use crate::potentials::ShakingSquareWell;

/// `j_{l+1}(x)/j_l(x)` by backward continued fraction.
fn bessel_ratio(l: usize, x: f64) -> f64 {
    let top = l + 60 + (2.0 * x) as usize;
    let mut rho = 0.0;
    for m in (l..top).rev() {
        rho = 1.0 / ((2 * m + 3) as f64 / x - rho);
    }
    rho
}

/// `i_{l+1}(x)/i_l(x)` for modified spherical Bessel functions.
fn modified_ratio(l: usize, x: f64) -> f64 {
    let top = l + 60 + (2.0 * x) as usize;
    let mut rho = 0.0;
    for m in (l..top).rev() {
        rho = 1.0 / ((2 * m + 3) as f64 / x + rho);
    }
    rho
}

/// Phase shift `δ_l` for a static spherical well of depth `u1` (positive is
/// repulsive) and radius `r0`, in (-π/2, π/2].
pub fn static_phase_shift(l: usize, k: f64, u1: f64, r0: f64, units: &UnitSystem) -> f64 {
    let energy = units.kinetic_coefficient() * k * k;
    let two_m = 2.0 * units.mass;
    let lf = l as f64;
    // interior log-derivative R'/R at r0
    let gamma = if energy > u1 {
        let q = (two_m * (energy - u1)).sqrt() / units.hbar;
        lf / r0 - q * bessel_ratio(l, q * r0)
    } else if energy < u1 {
        let kappa = (two_m * (u1 - energy)).sqrt() / units.hbar;
        lf / r0 + kappa * modified_ratio(l, kappa * r0)
    } else {
        lf / r0
    };
    let x = k * r0;
    let (mut y_prev, mut y) = (-x.cos() / x, -x.cos() / (x * x) - x.sin() / x);
    if l == 0 {
        y = y_prev;
        y_prev = f64::NAN;
    } else {
        for m in 1..l {
            let next = (2 * m + 1) as f64 / x * y - y_prev;
            y_prev = y;
            y = next;
        }
    }
    // y_{l+1} for the derivative
    let y_next = if l == 0 { -x.cos() / (x * x) - x.sin() / x } else { (2 * l + 1) as f64 / x * y - y_prev };
    let dy = lf / x * y - y_next;
    if !y.is_finite() || !dy.is_finite() {
        return 0.0;
    }
    let d = lf / x - bessel_ratio(l, x);
    let j = 1.0 / (x * x * (dy - d * y));
    let dj = d * j;
    let tan = (k * dj - gamma * j) / (k * dy - gamma * y);
    tan.atan()
}

/// Total cross section `(4π/k²) Σ (2l+1) sin² δ_l` of the static well,
/// summed until the last ten terms all fall below `tol` relative. Returns the
/// cross section and the number of partial waves used.
pub fn static_sigma(k: f64, u1: f64, r0: f64, units: &UnitSystem, tol: f64) -> Result<(f64, usize)> {
    if !(k > 0.0) || !(r0 > 0.0) {
        return Err(Error::invalid("k and r0 must be positive"));
    }
    let mut sum = 0.0;
    let mut quiet = 0;
    let l_min = (k * r0).ceil() as usize + 5;
    for l in 0..10_000 {
        let s = static_phase_shift(l, k, u1, r0, units).sin();
        let term = (2 * l + 1) as f64 * s * s;
        sum += term;
        if l > l_min && term <= tol * sum.abs().max(f64::MIN_POSITIVE) {
            quiet += 1;
            if quiet >= 10 {
                return Ok((4.0 * PI / (k * k) * sum, l + 1));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Convergence { message: "partial-wave sum did not converge".into(), residual: f64::NAN, tolerance: tol })
}

/// Static elastic amplitude `(1/k) Σ (2l+1) e^{iδ_l} sin δ_l P_l(cos θ)`.
pub fn static_amplitude(k: f64, u1: f64, r0: f64, units: &UnitSystem, theta: f64, l_count: usize) -> Complex64 {
    let x = theta.cos();
    let (mut p_prev, mut p) = (0.0, 1.0);
    let mut f = Complex64::new(0.0, 0.0);
    for l in 0..l_count {
        let delta = static_phase_shift(l, k, u1, r0, units);
        f += Complex64::from_polar(delta.sin(), delta) * ((2 * l + 1) as f64 * p);
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p - lf * p_prev) / (lf + 1.0);
        p_prev = p;
        p = next;
    }
    f / k
}

/// Forward amplitude of the static well in the classic eikonal form,
/// `(k/i) ∫_0^{r0} b [exp(-2i U1 L/ħv) - 1] db`, integrated analytically in
/// the chord variable `L`.
pub fn static_eikonal_forward(kin: &Kinematics, u1: f64, r0: f64) -> Complex64 {
    let a = 2.0 * u1 / (kin.units.hbar * kin.velocity);
    let i = Complex64::new(0.0, 1.0);
    let integral = if (a * r0).abs() < 1e-4 {
        // series of ∫_0^R L (e^{-iaL} - 1) dL
        let z = a * r0;
        Complex64::new(-z * z / 8.0, -z / 3.0) * (r0 * r0)
    } else {
        ((-i * a * r0).exp() * (1.0 + i * a * r0) - 1.0) / (a * a) - r0 * r0 / 2.0
    };
    integral * kin.k / i
}

/// `4π (sin qR - qR cos qR) / q³`, the Fourier transform of a unit ball.
fn ball_transform(q: f64, r: f64) -> f64 {
    let x = q * r;
    if x < 1e-3 {
        4.0 * PI * r.powi(3) * (1.0 / 3.0 - x * x / 30.0 + x.powi(4) / 840.0)
    } else {
        4.0 * PI * (x.sin() - x * x.cos()) / q.powi(3)
    }
}

/// First-order Born amplitude for the shaking well into channel `n` at polar
/// angle `θ`. Only `n = 0` (static part `U1`) and `n = ±1` (drive `U0/2`)
/// are nonzero at this order.
pub fn born_amplitude(well: &ShakingSquareWell, kin: &Kinematics, n: i64, theta: f64) -> Result<Complex64> {
    let ch = kin.channel(n);
    if !ch.open {
        return Err(Error::invalid(format!("channel n = {n} is closed")));
    }
    let strength = match n {
        0 => well.u1,
        1 | -1 => 0.5 * well.u0,
        _ => 0.0,
    };
    let kn = ch.wavenumber;
    let q = (kn * kn + kin.k * kin.k - 2.0 * kn * kin.k * theta.cos()).max(0.0).sqrt();
    let pref = -kin.units.mass / (2.0 * PI * kin.units.hbar * kin.units.hbar);
    Ok(Complex64::new(pref * strength * ball_transform(q, well.r0), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_match_closed_forms() {
        for &x in &[0.3f64, 1.0, 4.0, 17.5] {
            let j0 = x.sin() / x;
            let j1 = x.sin() / (x * x) - x.cos() / x;
            assert!((bessel_ratio(0, x) - j1 / j0).abs() < 1e-12 * (j1 / j0).abs().max(1.0));
            let i0 = x.sinh() / x;
            let i1 = x.cosh() / x - x.sinh() / (x * x);
            assert!((modified_ratio(0, x) - i1 / i0).abs() < 1e-12);
        }
    }

    #[test]
    fn s_wave_hard_sphere_limit() {
        // a very high barrier approaches δ_0 = -k r0
        let u = UnitSystem::default();
        let d = static_phase_shift(0, 1.0, 1e8, 1.0, &u);
        assert!((d + 1.0).abs() < 2e-4, "{d}");
    }

    #[test]
    fn s_wave_attractive_closed_form() {
        // tan(k r0 + δ_0) = (k/q) tan(q r0)
        let u = UnitSystem::default();
        let (k, u1, r0): (f64, f64, f64) = (1.3, -4.0, 1.0);
        let q = (k * k - u1).sqrt();
        let want = ((k / q) * (q * r0).tan()).atan() - k * r0;
        let got = static_phase_shift(0, k, u1, r0, &u);
        let diff = (got - want).rem_euclid(PI);
        assert!(diff.min(PI - diff) < 1e-12);
    }

    #[test]
    fn zero_potential_has_no_shift() {
        let u = UnitSystem::default();
        for l in 0..30 {
            assert!(static_phase_shift(l, 5.0, 0.0, 1.0, &u).abs() < 1e-12);
        }
    }

    #[test]
    fn optical_theorem_for_static_amplitude() {
        let u = UnitSystem::default();
        let (k, u1) = (10.0, 30.0);
        let (sigma, n) = static_sigma(k, u1, 1.0, &u, 1e-14).unwrap();
        let f0 = static_amplitude(k, u1, 1.0, &u, 0.0, n);
        assert!((4.0 * PI / k * f0.im - sigma).abs() < 1e-10 * sigma);
    }

    #[test]
    fn weak_potential_matches_born() {
        let u = UnitSystem::default();
        let kin = Kinematics::new(3.0, 1.0, u).unwrap();
        let well = ShakingSquareWell::new(0.0, 1e-4, 1.0, 1.0).unwrap();
        for &th in &[0.0, 0.5, 1.5] {
            let b = born_amplitude(&well, &kin, 0, th).unwrap();
            let f = static_amplitude(3.0, 1e-4, 1.0, &u, th, 30);
            assert!((f.re - b.re).abs() < 1e-3 * b.re.abs(), "{f} {b}");
        }
    }

    #[test]
    fn classic_eikonal_forward_series_branch_is_continuous() {
        let kin = Kinematics::new(37.0, 1.0, UnitSystem::default()).unwrap();
        let a = static_eikonal_forward(&kin, 3.7e-3 * 0.999, 1.0);
        let b = static_eikonal_forward(&kin, 3.7e-3 * 1.001, 1.0);
        assert!((a - b).norm() < 1e-2 * a.norm());
    }
}
