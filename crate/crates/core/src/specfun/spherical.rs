//! Spherical Bessel and Hankel functions of complex argument.
//!
//! `j_l` comes from ratios j_l/j_{l-1} built by downward recurrence, anchored on the
//! closed forms of `j_0` or `j_1` (whichever is larger in magnitude), with the
//! power series for `|z| < 1`. `h_l^(1)` uses upward recurrence, which is
//! stable because `h_l` is the dominant solution as `l` grows.

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const SERIES_RADIUS: f64 = 1.0;
const RESCALE_ABOVE: f64 = 1e200;

/// `j_l(z)`.
pub fn spherical_bessel_j(l: usize, z: Complex64) -> Complex64 {
    j_sequence(l, z)[l]
}

/// `d j_l / dz`.
pub fn spherical_bessel_j_deriv(l: usize, z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return if l == 1 { (1.0 / 3.0).into() } else { 0.0.into() };
    }
    let seq = j_sequence(l + 1, z);
    seq[l] * (l as f64) / z - seq[l + 1]
}

/// `(2l+1)!! j_l(z) / z^l`, an even entire function of `z` equal to 1 at the origin.
///
/// Used where `j_l` itself would underflow for small arguments and large `l`.
pub fn spherical_bessel_j_reduced(l: usize, z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        return reduced_series(l, z);
    }
    let mut v = spherical_bessel_j(l, z);
    for i in 1..=l {
        v *= (2 * i + 1) as f64 / z;
    }
    v
}

/// `j_{l+1}(z) / j_l(z)` by backward continued fraction, with no overflow or
/// underflow for large `l`.
pub fn spherical_bessel_j_ratio(l: usize, z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        return z / (2 * l + 3) as f64 * reduced_series(l + 1, z) / reduced_series(l, z);
    }
    let top = l + 30 + (2.0 * z.norm()) as usize + (10.0 * z.norm().cbrt()).ceil() as usize;
    let mut rho = Complex64::new(0.0, 0.0);
    for m in (l..top).rev() {
        rho = 1.0 / ((2 * m + 3) as f64 / z - rho);
    }
    rho
}

/// `y_l(z)`, obtained as `(h_l^(1) - j_l) / i`.
pub fn spherical_bessel_y(l: usize, z: Complex64) -> Result<Complex64> {
    let h = spherical_hankel1(l, z)?;
    Ok((h - spherical_bessel_j(l, z)) / I)
}

/// `h_l^(1)(z) = j_l(z) + i y_l(z)`.
pub fn spherical_hankel1(l: usize, z: Complex64) -> Result<Complex64> {
    let s = spherical_hankel1_scaled(l, z)?;
    Ok(s.value * s.log_scale.exp())
}

/// `d h_l^(1) / dz`.
pub fn spherical_hankel1_deriv(l: usize, z: Complex64) -> Result<Complex64> {
    let s = spherical_hankel1_scaled(l, z)?;
    Ok(s.deriv * s.log_scale.exp())
}

/// `h_l^(1)` and its derivative sharing a real exponent, so that large orders at
/// small arguments and decaying values at imaginary arguments stay representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledHankel {
    pub value: Complex64,
    pub deriv: Complex64,
    /// True value is `value * exp(log_scale)`.
    pub log_scale: f64,
}

pub fn spherical_hankel1_scaled(l: usize, z: Complex64) -> Result<ScaledHankel> {
    if z.norm() == 0.0 {
        return Err(Error::invalid("spherical Hankel function is singular at z = 0"));
    }
    // e^{iz} = e^{i Re z} e^{-Im z}; the real exponent goes into log_scale.
    let phase = Complex64::from_polar(1.0, z.re);
    let mut log_scale = -z.im;
    let h0 = -I * phase / z;
    let h1 = -phase * (z + I) / (z * z);
    if l == 0 {
        return Ok(ScaledHankel { value: h0, deriv: -h1, log_scale });
    }
    let (mut prev, mut cur) = (h0, h1);
    for k in 1..l {
        let next = cur * ((2 * k + 1) as f64) / z - prev;
        prev = cur;
        cur = next;
        if cur.norm() > RESCALE_ABOVE {
            prev /= RESCALE_ABOVE;
            cur /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
    }
    let deriv = prev - cur * ((l + 1) as f64) / z;
    Ok(ScaledHankel { value: cur, deriv, log_scale })
}

/// `j_0(z) ..= j_{l_max}(z)`.
fn j_sequence(l_max: usize, z: Complex64) -> Vec<Complex64> {
    let r = z.norm();
    if r == 0.0 {
        let mut v = vec![Complex64::new(0.0, 0.0); l_max + 1];
        v[0] = 1.0.into();
        return v;
    }
    if r < SERIES_RADIUS {
        let mut out = Vec::with_capacity(l_max + 1);
        let mut lead = Complex64::new(1.0, 0.0);
        for l in 0..=l_max {
            if l > 0 {
                lead *= z / (2 * l + 1) as f64;
            }
            out.push(lead * reduced_series(l, z));
        }
        return out;
    }
    miller(l_max, z)
}

fn reduced_series(l: usize, z: Complex64) -> Complex64 {
    let q = -0.5 * z * z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..80 {
        term *= q / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn miller(l_max: usize, z: Complex64) -> Vec<Complex64> {
    let r = z.norm();
    let top = l_max.max(r.ceil() as usize) + 20 + (10.0 * r.cbrt()).ceil() as usize;
    // ratios[k] = j_k / j_{k-1}, run downward so nothing overflows
    let mut ratios = vec![Complex64::new(0.0, 0.0); top + 2];
    for k in (1..=top).rev() {
        ratios[k] = 1.0 / ((2 * k + 1) as f64 / z - ratios[k + 1]);
    }
    let (s, c) = (z.sin(), z.cos());
    let j0 = s / z;
    let j1 = s / (z * z) - c / z;
    let mut vals = Vec::with_capacity(l_max + 1);
    if j0.norm() >= j1.norm() {
        vals.push(j0);
    } else {
        vals.push(j1 / ratios[1]);
    }
    for k in 1..=l_max {
        let next = if k == 1 && j0.norm() < j1.norm() { j1 } else { vals[k - 1] * ratios[k] };
        vals.push(next);
    }
    vals
}
