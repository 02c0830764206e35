//! Mode-matching solution of the shaking spherical square well.
//!
//! Inside the well the drive `U0 cos ωt` is spatially uniform, so the gauge
//! factor `exp(-i (U0/ħω) sin ωt)` removes it and leaves free sideband modes
//! `c_m j_l(q_m r)` with `q_m² = 2m(E + mħω - U1)/ħ²`. Expanding the gauge
//! factor with Jacobi-Anger, harmonic `n` of the interior wave is
//! `Σ_m J_{n-m}(U0/ħω) c_m j_l(q_m r)`. Outside, harmonic `n` is the incident
//! partial wave (for `n = 0`) plus `β_{l,n} h_l(k_n r)`. Matching value and
//! radial derivative at `r0` for `|n|, |m| ≤ N` gives two equations per
//! harmonic. Eliminating `β_{l,n}` between them leaves a dense square system
//! of size `2N+1` for the interior coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::Kinematics;
use crate::potentials::ShakingSquareWell;
use crate::specfun::{
    bessel_j, gauss_legendre, legendre_sequence, spherical_bessel_j, spherical_bessel_j_deriv,
    spherical_bessel_j_ratio, spherical_bessel_j_reduced, spherical_hankel1_scaled,
};
use crate::xsec::{sigma_total_optical, ChannelCrossSection, ConvergenceInfo, CrossSectionResult, Method};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const L_STEP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetBasisConfig {
    /// Sidebands kept are `-n_max ..= n_max`; `None` picks `ceil(U0/ħω) + 10`.
    pub n_max: Option<usize>,
    /// Highest partial wave; `None` picks `ceil(k r0) + 15` and extends in
    /// steps of 10 until the tail is below `tol`.
    pub l_max: Option<usize>,
    /// Relative residual allowed in each linear solve, and relative size of
    /// the partial-wave tail.
    pub tol: f64,
    /// Relative change of σ under doubling of `n_max` accepted as converged.
    pub convergence_tol: f64,
    /// Double an automatic `n_max` until σ settles.
    pub auto_converge: bool,
    pub n_cap: usize,
    pub l_cap: usize,
}

impl Default for FloquetBasisConfig {
    fn default() -> Self {
        Self {
            n_max: None,
            l_max: None,
            tol: 1e-8,
            convergence_tol: 1e-6,
            auto_converge: true,
            n_cap: 512,
            l_cap: 2000,
        }
    }
}

impl FloquetBasisConfig {
    /// Fixed truncation, no automatic growth.
    pub fn fixed(n_max: usize, l_max: usize) -> Self {
        Self { n_max: Some(n_max), l_max: Some(l_max), auto_converge: false, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == Some(0) {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        if !(self.tol > 0.0) || !(self.convergence_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        Ok(())
    }
}

pub fn default_n_max(well: &ShakingSquareWell, kin: &Kinematics) -> usize {
    (well.u0.abs() / (kin.units.hbar * well.omega)).ceil() as usize + 10
}

pub fn default_l_max(well: &ShakingSquareWell, kin: &Kinematics) -> usize {
    (kin.k * well.r0).ceil() as usize + 15
}

/// Matching solution of one partial wave. Both coefficient vectors are
/// indexed by `n + n_max` (or `m + n_max`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSolution {
    pub l: usize,
    pub n_max: usize,
    /// Interior mode coefficients, each mode normalised so that the larger of
    /// its value and radial derivative at `r0` has unit modulus.
    pub interior: Vec<Complex64>,
    /// Outgoing coefficients `β_{l,n}`; zero for a channel exactly at threshold.
    pub beta: Vec<Complex64>,
    /// `||Ax - b||_∞ / ||b||_∞`.
    pub residual: f64,
    /// Smallest over largest pivot magnitude of the LU factorisation.
    pub pivot_ratio: f64,
}

/// Radial value and derivative at `r0`, up to a common factor, for an
/// interior mode with squared wavenumber `q2`.
fn interior_column(l: usize, q2: Complex64, r0: f64) -> (Complex64, Complex64) {
    let q = q2.sqrt();
    let x = q * r0;
    let lf = l as f64;
    let log_deriv = if x.norm() < 1.0 {
        // depends on q² only, so q = 0 needs no special case
        lf / r0 - q2 * r0 / (2 * l + 3) as f64 * spherical_bessel_j_reduced(l + 1, x) / spherical_bessel_j_reduced(l, x)
    } else {
        lf / r0 - q * spherical_bessel_j_ratio(l, x)
    };
    if !log_deriv.is_finite() {
        return (ZERO, Complex64::new(1.0, 0.0));
    }
    if log_deriv.norm() > 1.0 {
        (1.0 / log_deriv, Complex64::new(1.0, 0.0))
    } else {
        (Complex64::new(1.0, 0.0), log_deriv)
    }
}

/// Normalised exterior column and the factor that converts the solved
/// coefficient back to `β`; `None` factor means the channel carries no flux.
fn exterior_column(l: usize, kn: Complex64, r0: f64) -> Result<((Complex64, Complex64), Option<Complex64>)> {
    if kn.norm() == 0.0 {
        let d = -((l + 1) as f64) / r0;
        let norm = d.abs().max(1.0);
        return Ok(((Complex64::new(1.0 / norm, 0.0), Complex64::new(d / norm, 0.0)), None));
    }
    let s = spherical_hankel1_scaled(l, kn * r0)?;
    let v = s.value;
    let d = kn * s.deriv;
    let norm = v.norm().max(d.norm());
    // β = x / (norm · e^{log_scale}); underflows to zero when the wave is negligible
    let to_beta = Complex64::new((-(norm.ln() + s.log_scale)).exp(), 0.0);
    Ok(((v / norm, d / norm), Some(to_beta)))
}

/// Solve the matching system for partial wave `l`. An unset `n_max` takes
/// its default; no automatic growth happens at this level.
pub fn solve_partial_wave(
    well: &ShakingSquareWell,
    kin: &Kinematics,
    l: usize,
    cfg: &FloquetBasisConfig,
) -> Result<ChannelSolution> {
    cfg.validate()?;
    let n_max = cfg.n_max.unwrap_or_else(|| default_n_max(well, kin));
    match_partial_wave(well, kin, l, n_max, cfg.tol)
}

fn match_partial_wave(
    well: &ShakingSquareWell,
    kin: &Kinematics,
    l: usize,
    n_max: usize,
    tol: f64,
) -> Result<ChannelSolution> {
    let nn = 2 * n_max + 1;
    let r0 = well.r0;
    let units = kin.units;
    let hw = units.hbar * well.omega;
    let drive = well.u0 / hw;
    let two_m_over_h2 = 2.0 * units.mass / (units.hbar * units.hbar);
    let coupling: Vec<f64> = (0..=4 * n_max).map(|p| bessel_j(p as i32 - 2 * n_max as i32, drive)).collect();
    let coupling_at = |ni: usize, mi: usize| coupling[ni + 2 * n_max - mi];

    let interior: Vec<(Complex64, Complex64)> = (-(n_max as i64)..=n_max as i64)
        .map(|m| {
            let q2 = Complex64::new(two_m_over_h2 * (kin.energy + m as f64 * hw - well.u1), 0.0);
            interior_column(l, q2, r0)
        })
        .collect();
    let mut exterior = Vec::with_capacity(nn);
    let mut to_beta = Vec::with_capacity(nn);
    for n in -(n_max as i64)..=n_max as i64 {
        let kn = kin.channel(n).complex_wavenumber();
        let (col, factor) = exterior_column(l, kn, r0)?;
        exterior.push(col);
        to_beta.push(factor);
    }
    let incident = Complex64::i().powu(l as u32) * (2 * l + 1) as f64;
    let x = Complex64::new(kin.k * r0, 0.0);
    let incident_value = incident * spherical_bessel_j(l, x);
    let incident_deriv = incident * kin.k * spherical_bessel_j_deriv(l, x);
    let rhs_of = |ni: usize| if ni == n_max { (incident_value, incident_deriv) } else { (ZERO, ZERO) };

    if well.u0 == 0.0 && well.u1 == 0.0 {
        // nothing scatters; the interior wave is the incident one
        let (gv, gd) = interior[n_max];
        let mut coeffs = vec![ZERO; nn];
        coeffs[n_max] = if gv.norm() >= gd.norm() { incident_value / gv } else { incident_deriv / gd };
        return Ok(ChannelSolution {
            l,
            n_max,
            interior: coeffs,
            beta: vec![ZERO; nn],
            residual: 0.0,
            pivot_ratio: 1.0,
        });
    }

    // Each harmonic gives two rows sharing one β_n; the combination
    // e_d·(value row) - e_v·(derivative row) removes it.
    let mut a = DMatrix::<Complex64>::zeros(nn, nn);
    let mut rhs = DVector::<Complex64>::zeros(nn);
    for ni in 0..nn {
        let (ev, ed) = exterior[ni];
        for (mi, &(gv, gd)) in interior.iter().enumerate() {
            a[(ni, mi)] = coupling_at(ni, mi) * (gv * ed - gd * ev);
        }
        let (bv, bd) = rhs_of(ni);
        rhs[ni] = bv * ed - bd * ev;
    }
    let mut col_scale = vec![1.0; nn];
    for (mi, scale) in col_scale.iter_mut().enumerate() {
        let m = a.column(mi).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if m > 0.0 {
            a.column_mut(mi).iter_mut().for_each(|v| *v /= m);
            *scale = m;
        }
    }

    let lu = a.lu();
    let diag = lu.u().diagonal();
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
    for d in diag.iter() {
        dmin = dmin.min(d.norm());
        dmax = dmax.max(d.norm());
    }
    let pivot_ratio = if dmax > 0.0 { dmin / dmax } else { 0.0 };
    if !(pivot_ratio > 1e-15) {
        return Err(Error::Singular { l, condition: pivot_ratio });
    }
    let sol = lu.solve(&rhs).ok_or(Error::Singular { l, condition: pivot_ratio })?;
    let coeffs: Vec<Complex64> = sol.iter().zip(&col_scale).map(|(c, s)| c / s).collect();

    // back-substitute for β and measure the full value/derivative mismatch
    let b_norm = incident_value.norm().max(incident_deriv.norm());
    let mut residual = 0.0f64;
    let mut beta = Vec::with_capacity(nn);
    for ni in 0..nn {
        let (ev, ed) = exterior[ni];
        let (mut inner_v, mut inner_d) = (ZERO, ZERO);
        for (mi, &(gv, gd)) in interior.iter().enumerate() {
            let c = coupling_at(ni, mi) * coeffs[mi];
            inner_v += c * gv;
            inner_d += c * gd;
        }
        let (bv, bd) = rhs_of(ni);
        let scaled = if ev.norm() >= ed.norm() { (inner_v - bv) / ev } else { (inner_d - bd) / ed };
        residual = residual.max((inner_v - scaled * ev - bv).norm()).max((inner_d - scaled * ed - bd).norm());
        beta.push(match to_beta[ni] {
            Some(f) => scaled * f,
            None => ZERO,
        });
    }
    let residual = if b_norm > 0.0 { residual / b_norm } else { residual };
    if !(residual <= tol) {
        return Err(Error::Convergence {
            message: format!("matching residual too large for l = {l}"),
            residual,
            tolerance: tol,
        });
    }
    Ok(ChannelSolution { l, n_max, interior: coeffs, beta, residual, pivot_ratio })
}

/// Outgoing wave in one Floquet channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelAmplitude {
    pub n: i64,
    pub energy: f64,
    pub wavenumber: f64,
    pub open: bool,
    /// `a_l` in `f_n(θ) = Σ_l a_l P_l(cos θ)`; empty for closed channels.
    pub partial_amplitudes: Vec<Complex64>,
}

impl ChannelAmplitude {
    pub fn amplitude(&self, theta: f64) -> Complex64 {
        if self.partial_amplitudes.is_empty() {
            return ZERO;
        }
        let p = legendre_sequence(self.partial_amplitudes.len() - 1, theta.cos());
        self.partial_amplitudes.iter().zip(&p).map(|(a, p)| a * p).sum()
    }

    /// `(k_n/k) ∫ |f_n|² dΩ` from orthogonality of the Legendre polynomials.
    pub fn sigma(&self, k: f64) -> f64 {
        let s: f64 = self.partial_amplitudes.iter().enumerate().map(|(l, a)| a.norm_sqr() / (2 * l + 1) as f64).sum();
        self.wavenumber / k * 4.0 * PI * s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub kin: Kinematics,
    pub well: ShakingSquareWell,
    pub n_max: usize,
    pub l_max: usize,
    pub channels: Vec<ChannelAmplitude>,
    pub max_residual: f64,
    pub min_pivot_ratio: f64,
    /// Relative contribution of the last ten partial waves to σ.
    pub tail: f64,
    /// `(n_max, σ)` for every basis tried by the automatic convergence loop.
    pub history: Vec<(usize, f64)>,
}

impl ExactSolution {
    pub fn channel(&self, n: i64) -> Option<&ChannelAmplitude> {
        self.channels.iter().find(|c| c.n == n)
    }

    pub fn amplitude(&self, n: i64, theta: f64) -> Result<Complex64> {
        let ch = self
            .channel(n)
            .ok_or_else(|| Error::invalid(format!("channel n = {n} is outside the basis |n| <= {}", self.n_max)))?;
        if !ch.open {
            return Err(Error::invalid(format!("channel n = {n} is closed")));
        }
        Ok(ch.amplitude(theta))
    }

    /// `(4π/k) Im f_0(0)`.
    pub fn sigma_optical(&self) -> f64 {
        let f0: Complex64 = self.channel(0).map(|c| c.partial_amplitudes.iter().sum()).unwrap_or(ZERO);
        4.0 * PI / self.kin.k * f0.im
    }

    /// Sum of flux-weighted channel cross sections over open channels.
    pub fn sigma_channel_sum(&self) -> f64 {
        self.channels.iter().filter(|c| c.open).map(|c| c.sigma(self.kin.k)).sum()
    }

    /// `(k_n/k) ∫ |f_n|² dΩ` by Gauss-Legendre quadrature in `cos θ`, exact
    /// for the truncated partial-wave sum.
    pub fn channel_sigma_quadrature(&self, n: i64) -> Result<f64> {
        let ch = self
            .channel(n)
            .filter(|c| c.open)
            .ok_or_else(|| Error::invalid(format!("channel n = {n} is closed or outside the basis")))?;
        let (nodes, weights) = gauss_legendre(self.l_max + 8);
        let integral: f64 =
            nodes.iter().zip(&weights).map(|(&x, &w)| w * ch.amplitude(x.clamp(-1.0, 1.0).acos()).norm_sqr()).sum();
        Ok(ch.wavenumber / self.kin.k * 2.0 * PI * integral)
    }

    fn per_channel(&self) -> BTreeMap<i64, ChannelCrossSection> {
        self.channels
            .iter()
            .filter(|c| c.open)
            .map(|c| {
                let sigma = self.channel_sigma_quadrature(c.n).unwrap_or(f64::NAN);
                (c.n, ChannelCrossSection { sigma, wavenumber: c.wavenumber })
            })
            .collect()
    }

    fn convergence(&self) -> ConvergenceInfo {
        ConvergenceInfo {
            n_max: Some(self.n_max),
            l_max: Some(self.l_max),
            residual: self.max_residual,
            tail: Some(self.tail),
            history: self.history.clone(),
        }
    }

    pub fn optical_result(&self) -> CrossSectionResult {
        let f0: Complex64 = self.channel(0).map(|c| c.partial_amplitudes.iter().sum()).unwrap_or(ZERO);
        let opt = sigma_total_optical(f0, self.kin.k);
        CrossSectionResult {
            sigma_tot: opt.sigma,
            per_channel: self.per_channel(),
            method: Method::Exact,
            convergence: self.convergence(),
            negative_sigma: opt.negative,
        }
    }

    pub fn channel_sum_result(&self) -> CrossSectionResult {
        let per_channel = self.per_channel();
        CrossSectionResult {
            sigma_tot: per_channel.values().map(|c| c.sigma).sum(),
            per_channel,
            method: Method::Exact,
            convergence: self.convergence(),
            negative_sigma: false,
        }
    }
}

fn assemble(
    well: &ShakingSquareWell,
    kin: &Kinematics,
    n_max: usize,
    waves: &[ChannelSolution],
    tail: f64,
) -> ExactSolution {
    let channels = (-(n_max as i64)..=n_max as i64)
        .enumerate()
        .map(|(ni, n)| {
            let ch = kin.channel(n);
            let open = ch.open && ch.wavenumber > 0.0;
            let partial_amplitudes = if open {
                waves.iter().map(|w| w.beta[ni] * (-Complex64::i()).powu(w.l as u32 + 1) / ch.wavenumber).collect()
            } else {
                Vec::new()
            };
            ChannelAmplitude { n, energy: ch.energy, wavenumber: ch.wavenumber, open, partial_amplitudes }
        })
        .collect();
    ExactSolution {
        kin: *kin,
        well: *well,
        n_max,
        l_max: waves.len() - 1,
        channels,
        max_residual: waves.iter().map(|w| w.residual).fold(0.0, f64::max),
        min_pivot_ratio: waves.iter().map(|w| w.pivot_ratio).fold(f64::INFINITY, f64::min),
        tail,
        history: Vec::new(),
    }
}

fn solve_waves(
    well: &ShakingSquareWell,
    kin: &Kinematics,
    range: std::ops::Range<usize>,
    n_max: usize,
    tol: f64,
) -> Result<Vec<ChannelSolution>> {
    range.into_par_iter().map(|l| match_partial_wave(well, kin, l, n_max, tol)).collect()
}

/// Relative size of the last `L_STEP` partial waves in σ_opt and in the
/// channel sum.
fn tail_fraction(sol: &ExactSolution) -> f64 {
    let k = sol.kin.k;
    let lo = (sol.l_max + 1).saturating_sub(L_STEP);
    let mut opt_tail = ZERO;
    let mut flux_tail = 0.0;
    for ch in sol.channels.iter().filter(|c| c.open) {
        for (l, a) in ch.partial_amplitudes.iter().enumerate().skip(lo) {
            if ch.n == 0 {
                opt_tail += a;
            }
            flux_tail += ch.wavenumber / k * 4.0 * PI * a.norm_sqr() / (2 * l + 1) as f64;
        }
    }
    let opt_tail = (4.0 * PI / k * opt_tail.im).abs();
    let scale = sol.sigma_optical().abs().max(sol.sigma_channel_sum().abs());
    if scale == 0.0 {
        0.0
    } else {
        opt_tail.max(flux_tail) / scale
    }
}

fn solve_with_basis(
    well: &ShakingSquareWell,
    kin: &Kinematics,
    n_max: usize,
    cfg: &FloquetBasisConfig,
) -> Result<ExactSolution> {
    let mut l_max = cfg.l_max.unwrap_or_else(|| default_l_max(well, kin));
    let mut waves = solve_waves(well, kin, 0..l_max + 1, n_max, cfg.tol)?;
    let mut sol = assemble(well, kin, n_max, &waves, 0.0);
    let mut tail = tail_fraction(&sol);
    if cfg.l_max.is_none() {
        while tail > cfg.tol {
            if l_max + L_STEP > cfg.l_cap {
                return Err(Error::Convergence {
                    message: format!("partial-wave tail still {tail:.3e} at l_max = {l_max}"),
                    residual: tail,
                    tolerance: cfg.tol,
                });
            }
            waves.extend(solve_waves(well, kin, l_max + 1..l_max + 1 + L_STEP, n_max, cfg.tol)?);
            l_max += L_STEP;
            sol = assemble(well, kin, n_max, &waves, 0.0);
            tail = tail_fraction(&sol);
        }
    }
    sol.tail = tail;
    Ok(sol)
}

/// Solve the scattering problem. With an automatic `n_max` and
/// `auto_converge` set, the sideband basis is doubled until σ_opt changes by
/// less than `convergence_tol`.
pub fn solve(well: &ShakingSquareWell, kin: &Kinematics, cfg: &FloquetBasisConfig) -> Result<ExactSolution> {
    cfg.validate()?;
    if (kin.omega - well.omega).abs() > 1e-12 * well.omega {
        return Err(Error::invalid("kinematics and potential disagree on ω"));
    }
    let mut n_max = cfg.n_max.unwrap_or_else(|| default_n_max(well, kin));
    let mut sol = solve_with_basis(well, kin, n_max, cfg)?;
    let mut history = vec![(n_max, sol.sigma_optical())];
    if cfg.n_max.is_none() && cfg.auto_converge {
        loop {
            let next = 2 * n_max;
            if next > cfg.n_cap {
                return Err(Error::Convergence {
                    message: format!("σ not converged at n_max = {n_max}"),
                    residual: rel_change(&history),
                    tolerance: cfg.convergence_tol,
                });
            }
            let candidate = solve_with_basis(well, kin, next, cfg)?;
            history.push((next, candidate.sigma_optical()));
            n_max = next;
            sol = candidate;
            if rel_change(&history) <= cfg.convergence_tol {
                break;
            }
        }
    }
    sol.history = history;
    Ok(sol)
}

fn rel_change(history: &[(usize, f64)]) -> f64 {
    match history {
        [.., (_, a), (_, b)] => {
            let d = (b - a).abs();
            if d == 0.0 {
                0.0
            } else {
                d / b.abs()
            }
        }
        _ => f64::INFINITY,
    }
}

/// `f_n(θ)` from a converged solve.
pub fn exact_amplitude(
    well: &ShakingSquareWell,
    kin: &Kinematics,
    cfg: &FloquetBasisConfig,
    n: i64,
    theta: f64,
) -> Result<Complex64> {
    solve(well, kin, cfg)?.amplitude(n, theta)
}

/// Total cross section from the optical theorem.
pub fn sigma_total_exact(
    well: &ShakingSquareWell,
    kin: &Kinematics,
    cfg: &FloquetBasisConfig,
) -> Result<CrossSectionResult> {
    Ok(solve(well, kin, cfg)?.optical_result())
}

/// Total cross section as the sum of angle-integrated channel cross sections.
pub fn sigma_channel_sum(
    well: &ShakingSquareWell,
    kin: &Kinematics,
    cfg: &FloquetBasisConfig,
) -> Result<CrossSectionResult> {
    Ok(solve(well, kin, cfg)?.channel_sum_result())
}
