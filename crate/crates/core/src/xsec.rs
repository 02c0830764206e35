//! Cross sections from scattering amplitudes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eikonal::{amplitude_small_angle, forward_closed_form, EikonalConfig};
use crate::error::{Error, Result};
use crate::kinematics::Kinematics;
use crate::potentials::{PeriodicPotential, ShakingSquareWell};

/// Flux factor applied to `|f_n|²` in the differential cross section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxMode {
    /// `sqrt(k_n/k) |f|²`.
    #[default]
    AsPrinted,
    /// `(k_n/k) |f|²`, the ratio of outgoing to incident probability current.
    FluxWeighted,
}

impl FluxMode {
    pub fn factor(self, kn: f64, k: f64) -> f64 {
        match self {
            FluxMode::AsPrinted => (kn / k).sqrt(),
            FluxMode::FluxWeighted => kn / k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ea,
    Exact,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Ea => "ea",
            Method::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCrossSection {
    pub sigma: f64,
    pub wavenumber: f64,
}

/// What a cross section was computed with and how well it converged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceInfo {
    pub n_max: Option<usize>,
    pub l_max: Option<usize>,
    /// Worst matching residual, or the quadrature error estimate for EA.
    pub residual: f64,
    /// Relative weight of the last partial waves kept.
    pub tail: Option<f64>,
    /// `(n_max, σ)` pairs from automatic basis growth.
    pub history: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionResult {
    pub sigma_tot: f64,
    /// Open channels only; empty for the eikonal total cross section.
    pub per_channel: BTreeMap<i64, ChannelCrossSection>,
    pub method: Method,
    pub convergence: ConvergenceInfo,
    /// Set when the optical theorem returned a negative value.
    pub negative_sigma: bool,
}

/// `dσ/dΩ` into channel `n` for amplitude `f`.
pub fn differential_cross_section(f: Complex64, kin: &Kinematics, n: i64, mode: FluxMode) -> Result<f64> {
    let ch = kin.channel(n);
    if !ch.open || ch.wavenumber == 0.0 {
        return Err(Error::invalid(format!("channel n = {n} is closed")));
    }
    Ok(mode.factor(ch.wavenumber, kin.k) * f.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalSigma {
    pub sigma: f64,
    pub negative: bool,
}

/// `(4π/k) Im f(0)`. A negative value is passed through unchanged with
/// `negative` set.
pub fn sigma_total_optical(f_forward: Complex64, k: f64) -> OpticalSigma {
    let sigma = 4.0 * PI / k * f_forward.im;
    OpticalSigma { sigma, negative: sigma < 0.0 }
}

/// Eikonal total cross section of the shaking well from the closed-form
/// forward amplitude.
pub fn sigma_ea(well: &ShakingSquareWell, kin: &Kinematics, cfg: &EikonalConfig) -> Result<CrossSectionResult> {
    let f = forward_closed_form(well, kin, cfg)?;
    Ok(ea_result(f, kin, cfg))
}

/// Eikonal total cross section of any potential from the small-angle
/// amplitude at zero momentum transfer.
pub fn sigma_ea_general<P: PeriodicPotential + ?Sized>(
    pot: &P,
    kin: &Kinematics,
    cfg: &EikonalConfig,
) -> Result<CrossSectionResult> {
    let f = amplitude_small_angle(pot, kin, [0.0, 0.0], cfg)?;
    Ok(ea_result(f, kin, cfg))
}

fn ea_result(f: Complex64, kin: &Kinematics, cfg: &EikonalConfig) -> CrossSectionResult {
    let opt = sigma_total_optical(f, kin.k);
    CrossSectionResult {
        sigma_tot: opt.sigma,
        per_channel: BTreeMap::new(),
        method: Method::Ea,
        convergence: ConvergenceInfo { residual: cfg.quad.rel_tol, ..Default::default() },
        negative_sigma: opt.negative,
    }
}
