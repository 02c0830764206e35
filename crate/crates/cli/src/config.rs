//! Run configuration: built-in defaults, an optional preset, a flat TOML file
//! and command-line flags, applied in that order.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use floquet_eikonal::{EikonalConfig, FloquetBasisConfig, Kinematics, QuadratureConfig, ShakingSquareWell, UnitSystem};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const PROFILE_ENV: &str = "FLOQUET_EA_PROFILE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// ħ = 2m = r0 = 1
    #[default]
    #[serde(rename = "hbar-2m")]
    #[value(name = "hbar-2m")]
    Hbar2m,
    /// ħ = m = r0 = 1
    HbarM,
}

impl Units {
    pub fn system(self) -> UnitSystem {
        match self {
            Units::Hbar2m => UnitSystem::hbar_2m(),
            Units::HbarM => UnitSystem::hbar_m(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Ea,
    Exact,
    #[default]
    Both,
}

impl MethodChoice {
    pub fn ea(self) -> bool {
        matches!(self, MethodChoice::Ea | MethodChoice::Both)
    }

    pub fn exact(self) -> bool {
        matches!(self, MethodChoice::Exact | MethodChoice::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Strict,
    #[default]
    Default,
    Fast,
}

struct ProfileValues {
    tol: f64,
    convergence_tol: f64,
    quad_tol: f64,
    t_nodes: usize,
}

impl Profile {
    fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "strict" => Some(Profile::Strict),
            "default" => Some(Profile::Default),
            "fast" => Some(Profile::Fast),
            _ => None,
        }
    }

    fn values(self) -> ProfileValues {
        match self {
            Profile::Strict => ProfileValues { tol: 1e-10, convergence_tol: 1e-8, quad_tol: 1e-12, t_nodes: 128 },
            Profile::Default => ProfileValues { tol: 1e-8, convergence_tol: 1e-6, quad_tol: 1e-10, t_nodes: 64 },
            Profile::Fast => ProfileValues { tol: 1e-6, convergence_tol: 1e-4, quad_tol: 1e-8, t_nodes: 32 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Axis {
    #[serde(rename = "U0")]
    #[value(name = "U0")]
    U0,
    #[serde(rename = "U1")]
    #[value(name = "U1")]
    U1,
    #[serde(rename = "k")]
    #[value(name = "k")]
    K,
    #[serde(rename = "omega")]
    #[value(name = "omega")]
    Omega,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::U0 => "U0",
            Axis::U1 => "U1",
            Axis::K => "k",
            Axis::Omega => "omega",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    FigB,
    FigC,
    FigD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One layer of settings. Every key is optional; the same struct is read from
/// the config file and from command-line flags.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Flat TOML config file.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub preset: Option<Preset>,

    /// Drive amplitude.
    #[arg(long = "U0", allow_negative_numbers = true)]
    #[serde(rename = "U0")]
    pub u0: Option<f64>,

    /// Static depth.
    #[arg(long = "U1", allow_negative_numbers = true)]
    #[serde(rename = "U1")]
    pub u1: Option<f64>,

    #[arg(long)]
    pub omega: Option<f64>,

    #[arg(long)]
    pub r0: Option<f64>,

    /// Incident wavenumber.
    #[arg(long)]
    pub k: Option<f64>,

    #[arg(long)]
    pub units: Option<Units>,

    #[arg(long)]
    pub method: Option<MethodChoice>,

    /// Tolerance profile; falls back to the FLOQUET_EA_PROFILE environment variable.
    #[arg(long)]
    pub profile: Option<Profile>,

    /// Fixed sideband cutoff of the exact solver.
    #[arg(long)]
    pub n_max: Option<usize>,

    /// Fixed partial-wave cutoff of the exact solver.
    #[arg(long)]
    pub l_max: Option<usize>,

    /// Matching residual and partial-wave tail tolerance.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Relative σ change accepted when growing the sideband basis.
    #[arg(long)]
    pub convergence_tol: Option<f64>,

    /// Quadrature tolerance of the eikonal integrals.
    #[arg(long)]
    pub quad_tol: Option<f64>,

    /// Minimum node count of the time average.
    #[arg(long)]
    pub t_nodes: Option<usize>,

    #[arg(long, allow_negative_numbers = true)]
    pub z_ref: Option<f64>,

    #[arg(long)]
    pub sweep_axis: Option<Axis>,

    #[arg(long, allow_negative_numbers = true)]
    pub sweep_start: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub sweep_stop: Option<f64>,

    #[arg(long)]
    pub sweep_steps: Option<usize>,

    /// Tie U1 to U0 as U1 = u1_ratio · U0.
    #[arg(long, allow_negative_numbers = true)]
    pub u1_ratio: Option<f64>,

    /// Floquet channel of the amplitude table.
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,

    #[arg(long)]
    pub theta_start: Option<f64>,

    #[arg(long)]
    pub theta_stop: Option<f64>,

    #[arg(long)]
    pub theta_steps: Option<usize>,

    /// Largest q_⊥/k accepted for eikonal amplitudes.
    #[arg(long)]
    pub small_angle_limit: Option<f64>,

    /// Report eikonal amplitudes outside the small-angle limit.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub force: Option<bool>,

    /// Replace the tolerance of every validation check.
    #[arg(long)]
    pub check_tol: Option<f64>,

    /// Run only the fast validation checks.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub quick: Option<bool>,

    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    #[arg(long)]
    pub format: Option<Format>,

    /// Also write `<output>.json`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub json_mirror: Option<bool>,

    /// Also write a gnuplot script `<output>.gp`.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub gnuplot: Option<bool>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),* $(,)?) => {
        $(if $src.$f.is_some() { $dst.$f = $src.$f.clone(); })*
    };
}

impl Settings {
    fn overlay(&mut self, top: &Settings) {
        overlay!(
            self,
            top,
            preset,
            u0,
            u1,
            omega,
            r0,
            k,
            units,
            method,
            profile,
            n_max,
            l_max,
            tol,
            convergence_tol,
            quad_tol,
            t_nodes,
            z_ref,
            sweep_axis,
            sweep_start,
            sweep_stop,
            sweep_steps,
            u1_ratio,
            n,
            theta_start,
            theta_stop,
            theta_steps,
            small_angle_limit,
            force,
            check_tol,
            quick,
            output,
            format,
            json_mirror,
            gnuplot,
        );
    }

    fn preset(p: Preset) -> Settings {
        let mut s = Settings { method: Some(MethodChoice::Both), k: Some(37.0), ..Default::default() };
        match p {
            Preset::FigB => {
                s.u1 = Some(0.0);
                s.omega = Some(10.0);
                s.sweep_axis = Some(Axis::U0);
                s.sweep_start = Some(0.0);
                s.sweep_stop = Some(100.0);
                s.sweep_steps = Some(11);
            }
            Preset::FigC => {
                s.omega = Some(1.0);
                s.u1_ratio = Some(10.0);
                s.sweep_axis = Some(Axis::U0);
                s.sweep_start = Some(0.0);
                s.sweep_stop = Some(30.0);
                s.sweep_steps = Some(31);
            }
            Preset::FigD => {
                s.u0 = Some(10.0);
                s.u1 = Some(10.0);
                s.omega = Some(1.0);
                s.sweep_axis = Some(Axis::K);
                s.sweep_start = Some(10.0);
                s.sweep_stop = Some(50.0);
                s.sweep_steps = Some(41);
            }
        }
        s
    }
}

/// Fully resolved configuration, written into every output header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(rename = "U0")]
    pub u0: f64,
    #[serde(rename = "U1")]
    pub u1: f64,
    pub omega: f64,
    pub r0: f64,
    pub k: f64,
    pub units: Units,
    pub method: MethodChoice,
    pub profile: Profile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    pub tol: f64,
    pub convergence_tol: f64,
    pub quad_tol: f64,
    pub t_nodes: usize,
    pub z_ref: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_axis: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u1_ratio: Option<f64>,
    pub n: i64,
    pub theta_start: f64,
    pub theta_stop: f64,
    pub theta_steps: usize,
    pub small_angle_limit: f64,
    pub force: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_tol: Option<f64>,
    pub quick: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub format: Format,
    pub json_mirror: bool,
    pub gnuplot: bool,
}

fn read_file(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::invalid(format!("malformed config {}: {e}", path.display())))
}

fn env_profile() -> Result<Option<Profile>, CliError> {
    match std::env::var(PROFILE_ENV) {
        Ok(v) => Profile::parse(&v)
            .map(Some)
            .ok_or_else(|| CliError::invalid(format!("{PROFILE_ENV}={v:?}: expected strict, default or fast"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::invalid(format!("{PROFILE_ENV}: {e}"))),
    }
}

impl RunConfig {
    pub fn resolve(flags: &Settings) -> Result<Self, CliError> {
        let mut merged = match &flags.config {
            Some(path) => read_file(path)?,
            None => Settings::default(),
        };
        merged.overlay(flags);
        let mut s = merged.preset.map(Settings::preset).unwrap_or_default();
        s.overlay(&merged);

        let profile = match s.profile {
            Some(p) => p,
            None => env_profile()?.unwrap_or_default(),
        };
        let pv = profile.values();
        let mut cfg = RunConfig {
            preset: s.preset,
            u0: s.u0.unwrap_or(0.0),
            u1: s.u1.unwrap_or(0.0),
            omega: s.omega.unwrap_or(1.0),
            r0: s.r0.unwrap_or(1.0),
            k: s.k.unwrap_or(37.0),
            units: s.units.unwrap_or_default(),
            method: s.method.unwrap_or_default(),
            profile,
            n_max: s.n_max,
            l_max: s.l_max,
            tol: s.tol.unwrap_or(pv.tol),
            convergence_tol: s.convergence_tol.unwrap_or(pv.convergence_tol),
            quad_tol: s.quad_tol.unwrap_or(pv.quad_tol),
            t_nodes: s.t_nodes.unwrap_or(pv.t_nodes),
            z_ref: s.z_ref.unwrap_or(0.0),
            sweep_axis: s.sweep_axis,
            sweep_start: s.sweep_start,
            sweep_stop: s.sweep_stop,
            sweep_steps: s.sweep_steps,
            u1_ratio: s.u1_ratio,
            n: s.n.unwrap_or(0),
            theta_start: s.theta_start.unwrap_or(0.0),
            theta_stop: s.theta_stop.unwrap_or(0.05),
            theta_steps: s.theta_steps.unwrap_or(6),
            small_angle_limit: s.small_angle_limit.unwrap_or(0.2),
            force: s.force.unwrap_or(false),
            check_tol: s.check_tol,
            quick: s.quick.unwrap_or(false),
            output: s.output,
            format: s.format.unwrap_or_default(),
            json_mirror: s.json_mirror.unwrap_or(false),
            gnuplot: s.gnuplot.unwrap_or(false),
        };
        if let Some(ratio) = cfg.u1_ratio {
            cfg.u1 = ratio * cfg.u0;
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let positive = [("omega", self.omega), ("r0", self.r0), ("k", self.k), ("tol", self.tol)];
        for (name, v) in positive.iter().chain(&[
            ("convergence_tol", self.convergence_tol),
            ("quad_tol", self.quad_tol),
            ("small_angle_limit", self.small_angle_limit),
        ]) {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(CliError::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("U0", self.u0), ("U1", self.u1), ("z_ref", self.z_ref)] {
            if !v.is_finite() {
                return Err(CliError::invalid(format!("{name} must be finite")));
            }
        }
        if self.n_max == Some(0) {
            return Err(CliError::invalid("n_max must be at least 1"));
        }
        if self.t_nodes < 2 {
            return Err(CliError::invalid("t_nodes must be at least 2"));
        }
        Ok(())
    }

    pub fn units(&self) -> UnitSystem {
        self.units.system()
    }

    pub fn well(&self) -> floquet_eikonal::Result<ShakingSquareWell> {
        ShakingSquareWell::new(self.u0, self.u1, self.omega, self.r0)
    }

    pub fn kinematics(&self) -> floquet_eikonal::Result<Kinematics> {
        Kinematics::new(self.k, self.omega, self.units())
    }

    pub fn basis(&self) -> FloquetBasisConfig {
        let mut b = FloquetBasisConfig { tol: self.tol, convergence_tol: self.convergence_tol, ..Default::default() };
        b.n_max = self.n_max;
        b.l_max = self.l_max;
        b
    }

    pub fn eikonal(&self) -> EikonalConfig {
        let quad = QuadratureConfig {
            abs_tol: self.quad_tol,
            rel_tol: self.quad_tol,
            t_nodes: self.t_nodes,
            ..Default::default()
        };
        EikonalConfig {
            small_angle_limit: self.small_angle_limit,
            allow_large_angle: self.force,
            z_ref: self.z_ref,
            ..EikonalConfig::with_quadrature(quad)
        }
    }

    /// Copy with one parameter replaced, keeping `U1 = u1_ratio · U0` when tied.
    pub fn with_axis(&self, axis: Axis, value: f64) -> Self {
        let mut c = self.clone();
        match axis {
            Axis::U0 => c.u0 = value,
            Axis::U1 => c.u1 = value,
            Axis::K => c.k = value,
            Axis::Omega => c.omega = value,
        }
        if let Some(ratio) = c.u1_ratio {
            if axis != Axis::U1 {
                c.u1 = ratio * c.u0;
            }
        }
        c
    }

    /// Sweep grid in ascending order.
    pub fn sweep_values(&self) -> Result<(Axis, Vec<f64>), CliError> {
        let axis = self.sweep_axis.ok_or_else(|| CliError::invalid("sweep_axis is not set"))?;
        let (a, b) = match (self.sweep_start, self.sweep_stop) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(CliError::invalid("sweep_start and sweep_stop are required")),
        };
        let steps = self.sweep_steps.unwrap_or(11);
        if !(a.is_finite() && b.is_finite()) || a == b {
            return Err(CliError::invalid(format!("sweep range [{a}, {b}] has zero length")));
        }
        if steps < 2 {
            return Err(CliError::invalid("sweep_steps must be at least 2"));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let values = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
        Ok((axis, values))
    }

    pub fn thetas(&self) -> Result<Vec<f64>, CliError> {
        let (a, b, steps) = (self.theta_start, self.theta_stop, self.theta_steps);
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < a || b > std::f64::consts::PI {
            return Err(CliError::invalid(format!("theta range [{a}, {b}] must lie in [0, π] and be ascending")));
        }
        match steps {
            0 => Err(CliError::invalid("theta_steps must be at least 1")),
            1 => Ok(vec![a]),
            _ => Ok((0..steps).map(|i| a + (b - a) * i as f64 / (steps - 1) as f64).collect()),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }
}
