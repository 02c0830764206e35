//! Built-in self-consistency checks: closed form against quadrature, static
//! limits against independent solvers, unitarity, Born limit and transport
//! equation order.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use crate::eikonal::{amplitude_axisym, forward_closed_form, transport_residual, EikonalConfig};
use crate::error::Result;
use crate::exact::{solve, FloquetBasisConfig};
use crate::kinematics::{Kinematics, UnitSystem};
use crate::oracle::{born_amplitude, static_eikonal_forward, static_sigma};
use crate::potentials::{GaussianWell, ShakingSquareWell};
use crate::specfun::QuadratureConfig;
use crate::xsec::sigma_total_optical;

/// `|a - b| / |b|`, with differences below `1e-15 · area` counted as zero so
/// that two vanishing cross sections compare equal.
pub fn relative_difference(a: f64, b: f64, area: f64) -> f64 {
    let d = (a - b).abs();
    if d <= 1e-15 * area {
        0.0
    } else {
        d / b.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SuiteOptions {
    /// Only the fast checks.
    pub quick: bool,
    /// Replaces every check's own tolerance.
    pub tolerance: Option<f64>,
    pub units: Option<UnitSystem>,
}

struct Runner {
    opts: SuiteOptions,
    checks: Vec<Check>,
}

impl Runner {
    fn run(&mut self, name: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) {
        let tolerance = self.opts.tolerance.unwrap_or(tolerance);
        let start = Instant::now();
        let measured = f().unwrap_or(f64::INFINITY);
        self.checks.push(Check {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
}

fn kin(k: f64, omega: f64, units: UnitSystem) -> Result<Kinematics> {
    Kinematics::new(k, omega, units)
}

pub fn run_suite(opts: SuiteOptions) -> Vec<Check> {
    let units = opts.units.unwrap_or_default();
    let mut r = Runner { opts, checks: Vec::new() };
    let eik = EikonalConfig::default();

    r.run("closed-form forward amplitude vs (t, b) quadrature", 1e-8, || {
        let mut worst = 0.0f64;
        for &(u0, u1, w, k) in &[(100.0, 0.0, 10.0, 37.0), (10.0, 100.0, 1.0, 37.0), (60.0, 30.0, 0.7, 25.0)] {
            let well = ShakingSquareWell::new(u0, u1, w, 1.0)?;
            let kn = kin(k, w, units)?;
            let a = forward_closed_form(&well, &kn, &eik)?;
            let b = amplitude_axisym(&well, &kn, 0, 0.0, &eik)?;
            worst = worst.max((a - b).norm() / b.norm());
        }
        Ok(worst)
    });

    r.run("static eikonal cross section vs analytic chord integral", 1e-6, || {
        let mut worst = 0.0f64;
        for &u1 in &[1.0, 10.0, 100.0] {
            for &k in &[10.0, 37.0] {
                let well = ShakingSquareWell::new(0.0, u1, 1.0, 1.0)?;
                let kn = kin(k, 1.0, units)?;
                let got = sigma_total_optical(forward_closed_form(&well, &kn, &eik)?, k).sigma;
                let want = sigma_total_optical(static_eikonal_forward(&kn, u1, 1.0), k).sigma;
                worst = worst.max(relative_difference(got, want, PI));
            }
        }
        Ok(worst)
    });

    r.run("static exact cross section vs phase-shift solver", 1e-6, || {
        let mut worst = 0.0f64;
        for &u1 in &[1.0, 10.0, 100.0] {
            for &k in &[10.0, 37.0] {
                let well = ShakingSquareWell::new(0.0, u1, 1.0, 1.0)?;
                let kn = kin(k, 1.0, units)?;
                let got = solve(&well, &kn, &FloquetBasisConfig::default())?.sigma_optical();
                let (want, _) = static_sigma(k, u1, 1.0, &units, 1e-14)?;
                worst = worst.max(relative_difference(got, want, PI));
            }
        }
        Ok(worst)
    });

    r.run("unitarity of the exact solver", 1e-4, || {
        let points: &[(f64, f64, f64, f64)] = if opts.quick {
            &[(100.0, 0.0, 10.0, 37.0)]
        } else {
            &[(100.0, 0.0, 10.0, 37.0), (20.0, 200.0, 1.0, 37.0), (10.0, 10.0, 1.0, 10.0), (100.0, 0.0, 3.0, 37.0)]
        };
        let mut worst = 0.0f64;
        for &(u0, u1, w, k) in points {
            let well = ShakingSquareWell::new(u0, u1, w, 1.0)?;
            let sol = solve(&well, &kin(k, w, units)?, &FloquetBasisConfig::default())?;
            worst = worst.max(relative_difference(sol.sigma_channel_sum(), sol.sigma_optical(), PI));
        }
        Ok(worst)
    });

    r.run("weak-coupling eikonal amplitude vs Born", 1e-2, || {
        let well = ShakingSquareWell::new(0.01, 0.01, 1.0, 1.0)?;
        let kn = kin(37.0, 1.0, units)?;
        let mut worst = 0.0f64;
        for &theta in &[0.0, 0.025, 0.05] {
            let ea = amplitude_axisym(&well, &kn, 0, theta, &eik)?;
            let born = born_amplitude(&well, &kn, 0, theta)?;
            worst = worst.max((ea - born).norm() / born.norm());
        }
        Ok(worst)
    });

    r.run("transport residual order (|ratio - 4|)", 0.5, || {
        let g = GaussianWell::new(3.0, 2.0, 4.0, 0.8)?;
        let kn = kin(5.0, 4.0, units)?;
        let cfg =
            EikonalConfig::with_quadrature(QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-14, ..Default::default() });
        let coarse = transport_residual(&g, &kn, 0.3, 0.2, 0.1, 0.02, &cfg)?;
        let fine = transport_residual(&g, &kn, 0.3, 0.2, 0.1, 0.01, &cfg)?;
        Ok((coarse / fine - 4.0).abs())
    });

    if !opts.quick {
        r.run("eikonal vs exact, U1 = 0, k = 37, ω = 10", 0.05, || {
            let mut worst = 0.0f64;
            for u0 in [25.0, 50.0, 75.0, 100.0] {
                let well = ShakingSquareWell::new(u0, 0.0, 10.0, 1.0)?;
                let kn = kin(37.0, 10.0, units)?;
                let ea = sigma_total_optical(forward_closed_form(&well, &kn, &eik)?, 37.0).sigma;
                let ex = solve(&well, &kn, &FloquetBasisConfig::default())?.sigma_optical();
                worst = worst.max(relative_difference(ea, ex, PI));
            }
            Ok(worst)
        });

        r.run("exact σ under doubled n_max and l_max + 10", 1e-3, || {
            let well = ShakingSquareWell::new(100.0, 0.0, 10.0, 1.0)?;
            let kn = kin(37.0, 10.0, units)?;
            let base = solve(&well, &kn, &FloquetBasisConfig::default())?;
            let bigger = FloquetBasisConfig::fixed(2 * base.n_max, base.l_max + 10);
            let grown = solve(&well, &kn, &bigger)?;
            Ok(relative_difference(grown.sigma_optical(), base.sigma_optical(), PI))
        });
    }
    r.checks
}
