use std::f64::consts::PI;

use floquet_eikonal::eikonal::{amplitude_axisym, amplitude_general};
use floquet_eikonal::exact::{sigma_total_exact, solve};
use floquet_eikonal::potentials::{ea_validity, DEFAULT_VALIDITY_THRESHOLD};
use floquet_eikonal::validation::{relative_difference, run_suite, SuiteOptions};
use floquet_eikonal::xsec::sigma_ea;
use floquet_eikonal::{Complex64, CrossSectionResult};
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Cell, Table};
use crate::CliError;

fn flag(b: bool) -> Cell {
    Cell::Int(b as i64)
}

fn area(cfg: &RunConfig) -> f64 {
    PI * cfg.r0 * cfg.r0
}

pub fn sigma(cfg: &RunConfig) -> Result<(), CliError> {
    let well = cfg.well()?;
    let kin = cfg.kinematics()?;
    let validity = ea_validity(&well, &kin, DEFAULT_VALIDITY_THRESHOLD);
    let mut results: Vec<CrossSectionResult> = Vec::new();
    if cfg.method.ea() {
        results.push(sigma_ea(&well, &kin, &cfg.eikonal())?);
    }
    if cfg.method.exact() {
        results.push(sigma_total_exact(&well, &kin, &cfg.basis())?);
    }
    let rel = match results.as_slice() {
        [ea, exact] => Some(relative_difference(ea.sigma_tot, exact.sigma_tot, area(cfg))),
        _ => None,
    };
    let mut table = Table::new(
        "sigma",
        vec![
            "method",
            "sigma_tot",
            "n_max",
            "l_max",
            "residual",
            "tail",
            "negative_sigma",
            "ea_valid_flag",
            "rel_diff",
        ],
    );
    for r in &results {
        let opt_int = |v: Option<usize>| v.map_or(Cell::Empty, |v| Cell::Int(v as i64));
        table.rows.push(vec![
            Cell::Text(r.method.to_string()),
            r.sigma_tot.into(),
            opt_int(r.convergence.n_max),
            opt_int(r.convergence.l_max),
            r.convergence.residual.into(),
            r.convergence.tail.into(),
            flag(r.negative_sigma),
            flag(validity.recommended),
            rel.into(),
        ]);
    }
    table.notes.push(format!(
        "validity: k l / 2pi = {}, E / U = {}, threshold = {}",
        validity.length_ratio, validity.energy_ratio, validity.threshold
    ));
    table.details = json!({ "results": results, "validity": validity });
    table.emit(cfg)
}

struct SweepRow {
    sigma_ea: Option<f64>,
    sigma_exact: Option<f64>,
    valid: Option<bool>,
    errors: Vec<String>,
}

fn sweep_point(cfg: &RunConfig) -> SweepRow {
    let mut row = SweepRow { sigma_ea: None, sigma_exact: None, valid: None, errors: Vec::new() };
    let setup = cfg.well().and_then(|w| Ok((w, cfg.kinematics()?)));
    let (well, kin) = match setup {
        Ok(v) => v,
        Err(e) => {
            row.errors.push(e.to_string());
            row.sigma_ea = cfg.method.ea().then_some(f64::NAN);
            row.sigma_exact = cfg.method.exact().then_some(f64::NAN);
            return row;
        }
    };
    row.valid = Some(ea_validity(&well, &kin, DEFAULT_VALIDITY_THRESHOLD).recommended);
    if cfg.method.ea() {
        row.sigma_ea = Some(match sigma_ea(&well, &kin, &cfg.eikonal()) {
            Ok(r) => r.sigma_tot,
            Err(e) => {
                row.errors.push(format!("ea: {e}"));
                f64::NAN
            }
        });
    }
    if cfg.method.exact() {
        row.sigma_exact = Some(match sigma_total_exact(&well, &kin, &cfg.basis()) {
            Ok(r) => r.sigma_tot,
            Err(e) => {
                row.errors.push(format!("exact: {e}"));
                f64::NAN
            }
        });
    }
    row
}

/// Returns the number of failed rows.
pub fn sweep(cfg: &RunConfig) -> Result<usize, CliError> {
    let (axis, values) = cfg.sweep_values()?;
    let rows: Vec<SweepRow> = values.par_iter().map(|&v| sweep_point(&cfg.with_axis(axis, v))).collect();
    let mut table = Table::new("sweep", vec!["param", "value", "sigma_ea", "sigma_exact", "rel_diff", "ea_valid_flag"]);
    let mut failed = 0;
    let mut details = Vec::new();
    for (&v, row) in values.iter().zip(&rows) {
        let rel = match (row.sigma_ea, row.sigma_exact) {
            (Some(a), Some(b)) if a.is_nan() || b.is_nan() => Some(f64::NAN),
            (Some(a), Some(b)) => Some(relative_difference(a, b, area(cfg))),
            _ => None,
        };
        if !row.errors.is_empty() {
            failed += 1;
            for e in &row.errors {
                eprintln!("row {}={v}: {e}", axis.name());
            }
        }
        table.rows.push(vec![
            Cell::Text(axis.name().into()),
            v.into(),
            row.sigma_ea.into(),
            row.sigma_exact.into(),
            rel.into(),
            row.valid.map_or(Cell::Num(f64::NAN), flag),
        ]);
        details.push(json!({ "value": v, "errors": row.errors }));
    }
    table.notes.push(format!("failed_rows = {failed}"));
    table.details = json!({ "rows": details });
    table.emit(cfg)?;
    Ok(failed)
}

pub fn amplitude(cfg: &RunConfig) -> Result<(), CliError> {
    let well = cfg.well()?;
    let kin = cfg.kinematics()?;
    let n = cfg.n;
    let ch = kin.channel(n);
    if !ch.open {
        return Err(CliError::invalid(format!("channel n = {n} is closed: E + n ħω = {} < 0", ch.energy)));
    }
    let thetas = cfg.thetas()?;
    let ea: Option<Vec<Complex64>> = if cfg.method.ea() {
        let eik = cfg.eikonal();
        let kn = ch.wavenumber;
        let vals: floquet_eikonal::Result<Vec<Complex64>> = thetas
            .par_iter()
            .map(|&th| {
                if n == 0 {
                    amplitude_axisym(&well, &kin, 0, th, &eik)
                } else {
                    amplitude_general(&well, &kin, [kn * th.sin(), 0.0, kn * th.cos()], n, &eik)
                }
            })
            .collect();
        Some(vals.map_err(|e| match e {
            floquet_eikonal::Error::InvalidArgument(m) => {
                CliError::invalid(format!("{m}; pass --force to report it anyway"))
            }
            other => other.into(),
        })?)
    } else {
        None
    };
    let exact: Option<Vec<Complex64>> = if cfg.method.exact() {
        let sol = solve(&well, &kin, &cfg.basis())?;
        Some(thetas.iter().map(|&th| sol.amplitude(n, th)).collect::<floquet_eikonal::Result<_>>()?)
    } else {
        None
    };

    let mut table = match (&ea, &exact) {
        (Some(_), Some(_)) => {
            Table::new("amplitude", vec!["n", "theta", "re_f_ea", "im_f_ea", "re_f_exact", "im_f_exact", "rel_diff"])
        }
        _ => Table::new("amplitude", vec!["n", "theta", "re_f", "im_f"]),
    };
    table.notes.push(format!("method = {:?}", cfg.method).to_lowercase());
    for (i, &th) in thetas.iter().enumerate() {
        let mut row = vec![Cell::Int(n), th.into()];
        for f in [&ea, &exact].into_iter().flatten() {
            row.push(f[i].re.into());
            row.push(f[i].im.into());
        }
        if let (Some(a), Some(b)) = (&ea, &exact) {
            let d = (a[i] - b[i]).norm();
            row.push(if d == 0.0 { 0.0 } else { d / b[i].norm() }.into());
        }
        table.rows.push(row);
    }
    table.emit(cfg)
}

/// Returns `true` when every check passed.
pub fn validate(cfg: &RunConfig) -> Result<bool, CliError> {
    if let Some(t) = cfg.check_tol {
        if !(t > 0.0) {
            return Err(CliError::invalid(format!("check_tol must be positive, got {t}")));
        }
    }
    let checks = run_suite(SuiteOptions { quick: cfg.quick, tolerance: cfg.check_tol, units: Some(cfg.units()) });
    let passed = checks.iter().filter(|c| c.passed).count();
    let report = |to_stderr: bool| {
        for c in &checks {
            let line = format!(
                "[{}] {}: {:.3e} (tolerance {:.1e}, {:.1} s)",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance,
                c.seconds
            );
            if to_stderr {
                eprintln!("{line}");
            } else {
                println!("{line}");
            }
        }
        let summary = format!("validate: {passed} of {} checks passed", checks.len());
        if to_stderr {
            eprintln!("{summary}");
        } else {
            println!("{summary}");
        }
    };
    if cfg.output.is_some() {
        report(false);
        let mut table = Table::new("validate", vec!["check", "measured", "tolerance", "passed"]);
        for c in &checks {
            table.rows.push(vec![Cell::Text(c.name.clone()), c.measured.into(), c.tolerance.into(), flag(c.passed)]);
        }
        table.details = json!({ "checks": checks });
        table.emit(cfg)?;
    } else {
        report(true);
    }
    Ok(passed == checks.len())
}
