//! Acceptance gate: eikonal against the exact Floquet solver at the benchmark
//! parameter sets, plus the oracle and convergence properties.
//!
//! Runs as a plain binary so every criterion prints its own line. Exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::Instant;

use floquet_eikonal::eikonal::{amplitude_axisym, amplitude_general, forward_closed_form, transport_residual};
use floquet_eikonal::exact::{solve, ExactSolution};
use floquet_eikonal::oracle::{born_amplitude, static_eikonal_forward, static_sigma};
use floquet_eikonal::validation::relative_difference;
use floquet_eikonal::xsec::sigma_total_optical;
use floquet_eikonal::{
    EikonalConfig, FloquetBasisConfig, GaussianWell, Kinematics, QuadratureConfig, ShakingSquareWell, UnitSystem,
};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rayon::prelude::*;

const R0: f64 = 1.0;

#[derive(Clone, Copy, PartialEq)]
struct Point {
    u0: f64,
    u1: f64,
    omega: f64,
    k: f64,
}

impl Point {
    fn key(&self) -> [u64; 4] {
        [self.u0.to_bits(), self.u1.to_bits(), self.omega.to_bits(), self.k.to_bits()]
    }

    fn well(&self) -> ShakingSquareWell {
        ShakingSquareWell::new(self.u0, self.u1, self.omega, R0).unwrap()
    }

    fn kin(&self) -> Kinematics {
        Kinematics::new(self.k, self.omega, UnitSystem::default()).unwrap()
    }
}

struct Evaluated {
    ea: f64,
    exact: ExactSolution,
}

impl Evaluated {
    fn rel_diff(&self) -> f64 {
        relative_difference(self.ea, self.exact.sigma_optical(), PI * R0 * R0)
    }
}

/// Solves shared between criteria.
struct Cache(Mutex<HashMap<[u64; 4], std::sync::Arc<Evaluated>>>);

impl Cache {
    fn get_all(&self, points: &[Point]) -> Vec<std::sync::Arc<Evaluated>> {
        points
            .par_iter()
            .map(|p| {
                if let Some(e) = self.0.lock().unwrap().get(&p.key()) {
                    return e.clone();
                }
                let kin = p.kin();
                let well = p.well();
                let f = forward_closed_form(&well, &kin, &EikonalConfig::default()).unwrap();
                let ea = sigma_total_optical(f, p.k).sigma;
                let exact = solve(&well, &kin, &FloquetBasisConfig::default()).unwrap();
                let e = std::sync::Arc::new(Evaluated { ea, exact });
                self.0.lock().unwrap().insert(p.key(), e.clone());
                e
            })
            .collect()
    }
}

fn fig_b() -> Vec<Point> {
    (0..=10).map(|i| Point { u0: 10.0 * i as f64, u1: 0.0, omega: 10.0, k: 37.0 }).collect()
}

fn fig_c() -> Vec<Point> {
    (0..=20).map(|i| Point { u0: i as f64, u1: 10.0 * i as f64, omega: 1.0, k: 37.0 }).collect()
}

const FIG_D_SETS: [(f64, f64, f64); 2] = [(10.0, 10.0, 1.0), (100.0, 0.0, 3.0)];
const FIG_D_K: [f64; 9] = [10.0, 15.0, 20.0, 25.0, 30.0, 37.0, 40.0, 45.0, 50.0];

fn fig_d() -> Vec<Point> {
    FIG_D_SETS.iter().flat_map(|&(u0, u1, omega)| FIG_D_K.iter().map(move |&k| Point { u0, u1, omega, k })).collect()
}

struct Outcome {
    passed: bool,
    summary: String,
}

fn criterion_1(cache: &Cache) -> Outcome {
    let pts = fig_b();
    let evals = cache.get_all(&pts);
    let (worst_i, worst) =
        evals
            .iter()
            .map(|e| e.rel_diff())
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    Outcome {
        passed: evals.iter().all(|e| e.rel_diff() <= 0.05),
        summary: format!(
            "U1=0, k=37, ω=10, U0 in [0,100] ({} points): max rel diff {:.4} at U0={} (limit 0.05)",
            pts.len(),
            worst,
            pts[worst_i].u0
        ),
    }
}

fn criterion_2(cache: &Cache) -> Outcome {
    let pts = fig_c();
    let evals = cache.get_all(&pts);
    let diffs: Vec<(f64, f64)> = pts.iter().zip(&evals).map(|(p, e)| (p.u0, e.rel_diff())).collect();
    let low: Vec<f64> = diffs.iter().filter(|(u, _)| *u > 0.0 && *u <= 10.0).map(|d| d.1).collect();
    let low_mean = low.iter().sum::<f64>() / low.len() as f64;
    let high: Vec<f64> = diffs.iter().filter(|(u, _)| *u >= 15.0).map(|d| d.1).collect();
    let trend = high.windows(2).all(|w| w[1] >= w[0]);
    let above = high.iter().all(|&d| d > low_mean);
    let worst = diffs.iter().map(|d| d.1).fold(0.0, f64::max);
    let bounded = worst <= 0.10;
    let listing: Vec<String> = diffs.iter().filter(|(u, _)| *u >= 15.0).map(|(u, d)| format!("{u}:{d:.3}")).collect();
    Outcome {
        passed: trend && above && bounded,
        summary: format!(
            "U1=10·U0, k=37, ω=1: non-decreasing for U0>=15 [{}] {}; above U0<=10 mean {:.4} {}; max through U0=20 {:.4} (limit 0.10) {}",
            listing.join(" "),
            ok(trend),
            low_mean,
            ok(above),
            worst,
            ok(bounded)
        ),
    }
}

fn criterion_3(cache: &Cache) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for &(u0, u1, omega) in &FIG_D_SETS {
        let lo = Point { u0, u1, omega, k: FIG_D_K[0] };
        let mid = Point { u0, u1, omega, k: 37.0 };
        let e = cache.get_all(&[lo, mid]);
        let (d_lo, d_mid) = (e[0].rel_diff(), e[1].rel_diff());
        let within = d_mid <= 0.05;
        let grows = d_lo > d_mid;
        passed &= within && grows;
        parts.push(format!(
            "(U0={u0}, U1={u1}, ω={omega}) k=37: {d_mid:.4} {}; k={}: {d_lo:.4} > k=37 {}",
            ok(within),
            FIG_D_K[0],
            ok(grows)
        ));
    }
    Outcome { passed, summary: parts.join("; ") }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::deterministic();
    let strategy = (0.0..=100.0f64, 0.0..=100.0f64, 0.5..=20.0f64, 20.0..=60.0f64);
    let cfg = EikonalConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (u0, u1, omega, k) = strategy.new_tree(&mut runner).unwrap().current();
        let well = ShakingSquareWell::new(u0, u1, omega, R0).unwrap();
        let kin = Kinematics::new(k, omega, UnitSystem::default()).unwrap();
        let closed = forward_closed_form(&well, &kin, &cfg).unwrap();
        // time average by trapezoid and impact parameter by adaptive quadrature
        let direct = amplitude_axisym(&well, &kin, 0, 0.0, &cfg).unwrap();
        worst = worst.max((closed - direct).norm() / direct.norm());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        passed: worst <= 1e-8 && secs <= 30.0,
        summary: format!("10 random sets: max rel diff {worst:.2e} (limit 1e-8), {secs:.1} s (limit 30 s)"),
    }
}

fn criterion_5() -> Outcome {
    let units = UnitSystem::default();
    let cfg = EikonalConfig::default();
    let mut worst_ea = 0.0f64;
    let mut worst_exact = 0.0f64;
    for &u1 in &[1.0, 10.0, 100.0] {
        for &k in &[10.0, 37.0] {
            let well = ShakingSquareWell::new(0.0, u1, 1.0, R0).unwrap();
            let kin = Kinematics::new(k, 1.0, units).unwrap();
            let ea = sigma_total_optical(forward_closed_form(&well, &kin, &cfg).unwrap(), k).sigma;
            let classic = sigma_total_optical(static_eikonal_forward(&kin, u1, R0), k).sigma;
            worst_ea = worst_ea.max(relative_difference(ea, classic, PI));
            let exact = solve(&well, &kin, &FloquetBasisConfig::default()).unwrap().sigma_optical();
            let (phase_shift, _) = static_sigma(k, u1, R0, &units, 1e-14).unwrap();
            worst_exact = worst_exact.max(relative_difference(exact, phase_shift, PI));
        }
    }
    Outcome {
        passed: worst_ea <= 1e-6 && worst_exact <= 1e-6,
        summary: format!(
            "U0=0, U1 in {{1,10,100}}, k in {{10,37}}: eikonal vs classic {worst_ea:.2e}, exact vs phase shifts {worst_exact:.2e} (limit 1e-6)"
        ),
    }
}

fn all_points() -> Vec<Point> {
    let mut pts = fig_b();
    pts.extend(fig_c());
    pts.extend(fig_d());
    pts
}

fn criterion_6(cache: &Cache) -> Outcome {
    let pts = all_points();
    let evals = cache.get_all(&pts);
    let worst = evals
        .iter()
        .map(|e| relative_difference(e.exact.sigma_channel_sum(), e.exact.sigma_optical(), PI))
        .fold(0.0, f64::max);
    Outcome {
        passed: worst <= 1e-4,
        summary: format!("{} benchmark points: max |Σ_n σ_n - σ_opt|/σ_opt {worst:.2e} (limit 1e-4)", pts.len()),
    }
}

fn criterion_7() -> Outcome {
    let g = GaussianWell::new(3.0, 2.0, 4.0, 0.8).unwrap();
    let kin = Kinematics::new(5.0, 4.0, UnitSystem::default()).unwrap();
    let cfg = EikonalConfig::with_quadrature(QuadratureConfig { abs_tol: 1e-14, rel_tol: 1e-14, ..Default::default() });
    let mut ratios = Vec::new();
    for &(b, z, t) in &[(0.3, 0.2, 0.1), (0.0, -0.5, 0.7), (0.8, 0.9, 1.3)] {
        let coarse = transport_residual(&g, &kin, b, z, t, 0.02, &cfg).unwrap();
        let fine = transport_residual(&g, &kin, b, z, t, 0.01, &cfg).unwrap();
        ratios.push(coarse / fine);
    }
    Outcome {
        passed: ratios.iter().all(|r| (3.5..=4.5).contains(r)),
        summary: format!(
            "Gaussian well, h = 0.02 -> 0.01: ratios {} (range [3.5, 4.5])",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn criterion_8() -> Outcome {
    let well = ShakingSquareWell::new(0.01, 0.01, 1.0, R0).unwrap();
    let kin = Kinematics::new(37.0, 1.0, UnitSystem::default()).unwrap();
    let cfg = EikonalConfig::default();
    let mut worst = 0.0f64;
    for i in 0..=5 {
        let theta = 0.01 * i as f64;
        let born = born_amplitude(&well, &kin, 0, theta).unwrap();
        let k_out = [kin.k * theta.sin(), 0.0, kin.k * theta.cos()];
        let general = amplitude_general(&well, &kin, k_out, 0, &cfg).unwrap();
        let axisym = amplitude_axisym(&well, &kin, 0, theta, &cfg).unwrap();
        worst = worst.max((general - born).norm() / born.norm());
        worst = worst.max((axisym - born).norm() / born.norm());
    }
    Outcome {
        passed: worst <= 0.01,
        summary: format!("U0=U1=0.01, k=37, ω=1, θ in [0, 0.05]: max rel diff to Born {worst:.2e} (limit 0.01)"),
    }
}

fn criterion_9(cache: &Cache) -> Outcome {
    let pts = all_points();
    let evals = cache.get_all(&pts);
    let changes: Vec<f64> = pts
        .par_iter()
        .zip(evals.par_iter())
        .map(|(p, e)| {
            let cfg = FloquetBasisConfig::fixed(2 * e.exact.n_max, e.exact.l_max + 10);
            let grown = solve(&p.well(), &p.kin(), &cfg).unwrap();
            relative_difference(grown.sigma_optical(), e.exact.sigma_optical(), PI)
        })
        .collect();
    let worst = changes.iter().cloned().fold(0.0, f64::max);
    Outcome {
        passed: worst < 1e-3,
        summary: format!("{} benchmark points: max relative change {worst:.2e} (limit 1e-3)", pts.len()),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let cache = Cache(Mutex::new(HashMap::new()));
    let criteria: Vec<Criterion> = vec![
        ("1 eikonal vs exact, drive only", Box::new(|| criterion_1(&cache))),
        ("2 eikonal vs exact, static part 10·U0", Box::new(|| criterion_2(&cache))),
        ("3 eikonal vs exact, momentum sweep", Box::new(|| criterion_3(&cache))),
        ("4 closed-form forward amplitude vs quadrature", Box::new(criterion_4)),
        ("5 static limit", Box::new(criterion_5)),
        ("6 unitarity", Box::new(|| criterion_6(&cache))),
        ("7 transport residual order", Box::new(criterion_7)),
        ("8 Born limit", Box::new(criterion_8)),
        ("9 truncation robustness", Box::new(|| criterion_9(&cache))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let out = run();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {name}: {} ({:.1} s)", out.summary, start.elapsed().as_secs_f64());
        if !out.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
