use std::f64::consts::PI;

use floquet_eikonal::exact::{exact_amplitude, sigma_channel_sum, sigma_total_exact, solve};
use floquet_eikonal::oracle::{static_amplitude, static_sigma};
use floquet_eikonal::{FloquetBasisConfig, Kinematics, Method, ShakingSquareWell, UnitSystem};

fn kin(k: f64, omega: f64) -> Kinematics {
    Kinematics::new(k, omega, UnitSystem::default()).unwrap()
}

#[test]
fn static_amplitude_matches_phase_shift_sum() {
    let units = UnitSystem::default();
    for &(u1, k) in &[(10.0, 37.0), (-25.0, 6.0), (100.0, 10.0)] {
        let well = ShakingSquareWell::new(0.0, u1, 1.0, 1.0).unwrap();
        let kn = kin(k, 1.0);
        let sol = solve(&well, &kn, &FloquetBasisConfig::default()).unwrap();
        for &theta in &[0.0, 0.1, 0.5] {
            let got = sol.amplitude(0, theta).unwrap();
            let want = static_amplitude(k, u1, 1.0, &units, theta, sol.l_max + 1);
            assert!((got - want).norm() < 1e-8 * want.norm().max(1.0), "U1={u1} k={k} θ={theta}: {got} vs {want}");
        }
    }
}

#[test]
fn static_total_matches_phase_shift_sum() {
    let units = UnitSystem::default();
    let well = ShakingSquareWell::new(0.0, 10.0, 1.0, 1.0).unwrap();
    let res = sigma_total_exact(&well, &kin(37.0, 1.0), &FloquetBasisConfig::default()).unwrap();
    let (want, _) = static_sigma(37.0, 10.0, 1.0, &units, 1e-15).unwrap();
    assert!((res.sigma_tot - want).abs() < 1e-6 * want);
    assert_eq!(res.method, Method::Exact);
    assert!(res.convergence.n_max.is_some() && res.convergence.residual <= 1e-8);
}

#[test]
fn static_channel_sum_equals_optical() {
    let well = ShakingSquareWell::new(0.0, 40.0, 2.0, 1.0).unwrap();
    let kn = kin(12.0, 2.0);
    let cfg = FloquetBasisConfig::default();
    let a = sigma_total_exact(&well, &kn, &cfg).unwrap().sigma_tot;
    let b = sigma_channel_sum(&well, &kn, &cfg).unwrap().sigma_tot;
    assert!((a - b).abs() < 1e-6 * a);
}

#[test]
fn free_particle_gives_zero() {
    let well = ShakingSquareWell::new(0.0, 0.0, 1.0, 1.0).unwrap();
    let kn = kin(37.0, 1.0);
    let cfg = FloquetBasisConfig::default();
    let a = sigma_total_exact(&well, &kn, &cfg).unwrap().sigma_tot;
    let b = sigma_channel_sum(&well, &kn, &cfg).unwrap().sigma_tot;
    assert!(a.abs() < 1e-12 && b < 1e-12, "{a} {b}");
}

#[test]
fn drive_only_point_is_unitary() {
    let well = ShakingSquareWell::new(100.0, 0.0, 10.0, 1.0).unwrap();
    let kn = kin(37.0, 10.0);
    let sol = solve(&well, &kn, &FloquetBasisConfig::default()).unwrap();
    let opt = sol.optical_result();
    let sum = sol.channel_sum_result();
    assert!((opt.sigma_tot - sum.sigma_tot).abs() < 1e-4 * opt.sigma_tot);
    // every open channel within the basis is reported
    let open = sol.channels.iter().filter(|c| c.open).count();
    assert_eq!(opt.per_channel.len(), open);
    assert!(opt.per_channel.values().all(|c| c.sigma >= 0.0));
}

#[test]
fn forward_amplitude_is_finite_for_strong_drive() {
    let well = ShakingSquareWell::new(100.0, 0.0, 3.0, 1.0).unwrap();
    let f = exact_amplitude(&well, &kin(37.0, 3.0), &FloquetBasisConfig::default(), 0, 0.0).unwrap();
    assert!(f.re.is_finite() && f.im > 0.0);
}

#[test]
fn closed_channel_amplitude_is_rejected() {
    // E = 1 and ħω = 2: channel -1 lies below threshold
    let well = ShakingSquareWell::new(3.0, 1.0, 2.0, 1.0).unwrap();
    let err = exact_amplitude(&well, &kin(1.0, 2.0), &FloquetBasisConfig::default(), -1, 0.3);
    assert!(err.is_err());
}

#[test]
fn deeply_closed_channels_decay() {
    let well = ShakingSquareWell::new(20.0, 5.0, 8.0, 1.0).unwrap();
    let kn = kin(4.0, 8.0);
    let cfg = FloquetBasisConfig::fixed(14, 10);
    let pw = floquet_eikonal::exact::solve_partial_wave(&well, &kn, 0, &cfg).unwrap();
    let mags: Vec<f64> = (0..6).map(|j| pw.beta[j].norm()).collect();
    // β at n = -14, -13, ...: the most strongly closed channels are smallest
    assert!(mags.windows(2).all(|w| w[0] < w[1]), "{mags:?}");
}

#[test]
fn high_energy_limit_approaches_twice_geometric() {
    // a strongly absorbing-like drive at high k tends towards a large σ bounded by 4πr0²
    let well = ShakingSquareWell::new(100.0, 0.0, 10.0, 1.0).unwrap();
    let s = sigma_total_exact(&well, &kin(37.0, 10.0), &FloquetBasisConfig::default()).unwrap().sigma_tot;
    assert!(s > 0.0 && s < 4.0 * PI);
}
