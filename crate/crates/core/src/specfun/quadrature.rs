//! Adaptive Gauss–Kronrod quadrature and periodic averages.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::QuadratureConfig;
use crate::error::{Error, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_632_320_149_306,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const MAX_INTERVALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    depth: u32,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = fc * WGK[10];
    let mut g = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        k += pair * WGK[j];
        if j % 2 == 1 {
            g += pair * WG[j / 2];
        }
    }
    let k = k * half;
    let g = g * half;
    (k, (k - g).norm())
}

/// Globally adaptive integration of a complex-valued function over `[a, b]`.
///
/// `breakpoints` inside `(a, b)` split the initial partition; integrands
/// with jumps must list them here since the integrator never searches for
/// discontinuities. Converges when the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadratureConfig) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    if !(a < b) {
        return Err(Error::invalid(format!("integration needs a < b, got [{a}, {b}]")));
    }
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Piece> = Vec::new();
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (value, error) = kronrod(&f, w[0], w[1]);
        evaluations += 21;
        heap.push(Piece { a: w[0], b: w[1], value, error, depth: 0 });
    }

    loop {
        let total: Complex64 = heap.iter().chain(frozen.iter()).map(|p| p.value).sum::<Complex64>();
        let err: f64 = heap.iter().chain(frozen.iter()).map(|p| p.error).sum();
        let target = cfg.abs_tol.max(cfg.rel_tol * total.norm());
        if err <= target {
            return Ok(Integral { value: total, error: err, evaluations });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                return Err(Error::Numeric {
                    message: format!(
                        "adaptive quadrature hit max depth {} (best estimate {:.12e})",
                        cfg.max_depth, total
                    ),
                    achieved: err,
                })
            }
        };
        // roundoff floor: splitting further cannot lower this estimate
        let floor = 64.0 * f64::EPSILON * worst.value.norm();
        if worst.depth >= cfg.max_depth || worst.error <= floor {
            frozen.push(worst);
            continue;
        }
        if heap.len() + frozen.len() > MAX_INTERVALS {
            return Err(Error::Numeric {
                message: format!(
                    "adaptive quadrature exceeded {MAX_INTERVALS} subintervals (best estimate {total:.12e})"
                ),
                achieved: err,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod(&f, lo, hi);
            evaluations += 21;
            heap.push(Piece { a: lo, b: hi, value, error, depth: worst.depth + 1 });
        }
    }
}

/// Equal-weight trapezoid average `(1/T) ∫_0^T f dt` over `nodes` samples.
///
/// Exact for trigonometric polynomials of degree below `nodes`.
pub fn periodic_average<F>(f: F, period: f64, nodes: usize) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let h = period / nodes as f64;
    let sum: Complex64 = (0..nodes).map(|j| f(j as f64 * h)).sum();
    sum / nodes as f64
}
