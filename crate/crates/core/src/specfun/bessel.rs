//! Integer-order Bessel functions of the first kind.

const SERIES_CUTOFF: f64 = 0.5;
const RESCALE_ABOVE: f64 = 1e250;

/// `J_n(x)` for any integer order and real argument.
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let n = order.unsigned_abs() as usize;
    let value = bessel_j_sequence(n, x)[n];
    if order < 0 && n % 2 == 1 {
        -value
    } else {
        value
    }
}

/// `J_0(x) ..= J_{n_max}(x)` in one pass.
///
/// Uses Miller's downward recurrence normalised by the sum rule
/// `J_0 + 2 Σ J_{2k} = 1`, and the power series for small arguments.
pub fn bessel_j_sequence(n_max: usize, x: f64) -> Vec<f64> {
    let ax = x.abs();
    let mut out = if ax == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        v
    } else if ax < SERIES_CUTOFF {
        (0..=n_max).map(|n| series(n, ax)).collect()
    } else {
        miller(n_max, ax)
    };
    if x < 0.0 {
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= half / i as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let top = n_max.max(x.ceil() as usize) + 20 + (10.0 * x.cbrt()).ceil() as usize;
    let start = top + top % 2;
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1.0;
    for k in (1..=start).rev() {
        let next = (2.0 * k as f64 / x) * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in &mut vals[k - 1..] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals.truncate(n_max + 1);
    for v in &mut vals {
        *v /= norm;
    }
    vals
}
