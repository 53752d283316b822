//! Bessel functions of the first kind for integer order.

/// `J_n(x)` for integer `n` and real `x`.
///
/// Power series for small arguments, Miller's backward recurrence with the
/// `J₀ + 2ΣJ₂ₖ = 1` normalization otherwise.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 1.0 || (x * x) < 0.25 * f64::from(n + 1) {
        return series(n as u32, x);
    }
    miller(n as usize, x)[n as usize]
}

/// `[J₀(x), …, J_{n_max}(x)]` for `x ≥ 0`.
pub fn bessel_j_table(n_max: usize, x: f64) -> Vec<f64> {
    let x = x.abs();
    if x == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        return v;
    }
    if x < 1.0 {
        return (0..=n_max).map(|n| series(n as u32, x)).collect();
    }
    let mut v = miller(n_max, x);
    v.truncate(n_max + 1);
    v
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / f64::from(k);
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (f64::from(k) * f64::from(n + k));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let top = n_max.max(x as usize);
    let start = 2 * ((top + 20 + (60.0 * top as f64).sqrt() as usize) / 2);
    let mut j = vec![0.0; start + 2];
    j[start + 1] = 0.0;
    j[start] = 1e-300;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        j[k - 1] = k as f64 * two_over_x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = j[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * j[k];
    }
    j.truncate(n_max.max(1) + 1);
    j.iter().map(|v| v / norm).collect()
}
