//! Fit of peak amplitudes versus modulation frequency to `a·J_n(k/ν₁)`.

use serde::{Deserialize, Serialize};

use super::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::optimize::brent_min;

/// Bessel order of the fit model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    pub fn as_i32(self) -> i32 {
        match self {
            BesselOrder::Zero => 0,
            BesselOrder::One => 1,
        }
    }
}

impl TryFrom<u8> for BesselOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(BesselOrder::Zero),
            1 => Ok(BesselOrder::One),
            _ => Err(Error::invalid(format!("Bessel fit order must be 0 or 1, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselFit {
    /// Depth parameter `k` in Hz.
    pub k_u: f64,
    /// Amplitude prefactor `a`.
    pub amplitude: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

const GRID_POINTS: usize = 4000;
/// Largest Bessel argument `k/ν_min` scanned.
const MAX_ARGUMENT: f64 = 40.0;

struct Problem<'a> {
    nu: &'a [f64],
    y: &'a [f64],
    order: i32,
}

impl Problem<'_> {
    fn basis(&self, k: f64) -> Vec<f64> {
        self.nu.iter().map(|&v| bessel_j(self.order, k / v)).collect()
    }

    /// Optimal amplitude and residual sum of squares at fixed `k`.
    fn project(&self, k: f64) -> (f64, f64) {
        let f = self.basis(k);
        let ff: f64 = f.iter().map(|v| v * v).sum();
        if ff == 0.0 {
            return (0.0, self.y.iter().map(|v| v * v).sum());
        }
        let a = f.iter().zip(self.y).map(|(f, y)| f * y).sum::<f64>() / ff;
        let rss = f.iter().zip(self.y).map(|(f, y)| (y - a * f).powi(2)).sum();
        (a, rss)
    }

    /// Derivative of the projected residual with respect to `k`, up to a
    /// positive factor.
    fn slope(&self, k: f64) -> f64 {
        let (a, _) = self.project(k);
        let n = self.order;
        self.nu
            .iter()
            .zip(self.y)
            .map(|(&v, &y)| {
                let x = k / v;
                let d = 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
                -a * (y - a * bessel_j(n, x)) * d / v
            })
            .sum()
    }
}

/// Least-squares fit of `a·J_order(k/ν₁)` over `(a, k)`.
///
/// The amplitude is eliminated in closed form; `k` is located by a
/// deterministic log-spaced scan up to argument 40 at the smallest `ν₁`,
/// Brent refinement of the best local minima, and a final bisection on the
/// stationarity condition.
pub fn bessel_fit(nu1_hz: &[f64], amplitudes: &[f64], order: BesselOrder) -> Result<BesselFit> {
    if nu1_hz.len() != amplitudes.len() {
        return Err(Error::invalid("nu1 and amplitude lists differ in length"));
    }
    if nu1_hz.len() < 5 {
        return Err(Error::invalid(format!(
            "Bessel fit needs at least 5 points, got {}",
            nu1_hz.len()
        )));
    }
    if nu1_hz.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid("all nu1 values must be finite and > 0"));
    }
    if amplitudes.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("amplitudes must be finite"));
    }
    let ymax = amplitudes.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (lo, hi) = amplitudes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if hi - lo <= 1e-12 * ymax {
        return Err(Error::FitFailure(
            "amplitudes are all equal; k is not identifiable".into(),
        ));
    }
    let p = Problem {
        nu: nu1_hz,
        y: amplitudes,
        order: order.as_i32(),
    };
    let nu_min = nu1_hz.iter().cloned().fold(f64::INFINITY, f64::min);
    let k_lo = 1e-3 * nu_min;
    let k_hi = MAX_ARGUMENT * nu_min;
    let ratio = (k_hi / k_lo).ln();
    let ks: Vec<f64> = (0..GRID_POINTS)
        .map(|i| k_lo * (ratio * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect();
    let rss: Vec<f64> = ks.iter().map(|&k| p.project(k).1).collect();

    let mut minima: Vec<usize> = (1..GRID_POINTS - 1)
        .filter(|&i| rss[i] <= rss[i - 1] && rss[i] <= rss[i + 1])
        .collect();
    minima.sort_by(|&a, &b| rss[a].total_cmp(&rss[b]));
    minima.truncate(5);
    if minima.is_empty() {
        return Err(Error::FitFailure(
            "residual has no interior minimum in the k range".into(),
        ));
    }

    let mut best: Option<(f64, f64)> = None;
    for &i in &minima {
        let (k, _) = brent_min(|k| p.project(k).1, ks[i - 1], ks[i + 1], 1e-10, 200);
        let k = polish(&p, k, ks[i - 1], ks[i + 1]);
        let r = p.project(k).1;
        if best.is_none_or(|(_, br)| r < br) {
            best = Some((k, r));
        }
    }
    let (k, _) = best.expect("at least one minimum");
    let (a, rss) = p.project(k);
    if !k.is_finite() || !a.is_finite() {
        return Err(Error::FitFailure("fit produced non-finite parameters".into()));
    }
    Ok(BesselFit {
        k_u: k,
        amplitude: a,
        rms_residual: (rss / nu1_hz.len() as f64).sqrt(),
    })
}

/// Bisection on the residual slope inside `[lo, hi]` around `k`.
fn polish(p: &Problem<'_>, k: f64, lo: f64, hi: f64) -> f64 {
    let width = 1e-3 * k;
    let (mut a, mut b) = ((k - width).max(lo), (k + width).min(hi));
    let (mut sa, sb) = (p.slope(a), p.slope(b));
    if !(sa < 0.0 && sb > 0.0) {
        return k;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let sm = p.slope(m);
        if sm < 0.0 {
            a = m;
            sa = sm;
        } else {
            b = m;
        }
    }
    let _ = sa;
    0.5 * (a + b)
}
