//! Discord by direct minimization over local Gaussian measurements.
//!
//! Independent of the closed form: the conditional determinant
//! `det(α − γ (β + σ_M)⁻¹ γᵀ)` is minimized over pure single-mode
//! measurement covariances `σ_M = R(θ) diag(e^{2t}, e^{−2t}) R(θ)ᵀ` and over
//! the homodyne limit `t → ±∞`, and the entropies are evaluated from the
//! numerically computed symplectic spectrum.

use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussian::{self, two_mode_blocks};
use crate::metrics::discord::MeasuredMode;
use crate::optimize::{brent_min, nelder_mead};

/// Squeezing range searched for general-dyne measurements.
const T_MAX: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub discord: f64,
    pub e_min: f64,
    /// `true` when the minimum was attained in the homodyne limit.
    pub homodyne: bool,
}

fn rot(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn adjugate(m: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

fn conditional_det(alpha: &Matrix2<f64>, beta: &Matrix2<f64>, gamma: &Matrix2<f64>, theta: f64, t: f64) -> f64 {
    let t = t.clamp(-T_MAX, T_MAX);
    let r = rot(theta);
    let sm = r * Matrix2::new((2.0 * t).exp(), 0.0, 0.0, (-2.0 * t).exp()) * r.transpose();
    let m = beta + sm;
    let cond = alpha - gamma * adjugate(&m) * gamma.transpose() / m.determinant();
    cond.determinant()
}

fn homodyne_det(alpha: &Matrix2<f64>, beta: &Matrix2<f64>, gamma: &Matrix2<f64>, theta: f64) -> f64 {
    let v = nalgebra::Vector2::new(theta.cos(), theta.sin());
    let gv = gamma * v;
    let cond = alpha - gv * gv.transpose() / (v.transpose() * beta * v)[(0, 0)];
    cond.determinant()
}

/// Natural-log entropy function, converted to bits at the end.
fn entropy_bits(nu: f64) -> f64 {
    let nu = nu.max(1.0);
    let a = 0.5 * (nu + 1.0);
    let b = 0.5 * (nu - 1.0);
    let s = a * a.ln() - if b > 0.0 { b * b.ln() } else { 0.0 };
    s / std::f64::consts::LN_2
}

/// Minimal conditional determinant of mode A given a measurement on B.
pub fn minimize_conditional_det(cov: &DMatrix<f64>, seed: u64) -> Result<(f64, bool)> {
    let (alpha, beta, gamma) = two_mode_blocks(cov)?;
    let general = |p: &[f64]| conditional_det(&alpha, &beta, &gamma, p[0], p[1]);
    let pi = std::f64::consts::PI;

    // Coarse grid, then polish the best few cells plus random starts.
    let mut cells: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..48 {
        let th = pi * f64::from(i) / 48.0;
        for j in 0..33 {
            let t = -T_MAX + 2.0 * T_MAX * f64::from(j) / 32.0;
            cells.push((general(&[th, t]), th, t));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<[f64; 2]> = cells.iter().take(4).map(|c| [c.1, c.2]).collect();
    for _ in 0..4 {
        starts.push([rng.random_range(0.0..pi), rng.random_range(-3.0..3.0)]);
    }
    let mut best = f64::INFINITY;
    for s in starts {
        let (_, v) = nelder_mead(general, &s, &[0.2, 0.5], 1e-15, 4000);
        best = best.min(v);
    }

    let mut hom_best = f64::INFINITY;
    let n = 180;
    let hom = |th: f64| homodyne_det(&alpha, &beta, &gamma, th);
    let vals: Vec<f64> = (0..n).map(|i| hom(pi * i as f64 / n as f64)).collect();
    for i in 0..n {
        let prev = vals[(i + n - 1) % n];
        let next = vals[(i + 1) % n];
        if vals[i] <= prev && vals[i] <= next {
            let th = pi * i as f64 / n as f64;
            let (_, v) = brent_min(hom, th - pi / n as f64, th + pi / n as f64, 1e-12, 200);
            hom_best = hom_best.min(v).min(vals[i]);
        }
    }
    if !best.is_finite() && !hom_best.is_finite() {
        return Err(Error::numeric("measurement minimization produced no finite value"));
    }
    Ok(if hom_best < best {
        (hom_best, true)
    } else {
        (best, false)
    })
}

/// Discord from the minimization oracle.
pub fn discord_by_minimization(cov: &DMatrix<f64>, measured: MeasuredMode, seed: u64) -> Result<OracleResult> {
    let cov = gaussian::symmetrized(cov)?;
    if cov.shape() != (4, 4) {
        return Err(Error::invalid("oracle needs a 4x4 covariance"));
    }
    let cov = match measured {
        MeasuredMode::B => cov,
        MeasuredMode::A => {
            let p = DMatrix::from_fn(4, 4, |i, j| if (i + 2) % 4 == j { 1.0 } else { 0.0 });
            &p * cov * p.transpose()
        }
    };
    let nu = gaussian::symplectic_eigenvalues(&cov)?;
    let (_, beta, _) = two_mode_blocks(&cov)?;
    let (e, homodyne) = minimize_conditional_det(&cov, seed)?;
    let d = entropy_bits(beta.determinant().sqrt()) - nu.iter().map(|&v| entropy_bits(v)).sum::<f64>()
        + entropy_bits(e.max(1.0).sqrt());
    Ok(OracleResult {
        discord: d,
        e_min: e,
        homodyne,
    })
}
