use nalgebra::{DMatrix, DVector};

use super::model::DriftDiffusion;
use crate::error::{Error, Result};

/// Condition-number proxy above which the dense solve is refused.
const MAX_CONDITION: f64 = 1e14;

/// Solves `A σ + σ Aᵀ + D = 0` for the steady-state covariance.
///
/// Dense Kronecker-form solve, `(I ⊗ A + A ⊗ I) vec σ = -vec D`, with one
/// step of iterative refinement. Systems are at most a handful of modes, so
/// the `(2N)² × (2N)²` operator stays small.
pub fn steady_state_cov(dd: &DriftDiffusion) -> Result<DMatrix<f64>> {
    if !dd.stable {
        return Err(Error::NoSteadyState { max_re: dd.max_re_eig });
    }
    solve_lyapunov(&dd.a, &dd.d)
}

pub fn solve_lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.shape() != (n, n) || d.shape() != (n, n) {
        return Err(Error::invalid("lyapunov: A and D must be square and equal size"));
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let op = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = -DVector::from_column_slice(d.as_slice());

    let lu = op.clone().full_piv_lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..n * n).map(|i| u[(i, i)].abs()).collect();
    let (max_u, min_u) = diag
        .iter()
        .fold((0.0f64, f64::INFINITY), |(mx, mn), &v| (mx.max(v), mn.min(v)));
    let cond = max_u / min_u;
    if !(cond < MAX_CONDITION) {
        return Err(Error::numeric(format!(
            "lyapunov operator is ill-conditioned (condition estimate {cond:.3e})"
        )));
    }
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::numeric("lyapunov operator is singular"))?;
    let resid = &rhs - &op * &x;
    if let Some(dx) = lu.solve(&resid) {
        x += dx;
    }
    let sigma = DMatrix::from_column_slice(n, n, x.as_slice());
    let sigma = (&sigma + sigma.transpose()) * 0.5;

    let residual = (a * &sigma + &sigma * a.transpose() + d).norm();
    let scale = d.norm().max(f64::MIN_POSITIVE);
    if residual > 1e-10 * scale {
        return Err(Error::numeric(format!(
            "lyapunov residual {residual:.3e} exceeds 1e-10 * |D| (condition estimate {cond:.3e})"
        )));
    }
    Ok(sigma)
}

/// Integrates `dσ/dt = A σ + σ Aᵀ + D` from `cov0` over time `t` with fixed
/// RK4 steps no longer than `dt`.
///
/// Refuses steps longer than `0.1 / max|eig A|`.
pub fn evolve_cov(cov0: &DMatrix<f64>, dd: &DriftDiffusion, t: f64, dt: f64) -> Result<DMatrix<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("evolve_cov: t must be finite and >= 0"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("evolve_cov: dt must be > 0"));
    }
    if cov0.shape() != dd.a.shape() {
        return Err(Error::invalid("evolve_cov: cov0 does not match the model dimension"));
    }
    let limit = 0.1 / dd.max_rate();
    if dt > limit {
        return Err(Error::invalid(format!(
            "evolve_cov: step {dt:.3e} exceeds the RK4 stability limit {limit:.3e}"
        )));
    }
    if t == 0.0 {
        return Ok(cov0.clone());
    }
    let steps = (t / dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let a = &dd.a;
    let at = a.transpose();
    let f = |s: &DMatrix<f64>| a * s + s * &at + &dd.d;
    let mut s = cov0.clone();
    for _ in 0..steps {
        let k1 = f(&s);
        let k2 = f(&(&s + &k1 * (0.5 * h)));
        let k3 = f(&(&s + &k2 * (0.5 * h)));
        let k4 = f(&(&s + &k3 * h));
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok((&s + s.transpose()) * 0.5)
}
