//! Closed-form Gaussian quantum discord from the determinant invariants.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{self, DetInvariants};

/// Round-off below which a negative discord is reported as zero.
pub const CLAMP_TOL: f64 = 1e-10;

/// `h(x) = ((x+1)/2) log₂((x+1)/2) − ((x−1)/2) log₂((x−1)/2)`, `h(1) = 0`.
pub fn entropy_h(x: f64) -> Result<f64> {
    if !(x >= 1.0 - 1e-9) || !x.is_finite() {
        return Err(Error::invalid(format!("entropy_h needs x >= 1, got {x}")));
    }
    let x = x.max(1.0);
    let plus = 0.5 * (x + 1.0);
    let minus = 0.5 * (x - 1.0);
    let tail = if minus > 0.0 { minus * minus.log2() } else { 0.0 };
    Ok(plus * plus.log2() - tail)
}

/// Which mode the local Gaussian measurement acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MeasuredMode {
    A,
    #[default]
    B,
}

/// Branch of the minimal conditional determinant, serialized with the
/// labels used in result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "Eq29")]
    First,
    #[serde(rename = "Eq30")]
    Second,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::First => "Eq29",
            Branch::Second => "Eq30",
        })
    }
}

/// Formula variant for the branch condition and the first branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formula {
    /// `(I₄ − I₁I₂)² ≤ I₃²(I₂+1)(I₁+I₄)` and `(I₂−1)(I₄−I₁)` in the first
    /// branch. Vanishes on product states and agrees with direct
    /// minimization.
    #[default]
    Corrected,
    /// `(I₄+1)` in the condition and `(I₂−1)(I₄−1)` in the first branch.
    /// Diagnostic only: gives nonzero discord for product states.
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    /// Discord in bits, clamped at zero within [`CLAMP_TOL`].
    pub discord: f64,
    pub nu_minus: f64,
    pub nu_plus: f64,
    pub e_min: f64,
    pub branch: Branch,
    pub invariants: DetInvariants,
    pub measured: MeasuredMode,
}

/// Symplectic eigenvalues `(ν₋, ν₊)` from the invariants,
/// `ν±² = [δ ± √(δ² − 4I₄)]/2` with `δ = I₁ + I₂ + 2I₃`.
pub fn nu_from_invariants(inv: &DetInvariants) -> (f64, f64) {
    let delta = inv.i1 + inv.i2 + 2.0 * inv.i3;
    let disc = (delta * delta - 4.0 * inv.i4).max(0.0).sqrt();
    let plus_sq = 0.5 * (delta + disc);
    let minus_sq = if plus_sq > 0.0 { inv.i4 / plus_sq } else { 0.0 };
    let (plus, minus) = (plus_sq.max(0.0).sqrt(), minus_sq.max(0.0).sqrt());
    (minus, plus)
}

/// Radicand of the second branch.
pub fn second_radicand(inv: &DetInvariants) -> f64 {
    let DetInvariants { i1, i2, i3, i4 } = *inv;
    i3.powi(4) + (i4 - i1 * i2).powi(2) - 2.0 * i3 * i3 * (i4 + i1 * i2)
}

/// The same radicand written as `(I₁I₂ + I₄ − I₃²)² − 4I₁I₂I₄`.
pub fn second_radicand_factored(inv: &DetInvariants) -> f64 {
    let DetInvariants { i1, i2, i3, i4 } = *inv;
    (i1 * i2 + i4 - i3 * i3).powi(2) - 4.0 * i1 * i2 * i4
}

/// Below this distance of `I₂` from 1 the `I₂ → 1` limit `E = I₁` is used.
const PURE_MARGINAL_TOL: f64 = 1e-12;

/// Minimal conditional determinant `E^min` and the branch it came from.
pub fn e_min(inv: &DetInvariants, formula: Formula) -> Result<(f64, Branch)> {
    let DetInvariants { i1, i2, i3, i4 } = *inv;
    let cond_factor = match formula {
        Formula::Corrected => i1 + i4,
        Formula::Original => i4 + 1.0,
    };
    let first = (i4 - i1 * i2).powi(2) <= i3 * i3 * (i2 + 1.0) * cond_factor;
    if first {
        let b = i2 - 1.0;
        if b.abs() < PURE_MARGINAL_TOL {
            return Ok((i1, Branch::First));
        }
        let inner = match formula {
            Formula::Corrected => b * (i4 - i1),
            Formula::Original => b * (i4 - 1.0),
        };
        let root_arg = i3 * i3 + inner;
        if root_arg < -1e-9 * (1.0 + i3 * i3 + inner.abs()) {
            return Err(Error::numeric(format!(
                "first-branch radicand {root_arg:.3e} is negative (I = {i1}, {i2}, {i3}, {i4})"
            )));
        }
        let e = (2.0 * i3 * i3 + inner + 2.0 * i3.abs() * root_arg.max(0.0).sqrt()) / (b * b);
        if !e.is_finite() {
            return Err(Error::numeric("first-branch E^min is not finite"));
        }
        Ok((e, Branch::First))
    } else {
        let rad = second_radicand(inv);
        let scale = (i1 * i2 + i4 + i3 * i3).powi(2);
        if rad < -1e-9 * scale {
            return Err(Error::numeric(format!(
                "second-branch radicand {rad:.3e} is negative (I = {i1}, {i2}, {i3}, {i4})"
            )));
        }
        let e = (i1 * i2 - i3 * i3 + i4 - rad.max(0.0).sqrt()) / (2.0 * i2);
        Ok((e, Branch::Second))
    }
}

/// Gaussian discord `h(√I₂) − h(ν₋) − h(ν₊) + h(√E^min)` with the
/// measurement on `measured` and the corrected first branch.
pub fn gaussian_discord(cov: &DMatrix<f64>, measured: MeasuredMode) -> Result<DiscordResult> {
    gaussian_discord_with(cov, measured, Formula::Corrected)
}

pub fn gaussian_discord_with(cov: &DMatrix<f64>, measured: MeasuredMode, formula: Formula) -> Result<DiscordResult> {
    let cov = gaussian::symmetrized(cov)?;
    if cov.shape() != (4, 4) {
        return Err(Error::invalid("discord needs a 4x4 two-mode covariance"));
    }
    if !gaussian::is_physical_cov(&cov, 1e-9)? {
        return Err(Error::invalid("covariance is not physical"));
    }
    let mut inv = gaussian::det_invariants(&cov)?;
    if measured == MeasuredMode::A {
        std::mem::swap(&mut inv.i1, &mut inv.i2);
    }
    let (nu_minus, nu_plus) = nu_from_invariants(&inv);
    let (e, branch) = e_min(&inv, formula)?;
    let clamp_nu = |v: f64| if v < 1.0 && v > 1.0 - 1e-7 { 1.0 } else { v };
    let raw = entropy_h(inv.i2.sqrt())? - entropy_h(clamp_nu(nu_minus))? - entropy_h(clamp_nu(nu_plus))?
        + entropy_h(e.max(0.0).sqrt().max(1.0 - 1e-9))?;
    let discord = match formula {
        Formula::Corrected => {
            if raw < -CLAMP_TOL {
                return Err(Error::numeric(format!(
                    "discord evaluated to {raw:.3e} (branch {branch}, I = {:?})",
                    inv
                )));
            }
            raw.max(0.0)
        }
        Formula::Original => raw,
    };
    Ok(DiscordResult {
        discord,
        nu_minus,
        nu_plus,
        e_min: e,
        branch,
        invariants: inv,
        measured,
    })
}
