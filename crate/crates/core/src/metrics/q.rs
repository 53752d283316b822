//! The bipartite correlation witness `Q = B − A` and the homodyne algebra
//! that feeds it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian;

/// Homodyne variances of the two channels, shot-noise units.
///
/// `var_xminus = Var[(X₁ − X₂)/√2]`, `var_pplus = Var[(P₁ + P₂)/√2]`, and
/// likewise for the optional `var_xplus`, `var_pminus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointVariances {
    pub var_x1: f64,
    pub var_x2: f64,
    pub var_p1: f64,
    pub var_p2: f64,
    pub var_xminus: f64,
    pub var_pplus: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_xplus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_pminus: Option<f64>,
}

/// Relative slack on the Cauchy–Schwarz consistency check.
const CONSISTENCY_TOL: f64 = 1e-9;

impl JointVariances {
    pub fn validate(&self) -> Result<()> {
        let entries = [
            ("var_x1", Some(self.var_x1)),
            ("var_x2", Some(self.var_x2)),
            ("var_p1", Some(self.var_p1)),
            ("var_p2", Some(self.var_p2)),
            ("var_xminus", Some(self.var_xminus)),
            ("var_pplus", Some(self.var_pplus)),
            ("var_xplus", self.var_xplus),
            ("var_pminus", self.var_pminus),
        ];
        for (name, v) in entries {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
                }
            }
        }
        let check = |a: f64, b: f64, combo: f64, label: &str| -> Result<()> {
            // combo = (a + b ∓ 2c)/2, so |a + b − 2 combo| = 2|c| ≤ 2√(ab).
            let lhs = (a + b - 2.0 * combo).abs();
            let rhs = 2.0 * (a * b).sqrt();
            if lhs > rhs * (1.0 + CONSISTENCY_TOL) {
                return Err(Error::DataInconsistency(format!(
                    "{label}: implied covariance {:.6e} exceeds the Cauchy-Schwarz bound {:.6e}",
                    0.5 * lhs,
                    0.5 * rhs
                )));
            }
            Ok(())
        };
        check(self.var_x1, self.var_x2, self.var_xminus, "var_xminus")?;
        check(self.var_p1, self.var_p2, self.var_pplus, "var_pplus")?;
        if let Some(v) = self.var_xplus {
            check(self.var_x1, self.var_x2, v, "var_xplus")?;
        }
        if let Some(v) = self.var_pminus {
            check(self.var_p1, self.var_p2, v, "var_pminus")?;
        }
        Ok(())
    }

    /// Standard-form covariance (diagonal blocks) implied by the variances.
    pub fn to_standard_cov(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let cxx = 0.5 * (self.var_x1 + self.var_x2) - self.var_xminus;
        let cpp = self.var_pplus - 0.5 * (self.var_p1 + self.var_p2);
        Ok(DMatrix::from_row_slice(
            4,
            4,
            &[
                self.var_x1,
                0.0,
                cxx,
                0.0, //
                0.0,
                self.var_p1,
                0.0,
                cpp, //
                cxx,
                0.0,
                self.var_x2,
                0.0, //
                0.0,
                cpp,
                0.0,
                self.var_p2,
            ],
        ))
    }
}

/// `Q = B − A` with `A = var_xminus + var_pplus` and
/// `B = (var_x1 + var_x2)/2 + (var_p1 + var_p2)/2`.
pub fn quantum_correlation_q(jv: &JointVariances) -> Result<f64> {
    jv.validate()?;
    let b = 0.5 * (jv.var_x1 + jv.var_x2) + 0.5 * (jv.var_p1 + jv.var_p2);
    let a = jv.var_xminus + jv.var_pplus;
    Ok(b - a)
}

/// Reads the homodyne variances off a two-mode covariance.
pub fn joint_variances_from_cov(cov: &DMatrix<f64>) -> Result<JointVariances> {
    let cov = gaussian::symmetrized(cov)?;
    if cov.shape() != (4, 4) {
        return Err(Error::invalid("joint variances need a 4x4 two-mode covariance"));
    }
    if !gaussian::is_physical_cov(&cov, 1e-9)? {
        return Err(Error::invalid("covariance is not physical"));
    }
    let (x1, p1, x2, p2) = (cov[(0, 0)], cov[(1, 1)], cov[(2, 2)], cov[(3, 3)]);
    let (cxx, cpp) = (cov[(0, 2)], cov[(1, 3)]);
    Ok(JointVariances {
        var_x1: x1,
        var_x2: x2,
        var_p1: p1,
        var_p2: p2,
        var_xminus: 0.5 * (x1 + x2) - cxx,
        var_pplus: 0.5 * (p1 + p2) + cpp,
        var_xplus: Some(0.5 * (x1 + x2) + cxx),
        var_pminus: Some(0.5 * (p1 + p2) - cpp),
    })
}

/// `Q` of a two-mode covariance.
pub fn q_from_cov(cov: &DMatrix<f64>) -> Result<f64> {
    quantum_correlation_q(&joint_variances_from_cov(cov)?)
}

/// Reconstructs `(Cov(X_A,X_B), Cov(P_A,P_B))` from power-combiner outputs.
///
/// `var_xsum = Var(X_A + X_B)` and `var_pdiff = Var(P_A − P_B)`, without
/// the `1/√2` normalization.
pub fn covariance_from_homodyne(
    var_xa: f64,
    var_xb: f64,
    var_xsum: f64,
    var_pa: f64,
    var_pb: f64,
    var_pdiff: f64,
) -> Result<(f64, f64)> {
    for (name, v) in [
        ("var_xa", var_xa),
        ("var_xb", var_xb),
        ("var_xsum", var_xsum),
        ("var_pa", var_pa),
        ("var_pb", var_pb),
        ("var_pdiff", var_pdiff),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    let cov_xx = 0.5 * (var_xsum - var_xa - var_xb);
    let cov_pp = -0.5 * (var_pdiff - var_pa - var_pb);
    for (label, c, a, b) in [("X", cov_xx, var_xa, var_xb), ("P", cov_pp, var_pa, var_pb)] {
        if c.abs() > (a * b).sqrt() * (1.0 + CONSISTENCY_TOL) {
            return Err(Error::DataInconsistency(format!(
                "{label} covariance {c:.6e} exceeds sqrt(Var_A Var_B) = {:.6e}",
                (a * b).sqrt()
            )));
        }
    }
    Ok((cov_xx, cov_pp))
}

/// Channel index for [`quadratures_from_stokes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    One,
    Two,
}

impl TryFrom<u8> for Channel {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Channel::One),
            2 => Ok(Channel::Two),
            _ => Err(Error::invalid(format!("channel must be 1 or 2, got {v}"))),
        }
    }
}

/// Maps Stokes components to channel quadratures.
///
/// `X = −Sx/√|Sz|` in both channels. The two channels' local oscillators
/// have opposite `Sz`, so `P = −Sy/√|Sz|` in channel 1 and `+Sy/√|Sz|` in
/// channel 2 keeps the same commutator sign.
pub fn quadratures_from_stokes(sx: f64, sy: f64, sz: f64, channel: Channel) -> Result<(f64, f64)> {
    if sz == 0.0 {
        return Err(Error::UndefinedLocalOscillator);
    }
    let root = sz.abs().sqrt();
    let x = -sx / root;
    let p = match channel {
        Channel::One => -sy / root,
        Channel::Two => sy / root,
    };
    Ok((x, p))
}

/// Converts a covariance from the vacuum-variance-½ convention
/// (`[X, P] = i`) to shot-noise units.
pub fn from_half_vacuum_units(cov: &DMatrix<f64>) -> DMatrix<f64> {
    cov * 2.0
}

/// Inverse of [`from_half_vacuum_units`].
pub fn to_half_vacuum_units(cov: &DMatrix<f64>) -> DMatrix<f64> {
    cov * 0.5
}
