use nalgebra::DMatrix;

use super::model::{drift_diffusion, DriftDiffusion, ThreeModeModel};
use crate::chirality::CouplingKind;
use crate::error::{Error, Result};

/// The collective jump operator left behind by eliminating the spin mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveJump {
    pub kind: CouplingKind,
    /// `Γc = 4 g₁ g₂ / γ`, rad/s.
    pub rate: f64,
    /// Relative phase of the second channel in the jump operator.
    pub phase: f64,
}

impl CollectiveJump {
    /// Human-readable operator form.
    pub fn describe(&self) -> String {
        let partner = match self.kind {
            CouplingKind::Dbs => "a2",
            CouplingKind::Nhpa => "a2^dag",
        };
        format!("L = sqrt({:.6e}) (a1 + exp(i*{:.3}) {partner})", self.rate, self.phase)
    }
}

#[derive(Debug, Clone)]
pub struct EliminatedModel {
    /// 4×4 dynamics of `(X₁, P₁, X₂, P₂)`.
    pub dynamics: DriftDiffusion,
    pub jump: CollectiveJump,
    pub warnings: Vec<String>,
}

/// Eliminates the fast spin mode from the three-mode model.
///
/// With `x = (x_a, x_b)` the spin block is slaved to its quasi-static value
/// `x_b ≈ -A_bb⁻¹ (A_ba x_a + B_b ξ_b)`, giving
/// `A_eff = A_aa - A_ab A_bb⁻¹ A_ba` and noise input
/// `[B_a | -A_ab A_bb⁻¹ B_b]`. Valid for `γ ≫ g, κ`; outside that regime a
/// warning is attached but the result is still returned.
pub fn adiabatic_eliminate(model: &ThreeModeModel) -> Result<EliminatedModel> {
    let p = &model.params;
    let mut warnings = Vec::new();
    let fastest_other = p.g1.max(p.g2).max(p.kappa1).max(p.kappa2);
    if p.gamma_spin < 10.0 * fastest_other {
        warnings.push(format!(
            "adiabatic elimination outside validity regime: gamma_spin = {:.3e} < 10 x {:.3e}",
            p.gamma_spin, fastest_other
        ));
    }

    let full = drift_diffusion(model);
    let a = &full.a;
    let bmat = &full.noise_input;
    let a_aa = a.view((0, 0), (4, 4)).into_owned();
    let a_ab = a.view((0, 4), (4, 2)).into_owned();
    let a_ba = a.view((4, 0), (2, 4)).into_owned();
    let a_bb = a.view((4, 4), (2, 2)).into_owned();
    let a_bb_inv = a_bb
        .try_inverse()
        .ok_or_else(|| Error::numeric("spin block of the drift matrix is singular"))?;

    let proj = &a_ab * &a_bb_inv;
    let a_eff = &a_aa - &proj * &a_ba;

    let mut b_eff = DMatrix::zeros(4, 6);
    b_eff.view_mut((0, 0), (4, 4)).copy_from(&bmat.view((0, 0), (4, 4)));
    let b_spin = bmat.view((4, 4), (2, 2)).into_owned();
    b_eff.view_mut((0, 4), (4, 2)).copy_from(&(-&proj * b_spin));

    let dynamics = DriftDiffusion::from_parts(a_eff, b_eff, full.ports.clone(), full.carrier_hz);
    Ok(EliminatedModel {
        dynamics,
        jump: CollectiveJump {
            kind: model.kind,
            rate: 4.0 * p.g1 * p.g2 / p.gamma_spin,
            phase: 0.0,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::lyapunov::steady_state_cov;
    use crate::dynamics::model::{build_model, ModelParams};

    fn params(g: f64, ratio: f64) -> ModelParams {
        ModelParams {
            g1: g,
            g2: g,
            gamma_spin: ratio * g,
            kappa1: g,
            kappa2: g,
            delta_spin: 0.0,
            carrier_hz: 1.0,
        }
    }

    fn block_error(kind: CouplingKind, ratio: f64) -> f64 {
        let m = build_model(kind, params(1.0, ratio)).unwrap();
        let full = steady_state_cov(&drift_diffusion(&m)).unwrap();
        let eff = steady_state_cov(&adiabatic_eliminate(&m).unwrap().dynamics).unwrap();
        (full.view((0, 0), (4, 4)).into_owned() - eff).norm()
    }

    #[test]
    fn dbs_effective_state_is_vacuum() {
        let m = build_model(CouplingKind::Dbs, params(1.0, 100.0)).unwrap();
        let el = adiabatic_eliminate(&m).unwrap();
        assert!(el.warnings.is_empty());
        let eff = steady_state_cov(&el.dynamics).unwrap();
        assert!((eff - DMatrix::<f64>::identity(4, 4)).norm() < 1e-3);
        assert!(block_error(CouplingKind::Dbs, 100.0) < 1e-3);
    }

    #[test]
    fn nhpa_epr_variance_matches_full_model() {
        let m = build_model(CouplingKind::Nhpa, params(1.0, 100.0)).unwrap();
        let full = steady_state_cov(&drift_diffusion(&m)).unwrap();
        let eff = steady_state_cov(&adiabatic_eliminate(&m).unwrap().dynamics).unwrap();
        let epr = |s: &DMatrix<f64>| 0.5 * (s[(0, 0)] + s[(2, 2)] - 2.0 * s[(0, 2)]);
        assert!((epr(&full) - epr(&eff)).abs() < 1e-3);
    }

    #[test]
    fn error_shrinks_with_spin_decay() {
        for kind in [CouplingKind::Dbs, CouplingKind::Nhpa] {
            let errs: Vec<f64> = [10.0, 30.0, 100.0].iter().map(|&r| block_error(kind, r)).collect();
            assert!(errs[0] >= errs[1] && errs[1] >= errs[2], "{kind}: {errs:?}");
        }
    }

    #[test]
    fn no_second_coupling_means_no_collective_rate() {
        let mut p = params(1.0, 100.0);
        p.g2 = 0.0;
        for kind in [CouplingKind::Dbs, CouplingKind::Nhpa] {
            let el = adiabatic_eliminate(&build_model(kind, p).unwrap()).unwrap();
            assert_eq!(el.jump.rate, 0.0);
            let a = &el.dynamics.a;
            for i in 0..2 {
                for j in 2..4 {
                    assert_eq!(a[(i, j)], 0.0);
                    assert_eq!(a[(j, i)], 0.0);
                }
            }
        }
    }

    #[test]
    fn regime_warning() {
        let m = build_model(CouplingKind::Dbs, params(1.0, 3.0)).unwrap();
        assert_eq!(adiabatic_eliminate(&m).unwrap().warnings.len(), 1);
        let d = adiabatic_eliminate(&m).unwrap().jump.describe();
        assert!(d.contains("a2") && !d.contains("dag"));
    }
}
