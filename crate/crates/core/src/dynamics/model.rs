use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::chirality::CouplingKind;
use crate::error::{Error, Result};

/// Rates of the light–spin model, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub g1: f64,
    pub g2: f64,
    pub gamma_spin: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub delta_spin: f64,
    /// Detection carrier (twice the Larmor frequency), Hz.
    pub carrier_hz: f64,
}

impl ModelParams {
    /// Desk-scale defaults: γ/2π = 100 Hz, κ/2π = 1 kHz, carrier 298.8 kHz,
    /// and `g₁ = g₂` chosen for cooperativity `4g²/(γκ) = 0.35`.
    pub fn desk_defaults() -> Self {
        let tau = std::f64::consts::TAU;
        let gamma = tau * 100.0;
        let kappa = tau * 1000.0;
        let g = (0.35 * gamma * kappa / 4.0).sqrt();
        ModelParams {
            g1: g,
            g2: g,
            gamma_spin: gamma,
            kappa1: kappa,
            kappa2: kappa,
            delta_spin: 0.0,
            carrier_hz: 298_800.0,
        }
    }

    /// `4 g₁ g₂ / (γ √(κ₁ κ₂))`.
    pub fn cooperativity(&self) -> f64 {
        4.0 * self.g1 * self.g2 / (self.gamma_spin * (self.kappa1 * self.kappa2).sqrt())
    }

    fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, strict: bool| -> Result<()> {
            let ok = v.is_finite() && if strict { v > 0.0 } else { v >= 0.0 };
            if ok {
                Ok(())
            } else {
                let bound = if strict { "> 0" } else { ">= 0" };
                Err(Error::invalid(format!("{name} must be finite and {bound}, got {v}")))
            }
        };
        check("g1", self.g1, false)?;
        check("g2", self.g2, false)?;
        check("gamma_spin", self.gamma_spin, true)?;
        check("kappa1", self.kappa1, true)?;
        check("kappa2", self.kappa2, true)?;
        check("carrier_hz", self.carrier_hz, true)?;
        if !self.delta_spin.is_finite() {
            return Err(Error::invalid("delta_spin must be finite"));
        }
        Ok(())
    }
}

/// Two optical channel modes `a₁, a₂` sharing one collective spin mode `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeModeModel {
    pub kind: CouplingKind,
    pub params: ModelParams,
}

impl ThreeModeModel {
    pub fn cooperativity(&self) -> f64 {
        self.params.cooperativity()
    }

    /// Same model with both light–spin rates multiplied by `factor`.
    pub fn scaled_coupling(&self, factor: f64) -> Result<ThreeModeModel> {
        let mut p = self.params;
        p.g1 *= factor.abs();
        p.g2 *= factor.abs();
        build_model(self.kind, p)
    }
}

/// Builds the three-mode model.
///
/// DBS: `H = g₁(a₁b† + a₁†b) + g₂(a₂b† + a₂†b)`.
/// NHPA: `H = g₁(a₁b† + a₁†b) + g₂(a₂†b† + a₂b)`.
/// The spin decays at `gamma_spin`, the optical modes at `kappa1/2`; all
/// baths are vacuum. NHPA models at or above unit cooperativity are rejected.
pub fn build_model(kind: CouplingKind, params: ModelParams) -> Result<ThreeModeModel> {
    params.validate()?;
    if kind == CouplingKind::Nhpa {
        let c = params.cooperativity();
        if c >= 1.0 {
            return Err(Error::AboveThreshold { cooperativity: c });
        }
    }
    Ok(ThreeModeModel { kind, params })
}

/// One optical output port: the mode it reads out, the input-noise port
/// that reflects into it, and its coupling rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputPort {
    pub mode: usize,
    pub input: usize,
    pub rate: f64,
}

/// Linear Gaussian dynamics `dx = A x dt + B dW`, `D = B Bᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
    /// Noise input matrix `B` (2N × 2M).
    pub noise_input: DMatrix<f64>,
    pub ports: Vec<OutputPort>,
    pub carrier_hz: f64,
    pub stable: bool,
    pub max_re_eig: f64,
}

impl DriftDiffusion {
    pub fn from_parts(a: DMatrix<f64>, noise_input: DMatrix<f64>, ports: Vec<OutputPort>, carrier_hz: f64) -> Self {
        let d = &noise_input * noise_input.transpose();
        let d = (&d + d.transpose()) * 0.5;
        let eig = eigenvalues(&a);
        let max_re_eig = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        DriftDiffusion {
            a,
            d,
            noise_input,
            ports,
            carrier_hz,
            stable: max_re_eig < 0.0 && eig.iter().all(|z| z.re.is_finite()),
            max_re_eig,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.a.nrows() / 2
    }

    /// Largest eigenvalue modulus of `A`.
    pub fn max_rate(&self) -> f64 {
        eigenvalues(&self.a).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest decay rate `min |Re eig A|`.
    pub fn min_decay_rate(&self) -> f64 {
        eigenvalues(&self.a)
            .iter()
            .map(|z| z.re.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues of a real square matrix via a bounded real Schur iteration.
///
/// Returns NaNs if the iteration does not converge, which downstream checks
/// treat as unstable.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = a.nrows();
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, 10_000) {
        return s.complex_eigenvalues().iter().copied().collect();
    }
    // Highly structured drift matrices can stall the shifted QR iteration;
    // an orthogonal similarity with a fixed Householder reflector breaks the
    // structure without changing the spectrum.
    for attempt in 1..=4 {
        let v = DVector::from_fn(n, |i, _| 1.0 + ((i + 1) * (attempt + 2)) as f64 * 0.37 % 1.0);
        let v = v.normalize();
        let h = DMatrix::identity(n, n) - &v * v.transpose() * 2.0;
        let b = &h * a * &h;
        if let Some(s) = Schur::try_new(b, f64::EPSILON, 10_000) {
            return s.complex_eigenvalues().iter().copied().collect();
        }
    }
    vec![Complex::new(f64::NAN, f64::NAN); n]
}

// Quadrature-index helpers: mode m has X at 2m, P at 2m+1.
const A1: usize = 0;
const A2: usize = 1;
const B: usize = 2;

/// `H = g (a_i a_j† + a_i† a_j)` ⇒ `dX_i = g P_j`, `dP_i = -g X_j` (and i ↔ j).
fn add_exchange(a: &mut DMatrix<f64>, i: usize, j: usize, g: f64) {
    a[(2 * i, 2 * j + 1)] += g;
    a[(2 * i + 1, 2 * j)] -= g;
    a[(2 * j, 2 * i + 1)] += g;
    a[(2 * j + 1, 2 * i)] -= g;
}

/// `H = g (a_i† a_j† + a_i a_j)` ⇒ `dX_i = -g P_j`, `dP_i = -g X_j` (and i ↔ j).
fn add_squeezing(a: &mut DMatrix<f64>, i: usize, j: usize, g: f64) {
    a[(2 * i, 2 * j + 1)] -= g;
    a[(2 * i + 1, 2 * j)] -= g;
    a[(2 * j, 2 * i + 1)] -= g;
    a[(2 * j + 1, 2 * i)] -= g;
}

/// Heisenberg–Langevin drift and diffusion in the order
/// `(X₁, P₁, X₂, P₂, X_b, P_b)`.
///
/// Channel 2 is read out against a local oscillator shifted by π relative to
/// channel 1 (`X₂ → -X₂`, `P₂ → -P₂`), matching the opposite Stokes-sign
/// readout of the two channels. In this frame NHPA correlations appear as
/// positively correlated `X` and anticorrelated `P`, the same convention as
/// [`crate::gaussian::tmsv_cov`].
pub fn drift_diffusion(model: &ThreeModeModel) -> DriftDiffusion {
    let p = &model.params;
    let mut a = DMatrix::zeros(6, 6);
    let decay = [p.kappa1, p.kappa1, p.kappa2, p.kappa2, p.gamma_spin, p.gamma_spin];
    for (i, r) in decay.iter().enumerate() {
        a[(i, i)] = -0.5 * r;
    }
    // Spin detuning: db/dt = -iδ b.
    a[(2 * B, 2 * B + 1)] += p.delta_spin;
    a[(2 * B + 1, 2 * B)] -= p.delta_spin;

    add_exchange(&mut a, A1, B, p.g1);
    match model.kind {
        CouplingKind::Dbs => add_exchange(&mut a, A2, B, -p.g2),
        CouplingKind::Nhpa => add_squeezing(&mut a, A2, B, -p.g2),
    }

    let noise_input = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(6, decay.iter().map(|r| r.sqrt())));
    let ports = vec![
        OutputPort {
            mode: A1,
            input: A1,
            rate: p.kappa1,
        },
        OutputPort {
            mode: A2,
            input: A2,
            rate: p.kappa2,
        },
    ];
    DriftDiffusion::from_parts(a, noise_input, ports, p.carrier_hz)
}
