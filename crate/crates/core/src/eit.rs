//! Classical Λ-EIT susceptibility with Maxwell–Boltzmann Doppler averaging.
//!
//! Probe and control share one wavenumber `k`. An atom moving with velocity
//! `v` along the control beam sees the control shifted by `-kv`; a
//! co-propagating probe is shifted by the same amount, so the two-photon
//! detuning is velocity independent, while a counter-propagating probe is
//! shifted by `+kv` and the two-photon detuning picks up `-2kv`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig12;

type C64 = Complex<f64>;

/// `2π / 795 nm`, the ⁸⁷Rb D1 wavenumber in rad/m.
pub const RB87_D1_WAVENUMBER: f64 = std::f64::consts::TAU / 795e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Geometry {
    #[serde(rename = "co")]
    CoPropagating,
    #[serde(rename = "counter")]
    CounterPropagating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EitParams {
    /// Control Rabi frequency, rad/s.
    pub rabi_c: f64,
    /// Ground-state decoherence, rad/s.
    pub gamma12: f64,
    /// Excited-state decay, rad/s.
    pub gamma3: f64,
    /// Control detuning, rad/s.
    pub delta_c: f64,
    /// Wavenumber, rad/m.
    pub k: f64,
    /// Thermal velocity scale `u` of `exp(-v²/u²)`, m/s.
    pub u_thermal: f64,
    pub od: f64,
}

impl Default for EitParams {
    fn default() -> Self {
        let tau = std::f64::consts::TAU;
        EitParams {
            rabi_c: tau * 0.5e6,
            gamma12: tau * 500.0,
            gamma3: tau * 5.75e6,
            delta_c: 0.0,
            k: RB87_D1_WAVENUMBER,
            u_thermal: 160.0,
            od: 50.0,
        }
    }
}

impl EitParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rabi_c", self.rabi_c),
            ("gamma12", self.gamma12),
            ("gamma3", self.gamma3),
            ("k", self.k),
            ("u_thermal", self.u_thermal),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(format!("eit.{name}"), "must be finite and > 0"));
            }
        }
        if !(self.od >= 0.0) || !self.od.is_finite() {
            return Err(Error::validation("eit.od", "must be finite and >= 0"));
        }
        if !self.delta_c.is_finite() {
            return Err(Error::validation("eit.delta_c", "must be finite"));
        }
        Ok(())
    }

    /// Velocity-dependent one- and two-photon detunings.
    fn detunings(&self, delta_p: f64, v: f64, geom: Geometry) -> (f64, f64) {
        let kv = self.k * v;
        let two_photon = self.delta_c - delta_p;
        match geom {
            Geometry::CoPropagating => (delta_p - kv, two_photon),
            Geometry::CounterPropagating => (delta_p + kv, two_photon - 2.0 * kv),
        }
    }
}

/// Probe susceptibility for atoms at velocity `v`, normalized so that
/// `Im χ = 1` on resonance without control field.
///
/// `χ = i (γ₃/2) / [γ₃/2 − iΔ₁ + (Ω_c²/4) / (γ₁₂ + iΔ₂)]`, with `Δ₂` the
/// two-photon detuning `Δ_c − Δ_p` seen by the atom.
pub fn lambda_chi(delta_p: f64, v: f64, geom: Geometry, p: &EitParams) -> C64 {
    let (d1, d2) = p.detunings(delta_p, v, geom);
    let half = 0.5 * p.gamma3;
    let ground = C64::new(p.gamma12, d2);
    let denom = C64::new(half, -d1) + 0.25 * p.rabi_c * p.rabi_c / ground;
    C64::new(0.0, half) / denom
}

/// `(1/√π) ∫ e^{-t²} / (t − z) dt` for non-real `z`.
fn gaussian_cauchy(z: C64) -> C64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    if z.im > 0.0 {
        C64::new(0.0, sqrt_pi) * errorfunctions::w_with_relerror(z, 0.0)
    } else {
        C64::new(0.0, -sqrt_pi) * errorfunctions::w_with_relerror(z.conj(), 0.0).conj()
    }
}

/// Maxwell–Boltzmann average of [`lambda_chi`], evaluated exactly.
///
/// In `v` the susceptibility is a ratio of polynomials of degree ≤ 1 over
/// degree ≤ 2; its partial-fraction poles are integrated against the
/// Gaussian with the Faddeeva function.
pub fn doppler_averaged_chi(delta_p: f64, geom: Geometry, p: &EitParams) -> C64 {
    let half = 0.5 * p.gamma3;
    let (d1_0, d2_0) = p.detunings(delta_p, 0.0, geom);
    let (s1, s2) = match geom {
        Geometry::CoPropagating => (-p.k, 0.0),
        Geometry::CounterPropagating => (p.k, -2.0 * p.k),
    };
    let i = C64::new(0.0, 1.0);
    // χ(v) = N(v) / Q(v) with
    //   N = i half (γ12 + iΔ₂(v)),
    //   Q = (half − iΔ₁(v)) (γ12 + iΔ₂(v)) + Ω²/4.
    let a0 = C64::new(half, -d1_0);
    let a1 = -i * s1;
    let b0 = C64::new(p.gamma12, d2_0);
    let b1 = i * s2;
    let n0 = i * half * b0;
    let n1 = i * half * b1;
    let q0 = a0 * b0 + 0.25 * p.rabi_c * p.rabi_c;
    let q1 = a0 * b1 + a1 * b0;
    let q2 = a1 * b1;

    let u = p.u_thermal;
    if q2.norm() == 0.0 {
        // single pole: N is constant.
        let pole = -q0 / q1;
        let residue = n0 / q1;
        return residue / u * gaussian_cauchy(pole / u);
    }
    let disc = (q1 * q1 - 4.0 * q2 * q0).sqrt();
    let r1 = (-q1 + disc) / (2.0 * q2);
    let r2 = (-q1 - disc) / (2.0 * q2);
    let num = |v: C64| n0 + n1 * v;
    let dq = |v: C64| q1 + 2.0 * q2 * v;
    let mut total = C64::new(0.0, 0.0);
    for r in [r1, r2] {
        total += num(r) / dq(r) / u * gaussian_cauchy(r / u);
    }
    total
}

/// Gauss–Hermite nodes and weights for `∫ e^{-t²} f(t) dt` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], sqrt_pi * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureChi {
    pub chi: C64,
    /// `false` when doubling the node count moves the result by more than
    /// `1e-6` relative.
    pub converged: bool,
}

/// Gauss–Hermite Doppler average with `n_points` nodes, checked against
/// `2·n_points`.
pub fn doppler_averaged_chi_gh(delta_p: f64, geom: Geometry, p: &EitParams, n_points: usize) -> Result<QuadratureChi> {
    if n_points < 32 {
        return Err(Error::invalid("Gauss-Hermite averaging needs at least 32 nodes"));
    }
    let avg = |n: usize| {
        let (x, w) = gauss_hermite(n);
        let s: C64 = x
            .iter()
            .zip(&w)
            .map(|(t, wt)| lambda_chi(delta_p, p.u_thermal * t, geom, p) * *wt)
            .sum();
        s / std::f64::consts::PI.sqrt()
    };
    let a = avg(n_points);
    let b = avg(2 * n_points);
    let converged = (a - b).norm() <= 1e-6 * b.norm().max(f64::MIN_POSITIVE);
    Ok(QuadratureChi { chi: a, converged })
}

/// `T(Δ_p) = exp(−od · Im χ̄(Δ_p))` on a grid of probe detunings (rad/s).
pub fn transmission(delta_grid: &[f64], geom: Geometry, p: &EitParams) -> Result<Vec<f64>> {
    p.validate()?;
    crate::dynamics::spectrum::check_grid(delta_grid)?;
    Ok(delta_grid
        .iter()
        .map(|&d| (-p.od * doppler_averaged_chi(d, geom, p).im).exp())
        .collect())
}

/// Baseline taken as the mean of `edge_points` samples at each end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineWindow {
    pub edge_points: usize,
}

/// `(T_peak − T_baseline) / T_baseline`, with the peak searched between the
/// baseline windows. Never negative.
pub fn eit_contrast(t: &[f64], window: BaselineWindow) -> Result<f64> {
    let e = window.edge_points;
    if e == 0 {
        return Err(Error::invalid("baseline window is empty"));
    }
    if 2 * e >= t.len() {
        return Err(Error::invalid("baseline window does not fit inside the grid"));
    }
    let base = (t[..e].iter().sum::<f64>() + t[t.len() - e..].iter().sum::<f64>()) / (2 * e) as f64;
    let peak = t[e..t.len() - e].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(base > 0.0) {
        return Err(Error::numeric("baseline transmission is zero"));
    }
    Ok(((peak - base) / base).max(0.0))
}

/// Default probe grid: ±50 kHz around two-photon resonance, 2001 points,
/// returned in Hz.
pub fn default_grid_hz(p: &EitParams) -> Vec<f64> {
    let center = p.delta_c / std::f64::consts::TAU;
    crate::dynamics::spectrum::centered_grid(center, 50e3, 2001)
}

pub const DEFAULT_BASELINE: BaselineWindow = BaselineWindow { edge_points: 200 };

/// Transmission spectrum in Hz plus its contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct EitSpectrum {
    pub geometry: Geometry,
    pub delta_hz: Vec<f64>,
    pub transmission: Vec<f64>,
    pub contrast: f64,
}

impl EitSpectrum {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta_hz,transmission\n");
        for (d, t) in self.delta_hz.iter().zip(&self.transmission) {
            out.push_str(&sig12(*d));
            out.push(',');
            out.push_str(&sig12(*t));
            out.push('\n');
        }
        out
    }
}

pub fn eit_spectrum(delta_hz: &[f64], geom: Geometry, p: &EitParams, window: BaselineWindow) -> Result<EitSpectrum> {
    let rad: Vec<f64> = delta_hz.iter().map(|d| std::f64::consts::TAU * d).collect();
    let t = transmission(&rad, geom, p)?;
    let contrast = eit_contrast(&t, window)?;
    Ok(EitSpectrum {
        geometry: geom,
        delta_hz: delta_hz.to_vec(),
        transmission: t,
        contrast,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = std::f64::consts::TAU;

    #[test]
    fn bare_line_is_lorentzian() {
        let p = EitParams {
            rabi_c: 1e-9,
            ..EitParams::default()
        };
        let g = 0.5 * p.gamma3;
        for d in [0.0, 0.3 * g, g, 4.0 * g] {
            let chi = lambda_chi(d, 0.0, Geometry::CoPropagating, &p);
            let lorentz = g * g / (g * g + d * d);
            assert!((chi.im - lorentz).abs() < 1e-9, "{d}");
        }
    }

    #[test]
    fn resonant_transparency_dip() {
        let p = EitParams::default();
        let on = lambda_chi(0.0, 0.0, Geometry::CoPropagating, &p).im;
        let mut bare = p;
        bare.rabi_c = 1e-9;
        let without = lambda_chi(0.0, 0.0, Geometry::CoPropagating, &bare).im;
        assert!((without - 1.0).abs() < 1e-12);
        assert!(on < 0.05 * without, "{on}");
        for d in [TAU * 5e3, TAU * 20e3, TAU * 80e3] {
            assert!(lambda_chi(d, 0.0, Geometry::CoPropagating, &p).im > on);
        }
    }

    #[test]
    fn counter_propagation_shifts_two_photon_detuning() {
        let p = EitParams::default();
        let v = 3.0;
        let (_, d2) = p.detunings(0.0, v, Geometry::CounterPropagating);
        assert!((d2 + 2.0 * p.k * v).abs() < 1e-9);
        let (_, d2) = p.detunings(0.0, v, Geometry::CoPropagating);
        assert_eq!(d2, 0.0);
    }

    /// Trapezoid over a fine velocity grid as an independent reference.
    fn brute_average(delta_p: f64, geom: Geometry, p: &EitParams) -> C64 {
        let n = 400_001;
        let vmax = 6.0 * p.u_thermal;
        let h = 2.0 * vmax / (n - 1) as f64;
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            let v = -vmax + h * i as f64;
            let w = (-(v / p.u_thermal).powi(2)).exp() / (std::f64::consts::PI.sqrt() * p.u_thermal);
            s += lambda_chi(delta_p, v, geom, p) * w * h;
        }
        s
    }

    #[test]
    fn exact_average_matches_brute_force() {
        let p = EitParams {
            u_thermal: 5.0,
            ..EitParams::default()
        };
        for geom in [Geometry::CoPropagating, Geometry::CounterPropagating] {
            for d in [0.0, TAU * 3e3, TAU * -40e3] {
                let a = doppler_averaged_chi(d, geom, &p);
                let b = brute_average(d, geom, &p);
                assert!((a - b).norm() < 1e-6 * b.norm().max(1e-3), "{geom:?} {d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cold_limit() {
        let p = EitParams {
            u_thermal: 1e-9,
            ..EitParams::default()
        };
        for geom in [Geometry::CoPropagating, Geometry::CounterPropagating] {
            let a = doppler_averaged_chi(TAU * 1e3, geom, &p);
            let b = lambda_chi(TAU * 1e3, 0.0, geom, &p);
            assert!((a - b).norm() < 1e-6 * b.norm());
        }
    }

    #[test]
    fn gauss_hermite_rule() {
        let (x, w) = gauss_hermite(20);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| x * x * w).sum();
        assert!((m0 - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((m2 - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gauss_hermite_flags_unresolved_lines() {
        let p = EitParams::default();
        let r = doppler_averaged_chi_gh(0.0, Geometry::CounterPropagating, &p, 64).unwrap();
        assert!(!r.converged);
        let mut warm = p;
        warm.u_thermal = 1e-4;
        let r = doppler_averaged_chi_gh(TAU * 1e3, Geometry::CoPropagating, &warm, 64).unwrap();
        assert!(r.converged);
        assert!(doppler_averaged_chi_gh(0.0, Geometry::CoPropagating, &p, 16).is_err());
    }

    #[test]
    fn zero_depth_is_transparent() {
        let p = EitParams {
            od: 0.0,
            ..EitParams::default()
        };
        let t = transmission(&[-1.0, 0.0, 1.0], Geometry::CoPropagating, &p).unwrap();
        assert_eq!(t, vec![1.0; 3]);
    }

    #[test]
    fn contrast_edge_cases() {
        assert_eq!(
            eit_contrast(&[0.5; 50], BaselineWindow { edge_points: 5 }).unwrap(),
            0.0
        );
        assert!(eit_contrast(&[0.5; 50], BaselineWindow { edge_points: 0 }).is_err());
        assert!(eit_contrast(&[0.5; 10], BaselineWindow { edge_points: 5 }).is_err());
    }

    #[test]
    fn forward_transparency_backward_blockade() {
        let p = EitParams::default();
        let grid = default_grid_hz(&p);
        let fwd = eit_spectrum(&grid, Geometry::CoPropagating, &p, DEFAULT_BASELINE).unwrap();
        let bwd = eit_spectrum(&grid, Geometry::CounterPropagating, &p, DEFAULT_BASELINE).unwrap();
        assert!(fwd.contrast > 0.2, "{}", fwd.contrast);
        assert!(bwd.contrast < 0.02 * fwd.contrast);
        let imax = fwd
            .transmission
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(grid[imax].abs() < 100.0);
    }
}
