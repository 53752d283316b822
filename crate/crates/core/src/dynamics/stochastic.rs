//! Euler–Maruyama simulation of the Langevin equations with a Welch
//! periodogram of the homodyne output. Independent check on the analytic
//! input–output spectrum.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::model::DriftDiffusion;
use super::spectrum::{NoiseSpectrum, Selector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticConfig {
    /// Total simulated time, s.
    pub duration: f64,
    /// Integration step, s. Must satisfy `dt ≤ 0.05 / max|eig A|`.
    pub dt: f64,
    /// Number of non-overlapping Welch segments.
    pub segments: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSpectrum {
    /// Estimated spectrum on the FFT bin grid, ascending in frequency.
    pub spectrum: NoiseSpectrum,
    /// Standard error of each bin, from the spread across segments.
    pub std_err: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Simulates `dx = A x dt + B dW` and estimates the output spectrum of one
/// quadrature combination.
///
/// The sampled output is `y_k = wᵀ (J ΔW_k/dt − K (x_k + x_{k+1})/2)`; its
/// two-sided periodogram (Hann window, `dt/Σw²` normalization) averaged over
/// segments estimates the shot-noise-normalized spectrum.
pub fn stochastic_trajectory_spectrum(
    dd: &DriftDiffusion,
    selector: &Selector,
    cfg: &StochasticConfig,
) -> Result<StochasticSpectrum> {
    if !dd.stable {
        return Err(Error::NoSteadyState { max_re: dd.max_re_eig });
    }
    if dd.ports.len() != 2 {
        return Err(Error::invalid("stochastic spectrum needs exactly two optical ports"));
    }
    if !(cfg.dt > 0.0) || !(cfg.duration > 0.0) {
        return Err(Error::invalid("duration and dt must be > 0"));
    }
    let limit = 0.05 / dd.max_rate();
    if cfg.dt > limit {
        return Err(Error::invalid(format!(
            "dt = {:.3e} exceeds the Euler-Maruyama limit {limit:.3e}",
            cfg.dt
        )));
    }
    if cfg.segments < 2 {
        return Err(Error::invalid("at least two Welch segments are required"));
    }
    let mut warnings = Vec::new();
    let min_duration = 100.0 / dd.min_decay_rate();
    if cfg.duration < min_duration {
        warnings.push(format!(
            "duration {:.3e} s is below 100 / slowest decay rate = {min_duration:.3e} s; \
             spectrum variance will be inflated",
            cfg.duration
        ));
    }
    let total = (cfg.duration / cfg.dt).round() as usize;
    let seg_len = total / cfg.segments;
    if seg_len < 16 {
        return Err(Error::invalid(
            "segments are too short; increase duration or reduce segments",
        ));
    }

    let n = dd.a.nrows();
    let m = dd.noise_input.ncols();
    let dt = cfg.dt;
    // Output weights acting on the noise increment and the state.
    let mut wj = DVector::<f64>::zeros(m);
    let mut wk = DVector::<f64>::zeros(n);
    for (k, port) in dd.ports.iter().enumerate() {
        for q in 0..2 {
            let w = selector.weights[2 * k + q];
            wj[2 * port.input + q] += w;
            wk[2 * port.mode + q] += w * port.rate.sqrt();
        }
    }
    let step: DMatrix<f64> = DMatrix::identity(n, n) + &dd.a * dt;
    let sqrt_dt = dt.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = DVector::<f64>::zeros(n);
    // Burn-in to reach the stationary state.
    let burn = ((10.0 / dd.min_decay_rate()) / dt).ceil() as usize;
    let mut dw = DVector::<f64>::zeros(m);
    let draw = |rng: &mut ChaCha8Rng, dw: &mut DVector<f64>| {
        for v in dw.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v = z * sqrt_dt;
        }
    };
    for _ in 0..burn {
        draw(&mut rng, &mut dw);
        x = &step * &x + &dd.noise_input * &dw;
    }

    let window: Vec<f64> = (0..seg_len)
        .map(|i| {
            let s = (std::f64::consts::PI * i as f64 / seg_len as f64).sin();
            s * s
        })
        .collect();
    let wsum2: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg_len);

    let mut periodograms: Vec<Vec<f64>> = Vec::with_capacity(cfg.segments);
    let mut buf = vec![Complex::new(0.0, 0.0); seg_len];
    for _ in 0..cfg.segments {
        for (i, slot) in buf.iter_mut().enumerate() {
            draw(&mut rng, &mut dw);
            let next = &step * &x + &dd.noise_input * &dw;
            let y = wj.dot(&dw) / dt - 0.5 * wk.dot(&(&x + &next));
            x = next;
            *slot = Complex::new(y * window[i], 0.0);
        }
        fft.process(&mut buf);
        periodograms.push(buf.iter().map(|c| c.norm_sqr() * dt / wsum2).collect());
    }

    // Reorder bins to ascending frequency.
    let df = 1.0 / (seg_len as f64 * dt);
    let half = seg_len / 2;
    let order: Vec<usize> = (half + 1..seg_len).chain(0..=half).collect();
    let k = cfg.segments as f64;
    let mut freq = Vec::with_capacity(seg_len);
    let mut mean = Vec::with_capacity(seg_len);
    let mut se = Vec::with_capacity(seg_len);
    for &b in &order {
        let signed = if b > half { b as f64 - seg_len as f64 } else { b as f64 };
        freq.push(dd.carrier_hz + signed * df);
        let mu = periodograms.iter().map(|p| p[b]).sum::<f64>() / k;
        let var = periodograms.iter().map(|p| (p[b] - mu).powi(2)).sum::<f64>() / (k - 1.0);
        mean.push(mu);
        se.push((var / k).sqrt());
    }
    Ok(StochasticSpectrum {
        spectrum: NoiseSpectrum {
            freq_hz: freq,
            series: vec![(selector.label.clone(), mean)],
        },
        std_err: se,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirality::CouplingKind;
    use crate::dynamics::model::{build_model, drift_diffusion, ModelParams};

    fn cfg(dd: &DriftDiffusion, seed: u64) -> StochasticConfig {
        StochasticConfig {
            duration: 2.0,
            dt: 0.02 / dd.max_rate(),
            segments: 32,
            seed,
        }
    }

    #[test]
    fn vacuum_model_is_flat() {
        let mut p = ModelParams::desk_defaults();
        p.g1 = 0.0;
        p.g2 = 0.0;
        let dd = drift_diffusion(&build_model(CouplingKind::Dbs, p).unwrap());
        let sel = Selector::parse("X1").unwrap();
        let s = stochastic_trajectory_spectrum(&dd, &sel, &cfg(&dd, 7)).unwrap();
        let vals = &s.spectrum.series[0].1;
        let inside = vals
            .iter()
            .zip(&s.std_err)
            .filter(|(v, e)| (*v - 1.0).abs() <= 3.0 * *e)
            .count();
        assert!(inside as f64 >= 0.95 * vals.len() as f64);
    }

    #[test]
    fn deterministic_given_seed() {
        let dd = drift_diffusion(&build_model(CouplingKind::Nhpa, ModelParams::desk_defaults()).unwrap());
        let sel = Selector::parse("X1-X2").unwrap();
        let mut c = cfg(&dd, 11);
        c.duration = 0.3;
        let a = stochastic_trajectory_spectrum(&dd, &sel, &c).unwrap();
        let b = stochastic_trajectory_spectrum(&dd, &sel, &c).unwrap();
        assert_eq!(a, b);
        assert!(!a.warnings.is_empty());
    }

    #[test]
    fn oversized_step_refused() {
        let dd = drift_diffusion(&build_model(CouplingKind::Dbs, ModelParams::desk_defaults()).unwrap());
        let mut c = cfg(&dd, 1);
        c.dt = 1.0 / dd.max_rate();
        assert!(stochastic_trajectory_spectrum(&dd, &Selector::parse("X1").unwrap(), &c).is_err());
    }
}
