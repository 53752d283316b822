//! Output homodyne noise spectra via input–output theory.
//!
//! For `dx = A x dt + B dξ` with unit white inputs, each optical port emits
//! `x_out = ξ_in - √κ x`. In the frequency domain
//! `x(ω) = M(ω) B ξ(ω)` with `M(ω) = (-iω I - A)⁻¹`, so the output
//! quadratures are `T(ω) ξ(ω)` with `T = J - K M B`, and the symmetrized
//! spectrum of a combination `w` is `|wᵀ T(ω)|²`. Far from all rates
//! `M → 0` and the shot-noise floor `|w|² = 1` is recovered exactly.

use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix, DVector};

use super::model::DriftDiffusion;
use crate::error::{Error, Result};
use crate::fmt::sig12;

type C64 = Complex<f64>;

/// A linear combination of output quadratures `(X₁, P₁, X₂, P₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    pub label: String,
    pub weights: [f64; 4],
}

impl Selector {
    pub const STANDARD: [&'static str; 8] = ["X1", "P1", "X2", "P2", "X1-X2", "P1+P2", "X1+X2", "P1-P2"];

    /// Parses labels like `X1`, `P2`, `X1-X2`, `P1+P2`. Two-channel
    /// combinations are normalized by `1/√2` so vacuum reads 1.
    pub fn parse(label: &str) -> Result<Self> {
        let single = |s: &str| -> Option<usize> {
            match s {
                "X1" => Some(0),
                "P1" => Some(1),
                "X2" => Some(2),
                "P2" => Some(3),
                _ => None,
            }
        };
        let mut w = [0.0; 4];
        if let Some(i) = single(label) {
            w[i] = 1.0;
        } else {
            let (lhs, sign, rhs) = if let Some((l, r)) = label.split_once('+') {
                (l, 1.0, r)
            } else if let Some((l, r)) = label.split_once('-') {
                (l, -1.0, r)
            } else {
                return Err(Error::invalid(format!("unknown quadrature selector `{label}`")));
            };
            let (i, j) = single(lhs)
                .zip(single(rhs))
                .filter(|(i, j)| i != j)
                .ok_or_else(|| Error::invalid(format!("unknown quadrature selector `{label}`")))?;
            w[i] = std::f64::consts::FRAC_1_SQRT_2;
            w[j] = sign * std::f64::consts::FRAC_1_SQRT_2;
        }
        Ok(Selector {
            label: label.to_string(),
            weights: w,
        })
    }

    pub fn parse_all<S: AsRef<str>>(labels: &[S]) -> Result<Vec<Self>> {
        labels.iter().map(|l| Selector::parse(l.as_ref())).collect()
    }

    pub fn standard() -> Vec<Self> {
        Self::parse_all(&Self::STANDARD).expect("standard labels parse")
    }
}

/// Noise power series on a frequency grid, shot-noise normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    pub freq_hz: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

impl NoiseSpectrum {
    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.series.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }

    /// Adds the correlation metric `Q(f) = B − A` as a series named `Q`,
    /// computed from the single-channel and EPR-combination series.
    pub fn with_q(mut self) -> Result<Self> {
        let need = ["X1", "X2", "P1", "P2", "X1-X2", "P1+P2"];
        let cols: Vec<&[f64]> = need
            .iter()
            .map(|l| {
                self.get(l)
                    .ok_or_else(|| Error::invalid(format!("Q requires the `{l}` series")))
            })
            .collect::<Result<_>>()?;
        let q = (0..self.freq_hz.len())
            .map(|i| {
                let b = 0.5 * (cols[0][i] + cols[1][i]) + 0.5 * (cols[2][i] + cols[3][i]);
                let a = cols[4][i] + cols[5][i];
                b - a
            })
            .collect();
        self.series.push(("Q".to_string(), q));
        Ok(self)
    }

    /// CSV: header `freq_hz,<label…>`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz");
        for (l, _) in &self.series {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, f) in self.freq_hz.iter().enumerate() {
            out.push_str(&sig12(*f));
            for (_, v) in &self.series {
                let _ = write!(out, ",{}", sig12(v[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Uniform grid of `n` points spanning `center ± half_span`.
pub fn centered_grid(center_hz: f64, half_span_hz: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![center_hz];
    }
    let step = 2.0 * half_span_hz / (n - 1) as f64;
    (0..n).map(|i| center_hz - half_span_hz + step * i as f64).collect()
}

pub(crate) fn check_grid(freq_hz: &[f64]) -> Result<()> {
    if freq_hz.iter().any(|f| !f.is_finite()) {
        return Err(Error::invalid("frequency grid contains non-finite values"));
    }
    if freq_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("frequency grid must be strictly increasing"));
    }
    Ok(())
}

/// Output transfer matrix `T(ω) = J − K M(ω) B` (4 × inputs) at angular
/// offset `omega` from the carrier.
pub fn output_transfer(dd: &DriftDiffusion, omega: f64) -> Result<DMatrix<C64>> {
    if dd.ports.len() != 2 {
        return Err(Error::invalid("output spectra need exactly two optical ports"));
    }
    let n = dd.a.nrows();
    let m_inputs = dd.noise_input.ncols();
    let mut sys: DMatrix<C64> = dd.a.map(|v| C64::new(-v, 0.0));
    for i in 0..n {
        sys[(i, i)] -= C64::new(0.0, omega);
    }
    let b: DMatrix<C64> = dd.noise_input.map(|v| C64::new(v, 0.0));
    let mb = sys
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::numeric(format!("(-iω - A) is singular at ω = {omega:.6e}")))?;
    let mut t = DMatrix::<C64>::zeros(4, m_inputs);
    for (k, port) in dd.ports.iter().enumerate() {
        let root = port.rate.sqrt();
        for q in 0..2 {
            let row = 2 * k + q;
            t[(row, 2 * port.input + q)] += C64::new(1.0, 0.0);
            for c in 0..m_inputs {
                t[(row, c)] -= mb[(2 * port.mode + q, c)] * root;
            }
        }
    }
    Ok(t)
}

/// Real spectral covariance `Re[T Tᴴ]` of the output quadratures at `freq_hz`.
///
/// This is the covariance of the sideband mode detected at that frequency;
/// it is the input to the Q metric and the discord evaluation.
pub fn output_covariance(dd: &DriftDiffusion, freq_hz: f64) -> Result<DMatrix<f64>> {
    if !dd.stable {
        return Err(Error::NoSteadyState { max_re: dd.max_re_eig });
    }
    let omega = std::f64::consts::TAU * (freq_hz - dd.carrier_hz);
    let t = output_transfer(dd, omega)?;
    let s = (&t * t.adjoint()).map(|z| z.re);
    Ok((&s + s.transpose()) * 0.5)
}

fn point_spectrum(dd: &DriftDiffusion, selectors: &[Selector], freq_hz: f64) -> Result<Vec<f64>> {
    let cov = output_covariance(dd, freq_hz)?;
    Ok(selectors
        .iter()
        .map(|s| {
            let w = DVector::from_column_slice(&s.weights);
            (w.transpose() * &cov * &w)[(0, 0)]
        })
        .collect())
}

// 8-point Gauss–Legendre nodes/weights on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Symmetrized output spectra for each selector on `freq_hz`.
///
/// `resolution_bw_hz > 0` averages each point over a rectangular analyzer
/// window of that width; `0` evaluates the spectrum pointwise.
pub fn output_noise_spectrum(
    dd: &DriftDiffusion,
    selectors: &[Selector],
    freq_hz: &[f64],
    resolution_bw_hz: f64,
) -> Result<NoiseSpectrum> {
    if !dd.stable {
        return Err(Error::NoSteadyState { max_re: dd.max_re_eig });
    }
    check_grid(freq_hz)?;
    if !(resolution_bw_hz >= 0.0) {
        return Err(Error::invalid("resolution bandwidth must be >= 0"));
    }
    let mut cols = vec![Vec::with_capacity(freq_hz.len()); selectors.len()];
    for &f in freq_hz {
        let vals = if resolution_bw_hz > 0.0 {
            let mut acc = vec![0.0; selectors.len()];
            for (x, w) in GL8 {
                let p = point_spectrum(dd, selectors, f + 0.5 * resolution_bw_hz * x)?;
                for (a, v) in acc.iter_mut().zip(p) {
                    *a += 0.5 * w * v;
                }
            }
            acc
        } else {
            point_spectrum(dd, selectors, f)?
        };
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v);
        }
    }
    Ok(NoiseSpectrum {
        freq_hz: freq_hz.to_vec(),
        series: selectors.iter().map(|s| s.label.clone()).zip(cols).collect(),
    })
}

/// Spectrum of the intracavity combination `wᵀ x` at angular frequency
/// `omega`: `wᵀ M D Mᴴ w`. Integrates to `wᵀ σ w` over `dω/2π`.
pub fn intracavity_spectrum(dd: &DriftDiffusion, weights: &[f64], omega: f64) -> Result<f64> {
    let n = dd.a.nrows();
    if weights.len() != n {
        return Err(Error::invalid("weights length must match the state dimension"));
    }
    let mut sys: DMatrix<C64> = dd.a.map(|v| C64::new(-v, 0.0));
    for i in 0..n {
        sys[(i, i)] -= C64::new(0.0, omega);
    }
    let w = DVector::from_iterator(n, weights.iter().map(|&v| C64::new(v, 0.0)));
    // wᵀ M = (Mᵀ w)ᵀ
    let row = sys
        .transpose()
        .lu()
        .solve(&w)
        .ok_or_else(|| Error::numeric("(-iω - A) is singular"))?;
    let b: DMatrix<C64> = dd.noise_input.map(|v| C64::new(v, 0.0));
    let t = b.transpose() * row;
    Ok(t.iter().map(|z| z.norm_sqr()).sum())
}

/// Full width at half maximum of a single peak in `values` sampled on `freq`,
/// measured around the global maximum with linear interpolation.
pub fn fwhm(freq: &[f64], values: &[f64]) -> Option<f64> {
    let (imax, &vmax) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(vmax > 0.0) {
        return None;
    }
    let half = 0.5 * vmax;
    let cross = |range: &mut dyn Iterator<Item = usize>, step: isize| -> Option<f64> {
        for i in range {
            let j = (i as isize + step) as usize;
            if values[j] < half {
                let t = (values[i] - half) / (values[i] - values[j]);
                return Some(freq[i] + t * (freq[j] - freq[i]));
            }
        }
        None
    };
    let right = cross(&mut (imax..values.len() - 1), 1)?;
    let left = cross(&mut (1..=imax).rev(), -1)?;
    Some(right - left)
}
