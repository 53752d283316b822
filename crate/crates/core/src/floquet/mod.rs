//! Periodically driven Zeeman ladder: quasi-energies, Bessel sideband
//! weights, multicolor noise spectra and cross-sideband selection.

pub mod bessel;
pub mod fit;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{drift_diffusion, output_noise_spectrum, NoiseSpectrum, Selector, ThreeModeModel};
use crate::error::{Error, Result};

pub use bessel::{bessel_j, bessel_j_table};
pub use fit::{bessel_fit, BesselFit, BesselOrder};

/// Largest supported sideband truncation.
pub const MAX_N_MAX: u32 = 10;

/// How the modulation index is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexSource {
    /// The index itself.
    Direct(f64),
    /// Oscillating field `b1` and gyromagnetic ratio `gyromag` (Hz per
    /// field unit): index `πγB₁/ω₁`.
    #[serde(rename_all = "snake_case")]
    Field { b1: f64, gyromag: f64 },
    /// Drive-depth parameter in Hz: index `k_u/ν₁`.
    DepthParameter { k_u: f64 },
}

/// Periodic Zeeman modulation at `nu1_hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetDrive {
    pub nu1_hz: f64,
    pub index: IndexSource,
    pub n_max: u32,
    /// Additive AC Stark offset of every sideband center, Hz.
    #[serde(default)]
    pub stark_offset_hz: f64,
}

impl FloquetDrive {
    pub fn with_index(nu1_hz: f64, index: f64, n_max: u32) -> Self {
        FloquetDrive {
            nu1_hz,
            index: IndexSource::Direct(index),
            n_max,
            stark_offset_hz: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu1_hz > 0.0) || !self.nu1_hz.is_finite() {
            return Err(Error::validation("drive.nu1_hz", "must be finite and > 0"));
        }
        if self.n_max > MAX_N_MAX {
            return Err(Error::validation(
                "drive.n_max",
                format!("must be <= {MAX_N_MAX}, got {}", self.n_max),
            ));
        }
        if !self.stark_offset_hz.is_finite() {
            return Err(Error::validation("drive.stark_offset_hz", "must be finite"));
        }
        match self.index {
            IndexSource::Field { b1, gyromag } => {
                if !(b1 >= 0.0) {
                    return Err(Error::validation("drive.index.b1", "must be >= 0"));
                }
                if !(gyromag > 0.0) {
                    return Err(Error::validation("drive.index.gyromag", "must be > 0"));
                }
            }
            IndexSource::DepthParameter { k_u } => {
                if !(k_u >= 0.0) {
                    return Err(Error::validation("drive.index.k_u", "must be >= 0"));
                }
            }
            IndexSource::Direct(_) => {}
        }
        let x = modulation_index(self)?;
        if !x.is_finite() {
            return Err(Error::validation("drive.index", "modulation index is not finite"));
        }
        Ok(())
    }
}

/// Ladder-level quasi-energy `±ω₀ + nω₁`.
pub fn quasi_energy(positive: bool, n: i32, omega0: f64, omega1: f64) -> f64 {
    let base = if positive { omega0 } else { -omega0 };
    base + f64::from(n) * omega1
}

/// Modulation index of `drive`.
pub fn modulation_index(drive: &FloquetDrive) -> Result<f64> {
    if drive.nu1_hz == 0.0 {
        return Err(Error::invalid("modulation frequency must be nonzero"));
    }
    let omega1 = std::f64::consts::TAU * drive.nu1_hz;
    Ok(match drive.index {
        IndexSource::Direct(x) => x,
        IndexSource::Field { b1, gyromag } => std::f64::consts::PI * gyromag * b1 / omega1,
        IndexSource::DepthParameter { k_u } => k_u / drive.nu1_hz,
    })
}

/// Amplitude `J_n(index)` of sideband `n` under truncation `n_max`.
pub fn sideband_weight(n: i32, index: f64, n_max: u32) -> Result<f64> {
    if n.unsigned_abs() > n_max {
        return Err(Error::Truncation { order: n, n_max });
    }
    Ok(bessel_j(n, index))
}

/// One sideband of a multicolor spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sideband {
    pub order: i32,
    pub center_hz: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticolorSpectrum {
    pub spectrum: NoiseSpectrum,
    pub sidebands: Vec<Sideband>,
    pub warnings: Vec<String>,
}

/// Spectrum of the driven system as a superposition of independent
/// sidebands: sideband `n` has both light–spin rates scaled by `|J_n|` and is
/// centered at `carrier + stark + nν₁`. Each series is `1 + Σₙ (Sₙ − 1)`.
pub fn multicolor_spectrum(
    base: &ThreeModeModel,
    drive: &FloquetDrive,
    selectors: &[Selector],
    freq_hz: &[f64],
    resolution_bw_hz: f64,
) -> Result<MulticolorSpectrum> {
    drive.validate()?;
    let base_dd = drift_diffusion(base);
    if !base_dd.stable {
        return Err(Error::NoSteadyState {
            max_re: base_dd.max_re_eig,
        });
    }
    let index = modulation_index(drive)?;
    let n_max = drive.n_max as i32;
    let mut warnings = Vec::new();
    let linewidth_hz = base.params.gamma_spin / std::f64::consts::TAU;
    if drive.n_max > 0 && drive.nu1_hz < 3.0 * linewidth_hz {
        warnings.push(format!(
            "sidebands overlap: nu1 = {} Hz is below 3x the {linewidth_hz:.1} Hz linewidth; superposition is approximate",
            drive.nu1_hz
        ));
    }
    let center = base.params.carrier_hz + drive.stark_offset_hz;
    let reach = f64::from(drive.n_max + 1) * drive.nu1_hz;
    if let (Some(lo), Some(hi)) = (
        freq_hz.iter().cloned().reduce(f64::min),
        freq_hz.iter().cloned().reduce(f64::max),
    ) {
        if lo > center - reach || hi < center + reach {
            warnings.push(format!(
                "grid [{lo}, {hi}] Hz does not span carrier +/- (n_max+1) nu1 = {center} +/- {reach} Hz"
            ));
        }
    }

    let sidebands: Vec<Sideband> = (-n_max..=n_max)
        .map(|n| Sideband {
            order: n,
            center_hz: center + f64::from(n) * drive.nu1_hz,
            weight: bessel_j(n, index),
        })
        .collect();
    let parts: Vec<NoiseSpectrum> = sidebands
        .par_iter()
        .map(|sb| {
            if sb.center_hz <= 0.0 {
                return Err(Error::invalid(format!(
                    "sideband {} center {} Hz is not positive",
                    sb.order, sb.center_hz
                )));
            }
            let mut m = base.scaled_coupling(sb.weight)?;
            m.params.carrier_hz = sb.center_hz;
            output_noise_spectrum(&drift_diffusion(&m), selectors, freq_hz, resolution_bw_hz)
        })
        .collect::<Result<_>>()?;

    let mut series: Vec<(String, Vec<f64>)> = selectors
        .iter()
        .map(|s| (s.label.clone(), vec![1.0; freq_hz.len()]))
        .collect();
    for part in &parts {
        for ((_, acc), (_, vals)) in series.iter_mut().zip(&part.series) {
            for (a, v) in acc.iter_mut().zip(vals) {
                *a += v - 1.0;
            }
        }
    }
    Ok(MulticolorSpectrum {
        spectrum: NoiseSpectrum {
            freq_hz: freq_hz.to_vec(),
            series,
        },
        sidebands,
        warnings,
    })
}

/// Frequencies of local maxima of `values` that exceed `threshold_frac`
/// times the global maximum. Empty when the maximum is not positive.
pub fn correlation_features(freq_hz: &[f64], values: &[f64], threshold_frac: f64) -> Vec<f64> {
    let peak = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Vec::new();
    }
    let thr = threshold_frac * peak;
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { values[i - 1] };
            let right = if i + 1 == n { f64::NEG_INFINITY } else { values[i + 1] };
            values[i] > thr && values[i] > left && values[i] >= right
        })
        .map(|i| freq_hz[i])
        .collect()
}

/// Whether spin waves in sidebands `n1` and `n2` couple dissipatively at
/// two-photon detuning `delta0_hz`: resonant iff
/// `|Δ₀ − (n1−n2)ν₁| ≤ tolerance_hz`; weight `J_{n1} J_{n2}`.
pub fn cross_sideband_weight(
    n1: i32,
    n2: i32,
    delta0_hz: f64,
    drive: &FloquetDrive,
    tolerance_hz: f64,
) -> Result<(bool, f64)> {
    let index = modulation_index(drive)?;
    let w1 = sideband_weight(n1, index, drive.n_max)?;
    let w2 = sideband_weight(n2, index, drive.n_max)?;
    let resonant = (delta0_hz - f64::from(n1 - n2) * drive.nu1_hz).abs() <= tolerance_hz;
    Ok((resonant, w1 * w2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirality::CouplingKind;
    use crate::dynamics::{build_model, centered_grid, ModelParams};

    #[test]
    fn ladder() {
        let (w0, w1) = (3.0, 0.7);
        assert_eq!(quasi_energy(true, 0, w0, w1), w0);
        for n in -5..5 {
            let d = quasi_energy(true, n + 1, w0, w1) - quasi_energy(true, n, w0, w1);
            assert!((d - w1).abs() < 1e-15);
        }
        assert_eq!(quasi_energy(false, 1, w0, w1), -w0 + w1);
    }

    #[test]
    fn index_sources() {
        let mut d = FloquetDrive {
            nu1_hz: 2000.0,
            index: IndexSource::Field {
                b1: 0.0,
                gyromag: 7.0e5,
            },
            n_max: 3,
            stark_offset_hz: 0.0,
        };
        assert_eq!(modulation_index(&d).unwrap(), 0.0);
        d.index = IndexSource::Field {
            b1: 1e-3,
            gyromag: 7.0e5,
        };
        let x1 = modulation_index(&d).unwrap();
        d.index = IndexSource::Field {
            b1: 2e-3,
            gyromag: 7.0e5,
        };
        let x2 = modulation_index(&d).unwrap();
        assert!((x2 - 2.0 * x1).abs() < 1e-15);
        d.index = IndexSource::DepthParameter { k_u: 9000.0 };
        assert_eq!(modulation_index(&d).unwrap(), 4.5);
        d.nu1_hz = 0.0;
        assert!(modulation_index(&d).is_err());
    }

    #[test]
    fn drive_json_forms() {
        let a: FloquetDrive = serde_json::from_str(r#"{"nu1_hz":3000,"index":1.2,"n_max":2}"#).unwrap();
        assert_eq!(a.index, IndexSource::Direct(1.2));
        let b: FloquetDrive =
            serde_json::from_str(r#"{"nu1_hz":3000,"index":{"b1":1e-3,"gyromag":7e5},"n_max":2}"#).unwrap();
        assert!(matches!(b.index, IndexSource::Field { .. }));
        let c: FloquetDrive = serde_json::from_str(r#"{"nu1_hz":3000,"index":{"k_u":9000},"n_max":2}"#).unwrap();
        assert!(matches!(c.index, IndexSource::DepthParameter { .. }));
        assert!(serde_json::from_str::<FloquetDrive>(r#"{"nu1_hz":3000,"index":1,"n_max":2,"x":1}"#).is_err());
        assert!(FloquetDrive::with_index(3000.0, 1.0, 11).validate().is_err());
    }

    #[test]
    fn weights_and_truncation() {
        assert_eq!(sideband_weight(0, 0.0, 2).unwrap(), 1.0);
        assert_eq!(sideband_weight(1, 0.0, 2).unwrap(), 0.0);
        assert!(matches!(
            sideband_weight(3, 1.0, 2),
            Err(Error::Truncation { order: 3, n_max: 2 })
        ));
        assert!(sideband_weight(0, 2.404_825_557_695_773, 0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn cross_sideband_cases() {
        let d = FloquetDrive::with_index(2000.0, 1.3, 3);
        let (r, w) = cross_sideband_weight(1, 1, 0.0, &d, 50.0).unwrap();
        assert!(r);
        assert!((w - bessel_j(1, 1.3).powi(2)).abs() < 1e-15);
        assert!(cross_sideband_weight(1, 0, 2000.0, &d, 50.0).unwrap().0);
        for n1 in -3..=3 {
            for n2 in -3..=3 {
                assert!(!cross_sideband_weight(n1, n2, 3000.0, &d, 50.0).unwrap().0);
            }
        }
    }

    fn nhpa() -> ThreeModeModel {
        build_model(CouplingKind::Nhpa, ModelParams::desk_defaults()).unwrap()
    }

    #[test]
    fn zero_index_matches_single_color() {
        let m = nhpa();
        let sel = Selector::standard();
        let grid = centered_grid(m.params.carrier_hz, 10_000.0, 401);
        let mc = multicolor_spectrum(&m, &FloquetDrive::with_index(3000.0, 0.0, 2), &sel, &grid, 0.0).unwrap();
        let single = output_noise_spectrum(&drift_diffusion(&m), &sel, &grid, 0.0).unwrap();
        for ((_, a), (_, b)) in mc.spectrum.series.iter().zip(&single.series) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-8);
            }
        }
        assert!(mc.warnings.is_empty());
    }

    #[test]
    fn features_at_carrier_and_first_sidebands() {
        let m = nhpa();
        let c = m.params.carrier_hz;
        let grid = centered_grid(c, 12_000.0, 2401);
        let mc = multicolor_spectrum(
            &m,
            &FloquetDrive::with_index(3000.0, 1.0, 3),
            &Selector::standard(),
            &grid,
            0.0,
        )
        .unwrap()
        .spectrum
        .with_q()
        .unwrap();
        let f = correlation_features(&grid, mc.get("Q").unwrap(), 0.1);
        let expect = [c - 3000.0, c, c + 3000.0];
        assert_eq!(f.len(), 3, "{f:?}");
        for (a, b) in f.iter().zip(expect) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn overlap_warning() {
        let m = nhpa();
        let grid = centered_grid(m.params.carrier_hz, 1000.0, 11);
        let mc = multicolor_spectrum(
            &m,
            &FloquetDrive::with_index(200.0, 1.0, 1),
            &Selector::standard(),
            &grid,
            0.0,
        )
        .unwrap();
        assert!(mc.warnings.iter().any(|w| w.contains("overlap")));
    }
}
