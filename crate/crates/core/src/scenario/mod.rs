//! Declarative scenario files: schema, strict loading, defaults and hashing.
//!
//! Defaults filled when a field is absent:
//!
//! | field | default |
//! |---|---|
//! | `beams[i].power_uW` | 100 |
//! | `beams[i].detuning_hz` | 0 |
//! | `model.gamma_hz` | 100 |
//! | `model.kappa1_hz`, `model.kappa2_hz` | 1000 |
//! | `model.delta_spin_hz` | 0 |
//! | `model.carrier_hz` | 298 800 |
//! | `model` couplings | `g1 = g2` at cooperativity 0.35 |
//! | `drive.stark_offset_hz` | 0 |
//! | `eit` | see [`EitSpec`] |
//! | `seed` | 0 |

mod run;
mod sweep;

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::chirality::{coupling_kind, BeamConfig, CouplingKind, Direction, Handedness};
use crate::dynamics::{build_model, drift_diffusion, output_covariance, ModelParams, ThreeModeModel};
use crate::eit::{EitParams, Geometry};
use crate::error::{Error, Result};
use crate::floquet::{bessel_j, modulation_index, FloquetDrive};
use crate::fmt::canonical_json;
use crate::metrics::{q_from_cov, MeasuredMode};

pub use run::{fit_json, q_summary, read_fit_csv};
pub use run::{run, thread_pool, OutputRecord, RunOptions, RunRecord};
pub use sweep::{sweep, with_param, SweepRow, SweepTable, SWEEP_PATHS};

const TAU: f64 = std::f64::consts::TAU;

/// Cooperativity used when no coupling is given.
pub const DEFAULT_COOPERATIVITY: f64 = 0.35;

fn default_power() -> f64 {
    100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    pub handedness: Handedness,
    pub direction: Direction,
    #[serde(rename = "power_uW", default = "default_power")]
    pub power_uw: f64,
    #[serde(default)]
    pub detuning_hz: f64,
}

impl BeamSpec {
    pub fn to_config(&self) -> BeamConfig {
        let mut b = BeamConfig::new(self.handedness, self.direction).with_amplitude(self.power_uw.max(0.0).sqrt());
        b.detuning = TAU * self.detuning_hz;
        b
    }
}

/// Model rates in Hz (angular rate / 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1_hz: Option<f64>,
    /// Defaults to `g1_hz` when only that is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g2_hz: Option<f64>,
    /// Symmetric couplings from `4g²/(γκ)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cooperativity: Option<f64>,
    /// Fit symmetric couplings so that `Q` at the carrier equals this value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_q_target: Option<f64>,
    pub gamma_hz: f64,
    pub kappa1_hz: f64,
    pub kappa2_hz: f64,
    pub delta_spin_hz: f64,
    pub carrier_hz: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            g1_hz: None,
            g2_hz: None,
            cooperativity: None,
            fit_q_target: None,
            gamma_hz: 100.0,
            kappa1_hz: 1000.0,
            kappa2_hz: 1000.0,
            delta_spin_hz: 0.0,
            carrier_hz: 298_800.0,
        }
    }
}

impl ModelSpec {
    fn params_with_cooperativity(&self, c: f64) -> ModelParams {
        let gamma = TAU * self.gamma_hz;
        let (k1, k2) = (TAU * self.kappa1_hz, TAU * self.kappa2_hz);
        let g = (c * gamma * (k1 * k2).sqrt() / 4.0).sqrt();
        ModelParams {
            g1: g,
            g2: g,
            gamma_spin: gamma,
            kappa1: k1,
            kappa2: k2,
            delta_spin: TAU * self.delta_spin_hz,
            carrier_hz: self.carrier_hz,
        }
    }

    fn explicit_params(&self) -> ModelParams {
        let mut p = self.params_with_cooperativity(0.0);
        if let Some(g1) = self.g1_hz {
            p.g1 = TAU * g1;
            p.g2 = TAU * self.g2_hz.unwrap_or(g1);
        } else if let Some(g2) = self.g2_hz {
            p.g1 = TAU * g2;
            p.g2 = TAU * g2;
        }
        p
    }
}

/// EIT parameters in Hz, nm and m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EitSpec {
    /// Probe/control geometry; inferred from the beam directions when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
    pub rabi_c_hz: f64,
    pub gamma12_hz: f64,
    pub gamma3_hz: f64,
    pub delta_c_hz: f64,
    pub wavelength_nm: f64,
    pub u_thermal: f64,
    pub od: f64,
    pub half_span_hz: f64,
    pub points: usize,
    pub baseline_points: usize,
}

impl Default for EitSpec {
    fn default() -> Self {
        EitSpec {
            geometry: None,
            rabi_c_hz: 0.5e6,
            gamma12_hz: 500.0,
            gamma3_hz: 5.75e6,
            delta_c_hz: 0.0,
            wavelength_nm: 795.0,
            u_thermal: 160.0,
            od: 50.0,
            half_span_hz: 50e3,
            points: 2001,
            baseline_points: 200,
        }
    }
}

impl EitSpec {
    pub fn params(&self) -> EitParams {
        EitParams {
            rabi_c: TAU * self.rabi_c_hz,
            gamma12: TAU * self.gamma12_hz,
            gamma3: TAU * self.gamma3_hz,
            delta_c: TAU * self.delta_c_hz,
            k: TAU / (self.wavelength_nm * 1e-9),
            u_thermal: self.u_thermal,
            od: self.od,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticSpec {
    pub duration_s: f64,
    pub dt_s: f64,
    pub segments: usize,
    pub selector: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumOptions {
    /// Half width of the grid around the carrier; 500 Hz, or
    /// `(n_max+1)ν₁ + 500` Hz with a drive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_span_hz: Option<f64>,
    /// Grid step; 1 Hz, or 10 Hz with a drive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_hz: Option<f64>,
    pub selectors: Vec<String>,
    pub resolution_bw_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<StochasticSpec>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            half_span_hz: None,
            step_hz: None,
            selectors: crate::dynamics::Selector::STANDARD
                .iter()
                .map(|s| s.to_string())
                .collect(),
            resolution_bw_hz: 0.0,
            stochastic: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QOptions {
    /// Analysis frequency; the carrier when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscordOptions {
    pub measured: MeasuredMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq_hz: Option<f64>,
    /// Also evaluate discord by direct measurement minimization.
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EitOptions {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    pub order: u8,
    /// Two-column CSV (nu1_hz, amplitude), relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu1_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutputKind {
    Spectrum,
    Q,
    Discord,
    Eit,
    Fit,
}

impl std::fmt::Display for OutputKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

/// One requested output, `{"kind": ..., "options": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOutput", into = "RawOutput")]
pub enum OutputSpec {
    Spectrum(SpectrumOptions),
    Q(QOptions),
    Discord(DiscordOptions),
    Eit(EitOptions),
    Fit(FitOptions),
}

impl OutputSpec {
    pub fn kind(&self) -> OutputKind {
        match self {
            OutputSpec::Spectrum(_) => OutputKind::Spectrum,
            OutputSpec::Q(_) => OutputKind::Q,
            OutputSpec::Discord(_) => OutputKind::Discord,
            OutputSpec::Eit(_) => OutputKind::Eit,
            OutputSpec::Fit(_) => OutputKind::Fit,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    kind: OutputKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    options: Option<Value>,
}

impl TryFrom<RawOutput> for OutputSpec {
    type Error = String;
    fn try_from(raw: RawOutput) -> std::result::Result<Self, String> {
        let opts = raw.options.unwrap_or_else(|| Value::Object(Default::default()));
        let err = |e: serde_json::Error| format!("options for {}: {e}", raw.kind);
        Ok(match raw.kind {
            OutputKind::Spectrum => OutputSpec::Spectrum(serde_json::from_value(opts).map_err(err)?),
            OutputKind::Q => OutputSpec::Q(serde_json::from_value(opts).map_err(err)?),
            OutputKind::Discord => OutputSpec::Discord(serde_json::from_value(opts).map_err(err)?),
            OutputKind::Eit => OutputSpec::Eit(serde_json::from_value(opts).map_err(err)?),
            OutputKind::Fit => OutputSpec::Fit(serde_json::from_value(opts).map_err(err)?),
        })
    }
}

impl From<OutputSpec> for RawOutput {
    fn from(o: OutputSpec) -> Self {
        let kind = o.kind();
        let options = match o {
            OutputSpec::Spectrum(x) => serde_json::to_value(x),
            OutputSpec::Q(x) => serde_json::to_value(x),
            OutputSpec::Discord(x) => serde_json::to_value(x),
            OutputSpec::Eit(x) => serde_json::to_value(x),
            OutputSpec::Fit(x) => serde_json::to_value(x),
        }
        .expect("options serialize");
        RawOutput {
            kind,
            options: Some(options),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub beams: [BeamSpec; 2],
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<FloquetDrive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eit: Option<EitSpec>,
    pub outputs: Vec<OutputSpec>,
    #[serde(default)]
    pub seed: u64,
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

/// Parses and validates scenario JSON text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut de = serde_json::Deserializer::from_str(text);
    let scenario: Scenario = match serde_path_to_error::deserialize(&mut de) {
        Ok(s) => s,
        Err(e) => {
            let path = e.path().to_string();
            let inner = e.into_inner();
            return Err(if inner.is_data() && path != "." {
                Error::validation(path, format!("{inner}"))
            } else {
                Error::Parse {
                    line: inner.line(),
                    column: inner.column(),
                    message: inner.to_string(),
                }
            });
        }
    };
    de.end().map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

fn finite_positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and > 0, got {v}")))
    }
}

fn finite_nonneg(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and >= 0, got {v}")))
    }
}

impl Scenario {
    pub fn coupling_kind(&self) -> CouplingKind {
        coupling_kind(&self.beams[0].to_config(), &self.beams[1].to_config())
    }

    /// EIT geometry: explicit, or co-propagating when both beams travel the
    /// same way.
    pub fn eit_geometry(&self) -> Option<Geometry> {
        let e = self.eit.as_ref()?;
        Some(
            e.geometry
                .unwrap_or(if self.beams[0].direction == self.beams[1].direction {
                    Geometry::CoPropagating
                } else {
                    Geometry::CounterPropagating
                }),
        )
    }

    /// Canonical JSON of the scenario with defaults filled.
    pub fn canonical(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("scenario serializes"))
    }

    /// SHA-256 of [`Scenario::canonical`], hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        for (i, b) in self.beams.iter().enumerate() {
            finite_nonneg(&format!("beams[{i}].power_uW"), b.power_uw)?;
            if !b.detuning_hz.is_finite() {
                return Err(Error::validation(format!("beams[{i}].detuning_hz"), "must be finite"));
            }
        }
        let m = &self.model;
        finite_positive("model.gamma_hz", m.gamma_hz)?;
        finite_positive("model.kappa1_hz", m.kappa1_hz)?;
        finite_positive("model.kappa2_hz", m.kappa2_hz)?;
        finite_positive("model.carrier_hz", m.carrier_hz)?;
        if !m.delta_spin_hz.is_finite() {
            return Err(Error::validation("model.delta_spin_hz", "must be finite"));
        }
        for (f, v) in [
            ("model.g1_hz", m.g1_hz),
            ("model.g2_hz", m.g2_hz),
            ("model.cooperativity", m.cooperativity),
        ] {
            if let Some(v) = v {
                finite_nonneg(f, v)?;
            }
        }
        let explicit_g = m.g1_hz.is_some() || m.g2_hz.is_some();
        if explicit_g && m.cooperativity.is_some() {
            return Err(Error::validation(
                "model.cooperativity",
                "give either g1_hz/g2_hz or cooperativity, not both",
            ));
        }
        if let Some(t) = m.fit_q_target {
            finite_positive("model.fit_q_target", t)?;
            if explicit_g || m.cooperativity.is_some() {
                return Err(Error::validation(
                    "model.fit_q_target",
                    "fitting replaces the couplings; remove g1_hz/g2_hz/cooperativity",
                ));
            }
            if self.coupling_kind() != CouplingKind::Nhpa {
                return Err(Error::validation(
                    "model.fit_q_target",
                    "Q is identically zero for DBS coupling; a target needs NHPA beams",
                ));
            }
        }
        if let Some(d) = &self.drive {
            d.validate()?;
        }
        if let Some(e) = &self.eit {
            e.params().validate()?;
            finite_positive("eit.half_span_hz", e.half_span_hz)?;
            if e.points < 3 {
                return Err(Error::validation("eit.points", "must be >= 3"));
            }
            if 2 * e.baseline_points >= e.points {
                return Err(Error::validation("eit.baseline_points", "must leave interior points"));
            }
        }
        if self.outputs.is_empty() {
            return Err(Error::validation("outputs", "at least one output is required"));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, o) in self.outputs.iter().enumerate() {
            let field = format!("outputs[{i}]");
            if !seen.insert(o.kind()) {
                return Err(Error::validation(field, format!("duplicate output kind {}", o.kind())));
            }
            match o {
                OutputSpec::Spectrum(s) => {
                    crate::dynamics::Selector::parse_all(&s.selectors)
                        .map_err(|e| Error::validation(format!("{field}.options.selectors"), e.to_string()))?;
                    if let Some(h) = s.half_span_hz {
                        finite_positive(&format!("{field}.options.half_span_hz"), h)?;
                    }
                    if let Some(h) = s.step_hz {
                        finite_positive(&format!("{field}.options.step_hz"), h)?;
                    }
                    finite_nonneg(&format!("{field}.options.resolution_bw_hz"), s.resolution_bw_hz)?;
                    if let Some(st) = &s.stochastic {
                        if self.drive.is_some() {
                            return Err(Error::validation(
                                format!("{field}.options.stochastic"),
                                "stochastic estimates are single-color only",
                            ));
                        }
                        finite_positive(&format!("{field}.options.stochastic.duration_s"), st.duration_s)?;
                        finite_positive(&format!("{field}.options.stochastic.dt_s"), st.dt_s)?;
                        if st.segments == 0 {
                            return Err(Error::validation(
                                format!("{field}.options.stochastic.segments"),
                                "must be >= 1",
                            ));
                        }
                        crate::dynamics::Selector::parse(&st.selector).map_err(|e| {
                            Error::validation(format!("{field}.options.stochastic.selector"), e.to_string())
                        })?;
                    }
                }
                OutputSpec::Q(q) => {
                    if let Some(f) = q.freq_hz {
                        finite_positive(&format!("{field}.options.freq_hz"), f)?;
                    }
                }
                OutputSpec::Discord(d) => {
                    if let Some(f) = d.freq_hz {
                        finite_positive(&format!("{field}.options.freq_hz"), f)?;
                    }
                }
                OutputSpec::Eit(_) => {
                    if self.eit.is_none() {
                        return Err(Error::validation(field, "Eit output needs an `eit` block"));
                    }
                }
                OutputSpec::Fit(f) => {
                    if f.order > 1 {
                        return Err(Error::validation(format!("{field}.options.order"), "must be 0 or 1"));
                    }
                    let inline = f.nu1_hz.is_some() || f.amplitudes.is_some();
                    match (&f.data, inline) {
                        (Some(_), true) => {
                            return Err(Error::validation(
                                format!("{field}.options"),
                                "give either `data` or inline `nu1_hz`/`amplitudes`, not both",
                            ))
                        }
                        (None, false) => return Err(Error::validation(format!("{field}.options"), "fit needs data")),
                        (None, true) if f.nu1_hz.is_none() || f.amplitudes.is_none() => {
                            return Err(Error::validation(
                                format!("{field}.options"),
                                "inline data needs both `nu1_hz` and `amplitudes`",
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
        self.base_model().map(|_| ())
    }

    /// Light–spin model implied by the beams and model block.
    pub fn base_model(&self) -> Result<ThreeModeModel> {
        let kind = self.coupling_kind();
        let m = &self.model;
        let threshold = |e: Error| match e {
            Error::AboveThreshold { cooperativity } => Error::validation(
                "model",
                format!("NHPA cooperativity {cooperativity:.6} must stay below the stability threshold 1"),
            ),
            other => other,
        };
        if let Some(target) = m.fit_q_target {
            let c = fit_cooperativity(m, target)?;
            return build_model(kind, m.params_with_cooperativity(c)).map_err(threshold);
        }
        let params = if m.g1_hz.is_some() || m.g2_hz.is_some() {
            m.explicit_params()
        } else {
            m.params_with_cooperativity(m.cooperativity.unwrap_or(DEFAULT_COOPERATIVITY))
        };
        build_model(kind, params).map_err(threshold)
    }

    /// Model seen at the carrier: with a drive, couplings scaled by `|J₀|`
    /// and the carrier moved by the Stark offset.
    pub fn carrier_model(&self) -> Result<ThreeModeModel> {
        let base = self.base_model()?;
        match &self.drive {
            None => Ok(base),
            Some(d) => {
                let mut m = base.scaled_coupling(bessel_j(0, modulation_index(d)?))?;
                m.params.carrier_hz += d.stark_offset_hz;
                Ok(m)
            }
        }
    }
}

fn nhpa_q_at(m: &ModelSpec, c: f64) -> Result<f64> {
    let model = build_model(CouplingKind::Nhpa, m.params_with_cooperativity(c))?;
    let dd = drift_diffusion(&model);
    q_from_cov(&output_covariance(&dd, model.params.carrier_hz)?)
}

/// Symmetric NHPA cooperativity at which `Q` at the carrier equals `target`.
fn fit_cooperativity(m: &ModelSpec, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-9);
    let q_max = nhpa_q_at(m, hi)?;
    if target >= q_max {
        return Err(Error::validation(
            "model.fit_q_target",
            format!("target {target} is not reachable below threshold (Q -> {q_max:.4})"),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if nhpa_q_at(m, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "name": "minimal",
  "beams": [
    {"handedness": "R", "direction": "+z"},
    {"handedness": "R", "direction": "-z"}
  ],
  "model": {},
  "outputs": [{"kind": "Q"}]
}"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.seed, 0);
        assert_eq!(s.beams[0].power_uw, 100.0);
        assert_eq!(s.model, ModelSpec::default());
        assert_eq!(s.coupling_kind(), CouplingKind::Nhpa);
        assert!((s.base_model().unwrap().cooperativity() - DEFAULT_COOPERATIVITY).abs() < 1e-12);
    }

    #[test]
    fn round_trip_is_stable() {
        let s = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&s.canonical()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.hash(), again.hash());
    }

    #[test]
    fn bad_direction_is_an_enumeration_error() {
        let text = MINIMAL.replace("\"-z\"", "\"+x\"");
        match parse_scenario(&text) {
            Err(Error::Validation { field, message }) => {
                assert_eq!(field, "beams[1].direction");
                assert!(message.contains("unknown variant"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("\"model\": {}", "\"model\": {\"g_hz\": 3}");
        assert!(
            matches!(parse_scenario(&text), Err(Error::Validation { field, .. }) if field == "model.g_hz" || field == "model")
        );
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_scenario("{\n  \"name\": \"x\",\n  oops\n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn above_threshold_rejected() {
        let text = MINIMAL.replace("\"model\": {}", "\"model\": {\"cooperativity\": 1.2}");
        match parse_scenario(&text) {
            Err(Error::Validation { field, message }) => {
                assert_eq!(field, "model");
                assert!(message.contains("threshold"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fitted_q() {
        let text = MINIMAL.replace("\"model\": {}", "\"model\": {\"fit_q_target\": 0.91}");
        let s = parse_scenario(&text).unwrap();
        let m = s.base_model().unwrap();
        let dd = drift_diffusion(&m);
        let q = q_from_cov(&output_covariance(&dd, m.params.carrier_hz).unwrap()).unwrap();
        assert!((q - 0.91).abs() < 1e-9);
    }

    #[test]
    fn output_options_are_strict() {
        let text = MINIMAL.replace("{\"kind\": \"Q\"}", "{\"kind\": \"Q\", \"options\": {\"frq\": 1}}");
        assert!(matches!(parse_scenario(&text), Err(Error::Validation { .. })));
        let text = MINIMAL.replace("{\"kind\": \"Q\"}", "{\"kind\": \"Q\"}, {\"kind\": \"Q\"}");
        assert!(matches!(parse_scenario(&text), Err(Error::Validation { .. })));
        let text = MINIMAL.replace("{\"kind\": \"Q\"}", "{\"kind\": \"Eit\"}");
        assert!(matches!(parse_scenario(&text), Err(Error::Validation { .. })));
    }
}
