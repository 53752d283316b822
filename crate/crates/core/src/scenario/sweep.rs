//! One-parameter sweeps over scenario fields.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::Value;

use super::{parse_scenario, run::thread_pool, Scenario};
use crate::dynamics::{drift_diffusion, output_covariance};
use crate::eit::{eit_spectrum, BaselineWindow};
use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::metrics::{gaussian_discord, q_from_cov};

/// Numeric scenario fields a sweep may set.
pub const SWEEP_PATHS: &[&str] = &[
    "seed",
    "beams[0].power_uW",
    "beams[1].power_uW",
    "beams[0].detuning_hz",
    "beams[1].detuning_hz",
    "model.g1_hz",
    "model.g2_hz",
    "model.cooperativity",
    "model.fit_q_target",
    "model.gamma_hz",
    "model.kappa1_hz",
    "model.kappa2_hz",
    "model.delta_spin_hz",
    "model.carrier_hz",
    "drive.nu1_hz",
    "drive.index",
    "drive.index.b1",
    "drive.index.gyromag",
    "drive.index.k_u",
    "drive.n_max",
    "drive.stark_offset_hz",
    "eit.rabi_c_hz",
    "eit.gamma12_hz",
    "eit.gamma3_hz",
    "eit.delta_c_hz",
    "eit.wavelength_nm",
    "eit.u_thermal",
    "eit.od",
];

const INTEGER_PATHS: &[&str] = &["seed", "drive.n_max"];

/// Summary metrics of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub coupling: String,
    pub cooperativity: f64,
    /// `Q` of the carrier model at the carrier.
    pub q_carrier: f64,
    pub discord_bits: f64,
    pub eit_contrast: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,coupling,cooperativity,q_carrier,discord_bits,eit_contrast\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                sig12(r.value),
                r.coupling,
                sig12(r.cooperativity),
                sig12(r.q_carrier),
                sig12(r.discord_bits),
                r.eit_contrast.map(sig12).unwrap_or_default()
            );
        }
        out
    }
}

fn valid_paths(root: &Value) -> Vec<&'static str> {
    SWEEP_PATHS
        .iter()
        .copied()
        .filter(|p| parent_of(root, p).is_some())
        .collect()
}

fn split(path: &str) -> Vec<String> {
    path.replace('[', ".")
        .replace(']', "")
        .split('.')
        .map(str::to_string)
        .collect()
}

fn parent_of<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    let parts = split(path);
    let mut cur = root;
    for p in &parts[..parts.len() - 1] {
        cur = match p.parse::<usize>() {
            Ok(i) => cur.get(i)?,
            Err(_) => cur.get(p.as_str())?,
        };
    }
    // `drive.index` may be a bare number; its sub-fields need an object.
    cur.is_object().then_some(cur)
}

fn set_path(root: &mut Value, path: &str, v: Value) -> Option<()> {
    let parts = split(path);
    let mut cur = root;
    for p in &parts[..parts.len() - 1] {
        cur = match p.parse::<usize>() {
            Ok(i) => cur.get_mut(i)?,
            Err(_) => cur.get_mut(p.as_str())?,
        };
    }
    cur.as_object_mut()?.insert(parts.last()?.clone(), v);
    Some(())
}

/// Copy of `scenario` with the field at `path` set to `value`, revalidated.
pub fn with_param(scenario: &Scenario, path: &str, value: f64) -> Result<Scenario> {
    let mut root = serde_json::to_value(scenario).expect("scenario serializes");
    let valid = valid_paths(&root);
    if !valid.contains(&path) {
        return Err(Error::validation(
            "param",
            format!(
                "`{path}` is not a sweepable field here; valid paths: {}",
                valid.join(", ")
            ),
        ));
    }
    let v = if INTEGER_PATHS.contains(&path) {
        if value < 0.0 || value.fract() != 0.0 {
            return Err(Error::validation(
                path,
                format!("needs a nonnegative integer, got {value}"),
            ));
        }
        Value::from(value as u64)
    } else {
        serde_json::Number::from_f64(value)
            .map(Value::Number)
            .ok_or_else(|| Error::validation(path, "value must be finite"))?
    };
    set_path(&mut root, path, v).expect("path checked");
    parse_scenario(&root.to_string())
}

fn summarize(s: &Scenario, value: f64) -> Result<SweepRow> {
    let base = s.base_model()?;
    let m = s.carrier_model()?;
    let cov = output_covariance(&drift_diffusion(&m), m.params.carrier_hz)?;
    let q = q_from_cov(&cov)?;
    let d = gaussian_discord(&cov, Default::default())?;
    let eit_contrast = match (&s.eit, s.eit_geometry()) {
        (Some(e), Some(g)) => {
            let grid = crate::dynamics::centered_grid(e.delta_c_hz, e.half_span_hz, e.points);
            let window = BaselineWindow {
                edge_points: e.baseline_points,
            };
            Some(eit_spectrum(&grid, g, &e.params(), window)?.contrast)
        }
        _ => None,
    };
    Ok(SweepRow {
        value,
        coupling: base.kind.to_string(),
        cooperativity: base.cooperativity(),
        q_carrier: q,
        discord_bits: d.discord,
        eit_contrast,
    })
}

/// Runs `scenario` once per value of the field at `path`. Rows follow the
/// order of `values` regardless of scheduling.
pub fn sweep(scenario: &Scenario, path: &str, values: &[f64]) -> Result<SweepTable> {
    let root = serde_json::to_value(scenario).expect("scenario serializes");
    let valid = valid_paths(&root);
    if !valid.contains(&path) {
        return Err(Error::validation(
            "param",
            format!(
                "`{path}` is not a sweepable field here; valid paths: {}",
                valid.join(", ")
            ),
        ));
    }
    let pool = thread_pool()?;
    let rows = pool.install(|| {
        values
            .par_iter()
            .map(|&v| {
                with_param(scenario, path, v)
                    .and_then(|s| summarize(&s, v))
                    .map_err(|e| e.context(format!("sweep {path} = {v}")))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepTable {
        param: path.to_string(),
        rows,
    })
}
