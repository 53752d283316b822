//! Scenario execution and artifact writing.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::{FitOptions, OutputKind, OutputSpec, Scenario, SpectrumOptions};
use crate::dynamics::{
    centered_grid, drift_diffusion, fwhm, output_covariance, output_noise_spectrum, stochastic_trajectory_spectrum,
    Selector, StochasticConfig,
};
use crate::eit::{eit_spectrum, BaselineWindow};
use crate::error::{Error, Result, ResultExt};
use crate::floquet::{
    bessel_fit, correlation_features, cross_sideband_weight, modulation_index, multicolor_spectrum, BesselOrder,
};
use crate::fmt::{canonical_json, sig12};
use crate::gaussian::{self, CovarianceFile};
use crate::metrics::{discord_by_minimization, gaussian_discord, q_from_cov};

/// Fraction of the peak above which a Q feature counts as present.
const FEATURE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Directory that relative data paths resolve against.
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub kind: OutputKind,
    pub files: Vec<String>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub summary: Value,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub name: String,
    pub scenario_hash: String,
    pub version: String,
    pub timestamp: String,
    pub seed: u64,
    pub coupling: String,
    pub cooperativity: f64,
    pub outputs: Vec<OutputRecord>,
    pub status: String,
}

impl RunRecord {
    pub const FILE: &'static str = "run_record.json";

    pub fn to_json(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("run record serializes"))
    }
}

/// Thread pool sized by `CHIRALDYN_THREADS` (all cores when unset).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CHIRALDYN_THREADS") {
        let n: usize =
            v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
                Error::validation("CHIRALDYN_THREADS", format!("must be a positive integer, got `{v}`"))
            })?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

fn timestamp() -> String {
    let t = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .map(|s| std::time::UNIX_EPOCH + std::time::Duration::from_secs(s))
        .unwrap_or_else(std::time::SystemTime::now);
    humantime::format_rfc3339_seconds(t).to_string()
}

struct Artifact {
    files: Vec<(String, String)>,
    summary: Value,
    warnings: Vec<String>,
}

fn f(v: f64) -> Value {
    json!(v)
}

/// Runs every output of `scenario`, writing artifacts and `run_record.json`
/// into `opts.out_dir`.
///
/// Each output kind is computed fully in memory before any of its files is
/// written, so a failing kind leaves no files behind. The run record is
/// always written; the first failure is returned after it.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunRecord> {
    scenario.validate().ctx("scenario_runner")?;
    let base = scenario.base_model().ctx("channel_dynamics")?;
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;
    let pool = thread_pool()?;
    let results: Vec<Result<Artifact>> = pool.install(|| {
        scenario
            .outputs
            .par_iter()
            .map(|o| compute(scenario, o, &opts.base_dir))
            .collect()
    });

    let mut records = Vec::new();
    let mut first_err = None;
    for (o, res) in scenario.outputs.iter().zip(results) {
        let res = res.and_then(|a| write_all(&opts.out_dir, &a.files).map(|_| a));
        match res {
            Ok(a) => records.push(OutputRecord {
                kind: o.kind(),
                files: a.files.iter().map(|(n, _)| n.clone()).collect(),
                status: "ok".into(),
                error: None,
                summary: a.summary,
                warnings: a.warnings,
            }),
            Err(e) => {
                records.push(OutputRecord {
                    kind: o.kind(),
                    files: Vec::new(),
                    status: "failed".into(),
                    error: Some(e.to_string()),
                    summary: Value::Null,
                    warnings: Vec::new(),
                });
                first_err.get_or_insert(e.context(format!("output {}", o.kind())));
            }
        }
    }
    let record = RunRecord {
        name: scenario.name.clone(),
        scenario_hash: scenario.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: timestamp(),
        seed: scenario.seed,
        coupling: base.kind.to_string(),
        cooperativity: base.cooperativity(),
        outputs: records,
        status: if first_err.is_some() { "failed" } else { "ok" }.into(),
    };
    write_atomic(&opts.out_dir.join(RunRecord::FILE), &record.to_json())?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(record),
    }
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<()> {
    let mut done: Vec<PathBuf> = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(e) = write_atomic(&path, body) {
            for p in &done {
                let _ = std::fs::remove_file(p);
            }
            return Err(e);
        }
        done.push(path);
    }
    Ok(())
}

/// Writes `body` to a temporary sibling and renames it into place.
pub(crate) fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn compute(s: &Scenario, o: &OutputSpec, base_dir: &Path) -> Result<Artifact> {
    match o {
        OutputSpec::Spectrum(opts) => spectrum_output(s, opts).ctx("channel_dynamics"),
        OutputSpec::Q(q) => (|| -> Result<Artifact> {
            let (cov, freq) = carrier_cov(s, q.freq_hz)?;
            let body = q_summary(&cov)?;
            let mut summary = body.clone();
            summary["freq_hz"] = f(freq);
            Ok(Artifact {
                files: vec![("q.json".into(), canonical_json(&body))],
                summary,
                warnings: Vec::new(),
            })
        })()
        .ctx("correlation_metrics"),
        OutputSpec::Discord(d) => (|| -> Result<Artifact> {
            let (cov, freq) = carrier_cov(s, d.freq_hz)?;
            if !gaussian::is_physical_cov(&cov, 1e-9)? {
                return Err(Error::numeric("output covariance failed the physicality check"));
            }
            let r = gaussian_discord(&cov, d.measured)?;
            let mut body = json!({
                "freq_hz": f(freq),
                "discord_bits": f(r.discord),
                "branch": r.branch.to_string(),
                "nu": [f(r.nu_minus), f(r.nu_plus)],
                "e_min": f(r.e_min),
                "measured": r.measured,
                "invariants": r.invariants,
                "Q": f(q_from_cov(&cov)?),
            });
            if d.oracle {
                let o = discord_by_minimization(&cov, d.measured, s.seed)?;
                body["oracle"] = json!({"discord_bits": f(o.discord), "e_min": f(o.e_min), "homodyne": o.homodyne});
            }
            let cov_file = serde_json::to_value(CovarianceFile::from_matrix(&cov)).expect("covariance serializes");
            Ok(Artifact {
                files: vec![
                    ("discord.json".into(), canonical_json(&body)),
                    ("covariance.json".into(), canonical_json(&cov_file)),
                ],
                summary: body,
                warnings: Vec::new(),
            })
        })()
        .ctx("correlation_metrics"),
        OutputSpec::Eit(_) => (|| -> Result<Artifact> {
            let spec = s.eit.as_ref().expect("validated");
            let geom = s.eit_geometry().expect("validated");
            let p = spec.params();
            let grid = centered_grid(spec.delta_c_hz, spec.half_span_hz, spec.points);
            let window = BaselineWindow {
                edge_points: spec.baseline_points,
            };
            let e = eit_spectrum(&grid, geom, &p, window)?;
            let summary = json!({"geometry": geom, "contrast": f(e.contrast)});
            Ok(Artifact {
                files: vec![
                    ("eit.csv".into(), e.to_csv()),
                    ("eit.json".into(), canonical_json(&summary)),
                ],
                summary,
                warnings: Vec::new(),
            })
        })()
        .ctx("classical_eit"),
        OutputSpec::Fit(fo) => fit_output(fo, base_dir).ctx("floquet_engine"),
    }
}

/// Output covariance of the carrier model at `freq` (default: carrier).
fn carrier_cov(s: &Scenario, freq: Option<f64>) -> Result<(nalgebra::DMatrix<f64>, f64)> {
    let m = s.carrier_model()?;
    let freq = freq.unwrap_or(m.params.carrier_hz);
    let cov = output_covariance(&drift_diffusion(&m), freq)?;
    Ok((cov, freq))
}

/// `{"Q", "discord_bits", "branch", "nu"}` of a covariance.
pub fn q_summary(cov: &nalgebra::DMatrix<f64>) -> Result<Value> {
    let q = q_from_cov(cov)?;
    let r = gaussian_discord(cov, Default::default())?;
    Ok(json!({
        "Q": f(q),
        "discord_bits": f(r.discord),
        "branch": r.branch.to_string(),
        "nu": [f(r.nu_minus), f(r.nu_plus)],
    }))
}

fn spectrum_output(s: &Scenario, opts: &SpectrumOptions) -> Result<Artifact> {
    let base = s.base_model()?;
    let selectors = Selector::parse_all(&opts.selectors)?;
    let mut warnings = Vec::new();
    let mut files = Vec::new();
    let mut summary = Map::new();
    let (center, half, step) = match &s.drive {
        None => (
            base.params.carrier_hz,
            opts.half_span_hz.unwrap_or(500.0),
            opts.step_hz.unwrap_or(1.0),
        ),
        Some(d) => (
            base.params.carrier_hz + d.stark_offset_hz,
            opts.half_span_hz.unwrap_or(f64::from(d.n_max + 1) * d.nu1_hz + 500.0),
            opts.step_hz.unwrap_or(10.0),
        ),
    };
    let points = (2.0 * half / step).round() as usize + 1;
    if points > 2_000_001 {
        return Err(Error::invalid(format!("spectrum grid of {points} points is too large")));
    }
    let grid = centered_grid(center, step * (points - 1) as f64 / 2.0, points);

    let spectrum = match &s.drive {
        None => output_noise_spectrum(&drift_diffusion(&base), &selectors, &grid, opts.resolution_bw_hz)?,
        Some(d) => {
            let mc = multicolor_spectrum(&base, d, &selectors, &grid, opts.resolution_bw_hz).ctx("floquet_engine")?;
            warnings.extend(mc.warnings.iter().cloned());
            let index = modulation_index(d)?;
            let delta0 = s.beams[1].detuning_hz - s.beams[0].detuning_hz;
            let tol = s.model.gamma_hz;
            let n = d.n_max as i32;
            let mut pairs = Vec::new();
            for n1 in -n..=n {
                for n2 in -n..=n {
                    let (res, w) = cross_sideband_weight(n1, n2, delta0, d, tol)?;
                    if res {
                        pairs.push(json!({"n1": n1, "n2": n2, "weight": f(w)}));
                    }
                }
            }
            let sb = json!({
                "index": f(index),
                "nu1_hz": f(d.nu1_hz),
                "sidebands": mc.sidebands.iter().map(|b| json!({
                    "order": b.order, "center_hz": f(b.center_hz), "weight": f(b.weight)
                })).collect::<Vec<_>>(),
                "cross_sideband": {"delta0_hz": f(delta0), "tolerance_hz": f(tol), "resonant_pairs": pairs},
            });
            summary.insert("index".into(), f(index));
            files.push(("sidebands.json".to_string(), canonical_json(&sb)));
            mc.spectrum
        }
    };
    let spectrum = if ["X1", "X2", "P1", "P2", "X1-X2", "P1+P2"]
        .iter()
        .all(|l| spectrum.get(l).is_some())
    {
        let sp = spectrum.with_q()?;
        let q = sp.get("Q").expect("added");
        let peak = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        summary.insert("q_peak".into(), f(peak));
        if let Some(w) = fwhm(&sp.freq_hz, q) {
            summary.insert("q_fwhm_hz".into(), f(w));
        }
        let feats = correlation_features(&sp.freq_hz, q, FEATURE_THRESHOLD);
        summary.insert(
            "q_features_hz".into(),
            json!(feats.iter().map(|v| f(*v)).collect::<Vec<_>>()),
        );
        sp
    } else {
        spectrum
    };
    files.insert(0, ("spectrum.csv".to_string(), spectrum.to_csv()));

    if let Some(st) = &opts.stochastic {
        let sel = Selector::parse(&st.selector)?;
        let cfg = StochasticConfig {
            duration: st.duration_s,
            dt: st.dt_s,
            segments: st.segments,
            seed: s.seed,
        };
        let est = stochastic_trajectory_spectrum(&drift_diffusion(&base), &sel, &cfg)?;
        warnings.extend(est.warnings.iter().cloned());
        let vals = &est.spectrum.series[0].1;
        let mut csv = format!("freq_hz,{},std_err\n", sel.label);
        for ((fr, v), e) in est.spectrum.freq_hz.iter().zip(vals).zip(&est.std_err) {
            csv.push_str(&format!("{},{},{}\n", sig12(*fr), sig12(*v), sig12(*e)));
        }
        files.push(("spectrum_stochastic.csv".to_string(), csv));
    }
    summary.insert("points".into(), json!(points));
    Ok(Artifact {
        files,
        summary: Value::Object(summary),
        warnings,
    })
}

/// Reads a two-column `nu1_hz, amplitude` CSV; a non-numeric first row is
/// treated as a header.
pub fn read_fit_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::io(path, e))?;
    let (mut nu, mut amp) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::io(path, e))?;
        if rec.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                column: 1,
                message: format!("expected 2 columns, found {}", rec.len()),
            });
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(a), Ok(b)) => {
                nu.push(a);
                amp.push(b);
            }
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    column: 1,
                    message: "non-numeric value".into(),
                })
            }
        }
    }
    Ok((nu, amp))
}

fn fit_output(fo: &FitOptions, base_dir: &Path) -> Result<Artifact> {
    let order = BesselOrder::try_from(fo.order)?;
    let (nu, amp) = match &fo.data {
        Some(p) => read_fit_csv(&base_dir.join(p))?,
        None => (
            fo.nu1_hz.clone().unwrap_or_default(),
            fo.amplitudes.clone().unwrap_or_default(),
        ),
    };
    let fit = bessel_fit(&nu, &amp, order)?;
    let body = fit_json(&fit, fo.order, nu.len());
    Ok(Artifact {
        files: vec![("fit.json".into(), canonical_json(&body))],
        summary: body,
        warnings: Vec::new(),
    })
}

pub fn fit_json(fit: &crate::floquet::BesselFit, order: u8, n: usize) -> Value {
    json!({
        "order": order,
        "k_u_hz": f(fit.k_u),
        "amplitude": f(fit.amplitude),
        "rms_residual": f(fit.rms_residual),
        "n_points": n,
    })
}
