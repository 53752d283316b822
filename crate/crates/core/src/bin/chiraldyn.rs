use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use chiraldyn::eit::{eit_spectrum, BaselineWindow};
use chiraldyn::floquet::{bessel_fit, BesselOrder};
use chiraldyn::fmt::{canonical_json, sig12};
use chiraldyn::gaussian::CovarianceFile;
use chiraldyn::metrics::{gaussian_discord, MeasuredMode};
use chiraldyn::scenario::{fit_json, load_scenario, q_summary, read_fit_csv, run, sweep, RunOptions};
use chiraldyn::{Error, Result};

/// Chirality-induced two-channel correlation simulator.
#[derive(Parser)]
#[command(name = "chiraldyn", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every output of a scenario and write artifacts.
    Run {
        scenario: PathBuf,
        /// Output directory (default: ./out/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run a scenario for each value of one numeric field; CSV on stdout.
    Sweep {
        scenario: PathBuf,
        /// Field path such as `model.g1_hz` or `drive.nu1_hz`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        values: String,
    },
    /// Q and discord of a two-mode covariance file.
    Discord {
        #[arg(long)]
        cov: PathBuf,
        /// Mode carrying the local measurement.
        #[arg(long, default_value = "B")]
        measured: String,
    },
    /// EIT transmission of a scenario's `eit` block; CSV on stdout.
    Eit { scenario: PathBuf },
    /// Fit amplitudes versus modulation frequency to a·J_order(k/ν₁).
    FitBessel {
        #[arg(long)]
        order: u8,
        /// Two-column CSV: nu1_hz, amplitude.
        #[arg(long)]
        data: PathBuf,
    },
    /// Load and validate a scenario; prints its hash and coupling.
    Validate { scenario: PathBuf },
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::validation("values", format!("`{t}` is not a number")))
        })
        .collect()
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run { scenario, out, seed } => {
            let mut s = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let out = out.unwrap_or_else(|| PathBuf::from("out").join(&s.name));
            let rec = run(
                &s,
                &RunOptions {
                    out_dir: out.clone(),
                    base_dir: base_dir(&scenario),
                },
            )?;
            for o in &rec.outputs {
                for w in &o.warnings {
                    eprintln!("warning: {}: {w}", o.kind);
                }
            }
            println!(
                "{} -> {} ({} outputs, hash {})",
                s.name,
                out.display(),
                rec.outputs.len(),
                &rec.scenario_hash[..12]
            );
        }
        Cmd::Sweep {
            scenario,
            param,
            values,
        } => {
            let s = load_scenario(&scenario)?;
            let t = sweep(&s, &param, &parse_values(&values)?)?;
            print!("{}", t.to_csv());
        }
        Cmd::Discord { cov, measured } => {
            let measured = match measured.as_str() {
                "A" | "a" => MeasuredMode::A,
                "B" | "b" => MeasuredMode::B,
                other => return Err(Error::validation("measured", format!("must be A or B, got `{other}`"))),
            };
            let text = std::fs::read_to_string(&cov).map_err(|e| Error::io(&cov, e))?;
            let file: CovarianceFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
            let m = file.to_matrix()?;
            let mut body = q_summary(&m)?;
            if measured == MeasuredMode::A {
                let r = gaussian_discord(&m, measured)?;
                body["discord_bits"] = json!(r.discord);
                body["branch"] = json!(r.branch.to_string());
            }
            print!("{}", canonical_json(&body));
        }
        Cmd::Eit { scenario } => {
            let s = load_scenario(&scenario)?;
            let (Some(e), Some(g)) = (s.eit.as_ref(), s.eit_geometry()) else {
                return Err(Error::validation("eit", "scenario has no `eit` block"));
            };
            let grid = chiraldyn::dynamics::centered_grid(e.delta_c_hz, e.half_span_hz, e.points);
            let sp = eit_spectrum(
                &grid,
                g,
                &e.params(),
                BaselineWindow {
                    edge_points: e.baseline_points,
                },
            )?;
            eprintln!("contrast = {}", sig12(sp.contrast));
            print!("{}", sp.to_csv());
        }
        Cmd::FitBessel { order, data } => {
            let order = BesselOrder::try_from(order)?;
            let (nu, amp) = read_fit_csv(&data)?;
            let fit = bessel_fit(&nu, &amp, order)?;
            let body = fit_json(&fit, order.as_i32() as u8, nu.len());
            print!("{}", canonical_json(&body));
        }
        Cmd::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            let m = s.base_model()?;
            println!(
                "ok: {} coupling={} cooperativity={} hash={}",
                s.name,
                m.kind,
                sig12(m.cooperativity()),
                s.hash()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
