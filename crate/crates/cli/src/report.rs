//! Report files: structured JSON, CSV ledgers and stick tables, plot data.
//!
//! Layout of an output directory:
//!
//! ```text
//! report.json                      numerical payload (deterministic)
//! timings.json                     wall-clock timings
//! ledger_<sum>.csv                 one per sum-rule report
//! sticks.csv                       spectral density sticks
//! spectral_density_plot.csv        sticks sorted by ω with the running first moment
//! convergence.csv                  converge jobs
//! index.csv, point_NNN/...         sweep jobs, one directory per point
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use trk_core::sumrule::{SpectralDensity, SumRuleReport};

use crate::config::{JobKind, OutputFormat};
use crate::error::{LabError, LabResult};
use crate::runner::{Convergence, PointReport, RunReport};

pub const STICKS_HEADER: [&str; 4] = ["omega", "weight", "lambda", "n"];
pub const LEDGER_HEADER: [&str; 5] = [
    "lambda",
    "n",
    "quasienergy_diff",
    "dipole_fourier_abs2",
    "contribution",
];

/// Writes every output file of `report` under `dir` and returns their paths.
///
/// All contents are rendered before the directory is touched, and each file
/// goes through a temporary name, so a failure leaves no partial file.
pub fn write_report(report: &RunReport, dir: &Path) -> LabResult<Vec<PathBuf>> {
    let files = render(report)?;
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (rel, bytes) in files {
        let path = dir.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
        }
        let tmp = path.with_extension("partial");
        fs::write(&tmp, &bytes).map_err(|e| LabError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| LabError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Relative paths and contents of every output file.
pub fn render(report: &RunReport) -> LabResult<Vec<(PathBuf, Vec<u8>)>> {
    let out = &report.config.output;
    let mut files = Vec::new();
    let sweep = report.job_kind == JobKind::Sweep;
    for (i, point) in report.points.iter().enumerate() {
        let prefix = if sweep {
            PathBuf::from(format!("point_{i:03}"))
        } else {
            PathBuf::new()
        };
        if out.wants(OutputFormat::Csv) {
            for sum in &point.sums {
                files.push((
                    prefix.join(format!("ledger_{}.csv", sum.name)),
                    ledger_csv(&sum.report)?,
                ));
            }
            if let Some(density) = &point.spectral_density {
                files.push((prefix.join("sticks.csv"), sticks_csv(density)?));
            }
        }
        if out.plot_data {
            if let Some(density) = &point.spectral_density {
                files.push((prefix.join("spectral_density_plot.csv"), plot_csv(density)?));
            }
        }
    }
    if out.wants(OutputFormat::Csv) {
        if sweep {
            files.push((PathBuf::from("index.csv"), index_csv(report)?));
        }
        if let Some(conv) = &report.convergence {
            files.push((PathBuf::from("convergence.csv"), convergence_csv(conv)?));
        }
    }
    if out.wants(OutputFormat::Json) {
        files.push((PathBuf::from("timings.json"), json(&report.timings)?));
        files.push((PathBuf::from("report.json"), json(report)?));
    }
    Ok(files)
}

fn json<T: Serialize>(value: &T) -> LabResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| LabError::Config(format!("cannot encode report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn table<const N: usize>(header: [&str; N], rows: Vec<[String; N]>) -> LabResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| LabError::Config(format!("cannot encode table: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| LabError::Config(format!("cannot encode table: {e}")))
}

/// One row per term of the sum.
pub fn ledger_csv(report: &SumRuleReport) -> LabResult<Vec<u8>> {
    let rows = report
        .contributions
        .iter()
        .map(|c| {
            [
                c.state.to_string(),
                c.n.to_string(),
                num(c.quasienergy_diff),
                num(c.dipole_abs2),
                num(c.weight),
            ]
        })
        .collect();
    table(LEDGER_HEADER, rows)
}

pub fn sticks_csv(density: &SpectralDensity) -> LabResult<Vec<u8>> {
    let rows = density
        .sticks
        .iter()
        .map(|s| {
            [
                num(s.omega),
                num(s.weight),
                s.lambda.to_string(),
                s.n.to_string(),
            ]
        })
        .collect();
    table(STICKS_HEADER, rows)
}

/// Sticks ordered by frequency with the running value of `2 Σ ω w`.
pub fn plot_csv(density: &SpectralDensity) -> LabResult<Vec<u8>> {
    let mut sticks = density.sticks.clone();
    sticks.sort_by(|a, b| a.omega.total_cmp(&b.omega).then(a.lambda.cmp(&b.lambda)));
    let mut running = 0.0;
    let rows = sticks
        .iter()
        .map(|s| {
            running += 2.0 * s.omega * s.weight;
            [num(s.omega), num(s.weight), num(running)]
        })
        .collect();
    table(["omega", "weight", "cumulative_first_moment"], rows)
}

fn index_csv(report: &RunReport) -> LabResult<Vec<u8>> {
    let path = report
        .config
        .sweep
        .as_ref()
        .map(|s| s.path.clone())
        .unwrap_or_default();
    let rows = report
        .points
        .iter()
        .enumerate()
        .map(|(i, p): (usize, &PointReport)| {
            [
                i.to_string(),
                path.clone(),
                p.sweep_value.map(num).unwrap_or_default(),
                format!("point_{i:03}"),
            ]
        })
        .collect();
    table(["point", "path", "value", "directory"], rows)
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn convergence_csv(conv: &Convergence) -> LabResult<Vec<u8>> {
    match conv {
        Convergence::HarmonicCutoff(t) => table(
            [
                "harmonic_cutoff",
                "zone_value",
                "sambe_value",
                "oracle_value",
                "residual",
                "delta",
                "zone_sambe_gap",
                "converged",
            ],
            t.rows
                .iter()
                .map(|r| {
                    [
                        r.harmonic_cutoff.to_string(),
                        num(r.zone_value),
                        num(r.sambe_value),
                        num(r.oracle_value),
                        num(r.residual),
                        opt(r.delta),
                        num(r.zone_sambe_gap),
                        r.converged.to_string(),
                    ]
                })
                .collect(),
        ),
        Convergence::PhotonCutoff(t) => table(
            [
                "n_max",
                "value",
                "oracle_residual",
                "delta",
                "top_population",
                "converged",
            ],
            t.rows
                .iter()
                .map(|r| {
                    [
                        r.n_max.to_string(),
                        num(r.value),
                        num(r.oracle_residual),
                        opt(r.delta),
                        num(r.top_population),
                        r.converged.to_string(),
                    ]
                })
                .collect(),
        ),
    }
}
