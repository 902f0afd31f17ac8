//! Job dispatch: builds the matter model and runs the requested pipeline.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use trk_core::model::{self, ElectronCount, MatterOperator};
use trk_core::qed::{self, PhotonConvergence};
use trk_core::sumrule::{self, CutoffTable, SpectralDensity, SumRuleReport};

use crate::config::{ConvergeParameter, JobConfig, JobKind, ModelKind};
use crate::error::{LabError, LabResult};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Matter Hamiltonian, dipole and electron count built from a config.
#[derive(Debug, Clone)]
pub struct Matter {
    pub hamiltonian: MatterOperator,
    pub dipole: MatterOperator,
    pub electrons: ElectronCount,
}

pub fn build_matter(config: &JobConfig) -> LabResult<Matter> {
    let m = &config.model;
    let electrons = m.electron_count()?;
    let ctx = |e| LabError::model("model", e);
    let (hamiltonian, dipole) = match m.kind {
        ModelKind::FewLevel => {
            let few = m.few_level()?;
            (few.hamiltonian(), few.dipole())
        }
        ModelKind::Grid => {
            let grid = m.grid_basis()?;
            let pot = m.potential_spec()?;
            let h = if electrons == ElectronCount::TWO {
                model::build_two_electron_hamiltonian(&grid, &pot, m.interaction()?, m.kinetic_scheme())
            } else {
                model::build_grid_hamiltonian(&grid, &pot, m.kinetic_scheme())
            }
            .map_err(ctx)?;
            (h, model::build_dipole(&grid, electrons).map_err(ctx)?)
        }
    };
    Ok(Matter {
        hamiltonian,
        dipole,
        electrons,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedSum {
    pub name: String,
    pub report: SumRuleReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Dimensions {
    pub matter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sambe: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representatives: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
    pub dimensions: Dimensions,
    pub sums: Vec<NamedSum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_density: Option<SpectralDensity>,
}

impl PointReport {
    pub fn sum(&self, name: &str) -> Option<&SumRuleReport> {
        self.sums.iter().find(|s| s.name == name).map(|s| &s.report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "parameter", rename_all = "snake_case")]
pub enum Convergence {
    HarmonicCutoff(CutoffTable),
    PhotonCutoff(PhotonConvergence),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarningEntry {
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub points: Vec<(String, f64)>,
}

/// Everything a job produced. Timings are kept out of the serialized
/// payload so identical configs give identical reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub code_version: &'static str,
    pub job_kind: JobKind,
    pub run_hash: String,
    pub config: JobConfig,
    pub points: Vec<PointReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
    pub warnings: Vec<WarningEntry>,
    #[serde(skip)]
    pub timings: Timings,
}

/// SHA-256 of the code version and the canonical config echo.
pub fn run_hash(config: &JobConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(CODE_VERSION.as_bytes());
    hasher.update(b"\n");
    hasher.update(config.to_toml().as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn run_job(config: &JobConfig) -> LabResult<RunReport> {
    let start = Instant::now();
    let mut timings = Timings::default();
    let mut points = Vec::new();
    let mut convergence = None;
    match config.job_kind {
        JobKind::StaticTrk | JobKind::Floquet | JobKind::Qed => {
            let t = Instant::now();
            points.push(run_point(config, config.job_kind.name(), None)?);
            timings.points.push((points[0].label.clone(), t.elapsed().as_secs_f64()));
        }
        JobKind::Sweep => {
            let sweep = config.sweep.as_ref().expect("validated sweep section");
            let runs: Vec<LabResult<(PointReport, f64)>> = config
                .sweep_points()?
                .par_iter()
                .map(|(x, cfg)| {
                    let t = Instant::now();
                    let label = format!("{}={x}", sweep.path);
                    let point = run_point(cfg, &label, Some(*x))?;
                    Ok((point, t.elapsed().as_secs_f64()))
                })
                .collect();
            for run in runs {
                let (point, secs) = run?;
                timings.points.push((point.label.clone(), secs));
                points.push(point);
            }
        }
        JobKind::Converge => {
            convergence = Some(run_convergence(config)?);
        }
    }
    let mut warnings = Vec::new();
    for point in &points {
        for sum in &point.sums {
            warnings.extend(sum.report.warnings.iter().map(|w| WarningEntry {
                source: format!("{}/{}", point.label, sum.name),
                message: w.clone(),
            }));
        }
    }
    if let Some(Convergence::HarmonicCutoff(table)) = &convergence {
        for row in &table.rows {
            warnings.extend(row.warnings.iter().map(|w| WarningEntry {
                source: format!("harmonic_cutoff={}", row.harmonic_cutoff),
                message: w.clone(),
            }));
        }
    }
    timings.total_seconds = start.elapsed().as_secs_f64();
    Ok(RunReport {
        code_version: CODE_VERSION,
        job_kind: config.job_kind,
        run_hash: run_hash(config),
        config: config.clone(),
        points,
        convergence,
        warnings,
        timings,
    })
}

fn run_point(config: &JobConfig, label: &str, sweep_value: Option<f64>) -> LabResult<PointReport> {
    let ctx = |stage: &str| {
        let context = format!("{label}: {stage}");
        move |e| LabError::model(context, e)
    };
    let matter = build_matter(config)?;
    let (h, d, ne) = (&matter.hamiltonian, &matter.dipole, matter.electrons);
    let mut dims = Dimensions {
        matter: h.dim(),
        ..Dimensions::default()
    };
    let mut sums = Vec::new();
    let density;
    match config.job_kind {
        JobKind::StaticTrk => {
            let r = sumrule::static_trk(h, d, config.reference.lowest_or_index(), ne)
                .map_err(ctx("static_trk"))?;
            density = SpectralDensity::from_report(&r);
            sums.push(named("static_trk", r));
        }
        JobKind::Floquet => {
            let drive = config.drive.as_ref().expect("validated drive").to_spec()?;
            let sambe = config.sambe.expect("resolved sambe section");
            let stat = sumrule::static_trk(h, d, 0, ne).map_err(ctx("static_trk"))?;
            let run = sumrule::driven_sum_rules(
                h,
                d,
                &drive,
                sambe.harmonic_cutoff,
                ne,
                config.reference.choice(),
                sambe.zone_options(),
            )
            .map_err(ctx("floquet"))?;
            dims.sambe = Some(run.solution.matrix.dim());
            dims.representatives = Some(run.solution.zone.representatives.len());
            density = SpectralDensity::from_report(&run.zone);
            sums.push(named("static_trk", stat));
            sums.push(named("sumrule_ffbz", run.zone));
            sums.push(named("sumrule_sambe", run.sambe));
        }
        JobKind::Qed => {
            let fc = config.fock.expect("validated fock section");
            let fock = fc.to_spec(fc.n_max)?;
            let reference = config.reference.lowest_or_index();
            let stat = sumrule::static_trk(h, d, 0, ne).map_err(ctx("static_trk"))?;
            let run = qed::run_qed(h, d, &fock, reference, ne).map_err(ctx("qed"))?;
            dims.joint = Some(run.hamiltonian.dim());
            density = SpectralDensity::from_report(&run.report);
            sums.push(named("static_trk", stat));
            sums.push(named("sumrule_qed", run.report));
            if fc.bare_basis_diagnostic {
                let bare = qed::sumrule_qed_bare_basis(h, d, &fock, reference, ne)
                    .map_err(ctx("qed bare-basis diagnostic"))?;
                sums.push(named("sumrule_qed_bare_basis", bare));
            }
        }
        JobKind::Sweep | JobKind::Converge => {
            return Err(LabError::Config(format!(
                "{} is not a single-point job",
                config.job_kind
            )))
        }
    }
    Ok(PointReport {
        label: label.to_string(),
        sweep_value,
        dimensions: dims,
        sums,
        spectral_density: Some(density),
    })
}

fn run_convergence(config: &JobConfig) -> LabResult<Convergence> {
    let conv = config.converge.as_ref().expect("validated converge section");
    let matter = build_matter(config)?;
    let (h, d, ne) = (&matter.hamiltonian, &matter.dipole, matter.electrons);
    match conv.parameter {
        ConvergeParameter::HarmonicCutoff => {
            let drive = config.drive.as_ref().expect("validated drive").to_spec()?;
            let sambe = config.sambe.expect("resolved sambe section");
            sumrule::harmonic_cutoff_scan(
                h,
                d,
                &drive,
                &conv.values,
                ne,
                config.reference.choice(),
                sambe.zone_options(),
            )
            .map(Convergence::HarmonicCutoff)
            .map_err(|e| LabError::model("converge over harmonic_cutoff", e))
        }
        ConvergeParameter::PhotonCutoff => {
            let fc = config.fock.expect("validated fock section");
            let fock = fc.to_spec(fc.n_max)?;
            qed::photon_cutoff_convergence(
                h,
                d,
                &fock,
                &conv.values,
                config.reference.lowest_or_index(),
                ne,
            )
            .map(Convergence::PhotonCutoff)
            .map_err(|e| LabError::model("converge over photon_cutoff", e))
        }
    }
}

fn named(name: &str, report: SumRuleReport) -> NamedSum {
    NamedSum {
        name: name.to_string(),
        report,
    }
}
