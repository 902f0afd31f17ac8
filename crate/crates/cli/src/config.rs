//! Job configuration: TOML schema, defaults and validation.
//!
//! Every accepted file is resolved to a [`JobConfig`] with all defaults
//! written out, so serializing it back gives a complete, re-loadable echo.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use trk_core::floquet::{SambeSpec, MAX_SAMBE_DIM};
use trk_core::model::{
    self, DriveComponent, DriveSpec, ElectronCount, GridBasis, Interaction, KineticScheme,
    PotentialSpec,
};
use trk_core::qed::{FockSpec, MAX_JOINT_DIM};
use trk_core::sumrule::{ReferenceChoice, ZonePolicy, ZoneSumOptions};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    StaticTrk,
    Floquet,
    Qed,
    Sweep,
    Converge,
}

impl JobKind {
    pub fn name(self) -> &'static str {
        match self {
            JobKind::StaticTrk => "static_trk",
            JobKind::Floquet => "floquet",
            JobKind::Qed => "qed",
            JobKind::Sweep => "sweep",
            JobKind::Converge => "converge",
        }
    }
}

impl fmt::Display for JobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub job_kind: JobKind,
    #[serde(default)]
    pub reference: ReferenceConfig,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sambe: Option<SambeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock: Option<FockConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// `"auto"` or an explicit state index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceConfig {
    #[default]
    Auto,
    Index(usize),
}

impl ReferenceConfig {
    pub fn choice(self) -> ReferenceChoice {
        match self {
            ReferenceConfig::Auto => ReferenceChoice::Auto,
            ReferenceConfig::Index(i) => ReferenceChoice::Index(i),
        }
    }

    /// Index for spectra ordered by energy, where "auto" is the lowest state.
    pub fn lowest_or_index(self) -> usize {
        match self {
            ReferenceConfig::Auto => 0,
            ReferenceConfig::Index(i) => i,
        }
    }
}

impl Serialize for ReferenceConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ReferenceConfig::Auto => s.serialize_str("auto"),
            ReferenceConfig::Index(i) => s.serialize_u64(*i as u64),
        }
    }
}

impl<'de> Deserialize<'de> for ReferenceConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RefVisitor;
        impl Visitor<'_> for RefVisitor {
            type Value = ReferenceConfig;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\" or a non-negative integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                if v == "auto" {
                    Ok(ReferenceConfig::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                usize::try_from(v)
                    .map(ReferenceConfig::Index)
                    .map_err(|_| E::invalid_value(de::Unexpected::Signed(v), &self))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(ReferenceConfig::Index(v as usize))
            }
        }
        d.deserialize_any(RefVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Grid,
    FewLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub kind: ModelKind,
    #[serde(default = "one")]
    pub electrons: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetic: Option<KineticConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelsConfig>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -10.0,
            x_max: 10.0,
            n_points: 201,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticConfig {
    #[default]
    ThreePoint,
    SincDvr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Harmonic,
    SoftCoulomb,
    Box,
    DoubleWell,
    Tabulated,
}

/// External potential. Only the keys of the chosen `kind` may be set:
/// `harmonic` (omega), `soft_coulomb` (charge, softening), `box`,
/// `double_well` (barrier, separation), `tabulated` (values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub softening: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl PotentialConfig {
    pub fn harmonic(omega: f64) -> Self {
        Self {
            kind: PotentialKind::Harmonic,
            omega: Some(omega),
            charge: None,
            softening: None,
            barrier: None,
            separation: None,
            values: None,
        }
    }

    fn to_spec(&self) -> LabResult<PotentialSpec> {
        let set = [
            ("omega", self.omega.is_some()),
            ("charge", self.charge.is_some()),
            ("softening", self.softening.is_some()),
            ("barrier", self.barrier.is_some()),
            ("separation", self.separation.is_some()),
            ("values", self.values.is_some()),
        ];
        let (kind, keys): (&str, &[&str]) = match self.kind {
            PotentialKind::Harmonic => ("harmonic", &["omega"]),
            PotentialKind::SoftCoulomb => ("soft_coulomb", &["charge", "softening"]),
            PotentialKind::Box => ("box", &[]),
            PotentialKind::DoubleWell => ("double_well", &["barrier", "separation"]),
            PotentialKind::Tabulated => ("tabulated", &["values"]),
        };
        check_keys("model.potential", kind, keys, &set)?;
        let f = |x: Option<f64>| x.expect("presence checked");
        Ok(match self.kind {
            PotentialKind::Harmonic => PotentialSpec::Harmonic { omega: f(self.omega) },
            PotentialKind::SoftCoulomb => PotentialSpec::SoftCoulomb {
                charge: f(self.charge),
                softening: f(self.softening),
            },
            PotentialKind::Box => PotentialSpec::Box,
            PotentialKind::DoubleWell => PotentialSpec::DoubleWell {
                barrier: f(self.barrier),
                separation: f(self.separation),
            },
            PotentialKind::Tabulated => PotentialSpec::Tabulated {
                values: self.values.clone().expect("presence checked"),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    #[default]
    None,
    SoftCoulomb,
}

/// Electron-electron interaction: `none` or `soft_coulomb` (strength, softening).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    pub kind: InteractionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub softening: Option<f64>,
}

impl InteractionConfig {
    fn to_spec(self) -> LabResult<Interaction> {
        let set = [
            ("strength", self.strength.is_some()),
            ("softening", self.softening.is_some()),
        ];
        match self.kind {
            InteractionKind::None => {
                check_keys("model.interaction", "none", &[], &set)?;
                Ok(Interaction::None)
            }
            InteractionKind::SoftCoulomb => {
                check_keys("model.interaction", "soft_coulomb", &["strength", "softening"], &set)?;
                let softening = self.softening.expect("presence checked");
                if !(softening > 0.0) {
                    return Err(LabError::Config(
                        "model.interaction.softening must be positive".into(),
                    ));
                }
                Ok(Interaction::SoftCoulomb {
                    strength: self.strength.expect("presence checked"),
                    softening,
                })
            }
        }
    }
}

fn check_keys(section: &str, kind: &str, wanted: &[&str], set: &[(&str, bool)]) -> LabResult<()> {
    for &(key, present) in set {
        let needed = wanted.contains(&key);
        if needed && !present {
            return Err(LabError::Config(format!(
                "{section}: kind = \"{kind}\" requires `{key}`"
            )));
        }
        if present && !needed {
            return Err(LabError::Config(format!(
                "{section}: `{key}` is not read by kind = \"{kind}\""
            )));
        }
    }
    Ok(())
}

/// Few-level model with a real symmetric dipole matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsConfig {
    pub energies: Vec<f64>,
    pub dipole: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub omega: f64,
    pub components: Vec<ComponentConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    #[serde(default = "one")]
    pub harmonic: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZonePolicyConfig {
    #[default]
    Warn,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SambeConfig {
    pub harmonic_cutoff: usize,
    pub edge_tol: f64,
    pub zone_policy: ZonePolicyConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zone_n_max: Option<usize>,
}

impl Default for SambeConfig {
    fn default() -> Self {
        Self {
            harmonic_cutoff: 8,
            edge_tol: 1e-8,
            zone_policy: ZonePolicyConfig::Warn,
            zone_n_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockConfig {
    pub n_max: usize,
    pub omega_c: f64,
    pub g: f64,
    #[serde(default)]
    pub bare_basis_diagnostic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergeParameter {
    /// Floquet harmonic cutoff `N_h`.
    HarmonicCutoff,
    /// Photon cutoff `n_max`.
    PhotonCutoff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub parameter: ConvergeParameter,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Job run at every point: `static_trk`, `floquet` or `qed`.
    pub job: JobKind,
    /// Dotted parameter path into the config, e.g. `drive.components.0.amplitude`.
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    pub formats: Vec<OutputFormat>,
    pub plot_data: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: None,
            formats: vec![OutputFormat::Json, OutputFormat::Csv],
            plot_data: true,
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> LabResult<JobConfig> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_config(&text)
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> LabResult<JobConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| LabError::Config(e.to_string()))?;
    check_finite(&toml::Value::Table(table), "")?;
    let de = toml::Deserializer::parse(text).map_err(|e| LabError::Config(e.to_string()))?;
    let raw: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = with_suggestion(&e.into_inner().to_string());
        if path == "." || msg.contains(&format!("`{path}`")) {
            LabError::Config(msg)
        } else {
            LabError::Config(format!("at `{path}`: {msg}"))
        }
    })?;
    raw.resolve()
}

fn check_finite(value: &toml::Value, path: &str) -> LabResult<()> {
    match value {
        toml::Value::Float(x) if !x.is_finite() => Err(LabError::Config(format!(
            "`{path}` must be a finite number (got {x})"
        ))),
        toml::Value::Table(t) => t.iter().try_for_each(|(k, v)| {
            let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            check_finite(v, &sub)
        }),
        toml::Value::Array(a) => a
            .iter()
            .enumerate()
            .try_for_each(|(i, v)| check_finite(v, &format!("{path}.{i}"))),
        _ => Ok(()),
    }
}

/// Appends a "did you mean" hint to unknown-field and unknown-variant errors.
fn with_suggestion(message: &str) -> String {
    let Some(start) = message
        .find("unknown field `")
        .map(|i| i + "unknown field `".len())
        .or_else(|| message.find("unknown variant `").map(|i| i + "unknown variant `".len()))
    else {
        return message.to_string();
    };
    let Some(len) = message[start..].find('`') else {
        return message.to_string();
    };
    let bad = &message[start..start + len];
    let rest = &message[start + len + 1..];
    let Some(expected) = rest.find("expected").map(|i| &rest[i..]) else {
        return message.to_string();
    };
    let best = expected
        .split('`')
        .skip(1)
        .step_by(2)
        .map(|cand| (strsim::levenshtein(bad, cand), cand))
        .min();
    match best {
        Some((dist, cand)) if dist <= bad.len().max(cand.len()) / 2 + 1 => {
            format!("{}\ndid you mean `{cand}` instead of `{bad}`?", message.trim_end())
        }
        _ => message.to_string(),
    }
}

/// Sections each job kind reads.
#[derive(Debug, Clone, Copy, Default)]
struct Needs {
    drive: bool,
    sambe: bool,
    fock: bool,
}

impl JobConfig {
    fn needs(&self) -> LabResult<Needs> {
        let single = |kind: JobKind| match kind {
            JobKind::StaticTrk => Ok(Needs::default()),
            JobKind::Floquet => Ok(Needs {
                drive: true,
                sambe: true,
                fock: false,
            }),
            JobKind::Qed => Ok(Needs {
                fock: true,
                ..Needs::default()
            }),
            other => Err(LabError::Config(format!(
                "sweep.job must be static_trk, floquet or qed (got {other})"
            ))),
        };
        match self.job_kind {
            JobKind::Sweep => {
                let sweep = self.sweep.as_ref().ok_or_else(|| missing("sweep", self.job_kind))?;
                single(sweep.job)
            }
            JobKind::Converge => {
                let conv = self
                    .converge
                    .as_ref()
                    .ok_or_else(|| missing("converge", self.job_kind))?;
                Ok(match conv.parameter {
                    ConvergeParameter::HarmonicCutoff => single(JobKind::Floquet)?,
                    ConvergeParameter::PhotonCutoff => single(JobKind::Qed)?,
                })
            }
            kind => single(kind),
        }
    }

    /// Fills defaults and checks the config against the job kind.
    fn resolve(mut self) -> LabResult<Self> {
        if self.sweep.is_some() && self.job_kind != JobKind::Sweep {
            return Err(unused("sweep", self.job_kind));
        }
        if self.converge.is_some() && self.job_kind != JobKind::Converge {
            return Err(unused("converge", self.job_kind));
        }
        let needs = self.needs()?;
        let kind = self.job_kind;
        match (needs.drive, self.drive.is_some()) {
            (true, false) => return Err(missing("drive", kind)),
            (false, true) => return Err(unused("drive", kind)),
            _ => {}
        }
        match (needs.fock, self.fock.is_some()) {
            (true, false) => return Err(missing("fock", kind)),
            (false, true) => return Err(unused("fock", kind)),
            _ => {}
        }
        if needs.sambe {
            self.sambe.get_or_insert_with(SambeConfig::default);
        } else if self.sambe.is_some() {
            return Err(unused("sambe", kind));
        }
        self.model.resolve()?;
        self.validate()?;
        if self.job_kind == JobKind::Sweep {
            self.sweep_points()?;
        }
        Ok(self)
    }

    /// Checks everything that can be checked without diagonalizing.
    fn validate(&self) -> LabResult<()> {
        let nb = self.model.matter_dim()?;
        if let ReferenceConfig::Index(i) = self.reference {
            // zone and joint state counts are only known after solving
            if self.job_kind == JobKind::StaticTrk && i >= nb {
                return Err(LabError::Config(format!(
                    "reference = {i} is out of range for a {nb}-state model"
                )));
            }
        }
        if let Some(drive) = &self.drive {
            let spec = drive.to_spec()?;
            let sambe = self.sambe.unwrap_or_default();
            if !(sambe.edge_tol > 0.0) {
                return Err(LabError::Config("sambe.edge_tol must be positive".into()));
            }
            let cutoffs: Vec<usize> = match &self.converge {
                Some(c) if c.parameter == ConvergeParameter::HarmonicCutoff => c.values.clone(),
                _ => vec![sambe.harmonic_cutoff],
            };
            for n_h in cutoffs {
                if n_h < spec.max_harmonic() as usize {
                    return Err(LabError::Config(format!(
                        "harmonic cutoff {n_h} is below the highest drive harmonic {}",
                        spec.max_harmonic()
                    )));
                }
                SambeSpec::new(n_h, nb).map_err(|e| {
                    LabError::Config(format!(
                        "sambe: {e} (limit {MAX_SAMBE_DIM}; reduce harmonic_cutoff or the grid)"
                    ))
                })?;
            }
        }
        if let Some(fock) = &self.fock {
            let cutoffs: Vec<usize> = match &self.converge {
                Some(c) if c.parameter == ConvergeParameter::PhotonCutoff => c.values.clone(),
                _ => vec![fock.n_max],
            };
            for n_max in cutoffs {
                fock.to_spec(n_max)?;
                let joint = nb * (n_max + 1);
                if joint > MAX_JOINT_DIM {
                    return Err(LabError::Config(format!(
                        "fock: joint dimension {joint} exceeds the limit {MAX_JOINT_DIM}"
                    )));
                }
            }
        }
        if let Some(conv) = &self.converge {
            let min = match conv.parameter {
                ConvergeParameter::HarmonicCutoff => 2,
                ConvergeParameter::PhotonCutoff => 3,
            };
            if conv.values.len() < min || conv.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(LabError::Config(format!(
                    "converge.values must hold at least {min} strictly increasing cutoffs"
                )));
            }
        }
        if self.output.formats.is_empty() {
            return Err(LabError::Config("output.formats must not be empty".into()));
        }
        Ok(())
    }

    /// Per-point configs of a sweep, in configured order.
    pub fn sweep_points(&self) -> LabResult<Vec<(f64, JobConfig)>> {
        let sweep = self.sweep.as_ref().ok_or_else(|| missing("sweep", self.job_kind))?;
        if sweep.values.is_empty() {
            return Err(LabError::Config("sweep.values must not be empty".into()));
        }
        let mut base = self.clone();
        base.job_kind = sweep.job;
        base.sweep = None;
        let tree = toml::Value::try_from(&base)
            .map_err(|e| LabError::Config(format!("cannot re-encode config: {e}")))?;
        sweep
            .values
            .iter()
            .map(|&x| {
                let mut point = tree.clone();
                set_path(&mut point, &sweep.path, x)?;
                let cfg: JobConfig = point.try_into().map_err(|e: toml::de::Error| {
                    LabError::Config(format!("sweep point {} = {x}: {e}", sweep.path))
                })?;
                let cfg = cfg.resolve().map_err(|e| match e {
                    LabError::Config(msg) => {
                        LabError::Config(format!("sweep point {} = {x}: {msg}", sweep.path))
                    }
                    other => other,
                })?;
                Ok((x, cfg))
            })
            .collect()
    }

    pub fn output_directory(&self) -> Option<&str> {
        self.output.directory.as_deref()
    }

    /// Canonical TOML echo with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config values always encode")
    }
}

fn set_path(tree: &mut toml::Value, path: &str, x: f64) -> LabResult<()> {
    let mut node = tree;
    for seg in path.split('.') {
        node = match node {
            toml::Value::Table(t) => t.get_mut(seg),
            toml::Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| {
            LabError::Config(format!(
                "sweep.path `{path}` does not exist for this job (no `{seg}`)"
            ))
        })?;
    }
    *node = match node {
        toml::Value::Float(_) => toml::Value::Float(x),
        toml::Value::Integer(_) if x.fract() == 0.0 => toml::Value::Integer(x as i64),
        toml::Value::Integer(_) => {
            return Err(LabError::Config(format!(
                "sweep.path `{path}` is an integer but the sweep value {x} is not"
            )))
        }
        _ => {
            return Err(LabError::Config(format!(
                "sweep.path `{path}` is not a numeric parameter"
            )))
        }
    };
    Ok(())
}

fn missing(section: &str, kind: JobKind) -> LabError {
    LabError::Config(format!(
        "job_kind = \"{kind}\" requires a [{section}] section"
    ))
}

fn unused(section: &str, kind: JobKind) -> LabError {
    LabError::Config(format!(
        "section [{section}] is not used by job_kind = \"{kind}\""
    ))
}

fn model_err(section: &str, e: trk_core::Error) -> LabError {
    LabError::Config(format!("{section}: {e}"))
}

impl ModelConfig {
    fn resolve(&mut self) -> LabResult<()> {
        ElectronCount::new(self.electrons).map_err(|e| model_err("model.electrons", e))?;
        match self.kind {
            ModelKind::Grid => {
                if self.levels.is_some() {
                    return Err(LabError::Config(
                        "model.levels is only read when model.kind = \"few_level\"".into(),
                    ));
                }
                if self.potential.is_none() {
                    return Err(LabError::Config(
                        "model.kind = \"grid\" requires a [model.potential] section".into(),
                    ));
                }
                self.grid.get_or_insert_with(GridConfig::default);
                self.kinetic.get_or_insert_with(KineticConfig::default);
                if self.electrons == 2 {
                    self.interaction.get_or_insert_with(InteractionConfig::default);
                } else if self.interaction.is_some() {
                    return Err(LabError::Config(
                        "model.interaction is only read when model.electrons = 2".into(),
                    ));
                }
                let grid = self.grid_basis()?;
                self.potential_spec()?
                    .sample(&grid)
                    .map_err(|e| model_err("model.potential", e))?;
                self.interaction()?;
            }
            ModelKind::FewLevel => {
                for (key, set) in [
                    ("grid", self.grid.is_some()),
                    ("kinetic", self.kinetic.is_some()),
                    ("potential", self.potential.is_some()),
                    ("interaction", self.interaction.is_some()),
                ] {
                    if set {
                        return Err(LabError::Config(format!(
                            "model.{key} is only read when model.kind = \"grid\""
                        )));
                    }
                }
                self.few_level()?;
            }
        }
        let dim = self.matter_dim()?;
        if dim > model::MAX_MATTER_DIM {
            return Err(LabError::Config(format!(
                "model: matter dimension {dim} exceeds the limit {}",
                model::MAX_MATTER_DIM
            )));
        }
        Ok(())
    }

    pub fn electron_count(&self) -> LabResult<ElectronCount> {
        ElectronCount::new(self.electrons).map_err(|e| model_err("model.electrons", e))
    }

    pub fn grid_basis(&self) -> LabResult<GridBasis> {
        let g = self.grid.unwrap_or_default();
        GridBasis::new(g.x_min, g.x_max, g.n_points).map_err(|e| model_err("model.grid", e))
    }

    pub fn kinetic_scheme(&self) -> KineticScheme {
        match self.kinetic.unwrap_or_default() {
            KineticConfig::ThreePoint => KineticScheme::ThreePoint,
            KineticConfig::SincDvr => KineticScheme::SincDvr,
        }
    }

    pub fn potential_spec(&self) -> LabResult<PotentialSpec> {
        self.potential
            .as_ref()
            .ok_or_else(|| LabError::Config("missing [model.potential] section".into()))?
            .to_spec()
    }

    pub fn interaction(&self) -> LabResult<Interaction> {
        self.interaction.unwrap_or_default().to_spec()
    }

    pub fn few_level(&self) -> LabResult<model::FewLevelModel> {
        let levels = self.levels.as_ref().ok_or_else(|| {
            LabError::Config("model.kind = \"few_level\" requires a [model.levels] section".into())
        })?;
        let n = levels.energies.len();
        if levels.dipole.len() != n || levels.dipole.iter().any(|row| row.len() != n) {
            return Err(LabError::Config(format!(
                "model.levels.dipole must be a {n}×{n} matrix"
            )));
        }
        let dipole = ndarray::Array2::from_shape_fn((n, n), |(i, j)| {
            trk_core::C64::new(levels.dipole[i][j], 0.0)
        });
        model::FewLevelModel::new(levels.energies.clone(), dipole)
            .map_err(|e| model_err("model.levels", e))
    }

    /// Matter Hilbert-space dimension.
    pub fn matter_dim(&self) -> LabResult<usize> {
        Ok(match self.kind {
            ModelKind::Grid => {
                let n = self.grid.unwrap_or_default().n_points;
                if self.electrons == 2 {
                    n * n
                } else {
                    n
                }
            }
            ModelKind::FewLevel => self.levels.as_ref().map_or(0, |l| l.energies.len()),
        })
    }
}

impl DriveConfig {
    pub fn to_spec(&self) -> LabResult<DriveSpec> {
        let comps = self
            .components
            .iter()
            .map(|c| DriveComponent {
                harmonic: c.harmonic,
                amplitude: c.amplitude,
                phase: c.phase,
            })
            .collect();
        DriveSpec::new(self.omega, comps).map_err(|e| model_err("drive", e))
    }
}

impl FockConfig {
    pub fn to_spec(&self, n_max: usize) -> LabResult<FockSpec> {
        FockSpec::new(n_max, self.omega_c, self.g).map_err(|e| model_err("fock", e))
    }
}

impl SambeConfig {
    pub fn zone_options(&self) -> ZoneSumOptions {
        ZoneSumOptions {
            n_max: self.zone_n_max,
            policy: match self.zone_policy {
                ZonePolicyConfig::Warn => ZonePolicy::Warn,
                ZonePolicyConfig::Strict => ZonePolicy::Strict,
            },
            edge_tol: self.edge_tol,
        }
    }
}
