//! Run configuration: one TOML file fully determines a run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{AanError, Result};
use crate::force_field::ForceFieldConfig;
use crate::phase::{BasisSet, ImpedancePolicy, PhaseGrid, DEFAULT_G_MAX};
use crate::pi2::Pi2Config;
use crate::subject::{BaselineGait, SubjectParams, TargetTask};
use crate::supervisor::SupervisorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionMode {
    Transparent,
    Aan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionSpec {
    pub name: String,
    pub mode: SessionMode,
    pub strides: usize,
}

impl SessionSpec {
    pub fn new(name: impl Into<String>, mode: SessionMode, strides: usize) -> Self {
        Self {
            name: name.into(),
            mode,
            strides,
        }
    }
}

/// Ordered training protocol. The first session is the baseline walk from
/// which the target is built, so it must be transparent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub sessions: Vec<SessionSpec>,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        use SessionMode::*;
        let mut sessions = vec![SessionSpec::new("BSLN", Transparent, 270)];
        sessions.extend((1..=4).map(|i| SessionSpec::new(format!("T-{i}"), Aan, 500)));
        sessions.extend((1..=3).map(|i| SessionSpec::new(format!("PT-{i}"), Transparent, 55)));
        Self { sessions }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeConfig {
    /// Kernel count `P`.
    pub kernels: usize,
    /// Evaluation instant count `N`.
    pub instants: usize,
    /// Kernel width `μ` (rad⁻²).
    pub width: f64,
    /// Actuation clamp on `g` (deg⁻²).
    pub g_max: f64,
    /// Starting weights; empty means a flat zero landscape.
    pub initial_weights: Vec<f64>,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        Self {
            kernels: 10,
            instants: 10,
            width: 5.0,
            g_max: DEFAULT_G_MAX,
            initial_weights: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// Built-in trajectory name, used when `file` is absent.
    pub preset: String,
    /// Optional `phase_fraction angle` table.
    pub file: Option<PathBuf>,
    /// Samples per stride `Q`.
    pub samples: usize,
    /// Fraction of the baseline session's final strides averaged into the
    /// reference trajectory.
    pub average_last: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            preset: "default".into(),
            file: None,
            samples: 200,
            average_last: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Leading fraction of each session's strides left out of RMS statistics.
    pub skip_fraction: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { skip_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Label written to every CSV row; defaults to `seed-<seed>`.
    pub run_id: Option<String>,
    pub output_dir: Option<PathBuf>,
    pub landscape: LandscapeConfig,
    pub force_field: ForceFieldConfig,
    pub pi2: Pi2Config,
    pub supervisor: SupervisorConfig,
    pub subject: SubjectParams,
    pub target: TargetTask,
    pub baseline: BaselineConfig,
    pub analysis: AnalysisConfig,
    pub protocol: ProtocolSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            run_id: None,
            output_dir: None,
            landscape: LandscapeConfig::default(),
            force_field: ForceFieldConfig::default(),
            pi2: Pi2Config::default(),
            supervisor: SupervisorConfig::default(),
            subject: SubjectParams::default(),
            target: TargetTask::default(),
            baseline: BaselineConfig::default(),
            analysis: AnalysisConfig::default(),
            protocol: ProtocolSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| AanError::Format(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AanError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        // relative baseline files resolve against the config's directory
        if let (Some(file), Some(dir)) = (&cfg.baseline.file, path.parent()) {
            if file.is_relative() {
                cfg.baseline.file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config is always representable as TOML")
    }

    pub fn run_id(&self) -> String {
        self.run_id.clone().unwrap_or_else(|| format!("seed-{}", self.seed))
    }

    /// Sets a dotted key (`subject.learning_gain`) from its textual value.
    /// The value is read as a TOML literal when possible, else as a string.
    pub fn with_override(&self, key: &str, raw: &str) -> Result<Self> {
        let mut table = match toml::Value::try_from(self) {
            Ok(toml::Value::Table(t)) => t,
            Ok(_) => unreachable!("a struct serializes to a table"),
            Err(e) => return Err(AanError::Format(format!("config: {e}"))),
        };
        let value = parse_literal(raw);
        let parts: Vec<&str> = key.split('.').collect();
        let (last, parents) = parts.split_last().expect("split yields ≥ 1 part");
        let mut cursor = &mut table;
        for part in parents {
            cursor = cursor
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| AanError::InvalidConfig(format!("`{part}` in `{key}` is not a section")))?;
        }
        cursor.insert(last.to_string(), value);
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| AanError::InvalidConfig(format!("override `{key}={raw}`: {e}")))
    }

    /// Every violated invariant, in a stable order. Empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let l = &self.landscape;
        if l.kernels == 0 {
            v.push("landscape.kernels (P) must be ≥ 1".into());
        }
        if l.instants < 2 {
            v.push(format!("landscape.instants (N) must be ≥ 2, got {}", l.instants));
        }
        if !(l.width > 0.0 && l.width.is_finite()) {
            v.push(format!("landscape.width (μ) must be > 0, got {}", l.width));
        }
        if !(l.g_max > 0.0 && l.g_max.is_finite()) {
            v.push(format!("landscape.g_max must be > 0, got {}", l.g_max));
        }
        if !l.initial_weights.is_empty() && l.initial_weights.len() != l.kernels {
            v.push(format!(
                "landscape.initial_weights has {} entries for {} kernels",
                l.initial_weights.len(),
                l.kernels
            ));
        }
        v.extend(self.force_field.violations());
        v.extend(self.pi2.violations());
        v.extend(self.supervisor.violations(l.instants));
        v.extend(self.subject.violations());
        v.extend(self.target.violations());

        let b = &self.baseline;
        if b.samples < 2 * l.instants {
            v.push(format!(
                "baseline.samples (Q = {}) must be at least twice landscape.instants (N = {})",
                b.samples, l.instants
            ));
        }
        if !(b.average_last > 0.0 && b.average_last <= 1.0) {
            v.push(format!("baseline.average_last must lie in (0, 1], got {}", b.average_last));
        }
        if b.file.is_none() && b.preset != "default" {
            v.push(format!("baseline.preset `{}` is unknown", b.preset));
        }
        if !(self.analysis.skip_fraction >= 0.0 && self.analysis.skip_fraction < 1.0) {
            v.push(format!(
                "analysis.skip_fraction must lie in [0, 1), got {}",
                self.analysis.skip_fraction
            ));
        }

        let sessions = &self.protocol.sessions;
        if sessions.is_empty() {
            v.push("protocol.sessions is empty".into());
        } else if sessions[0].mode != SessionMode::Transparent {
            v.push(format!(
                "protocol session `{}` comes first and must be transparent (it defines the target)",
                sessions[0].name
            ));
        }
        let per_epoch = self.pi2.rollouts + 1;
        let mut names = std::collections::HashSet::new();
        for s in sessions {
            if s.strides == 0 {
                v.push(format!("protocol session `{}` has no strides", s.name));
            }
            if s.mode == SessionMode::Aan && self.pi2.rollouts > 0 && s.strides % per_epoch != 0 {
                v.push(format!(
                    "protocol session `{}`: {} strides is not a whole number of {per_epoch}-stride epochs",
                    s.name, s.strides
                ));
            }
            if s.name.is_empty() || s.name.contains([',', '"', '\n']) {
                v.push(format!("protocol session name `{}` must be non-empty without commas or quotes", s.name));
            }
            if !names.insert(s.name.as_str()) {
                v.push(format!("protocol session name `{}` is repeated", s.name));
            }
        }
        if self.run_id().contains([',', '"', '\n']) {
            v.push("run_id must not contain commas or quotes".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(AanError::Validation(v))
        }
    }

    pub fn basis(&self) -> Result<BasisSet> {
        BasisSet::new(
            self.landscape.width,
            PhaseGrid::new(self.landscape.kernels, self.landscape.instants)?,
        )
    }

    pub fn initial_policy(&self) -> Result<ImpedancePolicy> {
        let w = if self.landscape.initial_weights.is_empty() {
            vec![0.0; self.landscape.kernels]
        } else {
            self.landscape.initial_weights.clone()
        };
        ImpedancePolicy::new(w, self.landscape.g_max)
    }

    pub fn baseline_gait(&self) -> Result<BaselineGait> {
        match &self.baseline.file {
            Some(path) => BaselineGait::from_file(path, self.baseline.samples),
            None => BaselineGait::preset(&self.baseline.preset, self.baseline.samples),
        }
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    #[derive(Deserialize)]
    struct Holder {
        v: toml::Value,
    }
    toml::from_str::<Holder>(&format!("v = {raw}"))
        .map(|h| h.v)
        .unwrap_or_else(|_| toml::Value::String(raw.to_string()))
}
