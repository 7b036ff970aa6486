//! Runs a whole training protocol against the simulated walker.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, SessionMode};
use super::log::{parse_csv, write_csv, StrideRow};
use super::metrics::{compute_metrics, SummaryMetrics};
use crate::error::{AanError, Result};
use crate::parallel::{self, Execution};
use crate::subject::{make_target, swing_peak, StrideOutcome, SubjectPlant};
use crate::supervisor::{Plant, SessionState, StrideKind, Supervisor};

pub const STRIDES_FILE: &str = "strides.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "run_config.toml";

const CONTROLLER_STREAM: u64 = 1;
const PLANT_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub run_id: String,
    pub seed: u64,
    pub metrics: SummaryMetrics,
    pub config: RunConfig,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub rows: Vec<StrideRow>,
    pub csv: String,
    pub summary: Summary,
    pub summary_json: String,
}

impl RunOutput {
    /// Writes the stride log, the summary and a config echo into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| AanError::io(dir, e))?;
        for (name, body) in [
            (STRIDES_FILE, self.csv.as_str()),
            (SUMMARY_FILE, self.summary_json.as_str()),
            (CONFIG_FILE, self.config.to_toml_string().as_str()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| AanError::io(&path, e))?;
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn row_from_outcome(
    run_id: &str,
    session: &str,
    stride_idx: u64,
    outcome: &StrideOutcome,
    mask: &[usize],
    kernels: usize,
) -> Result<StrideRow> {
    Ok(StrideRow {
        run_id: run_id.to_string(),
        session: session.to_string(),
        stride_idx,
        epoch_idx: None,
        kind: StrideKind::Transparent,
        mode: None,
        sigma: None,
        epoch_cost: None,
        rms_full: outcome.rms_full(),
        rms_masked: outcome.rms_masked(mask)?,
        g_at_kernels: vec![0.0; kernels],
        seg_rms_err: outcome.seg_rms_err.clone(),
    })
}

/// Executes every session of the protocol in order.
///
/// The first session is walked without a target; the mean of its last
/// strides plus the bump becomes the target, and the session is then scored
/// against it. The walker adapts from the second session on. Adaptive
/// sessions share one supervisor state, so the landscape, mode and noise
/// schedule carry over between them.
pub fn run_protocol(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let run_id = config.run_id();
    let basis = config.basis()?;
    let kernels = basis.kernels();
    let instants = basis.grid().instants();
    let mask = config.supervisor.eval_mask.clone();

    let mut supervisor = Supervisor::new(
        basis,
        config.pi2.clone(),
        config.supervisor.clone(),
        stream(config.seed, CONTROLLER_STREAM),
    )?;
    let mut state = SessionState::new(config.initial_policy()?);
    let mut plant = SubjectPlant::new(
        config.baseline_gait()?,
        config.subject,
        config.force_field,
        instants,
        stream(config.seed, PLANT_STREAM),
    );
    let phases = plant.phases().to_vec();

    let mut rows = Vec::new();
    let sessions = &config.protocol.sessions;

    let bsln = &sessions[0];
    let walked: Vec<Vec<f64>> = (0..bsln.strides).map(|_| plant.walk_unassisted()).collect();
    let tail = ((bsln.strides as f64 * config.baseline.average_last).ceil() as usize).clamp(1, bsln.strides);
    let q = phases.len();
    let mut reference = vec![0.0; q];
    for stride in &walked[bsln.strides - tail..] {
        for (r, x) in reference.iter_mut().zip(stride) {
            *r += x / tail as f64;
        }
    }
    let center = config
        .target
        .center
        .unwrap_or_else(|| swing_peak(&phases, &reference).1);
    let target = make_target(&reference, &phases, &config.target, center);
    for (i, measured) in walked.into_iter().enumerate() {
        let raw: Vec<f64> = target.iter().zip(&measured).map(|(d, m)| d - m).collect();
        let outcome = StrideOutcome::new(phases.clone(), measured, vec![0.0; q], vec![0.0; q], raw, instants)?;
        rows.push(row_from_outcome(&run_id, &bsln.name, i as u64, &outcome, &mask, kernels)?);
    }
    plant.set_target(target)?;
    plant.set_adapting(true);

    for session in &sessions[1..] {
        match session.mode {
            SessionMode::Transparent => {
                let zeros = vec![0.0; q];
                for i in 0..session.strides {
                    let outcome = plant.stride(&zeros, StrideKind::Transparent)?;
                    rows.push(row_from_outcome(&run_id, &session.name, i as u64, &outcome, &mask, kernels)?);
                }
            }
            SessionMode::Aan => {
                let epochs = session.strides / supervisor.strides_per_epoch();
                let records = supervisor.run_session(&mut state, &mut plant, epochs)?;
                let mut stride_idx = 0u64;
                for (e, rec) in records.iter().enumerate() {
                    for log in &rec.strides {
                        rows.push(StrideRow {
                            run_id: run_id.clone(),
                            session: session.name.clone(),
                            stride_idx,
                            epoch_idx: Some(e as u64),
                            kind: log.kind,
                            mode: Some(log.mode),
                            sigma: Some(log.sigma),
                            epoch_cost: log.epoch_cost,
                            rms_full: log.rms_full,
                            rms_masked: log.rms_masked,
                            g_at_kernels: log.g_at_kernels.clone(),
                            seg_rms_err: log.seg_rms_err.clone(),
                        });
                        stride_idx += 1;
                    }
                }
            }
        }
    }

    let csv = write_csv(&rows, kernels, instants);
    let summary = summarize(&csv, config)?;
    let summary_json = summary.to_json();
    Ok(RunOutput {
        config: config.clone(),
        rows,
        csv,
        summary,
        summary_json,
    })
}

/// Summary derived from the CSV text, so it can be reproduced from disk.
fn summarize(csv: &str, config: &RunConfig) -> Result<Summary> {
    let (parsed, _, _) = parse_csv(csv)?;
    Ok(Summary {
        run_id: config.run_id(),
        seed: config.seed,
        metrics: compute_metrics(&parsed, config.analysis.skip_fraction)?,
        config: config.clone(),
    })
}

/// Recomputes the summary of a finished run from the files in `dir`.
pub fn summary_from_dir(dir: &Path) -> Result<Summary> {
    let csv_path = dir.join(STRIDES_FILE);
    let cfg_path = dir.join(CONFIG_FILE);
    let csv = std::fs::read_to_string(&csv_path).map_err(|e| AanError::io(&csv_path, e))?;
    let cfg_text = std::fs::read_to_string(&cfg_path).map_err(|e| AanError::io(&cfg_path, e))?;
    let config = RunConfig::from_toml_str(&cfg_text)?;
    summarize(&csv, &config)
}

/// Runs the same configuration under each seed.
pub fn run_seeds(base: &RunConfig, seeds: &[u64], exec: Execution) -> Vec<Result<RunOutput>> {
    parallel::map(seeds, exec, |&seed| {
        let cfg = RunConfig {
            seed,
            ..base.clone()
        };
        run_protocol(&cfg)
    })
}

/// One swept parameter and the literal values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl SweepAxis {
    /// Parses `key=v1,v2,…`. Values that are themselves lists must be
    /// swept one axis at a time.
    pub fn parse(spec: &str) -> Result<Self> {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| AanError::InvalidConfig(format!("sweep axis `{spec}` is not key=v1,v2,…")))?;
        let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
        if key.trim().is_empty() || values.iter().any(|v| v.is_empty()) {
            return Err(AanError::InvalidConfig(format!("sweep axis `{spec}` has an empty key or value")));
        }
        Ok(Self {
            key: key.trim().to_string(),
            values,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub index: usize,
    pub overrides: Vec<(String, String)>,
    pub dir: PathBuf,
    pub config: RunConfig,
}

/// Cartesian product of the axes over `base`; each cell writes into its own
/// directory under `out`. All cells are validated before any is run.
pub fn sweep(base: &RunConfig, axes: &[SweepAxis], out: &Path, exec: Execution) -> Result<Vec<SweepCell>> {
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push((axis.key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }

    let mut cells = Vec::with_capacity(combos.len());
    let mut problems = Vec::new();
    for (index, overrides) in combos.into_iter().enumerate() {
        let mut cfg = base.clone();
        for (k, v) in &overrides {
            cfg = cfg.with_override(k, v)?;
        }
        problems.extend(cfg.violations().into_iter().map(|p| format!("cell {index}: {p}")));
        cells.push(SweepCell {
            index,
            dir: out.join(format!("cell-{index:03}")),
            overrides,
            config: cfg,
        });
    }
    if !problems.is_empty() {
        return Err(AanError::Validation(problems));
    }

    let results = parallel::map(&cells, exec, |cell| {
        run_protocol(&cell.config).and_then(|o| o.write_to(&cell.dir))
    });
    results.into_iter().collect::<Result<Vec<()>>>()?;

    let mut index = String::from("cell");
    for axis in axes {
        index.push(',');
        index.push_str(&axis.key);
    }
    index.push('\n');
    for cell in &cells {
        index.push_str(&format!("cell-{:03}", cell.index));
        for (_, v) in &cell.overrides {
            index.push(',');
            index.push_str(v);
        }
        index.push('\n');
    }
    let path = out.join("cells.csv");
    std::fs::create_dir_all(out).map_err(|e| AanError::io(out, e))?;
    std::fs::write(&path, index).map_err(|e| AanError::io(&path, e))?;
    Ok(cells)
}
