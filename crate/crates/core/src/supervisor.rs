//! Two-level evaluation around the policy-improvement step.
//!
//! Every epoch runs `K` noisy strides, updates the policy, and scores the
//! result with one noiseless stride. Every `M` epochs the mean score decides
//! whether the cost should favour tracking (intervention) or low impedance
//! (compliance). A mode change restarts the exploration-noise decay.

use std::fmt;

use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AanError, Result};
use crate::phase::{landscape_raw, segment_index_unchecked, BasisSet, ImpedancePolicy};
use crate::pi2::{self, CostWeights, ExplorationBatch, Pi2Config, UpdateGeometry};
use crate::subject::StrideOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningMode {
    Intervention,
    Compliance,
}

impl LearningMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LearningMode::Intervention => "intervention",
            LearningMode::Compliance => "compliance",
        }
    }
}

impl fmt::Display for LearningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrideKind {
    Explore,
    Eval,
    Transparent,
}

impl StrideKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrideKind::Explore => "explore",
            StrideKind::Eval => "eval",
            StrideKind::Transparent => "transparent",
        }
    }
}

/// Anything that can walk one stride under a per-sample impedance profile.
pub trait Plant {
    /// Phases of the samples the plant reports, each in `[0, 2π)`.
    fn phases(&self) -> &[f64];

    /// Walks one stride. `impedance` is already clamped and holds one value per
    /// entry of [`Plant::phases`].
    fn stride(&mut self, impedance: &[f64], kind: StrideKind) -> Result<StrideOutcome>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupervisorConfig {
    /// `β_u` (deg): compliance falls back to intervention above this.
    pub upper_bound: f64,
    /// `β_l` (deg): intervention hands over to compliance below this.
    pub lower_bound: f64,
    /// Epochs per high-level evaluation, `M`.
    pub epochs_per_window: usize,
    pub intervention: CostWeights,
    pub compliance: CostWeights,
    /// 1-based evaluation segments scored by the epoch cost.
    pub eval_mask: Vec<usize>,
    /// Stand-in for the window mean before any epoch has been scored (deg).
    pub initial_cost: f64,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self {
            upper_bound: 1.5,
            lower_bound: 0.5,
            epochs_per_window: 4,
            intervention: CostWeights::INTERVENTION,
            compliance: CostWeights::COMPLIANCE,
            eval_mask: vec![6, 7, 8, 9, 10],
            initial_cost: 2.5,
        }
    }
}

impl SupervisorConfig {
    pub fn weights(&self, mode: LearningMode) -> CostWeights {
        match mode {
            LearningMode::Intervention => self.intervention,
            LearningMode::Compliance => self.compliance,
        }
    }

    pub(crate) fn violations(&self, segments: usize) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.lower_bound > 0.0 && self.lower_bound < self.upper_bound) {
            v.push(format!(
                "supervisor bounds must satisfy 0 < lower_bound < upper_bound, got {} and {}",
                self.lower_bound, self.upper_bound
            ));
        }
        if self.epochs_per_window == 0 {
            v.push("supervisor.epochs_per_window (M) must be ≥ 1".into());
        }
        if self.eval_mask.is_empty() {
            v.push("supervisor.eval_mask must name at least one segment".into());
        }
        for &m in &self.eval_mask {
            if m == 0 || m > segments {
                v.push(format!("supervisor.eval_mask entry {m} outside 1..={segments}"));
            }
        }
        for (name, w) in [("intervention", self.intervention), ("compliance", self.compliance)] {
            if !(w.error >= 0.0 && w.impedance >= 0.0) {
                v.push(format!("supervisor.{name} weights must be ≥ 0"));
            }
        }
        if !(self.initial_cost >= 0.0 && self.initial_cost.is_finite()) {
            v.push(format!("supervisor.initial_cost must be ≥ 0, got {}", self.initial_cost));
        }
        v
    }
}

/// RMS raw error of a (noiseless) stride over the masked segments.
pub fn epoch_cost(eval_stride: &StrideOutcome, mask: &[usize]) -> Result<f64> {
    eval_stride.rms_masked(mask)
}

/// Mean of the last `window` epoch costs, or `None` until that many exist.
pub fn high_level_cost(costs: &[f64], window: usize) -> Option<f64> {
    if window == 0 || costs.len() < window {
        return None;
    }
    let tail = &costs[costs.len() - window..];
    Some(tail.iter().sum::<f64>() / window as f64)
}

/// Switching rule with a hysteresis band `[β_l, β_u]`.
pub fn mode_transition(mean_cost: f64, current: LearningMode, upper: f64, lower: f64) -> LearningMode {
    match current {
        LearningMode::Compliance if mean_cost > upper => LearningMode::Intervention,
        LearningMode::Intervention if mean_cost < lower => LearningMode::Compliance,
        unchanged => unchanged,
    }
}

/// The supervisor's mutable state, carried across training sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub policy: ImpedancePolicy,
    pub mode: LearningMode,
    /// Strides since the last mode change; drives the noise decay.
    pub strides_since_reset: u64,
    /// Epoch costs of the current, not yet evaluated window.
    pub window_costs: Vec<f64>,
    pub total_strides: u64,
    pub total_epochs: u64,
    initial_decision_pending: bool,
}

impl SessionState {
    /// Fresh state: given policy, intervention mode, first decision pending.
    pub fn new(policy: ImpedancePolicy) -> Self {
        Self {
            policy,
            mode: LearningMode::Intervention,
            strides_since_reset: 0,
            window_costs: Vec::new(),
            total_strides: 0,
            total_epochs: 0,
            initial_decision_pending: true,
        }
    }

    fn count_stride(&mut self) {
        self.strides_since_reset += 1;
        self.total_strides += 1;
    }
}

/// One logged stride of an adaptive session.
#[derive(Debug, Clone, PartialEq)]
pub struct StrideLog {
    pub kind: StrideKind,
    pub mode: LearningMode,
    /// Scheduled exploration σ at this stride (noise is not applied on eval strides).
    pub sigma: f64,
    /// Epoch cost, on eval strides only.
    pub epoch_cost: Option<f64>,
    pub rms_full: f64,
    pub rms_masked: f64,
    /// Clamped landscape of the policy in force, at the kernel centers.
    pub g_at_kernels: Vec<f64>,
    pub seg_rms_err: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDecision {
    pub mean_cost: f64,
    pub from: LearningMode,
    pub to: LearningMode,
}

impl ModeDecision {
    pub fn switched(&self) -> bool {
        self.from != self.to
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: u64,
    pub cost: f64,
    pub mode: LearningMode,
    pub weights: Vec<f64>,
    pub g_at_kernels: Vec<f64>,
    pub strides: Vec<StrideLog>,
    /// Decision taken before this epoch (the initial one) or right after it
    /// (end of a window).
    pub decision: Option<ModeDecision>,
}

/// Per-sample lookups for one plant phase grid.
#[derive(Debug, Clone)]
struct SampleCache {
    phases: Vec<f64>,
    segment: Vec<usize>,
}

pub struct Supervisor {
    basis: BasisSet,
    geometry: UpdateGeometry,
    pi2: Pi2Config,
    config: SupervisorConfig,
    rng: ChaCha8Rng,
    cache: Option<SampleCache>,
}

impl Supervisor {
    pub fn new(basis: BasisSet, pi2: Pi2Config, config: SupervisorConfig, rng: ChaCha8Rng) -> Result<Self> {
        let segments = basis.grid().instants();
        let mut violations = pi2.violations();
        violations.extend(config.violations(segments));
        if segments < 2 {
            violations.push("at least 2 evaluation instants are required".into());
        }
        if !violations.is_empty() {
            return Err(AanError::Validation(violations));
        }
        let geometry = UpdateGeometry::new(&basis, pi2.control_cost)?;
        Ok(Self {
            basis,
            geometry,
            pi2,
            config,
            rng,
            cache: None,
        })
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn config(&self) -> &SupervisorConfig {
        &self.config
    }

    pub fn pi2(&self) -> &Pi2Config {
        &self.pi2
    }

    pub fn strides_per_epoch(&self) -> usize {
        self.pi2.rollouts + 1
    }

    fn sample_cache(&mut self, phases: &[f64]) -> Result<SampleCache> {
        if let Some(c) = &self.cache {
            if c.phases == phases {
                return Ok(c.clone());
            }
        }
        let n = self.basis.grid().instants();
        let segment = phases
            .iter()
            .map(|&p| self.basis.grid().instant_segment(p).map(|_| segment_index_unchecked(p, n)))
            .collect::<Result<Vec<_>>>()?;
        let cache = SampleCache {
            phases: phases.to_vec(),
            segment,
        };
        self.cache = Some(cache.clone());
        Ok(cache)
    }

    /// Clamped landscape of `policy` at each kernel center.
    pub fn g_at_kernels(&self, policy: &ImpedancePolicy) -> Vec<f64> {
        self.basis
            .grid()
            .kernel_centers()
            .iter()
            .map(|&c| policy.landscape(c, &self.basis).clamped)
            .collect()
    }

    fn log_stride(
        &self,
        kind: StrideKind,
        mode: LearningMode,
        sigma: f64,
        epoch_cost: Option<f64>,
        outcome: &StrideOutcome,
        g_at_kernels: Vec<f64>,
    ) -> Result<StrideLog> {
        Ok(StrideLog {
            kind,
            mode,
            sigma,
            epoch_cost,
            rms_full: outcome.rms_full(),
            rms_masked: outcome.rms_masked(&self.config.eval_mask)?,
            g_at_kernels,
            seg_rms_err: outcome.seg_rms_err.clone(),
        })
    }

    /// `K` exploration strides, one update, one noiseless evaluation stride.
    ///
    /// Mode decisions are left to [`Supervisor::run_session`].
    pub fn run_epoch(&mut self, state: &mut SessionState, plant: &mut dyn Plant) -> Result<EpochRecord> {
        let cache = self.sample_cache(plant.phases())?;
        let n_inst = self.basis.grid().instants();
        let p = self.basis.kernels();
        let mode = state.mode;
        let weights = self.config.weights(mode);
        let base = state.policy.weights().to_vec();
        let base_g = self.g_at_kernels(&state.policy);
        let g_max = state.policy.g_max();

        let mut strides = Vec::with_capacity(self.strides_per_epoch());
        let mut noise = Vec::with_capacity(self.pi2.rollouts);
        let mut seg_rms_err = Vec::with_capacity(self.pi2.rollouts);
        let mut g_at_instants = Vec::with_capacity(self.pi2.rollouts);

        for _ in 0..self.pi2.rollouts {
            let sigma = self.pi2.sigma_after(state.strides_since_reset);
            let eps = pi2::draw_stride_noise(&mut self.rng, sigma, n_inst, p, self.pi2.noise_mode);
            let perturbed: Vec<Vec<f64>> = eps
                .iter()
                .map(|e| base.iter().zip(e.iter()).map(|(w, d)| w + d).collect())
                .collect();

            let impedance: Vec<f64> = cache
                .phases
                .iter()
                .zip(&cache.segment)
                .map(|(&phi, &n)| landscape_raw(&perturbed[n], phi, &self.basis).clamp(0.0, g_max))
                .collect();
            let outcome = plant.stride(&impedance, StrideKind::Explore)?;
            if outcome.seg_rms_err.len() != n_inst {
                return Err(AanError::Shape(format!(
                    "plant reported {} segments, supervisor uses {n_inst}",
                    outcome.seg_rms_err.len()
                )));
            }

            let centers = self.basis.grid().instant_centers();
            g_at_instants.push(
                centers
                    .iter()
                    .zip(&perturbed)
                    .map(|(&phi, w)| landscape_raw(w, phi, &self.basis))
                    .collect(),
            );
            seg_rms_err.push(outcome.seg_rms_err.clone());
            strides.push(self.log_stride(StrideKind::Explore, mode, sigma, None, &outcome, base_g.clone())?);
            noise.push(eps);
            state.count_stride();
        }

        let batch = ExplorationBatch {
            base_policy: base,
            noise,
            seg_rms_err,
            g_at_instants,
        };
        let step = pi2::improve(&batch, &self.geometry, &weights, self.pi2.discrimination)?;
        let updated = DVector::from_column_slice(state.policy.weights()) + &step.delta;
        state.policy.weights_mut().copy_from_slice(updated.as_slice());

        let sigma = self.pi2.sigma_after(state.strides_since_reset);
        let impedance: Vec<f64> = cache
            .phases
            .iter()
            .map(|&phi| state.policy.landscape(phi, &self.basis).clamped)
            .collect();
        let outcome = plant.stride(&impedance, StrideKind::Eval)?;
        let cost = epoch_cost(&outcome, &self.config.eval_mask)?;
        let eval_g = self.g_at_kernels(&state.policy);
        strides.push(self.log_stride(StrideKind::Eval, mode, sigma, Some(cost), &outcome, eval_g.clone())?);
        state.count_stride();

        let record = EpochRecord {
            epoch: state.total_epochs,
            cost,
            mode,
            weights: state.policy.weights().to_vec(),
            g_at_kernels: eval_g,
            strides,
            decision: None,
        };
        state.total_epochs += 1;
        Ok(record)
    }

    fn decide(&self, state: &mut SessionState, mean_cost: f64) -> ModeDecision {
        let from = state.mode;
        let to = mode_transition(mean_cost, from, self.config.upper_bound, self.config.lower_bound);
        if to != from {
            state.mode = to;
            state.strides_since_reset = 0;
        }
        ModeDecision { mean_cost, from, to }
    }

    /// Runs `epochs` epochs, taking a mode decision after every `M`-th.
    ///
    /// The window is part of `state`, so a window left incomplete at the end
    /// is continued by the next call rather than discarded.
    pub fn run_session(
        &mut self,
        state: &mut SessionState,
        plant: &mut dyn Plant,
        epochs: usize,
    ) -> Result<Vec<EpochRecord>> {
        let mut records = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let initial = if state.initial_decision_pending {
                state.initial_decision_pending = false;
                Some(self.decide(state, self.config.initial_cost))
            } else {
                None
            };
            let mut record = self.run_epoch(state, plant)?;
            state.window_costs.push(record.cost);
            record.decision = initial;
            if let Some(mean) = high_level_cost(&state.window_costs, self.config.epochs_per_window) {
                state.window_costs.clear();
                record.decision = Some(self.decide(state, mean));
            }
            records.push(record);
        }
        Ok(records)
    }
}
