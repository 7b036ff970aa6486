//! Simulated walker: baseline ankle gait, the altered target, the response to
//! the assistive field within a stride, and stride-to-stride adaptation.
//!
//! The walker commands `θ_baseline + a(φ) + noise`. The orthosis pushes on the
//! error between target and command, and that torque shifts the measured angle
//! through a quasi-static compliance. Between strides the learned adjustment
//! `a` follows an iterative-learning rule with forgetting, driven by the error
//! the walker actually experienced, so assistance that hides the error also
//! starves the learning.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{AanError, Result};
use crate::force_field::{assist_torque, deadband_error, ForceFieldConfig};
use crate::phase::segment_index_unchecked;
use crate::supervisor::{Plant, StrideKind};

/// Uniform sample phases `2π·q/Q`, starting at heel strike.
pub fn sample_phases(samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|q| TAU * q as f64 / samples as f64)
        .collect()
}

/// A periodic bump `A·exp(κ(cos(φ − c) − 1))` used to build the preset gait.
#[derive(Debug, Clone, Copy)]
struct VonMises {
    center: f64,
    amplitude: f64,
    concentration: f64,
}

impl VonMises {
    fn eval(&self, phase: f64) -> f64 {
        self.amplitude * (self.concentration * ((phase - self.center).cos() - 1.0)).exp()
    }
}

/// Loading response, stance dorsiflexion, push-off and swing dorsiflexion.
const DEFAULT_PRESET: [VonMises; 4] = [
    VonMises { center: 0.07 * TAU, amplitude: -6.0, concentration: 60.0 },
    VonMises { center: 0.42 * TAU, amplitude: 8.0, concentration: 12.0 },
    VonMises { center: 0.64 * TAU, amplitude: -16.0, concentration: 70.0 },
    VonMises { center: 0.78 * TAU, amplitude: 11.0, concentration: 40.0 },
];
const DEFAULT_PRESET_OFFSET: f64 = 1.0;

/// Ankle angle of the built-in preset at any phase (deg, dorsiflexion positive).
pub fn default_preset_angle(phase: f64) -> f64 {
    DEFAULT_PRESET_OFFSET + DEFAULT_PRESET.iter().map(|c| c.eval(phase)).sum::<f64>()
}

/// Unassisted ankle trajectory sampled on the uniform phase grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineGait {
    phases: Vec<f64>,
    angles: Vec<f64>,
}

impl BaselineGait {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.len() < 2 {
            return Err(AanError::InvalidConfig(
                "a baseline needs at least 2 samples per stride".into(),
            ));
        }
        Ok(Self {
            phases: sample_phases(angles.len()),
            angles,
        })
    }

    pub fn preset(name: &str, samples: usize) -> Result<Self> {
        match name {
            "default" => Self::new(sample_phases(samples).into_iter().map(default_preset_angle).collect()),
            other => Err(AanError::InvalidConfig(format!("unknown baseline preset `{other}`"))),
        }
    }

    /// Parses `phase_fraction angle` lines and resamples them onto `samples`
    /// uniform phases with periodic linear interpolation.
    ///
    /// Blank lines and lines starting with `#` are skipped; the two columns may
    /// be separated by whitespace or a comma.
    pub fn from_table(text: &str, samples: usize) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    AanError::Format(format!("line {}: `{s}` is not a number", lineno + 1))
                })
            };
            if fields.len() != 2 {
                return Err(AanError::Format(format!(
                    "line {}: expected `phase angle`, got {} field(s)",
                    lineno + 1,
                    fields.len()
                )));
            }
            let (x, y) = (parse(fields[0])?, parse(fields[1])?);
            if !(0.0..1.0).contains(&x) || !y.is_finite() {
                return Err(AanError::Format(format!(
                    "line {}: phase fraction {x} outside [0, 1)",
                    lineno + 1
                )));
            }
            if let Some(&(prev, _)) = points.last() {
                if x <= prev {
                    return Err(AanError::Format(format!(
                        "line {}: phase fractions must be strictly increasing",
                        lineno + 1
                    )));
                }
            }
            points.push((x, y));
        }
        if points.len() < 4 {
            return Err(AanError::Format(format!(
                "need at least 4 samples, found {}",
                points.len()
            )));
        }

        // The jump from the last sample back to the first must look like any
        // other step of the table, otherwise the file is not one gait cycle.
        let max_step = points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1).abs())
            .fold(0.0, f64::max);
        let wrap = (points[0].1 - points[points.len() - 1].1).abs();
        if wrap > 2.0 * max_step + 1e-9 {
            return Err(AanError::Format(format!(
                "trajectory is not periodic: wrap-around jump {wrap:.3} deg exceeds twice the largest step {max_step:.3} deg"
            )));
        }

        let angles = sample_phases(samples)
            .into_iter()
            .map(|phi| periodic_interp(&points, phi / TAU))
            .collect();
        Self::new(angles)
    }

    pub fn from_file(path: &Path, samples: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AanError::io(path, e))?;
        Self::from_table(&text, samples)
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn samples(&self) -> usize {
        self.angles.len()
    }

    /// Sample index and phase of the largest dorsiflexion in the swing half.
    pub fn swing_peak(&self) -> (usize, f64) {
        swing_peak(&self.phases, &self.angles)
    }
}

fn periodic_interp(points: &[(f64, f64)], x: f64) -> f64 {
    let n = points.len();
    let idx = points.partition_point(|p| p.0 <= x);
    let (lo, hi) = if idx == 0 {
        let (x1, y1) = points[n - 1];
        ((x1 - 1.0, y1), points[0])
    } else if idx == n {
        let (x0, y0) = points[0];
        (points[n - 1], (x0 + 1.0, y0))
    } else {
        (points[idx - 1], points[idx])
    };
    let t = (x - lo.0) / (hi.0 - lo.0);
    lo.1 + t * (hi.1 - lo.1)
}

/// Index and phase of the maximum of `angles` restricted to `φ ≥ π`.
pub fn swing_peak(phases: &[f64], angles: &[f64]) -> (usize, f64) {
    let (idx, _) = phases
        .iter()
        .zip(angles)
        .enumerate()
        .filter(|(_, (&phi, _))| phi >= PI)
        .fold((0, f64::NEG_INFINITY), |best, (i, (_, &a))| {
            if a > best.1 {
                (i, a)
            } else {
                best
            }
        });
    (idx, phases[idx])
}

/// Gaussian bump added to the baseline to form the training target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetTask {
    /// Bump height `A` (deg).
    pub amplitude: f64,
    /// Bump standard deviation `s` (rad).
    pub width: f64,
    /// Bump center (rad). When absent the swing-phase dorsiflexion peak of the
    /// measured baseline is used.
    pub center: Option<f64>,
}

impl Default for TargetTask {
    fn default() -> Self {
        Self {
            amplitude: 5.0,
            width: 0.07 * TAU,
            center: None,
        }
    }
}

impl TargetTask {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !self.amplitude.is_finite() {
            v.push("target.amplitude must be finite".into());
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            v.push(format!("target.width must be > 0, got {}", self.width));
        }
        if let Some(c) = self.center {
            if !(PI..TAU).contains(&c) {
                v.push(format!("target.center must lie in the swing half [π, 2π), got {c}"));
            }
        }
        v
    }

    pub fn bump(&self, phase: f64, center: f64) -> f64 {
        let d = phase - center;
        self.amplitude * (-d * d / (2.0 * self.width * self.width)).exp()
    }
}

/// `θ_d(φ) = θ_baseline(φ) + A·exp(−(φ − φ_c)²/(2s²))` on the given phases.
pub fn make_target(baseline: &[f64], phases: &[f64], task: &TargetTask, center: f64) -> Vec<f64> {
    baseline
        .iter()
        .zip(phases)
        .map(|(b, &phi)| b + task.bump(phi, center))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubjectParams {
    /// Error-learning gain `l_h`.
    pub learning_gain: f64,
    /// Forgetting factor `f_h`.
    pub forgetting: f64,
    /// Angle shift per unit assistive torque `c_τ` (deg/N·m).
    pub compliance: f64,
    /// Per-sample motor noise standard deviation `σ_m` (deg).
    pub motor_noise: f64,
}

impl Default for SubjectParams {
    fn default() -> Self {
        Self {
            learning_gain: 0.1,
            forgetting: 0.99,
            compliance: 0.4,
            motor_noise: 0.3,
        }
    }
}

impl SubjectParams {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.learning_gain >= 0.0 && self.learning_gain.is_finite()) {
            v.push(format!("subject.learning_gain must be ≥ 0, got {}", self.learning_gain));
        }
        if !(self.forgetting > 0.0 && self.forgetting <= 1.0) {
            v.push(format!("subject.forgetting must lie in (0, 1], got {}", self.forgetting));
        }
        if !(self.compliance >= 0.0 && self.compliance.is_finite()) {
            v.push(format!("subject.compliance must be ≥ 0, got {}", self.compliance));
        }
        if !(self.motor_noise >= 0.0 && self.motor_noise.is_finite()) {
            v.push(format!("subject.motor_noise must be ≥ 0, got {}", self.motor_noise));
        }
        v
    }
}

/// Learned trajectory adjustment `a(φ)` on the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectState {
    pub adjustment: Vec<f64>,
}

impl SubjectState {
    pub fn naive(samples: usize) -> Self {
        Self {
            adjustment: vec![0.0; samples],
        }
    }
}

/// `a ← f_h·a + l_h·Δθ̃`, pointwise.
pub fn subject_update(state: &mut SubjectState, raw_error: &[f64], params: &SubjectParams) -> Result<()> {
    if raw_error.len() != state.adjustment.len() {
        return Err(AanError::Shape(format!(
            "error has {} samples, adjustment has {}",
            raw_error.len(),
            state.adjustment.len()
        )));
    }
    for (a, e) in state.adjustment.iter_mut().zip(raw_error) {
        *a = params.forgetting * *a + params.learning_gain * e;
    }
    Ok(())
}

/// Whether the orthosis applies the field or stays transparent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssistMode {
    Aan,
    Transparent,
}

/// Per-sample record of one stride.
#[derive(Debug, Clone, PartialEq)]
pub struct StrideOutcome {
    pub phases: Vec<f64>,
    pub measured: Vec<f64>,
    pub torque: Vec<f64>,
    pub impedance: Vec<f64>,
    /// `θ_d − θ_m` per sample.
    pub raw_error: Vec<f64>,
    /// RMS of `raw_error` within each of the `N` evaluation segments.
    pub seg_rms_err: Vec<f64>,
}

impl StrideOutcome {
    pub fn new(
        phases: Vec<f64>,
        measured: Vec<f64>,
        torque: Vec<f64>,
        impedance: Vec<f64>,
        raw_error: Vec<f64>,
        segments: usize,
    ) -> Result<Self> {
        let q = phases.len();
        if [measured.len(), torque.len(), impedance.len(), raw_error.len()]
            .iter()
            .any(|&l| l != q)
        {
            return Err(AanError::Shape("stride sample vectors differ in length".into()));
        }
        let seg_rms_err = segment_rms(&phases, &raw_error, segments)?;
        Ok(Self {
            phases,
            measured,
            torque,
            impedance,
            raw_error,
            seg_rms_err,
        })
    }

    /// RMS raw error over the whole stride.
    pub fn rms_full(&self) -> f64 {
        rms(self.raw_error.iter().copied())
    }

    /// RMS raw error over samples whose 1-based segment is in `mask`.
    pub fn rms_masked(&self, mask: &[usize]) -> Result<f64> {
        masked_rms(&self.phases, &self.raw_error, mask, self.seg_rms_err.len())
    }
}

pub(crate) fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), x| (s + x * x, c + 1));
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

/// RMS of `errors` within each of `segments` equal phase segments.
pub fn segment_rms(phases: &[f64], errors: &[f64], segments: usize) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; segments];
    let mut count = vec![0usize; segments];
    for (&phi, &e) in phases.iter().zip(errors) {
        if !(0.0..TAU).contains(&phi) {
            return Err(AanError::PhaseDomain { phase: phi });
        }
        let s = segment_index_unchecked(phi, segments);
        sum[s] += e * e;
        count[s] += 1;
    }
    if let Some(empty) = count.iter().position(|&c| c == 0) {
        return Err(AanError::Shape(format!(
            "segment {} holds no samples; use more samples per stride",
            empty + 1
        )));
    }
    Ok(sum.iter().zip(&count).map(|(s, &c)| (s / c as f64).sqrt()).collect())
}

/// RMS over samples in the 1-based segments listed in `mask`.
pub fn masked_rms(phases: &[f64], errors: &[f64], mask: &[usize], segments: usize) -> Result<f64> {
    if mask.is_empty() {
        return Err(AanError::InvalidConfig("evaluation mask is empty".into()));
    }
    let mut keep = vec![false; segments];
    for &m in mask {
        if m == 0 || m > segments {
            return Err(AanError::InvalidConfig(format!(
                "mask segment {m} outside 1..={segments}"
            )));
        }
        keep[m - 1] = true;
    }
    Ok(rms(phases
        .iter()
        .zip(errors)
        .filter(|(&phi, _)| keep[segment_index_unchecked(phi, segments)])
        .map(|(_, &e)| e)))
}

/// One stride of the walker under a given per-sample impedance.
///
/// The motor noise is drawn from `rng` even when `σ_m = 0`, so the generator
/// advances identically regardless of noise level.
#[allow(clippy::too_many_arguments)]
pub fn simulate_stride<R: Rng + ?Sized>(
    desired: &[f64],
    baseline: &BaselineGait,
    impedance: &[f64],
    params: &SubjectParams,
    state: &SubjectState,
    mode: AssistMode,
    field: &ForceFieldConfig,
    segments: usize,
    rng: &mut R,
) -> Result<StrideOutcome> {
    let q = baseline.samples();
    if desired.len() != q || impedance.len() != q || state.adjustment.len() != q {
        return Err(AanError::Shape(format!(
            "stride inputs must all hold {q} samples (target {}, impedance {}, adjustment {})",
            desired.len(),
            impedance.len(),
            state.adjustment.len()
        )));
    }
    let noise = Normal::new(0.0, params.motor_noise).expect("validated motor noise");

    let mut measured = Vec::with_capacity(q);
    let mut torque = Vec::with_capacity(q);
    let mut raw_error = Vec::with_capacity(q);
    for i in 0..q {
        let command = baseline.angles()[i] + state.adjustment[i] + noise.sample(rng);
        let tau = match mode {
            AssistMode::Aan => {
                let err = deadband_error(desired[i], command, field.deadband);
                assist_torque(&err, impedance[i], field)
            }
            AssistMode::Transparent => 0.0,
        };
        let theta_m = command + params.compliance * tau;
        measured.push(theta_m);
        torque.push(tau);
        raw_error.push(desired[i] - theta_m);
    }
    let impedance = match mode {
        AssistMode::Aan => impedance.to_vec(),
        AssistMode::Transparent => vec![0.0; q],
    };
    StrideOutcome::new(
        baseline.phases().to_vec(),
        measured,
        torque,
        impedance,
        raw_error,
        segments,
    )
}

/// The walker as a closed-loop plant for the supervisor.
///
/// Owns its own generator so motor noise never interleaves with exploration
/// noise. Adaptation can be switched off (before the target has been shown).
#[derive(Debug, Clone)]
pub struct SubjectPlant {
    pub baseline: BaselineGait,
    pub params: SubjectParams,
    pub state: SubjectState,
    pub field: ForceFieldConfig,
    target: Option<Vec<f64>>,
    segments: usize,
    adapting: bool,
    rng: ChaCha8Rng,
}

impl SubjectPlant {
    pub fn new(
        baseline: BaselineGait,
        params: SubjectParams,
        field: ForceFieldConfig,
        segments: usize,
        rng: ChaCha8Rng,
    ) -> Self {
        let q = baseline.samples();
        Self {
            baseline,
            params,
            state: SubjectState::naive(q),
            field,
            target: None,
            segments,
            adapting: false,
            rng,
        }
    }

    pub fn set_target(&mut self, target: Vec<f64>) -> Result<()> {
        if target.len() != self.baseline.samples() {
            return Err(AanError::Shape("target length differs from the sample grid".into()));
        }
        self.target = Some(target);
        Ok(())
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_deref()
    }

    pub fn set_adapting(&mut self, adapting: bool) {
        self.adapting = adapting;
    }

    /// Measured angles of an unassisted stride, for use before a target exists.
    pub fn walk_unassisted(&mut self) -> Vec<f64> {
        let noise = Normal::new(0.0, self.params.motor_noise).expect("validated motor noise");
        self.baseline
            .angles()
            .iter()
            .zip(&self.state.adjustment)
            .map(|(b, a)| b + a + noise.sample(&mut self.rng))
            .collect()
    }

    pub fn step(&mut self, impedance: &[f64], mode: AssistMode) -> Result<StrideOutcome> {
        let target = self
            .target
            .as_deref()
            .ok_or_else(|| AanError::InvalidConfig("plant has no target trajectory yet".into()))?;
        let out = simulate_stride(
            target,
            &self.baseline,
            impedance,
            &self.params,
            &self.state,
            mode,
            &self.field,
            self.segments,
            &mut self.rng,
        )?;
        if self.adapting {
            subject_update(&mut self.state, &out.raw_error, &self.params)?;
        }
        Ok(out)
    }
}

impl Plant for SubjectPlant {
    fn phases(&self) -> &[f64] {
        self.baseline.phases()
    }

    fn stride(&mut self, impedance: &[f64], kind: StrideKind) -> Result<StrideOutcome> {
        let mode = match kind {
            StrideKind::Transparent => AssistMode::Transparent,
            StrideKind::Explore | StrideKind::Eval => AssistMode::Aan,
        };
        self.step(impedance, mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    const Q: usize = 200;
    const N: usize = 10;

    fn quiet() -> SubjectParams {
        SubjectParams {
            motor_noise: 0.0,
            ..SubjectParams::default()
        }
    }

    fn setup() -> (BaselineGait, TargetTask, f64, Vec<f64>) {
        let base = BaselineGait::preset("default", Q).unwrap();
        let task = TargetTask::default();
        let (_, center) = base.swing_peak();
        let target = make_target(base.angles(), base.phases(), &task, center);
        (base, task, center, target)
    }

    #[test]
    fn preset_is_periodic_with_swing_peak_in_range() {
        assert_relative_eq!(default_preset_angle(0.0), default_preset_angle(TAU), epsilon = 1e-12);
        let base = BaselineGait::preset("default", Q).unwrap();
        let (idx, phi) = base.swing_peak();
        let peak = base.angles()[idx];
        assert!((5.0..=20.0).contains(&peak), "peak {peak}");
        assert_eq!(crate::phase::segment_of(phi, 10).unwrap(), 8);
        let global = base.angles().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(global, peak, "peak dorsiflexion must fall in swing");
        assert!(BaselineGait::preset("nope", Q).is_err());
    }

    #[test]
    fn target_examples() {
        let (base, task, center, target) = setup();
        let flat = TargetTask { amplitude: 0.0, ..task };
        assert_eq!(make_target(base.angles(), base.phases(), &flat, center), base.angles());
        let (idx, _) = base.swing_peak();
        assert_relative_eq!(target[idx] - base.angles()[idx], 5.0, epsilon = 1e-12);
        let three_s = task.bump(center + 3.0 * task.width, center);
        assert_relative_eq!(three_s, 5.0 * (-4.5f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(three_s, 0.0555, epsilon = 1e-4);
        // faded before the end of stance
        for (&phi, (&t, &b)) in base.phases().iter().zip(target.iter().zip(base.angles())) {
            if phi < 0.55 * TAU {
                assert!(t - b < 0.05, "bump {} at {phi}", t - b);
            }
        }
    }

    #[test]
    fn table_round_trip_and_errors() {
        let text: String = (0..50)
            .map(|i| {
                let x = i as f64 / 50.0;
                format!("{x} {}\n", default_preset_angle(x * TAU))
            })
            .collect();
        let gait = BaselineGait::from_table(&text, Q).unwrap();
        assert_eq!(gait.samples(), Q);
        for (a, phi) in gait.angles().iter().zip(gait.phases()) {
            assert!((a - default_preset_angle(*phi)).abs() < 1.5);
        }

        let ramp: String = (0..20).map(|i| format!("{} {}\n", i as f64 / 20.0, i as f64)).collect();
        assert!(matches!(BaselineGait::from_table(&ramp, Q), Err(AanError::Format(_))));
        assert!(matches!(
            BaselineGait::from_table("0 1\n0.5 2\n0.4 1\n0.9 1\n", Q),
            Err(AanError::Format(_))
        ));
        assert!(BaselineGait::from_table("0 1\n1.0 1\n", Q).is_err());
        assert!(BaselineGait::from_table("0 x\n", Q).is_err());
    }

    #[test]
    fn unassisted_naive_walker_misses_by_the_bump() {
        let (base, task, center, target) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (mode, g) in [(AssistMode::Aan, 0.0), (AssistMode::Transparent, 3.0)] {
            let out = simulate_stride(
                &target, &base, &vec![g; Q], &quiet(), &SubjectState::naive(Q), mode,
                &ForceFieldConfig::default(), N, &mut rng,
            )
            .unwrap();
            assert_eq!(out.measured, base.angles());
            for (e, &phi) in out.raw_error.iter().zip(base.phases()) {
                assert_relative_eq!(*e, task.bump(phi, center), epsilon = 1e-12);
            }
            assert!(out.torque.iter().all(|&t| t == 0.0));
        }
    }

    #[test]
    fn fully_adapted_walker_needs_no_help() {
        let (base, task, center, target) = setup();
        let state = SubjectState {
            adjustment: base.phases().iter().map(|&p| task.bump(p, center)).collect(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = simulate_stride(
            &target, &base, &vec![5.0; Q], &quiet(), &state, AssistMode::Aan,
            &ForceFieldConfig::default(), N, &mut rng,
        )
        .unwrap();
        assert!(out.raw_error.iter().all(|e| e.abs() < 1e-12));
        assert!(out.torque.iter().all(|&t| t == 0.0));

        let mut next = state.clone();
        subject_update(&mut next, &out.raw_error, &quiet()).unwrap();
        for (a, b) in next.adjustment.iter().zip(&state.adjustment) {
            assert_relative_eq!(*a, 0.99 * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn assistance_never_increases_segment_error() {
        let (base, _, _, target) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let run = |g: f64, rng: &mut ChaCha8Rng| {
            simulate_stride(
                &target, &base, &vec![g; Q], &quiet(), &SubjectState::naive(Q), AssistMode::Aan,
                &ForceFieldConfig::default(), N, rng,
            )
            .unwrap()
        };
        let free = run(0.0, &mut rng);
        let held = run(2.0, &mut rng);
        for (a, b) in held.seg_rms_err.iter().zip(&free.seg_rms_err) {
            assert!(a <= b, "{a} > {b}");
        }
        // brute force over samples
        for (a, b) in held.raw_error.iter().zip(&free.raw_error) {
            assert!(a.abs() <= b.abs() + 1e-12);
        }
    }

    #[test]
    fn learning_rule_examples() {
        let mut s = SubjectState { adjustment: vec![0.3, -1.0] };
        let frozen = SubjectParams { learning_gain: 0.0, forgetting: 1.0, ..quiet() };
        subject_update(&mut s, &[5.0, 5.0], &frozen).unwrap();
        assert_eq!(s.adjustment, vec![0.3, -1.0]);

        let mut s = SubjectState { adjustment: vec![0.0] };
        let p = SubjectParams { learning_gain: 0.2, forgetting: 1.0, ..quiet() };
        subject_update(&mut s, &[5.0], &p).unwrap();
        assert_relative_eq!(s.adjustment[0], 1.0, epsilon = 1e-15);

        let p = SubjectParams { learning_gain: 0.1, forgetting: 0.9, ..quiet() };
        let mut s = SubjectState { adjustment: vec![0.0] };
        for _ in 0..2000 {
            subject_update(&mut s, &[2.0], &p).unwrap();
        }
        assert_relative_eq!(s.adjustment[0], 0.1 * 2.0 / (1.0 - 0.9), epsilon = 1e-9);

        assert!(subject_update(&mut s, &[1.0, 2.0], &p).is_err());
    }

    #[test]
    fn segment_rms_partitions_samples() {
        let phases = sample_phases(40);
        let errors: Vec<f64> = (0..40).map(|i| if i < 20 { 0.0 } else { 1.0 }).collect();
        let seg = segment_rms(&phases, &errors, 10).unwrap();
        assert_eq!(&seg[..5], &[0.0; 5]);
        assert_eq!(&seg[5..], &[1.0; 5]);
        assert_eq!(masked_rms(&phases, &errors, &[6, 7, 8, 9, 10], 10).unwrap(), 1.0);
        assert!(masked_rms(&phases, &errors, &[], 10).is_err());
        assert!(masked_rms(&phases, &errors, &[11], 10).is_err());
        assert!(segment_rms(&sample_phases(5), &[0.0; 5], 10).is_err());
    }

    #[test]
    fn plant_requires_target_and_gates_adaptation() {
        let (base, _, _, target) = setup();
        let mut plant = SubjectPlant::new(base, quiet(), ForceFieldConfig::default(), N, ChaCha8Rng::seed_from_u64(1));
        assert!(plant.step(&vec![0.0; Q], AssistMode::Transparent).is_err());
        plant.set_target(target).unwrap();
        plant.step(&vec![0.0; Q], AssistMode::Transparent).unwrap();
        assert!(plant.state.adjustment.iter().all(|&a| a == 0.0));
        plant.set_adapting(true);
        plant.step(&vec![0.0; Q], AssistMode::Transparent).unwrap();
        assert!(plant.state.adjustment.iter().any(|&a| a > 0.0));
    }
}
