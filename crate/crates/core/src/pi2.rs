//! Phase-indexed policy improvement with path integrals.
//!
//! One update consumes `K` exploration strides. Each stride is scored at `N`
//! phase instants; the cost-to-go from every instant is turned into a
//! per-instant probability over the `K` rollouts, the projected noise is
//! averaged with those probabilities, and the `N` per-instant updates are
//! folded into one `P`-vector with kernel-activation weights that favour
//! early instants (more of the stride lies ahead of them).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{AanError, Result};
use crate::phase::BasisSet;

/// Weight pair `Λ = {λ_θ, λ_g}` of the immediate cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostWeights {
    /// `λ_θ`, multiplies the squared segment RMS error.
    pub error: f64,
    /// `λ_g`, multiplies the squared impedance.
    pub impedance: f64,
}

impl CostWeights {
    pub const INTERVENTION: CostWeights = CostWeights {
        error: 80.0,
        impedance: 5.0,
    };
    pub const COMPLIANCE: CostWeights = CostWeights {
        error: 5.0,
        impedance: 80.0,
    };
}

/// How exploration noise is laid out within one stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// A fresh perturbation for every evaluation segment.
    #[default]
    PerSegment,
    /// One perturbation held for the whole stride.
    PerStride,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Pi2Config {
    /// Exploration strides per epoch, `K`.
    pub rollouts: usize,
    /// Discrimination constant `h` of the normalized exponent.
    pub discrimination: f64,
    /// Initial exploration standard deviation `σ₀` (deg⁻²).
    pub sigma0: f64,
    /// Per-stride decay `γ` of the standard deviation.
    pub decay: f64,
    /// Control-cost scale `ρ`, with `R = ρ·I`.
    pub control_cost: f64,
    pub noise_mode: NoiseMode,
}

impl Default for Pi2Config {
    fn default() -> Self {
        Self {
            rollouts: 4,
            discrimination: 10.0,
            sigma0: 0.03,
            decay: 0.992,
            control_cost: 1e-6,
            noise_mode: NoiseMode::PerSegment,
        }
    }
}

impl Pi2Config {
    pub(crate) fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.rollouts == 0 {
            v.push("pi2.rollouts (K) must be ≥ 1".into());
        }
        if !(self.discrimination > 0.0 && self.discrimination.is_finite()) {
            v.push(format!(
                "pi2.discrimination (h) must be > 0, got {}",
                self.discrimination
            ));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            v.push(format!("pi2.sigma0 must be > 0, got {}", self.sigma0));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            v.push(format!("pi2.decay (γ) must lie in (0, 1], got {}", self.decay));
        }
        if !(self.control_cost >= 0.0 && self.control_cost.is_finite()) {
            v.push(format!(
                "pi2.control_cost (ρ) must be ≥ 0, got {}",
                self.control_cost
            ));
        }
        v
    }

    pub fn sigma_after(&self, strides: u64) -> f64 {
        sigma_effective(self.sigma0, self.decay, strides)
    }
}

/// Exploration standard deviation after `strides` strides since the last reset.
pub fn sigma_effective(sigma0: f64, decay: f64, strides: u64) -> f64 {
    sigma0 * decay.powf(strides as f64)
}

/// Noise for one stride: `N` perturbation vectors of length `P`.
pub fn draw_stride_noise<R: Rng + ?Sized>(
    rng: &mut R,
    sigma: f64,
    instants: usize,
    kernels: usize,
    mode: NoiseMode,
) -> Vec<DVector<f64>> {
    assert!(sigma >= 0.0, "noise standard deviation must be ≥ 0");
    if sigma == 0.0 {
        return vec![DVector::zeros(kernels); instants];
    }
    let normal = Normal::new(0.0, sigma).expect("finite, non-negative σ");
    match mode {
        NoiseMode::PerSegment => (0..instants)
            .map(|_| DVector::from_fn(kernels, |_, _| normal.sample(rng)))
            .collect(),
        NoiseMode::PerStride => {
            let eps = DVector::from_fn(kernels, |_, _| normal.sample(rng));
            vec![eps; instants]
        }
    }
}

/// `K×N` table of i.i.d. `N(0, σ²)` perturbation vectors, indexed `[k][n]`.
pub fn draw_noise<R: Rng + ?Sized>(
    rng: &mut R,
    sigma: f64,
    rollouts: usize,
    instants: usize,
    kernels: usize,
) -> Vec<Vec<DVector<f64>>> {
    (0..rollouts)
        .map(|_| draw_stride_noise(rng, sigma, instants, kernels, NoiseMode::PerSegment))
        .collect()
}

/// `M = R⁻¹ψψᵀ / (ψᵀR⁻¹ψ)` with `R = ρ·I`; `ρ = 0` takes the ρ-free limit.
pub fn projection_matrix(psi: &DVector<f64>, rho: f64) -> Result<DMatrix<f64>> {
    if psi.iter().all(|&x| x == 0.0) {
        return Err(AanError::SingularBasis);
    }
    if rho > 0.0 {
        let r_inv_psi = psi / rho;
        let denom = psi.dot(&r_inv_psi);
        Ok(&r_inv_psi * psi.transpose() / denom)
    } else {
        Ok(psi * psi.transpose() / psi.norm_squared())
    }
}

/// Immediate cost `λ_θ·Δθ̄² + λ_g·g²` of one segment.
pub fn immediate_cost(seg_rms_err: f64, g: f64, weights: &CostWeights) -> f64 {
    weights.error * seg_rms_err * seg_rms_err + weights.impedance * g * g
}

/// Kernel activations and projection matrices at the `N` evaluation instants.
#[derive(Debug, Clone)]
pub struct UpdateGeometry {
    activations: Vec<DVector<f64>>,
    projections: Vec<DMatrix<f64>>,
    control_cost: f64,
}

impl UpdateGeometry {
    pub fn new(basis: &BasisSet, control_cost: f64) -> Result<Self> {
        let activations: Vec<_> = basis
            .grid()
            .instant_centers()
            .iter()
            .map(|&phi| DVector::from_vec(basis.eval(phi)))
            .collect();
        let projections = activations
            .iter()
            .map(|psi| projection_matrix(psi, control_cost))
            .collect::<Result<_>>()?;
        Ok(Self {
            activations,
            projections,
            control_cost,
        })
    }

    pub fn instants(&self) -> usize {
        self.activations.len()
    }

    pub fn kernels(&self) -> usize {
        self.activations.first().map_or(0, |a| a.len())
    }

    pub fn activation(&self, n: usize) -> &DVector<f64> {
        &self.activations[n]
    }

    pub fn projection(&self, n: usize) -> &DMatrix<f64> {
        &self.projections[n]
    }

    pub fn control_cost(&self) -> f64 {
        self.control_cost
    }
}

/// Everything the update needs from `K` exploration strides.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationBatch {
    pub base_policy: Vec<f64>,
    /// `[k][n]` perturbation applied in segment `n` of stride `k`.
    pub noise: Vec<Vec<DVector<f64>>>,
    /// `[k][n]` RMS raw tracking error over segment `n` of stride `k`.
    pub seg_rms_err: Vec<Vec<f64>>,
    /// `[k][n]` landscape value at the center of segment `n` under the
    /// perturbed parameters of stride `k`.
    pub g_at_instants: Vec<Vec<f64>>,
}

impl ExplorationBatch {
    pub fn rollouts(&self) -> usize {
        self.noise.len()
    }

    pub fn check_shape(&self, instants: usize, kernels: usize) -> Result<()> {
        let k = self.rollouts();
        if k == 0 {
            return Err(AanError::Shape("batch holds no rollouts".into()));
        }
        if self.base_policy.len() != kernels {
            return Err(AanError::Shape(format!(
                "base policy has {} weights, expected {kernels}",
                self.base_policy.len()
            )));
        }
        if self.seg_rms_err.len() != k || self.g_at_instants.len() != k {
            return Err(AanError::Shape("batch tables disagree on K".into()));
        }
        for kk in 0..k {
            if self.noise[kk].len() != instants
                || self.seg_rms_err[kk].len() != instants
                || self.g_at_instants[kk].len() != instants
            {
                return Err(AanError::Shape(format!(
                    "rollout {kk} does not cover {instants} instants"
                )));
            }
            if self.noise[kk].iter().any(|e| e.len() != kernels) {
                return Err(AanError::Shape(format!(
                    "rollout {kk} noise vectors are not of length {kernels}"
                )));
            }
        }
        Ok(())
    }
}

/// Cost-to-go `S(n, k)`, stored `[n][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    values: Vec<Vec<f64>>,
}

impl CostTable {
    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.values[n][k]
    }

    /// Costs of all rollouts from instant `n`.
    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n]
    }

    pub fn instants(&self) -> usize {
        self.values.len()
    }
}

/// Suffix sums of immediate plus control cost over the batch.
pub fn cost_to_go_table(
    batch: &ExplorationBatch,
    geometry: &UpdateGeometry,
    weights: &CostWeights,
) -> Result<CostTable> {
    let n_inst = geometry.instants();
    batch.check_shape(n_inst, geometry.kernels())?;
    let k_roll = batch.rollouts();
    let w = DVector::from_column_slice(&batch.base_policy);
    let rho = geometry.control_cost;

    let mut values = vec![vec![0.0; k_roll]; n_inst];
    for k in 0..k_roll {
        let mut acc = 0.0;
        for n in (0..n_inst).rev() {
            let r = immediate_cost(batch.seg_rms_err[k][n], batch.g_at_instants[k][n], weights);
            let big_w = &w + geometry.projection(n) * &batch.noise[k][n];
            acc += r + 0.5 * rho * big_w.norm_squared();
            values[n][k] = acc;
        }
    }
    Ok(CostTable { values })
}

/// Normalized-exponent weights over the `K` rollouts at one instant.
///
/// The range is rescaled to `[0, h]`, so the cheapest rollout always gets
/// exponent 0. A flat row yields the uniform distribution.
pub fn rollout_probabilities(costs: &[f64], discrimination: f64) -> Vec<f64> {
    let k = costs.len();
    assert!(k > 0, "need at least one rollout");
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if !(range > 0.0) {
        return vec![1.0 / k as f64; k];
    }
    let expo: Vec<f64> = costs
        .iter()
        .map(|s| (-discrimination * (s - min) / range).exp())
        .collect();
    let total: f64 = expo.iter().sum();
    expo.into_iter().map(|e| e / total).collect()
}

/// Probability-weighted projected noise `δw_n` at every instant.
pub fn instant_updates(
    probabilities: &[Vec<f64>],
    noise: &[Vec<DVector<f64>>],
    geometry: &UpdateGeometry,
) -> Result<Vec<DVector<f64>>> {
    let n_inst = geometry.instants();
    if probabilities.len() != n_inst {
        return Err(AanError::Shape(format!(
            "expected {n_inst} probability rows, got {}",
            probabilities.len()
        )));
    }
    (0..n_inst)
        .map(|n| {
            let row = &probabilities[n];
            if row.len() != noise.len() {
                return Err(AanError::Shape(format!(
                    "probability row {n} has {} entries for {} rollouts",
                    row.len(),
                    noise.len()
                )));
            }
            let mut avg = DVector::zeros(geometry.kernels());
            for (p, eps) in row.iter().zip(noise) {
                avg.axpy(*p, &eps[n], 1.0);
            }
            Ok(geometry.projection(n) * avg)
        })
        .collect()
}

/// Folds per-instant updates into one update per kernel, weighting instant
/// `n` (1-based) by `(N − n)·ψ_i(φ_n)`.
pub fn combine_instants(
    instant_updates: &[DVector<f64>],
    geometry: &UpdateGeometry,
) -> Result<DVector<f64>> {
    let n_inst = geometry.instants();
    if n_inst < 2 {
        return Err(AanError::InvalidConfig(
            "at least 2 evaluation instants are needed to weight the update".into(),
        ));
    }
    if instant_updates.len() != n_inst {
        return Err(AanError::Shape(format!(
            "expected {n_inst} instant updates, got {}",
            instant_updates.len()
        )));
    }
    let p = geometry.kernels();
    let mut num = DVector::zeros(p);
    let mut den = DVector::zeros(p);
    for (n, dw) in instant_updates.iter().enumerate() {
        let remaining = (n_inst - 1 - n) as f64;
        if remaining == 0.0 {
            continue;
        }
        let psi = geometry.activation(n);
        for i in 0..p {
            let weight = remaining * psi[i];
            num[i] += weight * dw[i];
            den[i] += weight;
        }
    }
    Ok(num.component_div(&den))
}

pub fn parameter_update(
    probabilities: &[Vec<f64>],
    noise: &[Vec<DVector<f64>>],
    geometry: &UpdateGeometry,
) -> Result<DVector<f64>> {
    let per_instant = instant_updates(probabilities, noise, geometry)?;
    combine_instants(&per_instant, geometry)
}

/// Intermediate products of one policy-improvement step.
#[derive(Debug, Clone)]
pub struct Improvement {
    pub costs: CostTable,
    /// `[n][k]`.
    pub probabilities: Vec<Vec<f64>>,
    pub instant_updates: Vec<DVector<f64>>,
    pub delta: DVector<f64>,
}

/// Runs the full update on a batch; the caller applies `delta` to the policy.
pub fn improve(
    batch: &ExplorationBatch,
    geometry: &UpdateGeometry,
    weights: &CostWeights,
    discrimination: f64,
) -> Result<Improvement> {
    let costs = cost_to_go_table(batch, geometry, weights)?;
    let probabilities: Vec<Vec<f64>> = (0..costs.instants())
        .map(|n| rollout_probabilities(costs.row(n), discrimination))
        .collect();
    let per_instant = instant_updates(&probabilities, &batch.noise, geometry)?;
    let delta = combine_instants(&per_instant, geometry)?;
    Ok(Improvement {
        costs,
        probabilities,
        instant_updates: per_instant,
        delta,
    })
}
