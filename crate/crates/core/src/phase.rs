//! Gait-phase geometry and the Gaussian impedance landscape.
//!
//! Phase runs over `[0, 2π)` starting at heel strike. The stride is split two
//! ways: `P` kernel segments whose midpoints anchor the Gaussian basis, and `N`
//! evaluation segments whose midpoints are the instants at which rollouts are
//! scored. The two counts are independent.
//!
//! Kernels live on the linear phase axis; they do not wrap across the stride
//! boundary.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{AanError, Result};

/// Midpoints `(2i − 1)·π/count` of `count` equal segments of `[0, 2π)`.
fn midpoints(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| (2 * i - 1) as f64 * PI / count as f64)
        .collect()
}

/// Centers of `p` kernels spread evenly over the stride.
pub fn kernel_centers(p: usize) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(AanError::InvalidConfig("kernel count must be ≥ 1".into()));
    }
    Ok(midpoints(p))
}

/// 1-based index of the half-open segment of width `2π/n` that contains `phase`.
pub fn segment_of(phase: f64, n: usize) -> Result<usize> {
    if !(0.0..TAU).contains(&phase) {
        return Err(AanError::PhaseDomain { phase });
    }
    Ok(segment_index_unchecked(phase, n) + 1)
}

/// 0-based segment index; callers guarantee `phase ∈ [0, 2π)`.
#[inline]
pub(crate) fn segment_index_unchecked(phase: f64, n: usize) -> usize {
    let idx = (phase / TAU * n as f64).floor() as usize;
    idx.min(n - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    kernel_centers: Vec<f64>,
    instant_centers: Vec<f64>,
}

impl PhaseGrid {
    pub fn new(kernels: usize, instants: usize) -> Result<Self> {
        if instants == 0 {
            return Err(AanError::InvalidConfig(
                "evaluation instant count must be ≥ 1".into(),
            ));
        }
        Ok(Self {
            kernel_centers: kernel_centers(kernels)?,
            instant_centers: midpoints(instants),
        })
    }

    /// Number of kernels, `P`.
    pub fn kernels(&self) -> usize {
        self.kernel_centers.len()
    }

    /// Number of evaluation instants, `N`.
    pub fn instants(&self) -> usize {
        self.instant_centers.len()
    }

    pub fn kernel_centers(&self) -> &[f64] {
        &self.kernel_centers
    }

    pub fn instant_centers(&self) -> &[f64] {
        &self.instant_centers
    }

    pub fn segment_width(&self) -> f64 {
        TAU / self.instants() as f64
    }

    /// 0-based evaluation segment containing `phase`.
    pub fn instant_segment(&self, phase: f64) -> Result<usize> {
        segment_of(phase, self.instants()).map(|n| n - 1)
    }
}

/// Gaussian kernels `ψ_i(φ) = exp(−½·μ·(φ − φ_i)²)` on a [`PhaseGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    width: f64,
    grid: PhaseGrid,
}

impl BasisSet {
    pub fn new(width: f64, grid: PhaseGrid) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(AanError::InvalidConfig(format!(
                "kernel width μ must be positive and finite, got {width}"
            )));
        }
        Ok(Self { width, grid })
    }

    /// The width constant `μ` (rad⁻²).
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn kernels(&self) -> usize {
        self.grid.kernels()
    }

    pub fn eval(&self, phase: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.kernels()];
        self.eval_into(phase, &mut out);
        out
    }

    pub fn eval_into(&self, phase: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.kernels());
        for (o, c) in out.iter_mut().zip(&self.grid.kernel_centers) {
            let d = phase - c;
            *o = (-0.5 * self.width * d * d).exp();
        }
    }
}

/// Raw and actuation-clamped value of the landscape at one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeValue {
    pub raw: f64,
    pub clamped: f64,
}

/// Shape parameters `w` of the impedance landscape plus the actuation clamp.
///
/// Weights are unconstrained while learning; only the value handed to the
/// force field is clamped into `[0, g_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedancePolicy {
    weights: Vec<f64>,
    g_max: f64,
}

pub const DEFAULT_G_MAX: f64 = 10.0;

impl ImpedancePolicy {
    pub fn new(weights: Vec<f64>, g_max: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(AanError::InvalidConfig("policy needs ≥ 1 weight".into()));
        }
        if !(g_max > 0.0) {
            return Err(AanError::InvalidConfig(format!(
                "g_max must be positive, got {g_max}"
            )));
        }
        Ok(Self { weights, g_max })
    }

    /// A flat (all-zero) landscape with `p` kernels.
    pub fn flat(p: usize, g_max: f64) -> Result<Self> {
        Self::new(vec![0.0; p], g_max)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn clamp(&self, raw: f64) -> f64 {
        raw.clamp(0.0, self.g_max)
    }

    pub fn landscape(&self, phase: f64, basis: &BasisSet) -> LandscapeValue {
        let raw = landscape_raw(&self.weights, phase, basis);
        LandscapeValue {
            raw,
            clamped: self.clamp(raw),
        }
    }
}

/// Normalized kernel average `Σψ_i·w_i / Σψ_i` for arbitrary weights.
pub fn landscape_raw(weights: &[f64], phase: f64, basis: &BasisSet) -> f64 {
    debug_assert_eq!(weights.len(), basis.kernels());
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, c) in weights.iter().zip(basis.grid.kernel_centers()) {
        let d = phase - c;
        let psi = (-0.5 * basis.width * d * d).exp();
        num += psi * w;
        den += psi;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn centers_match_midpoint_formula() {
        assert_eq!(kernel_centers(1).unwrap(), vec![PI]);
        assert_eq!(kernel_centers(2).unwrap(), vec![PI / 2.0, 3.0 * PI / 2.0]);
        let c = kernel_centers(10).unwrap();
        assert_relative_eq!(c[0], 0.314_159_265_358_979_3, epsilon = 1e-15);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c.iter().all(|&x| x > 0.0 && x < TAU));
    }

    #[test]
    fn zero_kernels_rejected() {
        assert!(matches!(kernel_centers(0), Err(AanError::InvalidConfig(_))));
        assert!(PhaseGrid::new(3, 0).is_err());
    }

    #[test]
    fn basis_values() {
        let basis = BasisSet::new(5.0, PhaseGrid::new(10, 10).unwrap()).unwrap();
        let c = basis.grid().kernel_centers()[3];
        assert_eq!(basis.eval(c)[3], 1.0);
        let v = basis.eval(c + 1.0)[3];
        assert_relative_eq!(v, 0.082_084_998_623_898_8, epsilon = 1e-12);

        let flat = BasisSet::new(1e-14, PhaseGrid::new(4, 4).unwrap()).unwrap();
        assert!(flat.eval(0.3).iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(BasisSet::new(0.0, PhaseGrid::new(4, 4).unwrap()).is_err());
    }

    #[test]
    fn landscape_examples() {
        let basis = BasisSet::new(5.0, PhaseGrid::new(10, 10).unwrap()).unwrap();
        let constant = ImpedancePolicy::new(vec![0.3; 10], 10.0).unwrap();
        let zero = ImpedancePolicy::flat(10, 10.0).unwrap();
        for phase in [0.0, 1.0, 3.3, 6.2] {
            assert_relative_eq!(constant.landscape(phase, &basis).raw, 0.3, epsilon = 1e-12);
            assert_eq!(zero.landscape(phase, &basis).raw, 0.0);
        }

        let basis2 = BasisSet::new(5.0, PhaseGrid::new(2, 2).unwrap()).unwrap();
        let two = ImpedancePolicy::new(vec![1.0, 0.0], 10.0).unwrap();
        let phi1 = basis2.grid().kernel_centers()[0];
        let expected = 1.0 / (1.0 + (-2.5 * PI * PI).exp());
        let got = two.landscape(phi1, &basis2).raw;
        assert_relative_eq!(got, expected, epsilon = 1e-15);
        assert!((got - 1.0).abs() < 1e-10);
    }

    #[test]
    fn clamp_bounds_actuated_value() {
        let basis = BasisSet::new(5.0, PhaseGrid::new(3, 3).unwrap()).unwrap();
        let neg = ImpedancePolicy::new(vec![-1.0; 3], 2.0).unwrap();
        let big = ImpedancePolicy::new(vec![50.0; 3], 2.0).unwrap();
        assert_eq!(neg.landscape(1.0, &basis).clamped, 0.0);
        assert_eq!(big.landscape(1.0, &basis).clamped, 2.0);
        assert!(ImpedancePolicy::new(vec![0.0], 0.0).is_err());
        assert!(ImpedancePolicy::new(vec![], 1.0).is_err());
    }

    #[test]
    fn segment_lookup() {
        assert_eq!(segment_of(0.01, 10).unwrap(), 1);
        assert_eq!(segment_of(TAU - 1e-9, 10).unwrap(), 10);
        assert_eq!(segment_of(PI, 10).unwrap(), 6);
        assert_eq!(segment_of(0.0, 10).unwrap(), 1);
        assert!(matches!(segment_of(TAU, 10), Err(AanError::PhaseDomain { .. })));
        assert!(segment_of(-1e-12, 10).is_err());
        assert!(segment_of(f64::NAN, 10).is_err());
    }

    #[test]
    fn segment_midpoints_map_home() {
        for n in 1..40 {
            let grid = PhaseGrid::new(1, n).unwrap();
            for (i, &c) in grid.instant_centers().iter().enumerate() {
                assert_eq!(segment_of(c, n).unwrap(), i + 1);
            }
        }
    }
}
