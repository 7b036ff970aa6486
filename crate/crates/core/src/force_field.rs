//! Deadbanded, saturating assistive torque law.
//!
//! Angles and errors are in degrees, torque in N·m and the impedance `g` in
//! deg⁻², so `g·Δθ²` is dimensionless.

use serde::{Deserialize, Serialize};

use crate::error::{AanError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceFieldConfig {
    /// Torque ceiling `τ_max` (N·m).
    pub torque_max: f64,
    /// Deadband half-width `θ_db` (deg).
    pub deadband: f64,
}

impl Default for ForceFieldConfig {
    fn default() -> Self {
        Self {
            torque_max: 5.0,
            deadband: 1.0,
        }
    }
}

impl ForceFieldConfig {
    pub fn new(torque_max: f64, deadband: f64) -> Result<Self> {
        let cfg = Self {
            torque_max,
            deadband,
        };
        let v = cfg.violations();
        if v.is_empty() {
            Ok(cfg)
        } else {
            Err(AanError::InvalidConfig(v.join("; ")))
        }
    }

    pub(crate) fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.torque_max > 0.0 && self.torque_max.is_finite()) {
            v.push(format!(
                "force_field.torque_max must be > 0, got {}",
                self.torque_max
            ));
        }
        if !(self.deadband >= 0.0 && self.deadband.is_finite()) {
            v.push(format!(
                "force_field.deadband must be ≥ 0, got {}",
                self.deadband
            ));
        }
        v
    }
}

/// Tracking error before and after the deadband.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    /// `θ_d − θ_m`.
    pub raw: f64,
    /// Error with `θ_db` shaved off, sign preserved.
    pub deadbanded: f64,
}

pub fn deadband_error(desired: f64, measured: f64, deadband: f64) -> TrackingError {
    debug_assert!(deadband >= 0.0);
    let raw = desired - measured;
    let deadbanded = if raw.abs() >= deadband {
        raw.signum() * (raw.abs() - deadband)
    } else {
        0.0
    };
    TrackingError { raw, deadbanded }
}

/// Restoring torque `sign(Δθ)·τ_max·(1 − e^{−g·Δθ²})`.
///
/// # Panics
///
/// If `g` is negative or NaN. Landscape values must be clamped before they
/// reach the actuator.
pub fn assist_torque(err: &TrackingError, g: f64, cfg: &ForceFieldConfig) -> f64 {
    assert!(g >= 0.0, "impedance must be clamped to ≥ 0 before actuation, got {g}");
    let d = err.deadbanded;
    if d == 0.0 {
        return 0.0;
    }
    let magnitude = -cfg.torque_max * (-g * d * d).exp_m1();
    magnitude.copysign(d)
}
