//! Session-level summary statistics, computed from the stride log alone.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::log::StrideRow;
use crate::error::{AanError, Result};
use crate::phase::kernel_centers;
use crate::supervisor::{LearningMode, StrideKind};

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, se, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub name: String,
    /// `aan` or `transparent`.
    pub kind: String,
    pub strides: usize,
    /// Strides left after dropping the leading `skip_fraction`.
    pub analyzed_strides: usize,
    pub rms_full: Option<MeanSe>,
    pub rms_masked: Option<MeanSe>,
    /// Share of the session's strides spent in intervention mode, in percent.
    pub intervention_on_time: Option<f64>,
    /// Mode changes between consecutive strides within the session.
    pub mode_switches: Option<usize>,
    /// Mean clamped `g` over the swing-half kernels during intervention strides.
    pub swing_impedance_mean: Option<f64>,
    /// Per-kernel mean clamped `g` during intervention strides.
    pub intervention_impedance: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub sessions: Vec<SessionMetrics>,
    /// Least-squares slope of `swing_impedance_mean` over the adaptive
    /// sessions (deg⁻² per session).
    pub impedance_slope: Option<f64>,
    /// Least-squares slope of `intervention_on_time` over the adaptive
    /// sessions (% per session).
    pub on_time_slope: Option<f64>,
}

impl SummaryMetrics {
    pub fn session(&self, name: &str) -> Option<&SessionMetrics> {
        self.sessions.iter().find(|s| s.name == name)
    }
}

/// Ordinary least-squares slope of `(x, y)` pairs; `None` for fewer than two
/// distinct abscissae.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Summary of a stride log. Sessions are reported in order of first
/// appearance.
pub fn compute_metrics(rows: &[StrideRow], skip_fraction: f64) -> Result<SummaryMetrics> {
    if rows.is_empty() {
        return Err(AanError::Format("stride log has no rows".into()));
    }
    let kernels = rows[0].g_at_kernels.len();
    let swing: Vec<usize> = if kernels == 0 {
        Vec::new()
    } else {
        kernel_centers(kernels)?
            .iter()
            .enumerate()
            .filter(|(_, &c)| c >= PI)
            .map(|(i, _)| i)
            .collect()
    };

    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.session.as_str()) {
            order.push(&r.session);
        }
    }

    let mut sessions = Vec::with_capacity(order.len());
    for name in order {
        let s: Vec<&StrideRow> = rows.iter().filter(|r| r.session == name).collect();
        let adaptive = s.iter().any(|r| r.kind != StrideKind::Transparent);
        let skip = (s.len() as f64 * skip_fraction).floor() as usize;
        let analyzed = &s[skip.min(s.len())..];
        let full: Vec<f64> = analyzed.iter().map(|r| r.rms_full).collect();
        let masked: Vec<f64> = analyzed.iter().map(|r| r.rms_masked).collect();

        let (on_time, switches, swing_mean, per_kernel) = if adaptive {
            let intervention: Vec<&&StrideRow> = s
                .iter()
                .filter(|r| r.mode == Some(LearningMode::Intervention))
                .collect();
            let on_time = 100.0 * intervention.len() as f64 / s.len() as f64;
            let switches = s.windows(2).filter(|w| w[0].mode != w[1].mode).count();
            let per_kernel = if intervention.is_empty() {
                None
            } else {
                Some(
                    (0..kernels)
                        .map(|i| {
                            intervention.iter().map(|r| r.g_at_kernels[i]).sum::<f64>()
                                / intervention.len() as f64
                        })
                        .collect::<Vec<f64>>(),
                )
            };
            let swing_mean = per_kernel
                .as_ref()
                .filter(|_| !swing.is_empty())
                .map(|g| swing.iter().map(|&i| g[i]).sum::<f64>() / swing.len() as f64);
            (Some(on_time), Some(switches), swing_mean, per_kernel)
        } else {
            (None, None, None, None)
        };

        sessions.push(SessionMetrics {
            name: name.to_string(),
            kind: if adaptive { "aan" } else { "transparent" }.to_string(),
            strides: s.len(),
            analyzed_strides: analyzed.len(),
            rms_full: MeanSe::of(&full),
            rms_masked: MeanSe::of(&masked),
            intervention_on_time: on_time,
            mode_switches: switches,
            swing_impedance_mean: swing_mean,
            intervention_impedance: per_kernel,
        });
    }

    let adaptive: Vec<&SessionMetrics> = sessions.iter().filter(|s| s.kind == "aan").collect();
    let on_time_points: Vec<(f64, f64)> = adaptive
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.intervention_on_time.map(|y| ((i + 1) as f64, y)))
        .collect();
    let impedance_points: Vec<(f64, f64)> = adaptive
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.swing_impedance_mean.map(|y| ((i + 1) as f64, y)))
        .collect();

    Ok(SummaryMetrics {
        impedance_slope: ols_slope(&impedance_points),
        on_time_slope: ols_slope(&on_time_points),
        sessions,
    })
}
