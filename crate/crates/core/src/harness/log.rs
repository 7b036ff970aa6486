//! Per-stride CSV log.
//!
//! Column order is fixed; floats carry 9 significant digits. Absent values
//! (epoch index of a transparent stride, `J` outside eval strides, …) are
//! written as empty fields.

use std::fmt::Write as _;

use crate::error::{AanError, Result};
use crate::supervisor::{LearningMode, StrideKind};

#[derive(Debug, Clone, PartialEq)]
pub struct StrideRow {
    pub run_id: String,
    pub session: String,
    pub stride_idx: u64,
    pub epoch_idx: Option<u64>,
    pub kind: StrideKind,
    pub mode: Option<LearningMode>,
    pub sigma: Option<f64>,
    pub epoch_cost: Option<f64>,
    pub rms_full: f64,
    pub rms_masked: f64,
    pub g_at_kernels: Vec<f64>,
    pub seg_rms_err: Vec<f64>,
}

const FIXED_COLUMNS: [&str; 10] = [
    "run_id",
    "session",
    "stride_idx",
    "epoch_idx",
    "stride_kind",
    "mode",
    "sigma_eff",
    "J_epoch",
    "rms_raw_error_full",
    "rms_raw_error_masked",
];

pub fn header(kernels: usize, instants: usize) -> String {
    let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend((1..=kernels).map(|i| format!("g_at_phi_{i}")));
    cols.extend((1..=instants).map(|n| format!("seg_rms_err_{n}")));
    cols.join(",")
}

/// `x` with 9 significant digits, in the shortest of plain or scientific form.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("`e` formatting has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed)
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

impl StrideRow {
    pub fn to_csv_line(&self) -> String {
        let mut line = String::new();
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{}",
            self.run_id,
            self.session,
            self.stride_idx,
            opt(self.epoch_idx, |e| e.to_string()),
            self.kind.as_str(),
            self.mode.map_or("none", |m| m.as_str()),
            opt(self.sigma, format_sig9),
            opt(self.epoch_cost, format_sig9),
            format_sig9(self.rms_full),
            format_sig9(self.rms_masked),
        );
        for v in self.g_at_kernels.iter().chain(&self.seg_rms_err) {
            line.push(',');
            line.push_str(&format_sig9(*v));
        }
        line
    }
}

pub fn write_csv(rows: &[StrideRow], kernels: usize, instants: usize) -> String {
    let mut out = header(kernels, instants);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Parses a stride log, inferring `P` and `N` from the header.
pub fn parse_csv(text: &str) -> Result<(Vec<StrideRow>, usize, usize)> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| AanError::Format("stride CSV is empty".into()))?;
    let cols: Vec<&str> = head.split(',').collect();
    if cols.len() < FIXED_COLUMNS.len() || cols[..FIXED_COLUMNS.len()] != FIXED_COLUMNS {
        return Err(AanError::Format("stride CSV header does not start with the fixed columns".into()));
    }
    let kernels = cols.iter().filter(|c| c.starts_with("g_at_phi_")).count();
    let instants = cols.iter().filter(|c| c.starts_with("seg_rms_err_")).count();
    if head != header(kernels, instants) {
        return Err(AanError::Format("stride CSV header columns are out of order".into()));
    }

    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(AanError::Format(format!(
                "line {lineno}: {} fields, header has {}",
                f.len(),
                cols.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| AanError::Format(format!("line {lineno}: `{s}` is not a number")))
        };
        let opt_num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        let int = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| AanError::Format(format!("line {lineno}: `{s}` is not an index")))
        };
        let kind = match f[4] {
            "explore" => StrideKind::Explore,
            "eval" => StrideKind::Eval,
            "transparent" => StrideKind::Transparent,
            other => return Err(AanError::Format(format!("line {lineno}: unknown stride kind `{other}`"))),
        };
        let mode = match f[5] {
            "intervention" => Some(LearningMode::Intervention),
            "compliance" => Some(LearningMode::Compliance),
            "none" => None,
            other => return Err(AanError::Format(format!("line {lineno}: unknown mode `{other}`"))),
        };
        let fixed = FIXED_COLUMNS.len();
        rows.push(StrideRow {
            run_id: f[0].to_string(),
            session: f[1].to_string(),
            stride_idx: int(f[2])?,
            epoch_idx: if f[3].is_empty() { None } else { Some(int(f[3])?) },
            kind,
            mode,
            sigma: opt_num(f[6])?,
            epoch_cost: opt_num(f[7])?,
            rms_full: num(f[8])?,
            rms_masked: num(f[9])?,
            g_at_kernels: f[fixed..fixed + kernels].iter().map(|s| num(s)).collect::<Result<_>>()?,
            seg_rms_err: f[fixed + kernels..].iter().map(|s| num(s)).collect::<Result<_>>()?,
        });
    }
    Ok((rows, kernels, instants))
}
